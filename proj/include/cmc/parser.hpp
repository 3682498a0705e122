#pragma once

#include <cctype>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmc/syntax.hpp"

namespace cmc {

/// A parsed model file: constant definitions, optional location tree, optional
/// declared input universe, and the system under study.
struct SourceFile {
  Environment env;
  std::optional<Process> system;
};

namespace detail {

struct Token {
  enum class Kind { Ident, Zero, Symbol, End };
  Kind kind = Kind::End;
  std::string text;
  int line = 1;
  int column = 1;
};

inline const std::set<std::string>& keywords() {
  static const std::set<std::string> k{"in",  "out",  "ploc", "sloc", "eps", "tau",    "new",    "port",
                                       "if",  "then", "else", "nil",  "unit", "system", "tree", "universe"};
  return k;
}

inline std::vector<Token> tokenize(const std::string& src) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.column = col;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_' || src[j] == '\''))
        ++j;
      t.kind = Token::Kind::Ident;
      t.text = src.substr(i, j - i);
      advance(j - i);
    } else if (c == '0') {
      t.kind = Token::Kind::Zero;
      t.text = "0";
      advance(1);
    } else if (src.compare(i, 2, ":=") == 0) {
      t.kind = Token::Kind::Symbol;
      t.text = ":=";
      advance(2);
    } else if (std::string("()[]{},.|+!?:=;~/").find(c) != std::string::npos) {
      t.kind = Token::Kind::Symbol;
      t.text = std::string(1, c);
      advance(1);
    } else {
      throw SyntaxError(std::string("unexpected character '") + c + "'", line, col, {});
    }
    out.push_back(t);
  }
  Token end;
  end.line = line;
  end.column = col;
  out.push_back(end);
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& src) : toks_(tokenize(src)) {}

  Process process_only() {
    Process p = proc();
    expect_end();
    return p;
  }

  Value value_only() {
    Value v = value();
    expect_end();
    return v;
  }

  SourceFile source() {
    SourceFile f;
    while (peek().kind != Token::Kind::End) {
      if (is_kw("system")) {
        take();
        if (f.system) fail("duplicate system declaration", {});
        f.system = proc();
        accept(";");
      } else if (is_kw("tree")) {
        take();
        if (f.env.tree) fail("duplicate tree declaration", {});
        LocationTree tree;
        tree_node(tree, std::nullopt);
        f.env.tree = tree;
      } else if (is_kw("universe")) {
        take();
        f.env.universe.push_back(value());
        while (accept(",")) f.env.universe.push_back(value());
      } else if (peek().kind == Token::Kind::Ident && !keywords().count(peek().text)) {
        Token name = take();
        Definition d;
        if (accept("(")) {
          if (!is_sym(")")) {
            d.params.push_back(ident("parameter"));
            while (accept(",")) d.params.push_back(ident("parameter"));
          }
          expect(")");
        }
        std::set<std::string> seen(d.params.begin(), d.params.end());
        if (seen.size() != d.params.size()) fail("repeated parameter in definition of " + name.text, {});
        expect(":=");
        scope_ = d.params;
        d.body = proc();
        scope_.clear();
        accept(";");
        if (f.env.defs.count(name.text))
          throw DefinitionError("duplicate definition of " + name.text + " at line " + std::to_string(name.line));
        f.env.defs[name.text] = std::move(d);
      } else {
        fail("unexpected " + describe(peek()), {"definition", "system", "tree", "universe"});
      }
    }
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<std::string> scope_;

  const Token& peek(std::size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
  Token take() {
    Token t = peek();
    if (pos_ < toks_.size() - 1) ++pos_;
    return t;
  }
  bool is_sym(const std::string& s, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Symbol && peek(k).text == s;
  }
  bool is_kw(const std::string& s, std::size_t k = 0) const {
    return peek(k).kind == Token::Kind::Ident && peek(k).text == s;
  }
  bool accept(const std::string& s) {
    if (!is_sym(s)) return false;
    take();
    return true;
  }
  static std::string describe(const Token& t) {
    if (t.kind == Token::Kind::End) return "end of input";
    return "'" + t.text + "'";
  }
  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected) const {
    throw SyntaxError(msg, peek().line, peek().column, std::move(expected));
  }
  void expect(const std::string& s) {
    if (!accept(s)) fail("unexpected " + describe(peek()), {"'" + s + "'"});
  }
  void expect_kw(const std::string& s) {
    if (!is_kw(s)) fail("unexpected " + describe(peek()), {"'" + s + "'"});
    take();
  }
  void expect_end() {
    if (peek().kind != Token::Kind::End) fail("unexpected " + describe(peek()), {"end of input"});
  }
  std::string ident(const std::string& what) {
    if (peek().kind != Token::Kind::Ident || keywords().count(peek().text))
      fail("unexpected " + describe(peek()), {what});
    return take().text;
  }
  bool bound(const std::string& x) const {
    for (const auto& v : scope_)
      if (v == x) return true;
    return false;
  }

  struct ScopeGuard {
    std::vector<std::string>& scope;
    std::size_t size;
    ~ScopeGuard() { scope.resize(size); }
  };

  // ----- names -------------------------------------------------------------

  PortSet ports() {
    PortSet s = PortSet::of({});
    expect("{");
    if (!is_sym("}")) {
      do {
        bool co = accept("~");
        s.members.insert(PortName{ident("port"), co});
      } while (accept(","));
    }
    expect("}");
    return s;
  }

  AmbientName ambient_name() {
    std::string base = ident("ambient name");
    if (is_sym("{")) return AmbientName(base, ports());
    return AmbientName(base);
  }

  void tree_node(LocationTree& tree, const std::optional<AmbientName>& parent) {
    AmbientName n = ambient_name();
    tree.add(n, parent);
    if (accept("(")) {
      tree_node(tree, n);
      while (accept(",")) tree_node(tree, n);
      expect(")");
    }
  }

  // ----- values ------------------------------------------------------------

  Capability move_cap() {
    bool in = is_kw("in");
    take();
    if (peek().kind == Token::Kind::Ident && bound(peek().text) && !is_sym("{", 1)) {
      std::string x = take().text;
      return in ? Capability::in_var(x) : Capability::out_var(x);
    }
    AmbientName n = ambient_name();
    return in ? Capability::in(n) : Capability::out(n);
  }

  Value path_value() {
    std::vector<Capability> caps;
    for (;;) {
      if (is_kw("eps")) {
        take();
      } else {
        caps.push_back(move_cap());
      }
      if (is_sym(".") && (is_kw("in", 1) || is_kw("out", 1) || is_kw("eps", 1))) {
        take();
        continue;
      }
      break;
    }
    return Value::of_path(caps);
  }

  Value value() {
    Value head = value_primary();
    if (accept(":")) return Value::cons(head, value());
    return head;
  }

  std::vector<Value> value_list(const std::string& close) {
    std::vector<Value> xs;
    if (is_sym(close)) return xs;
    xs.push_back(value());
    while (accept(",")) xs.push_back(value());
    return xs;
  }

  Value value_primary() {
    if (is_kw("nil")) {
      take();
      return Value::nil();
    }
    if (is_kw("unit")) {
      take();
      return Value::unit();
    }
    if (is_kw("in") || is_kw("out") || is_kw("eps")) return path_value();
    if (accept("(")) {
      auto xs = value_list(")");
      expect(")");
      if (xs.empty()) return Value::unit();
      if (xs.size() == 1) return xs[0];
      return Value::tuple(xs);
    }
    if (peek().kind != Token::Kind::Ident || keywords().count(peek().text))
      fail("unexpected " + describe(peek()), {"value"});
    if (is_sym("(", 1)) {
      Token fn = take();
      take();
      auto args = value_list(")");
      expect(")");
      static const std::set<std::string> builtins{"path", "hd", "tl"};
      if (!builtins.count(fn.text))
        throw SyntaxError("unknown function " + fn.text, fn.line, fn.column, {"path", "hd", "tl"});
      return Value::call(fn.text, args);
    }
    if (bound(peek().text) && !is_sym("{", 1)) return Value::var(take().text);
    return Value::of_name(ambient_name());
  }

  // ----- processes ---------------------------------------------------------

  Process proc() {
    std::vector<Process> parts{par_proc()};
    while (accept("+")) parts.push_back(par_proc());
    return sum(parts);
  }

  Process par_proc() {
    std::vector<Process> parts{unit_proc()};
    while (accept("|")) parts.push_back(unit_proc());
    return par(parts);
  }

  Process continuation() {
    if (accept(".")) return unit_proc();
    return zero();
  }

  Process bound_continuation(const std::vector<std::string>& vars) {
    ScopeGuard guard{scope_, scope_.size()};
    scope_.insert(scope_.end(), vars.begin(), vars.end());
    return continuation();
  }

  RelabelMap relabel_map() {
    RelabelMap f;
    expect("[");
    do {
      std::string to = ident("port");
      expect("/");
      std::string from = ident("port");
      if (f.entries.count(from)) fail("port relabelled twice: " + from, {});
      f.entries[from] = to;
    } while (accept(","));
    expect("]");
    return f;
  }

  Process postfix(Process p) {
    while (is_sym("[")) p = relabel(p, relabel_map());
    return p;
  }

  Process unit_proc() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Zero) {
      take();
      return zero();
    }
    if (accept("(")) {
      Process p = proc();
      expect(")");
      return postfix(p);
    }
    if (t.kind != Token::Kind::Ident) fail("unexpected " + describe(t), {"process"});

    if (is_kw("in") || is_kw("out")) {
      Capability c = move_cap();
      return prefix(c, continuation());
    }
    if (is_kw("ploc") || is_kw("sloc")) {
      bool ploc = is_kw("ploc");
      take();
      expect("(");
      std::string x = ident("variable");
      expect(")");
      return prefix(ploc ? Capability::ploc(x) : Capability::sloc(x), bound_continuation({x}));
    }
    if (is_kw("eps")) {
      take();
      return prefix(Capability::epsilon(), continuation());
    }
    if (is_kw("tau")) {
      take();
      return tau(continuation());
    }
    if (is_kw("new")) {
      take();
      if (is_kw("port")) {
        take();
        std::string a = ident("port");
        expect_kw("in");
        return restrict_port(a, proc());
      }
      AmbientName n = ambient_name();
      expect_kw("in");
      return restrict(n, proc());
    }
    if (is_kw("if")) {
      take();
      Value lhs = value();
      expect("=");
      Value rhs = value();
      expect_kw("then");
      Process then_branch = proc();
      expect_kw("else");
      return cond(lhs, rhs, then_branch, proc());
    }
    if (keywords().count(t.text)) fail("unexpected " + describe(t), {"process"});

    if (is_sym("?", 1)) {
      std::string port = take().text;
      take();
      expect("(");
      std::vector<std::string> vars;
      if (!is_sym(")")) {
        vars.push_back(ident("variable"));
        while (accept(",")) vars.push_back(ident("variable"));
      }
      expect(")");
      return input(port, vars, bound_continuation(vars));
    }
    if (is_sym("!", 1)) {
      std::string port = take().text;
      take();
      expect("(");
      auto xs = value_list(")");
      expect(")");
      Value v = xs.empty() ? Value::unit() : xs.size() == 1 ? xs[0] : Value::tuple(xs);
      return output(port, v, continuation());
    }
    if (is_sym("[", 1) || is_sym("{", 1)) {
      AmbientName n = ambient_name();
      expect("[");
      Process body = is_sym("]") ? zero() : proc();
      expect("]");
      return postfix(amb(n, body));
    }
    if (bound(t.text) && !is_sym("(", 1)) {
      std::string x = take().text;
      return prefix(Capability::variable(x), continuation());
    }
    std::string name = take().text;
    std::vector<Value> args;
    if (accept("(")) {
      args = value_list(")");
      expect(")");
    }
    return call(name, args);
  }
};

}  // namespace detail

/// Checks that every constant call in `p` names a definition of matching arity.
inline void check_calls(const Process& p, const Environment& env) {
  if (p->kind == ProcKind::Call) env.lookup(p->ident, p->values.size());
  for (const auto& k : p->kids) check_calls(k, env);
}

inline Process parse_process(const std::string& text) { return detail::Parser(text).process_only(); }

inline Value parse_value(const std::string& text) { return detail::Parser(text).value_only(); }

/// Parses a model file and validates its constant calls.
inline SourceFile parse_source(const std::string& text) {
  SourceFile f = detail::Parser(text).source();
  for (const auto& [name, d] : f.env.defs) check_calls(d.body, f.env);
  if (f.system) check_calls(*f.system, f.env);
  return f;
}

inline SourceFile load_source(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_source(ss.str());
}

}  // namespace cmc
