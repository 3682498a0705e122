#pragma once

#include <string>

#include "cmc/syntax.hpp"

namespace cmc {

inline std::string to_string(const Capability& c) {
  using K = Capability::Kind;
  auto target = [&] { return c.var.empty() ? to_string(c.target) : c.var; };
  switch (c.kind) {
    case K::In:
      return "in " + target();
    case K::Out:
      return "out " + target();
    case K::Ploc:
      return "ploc(" + c.var + ")";
    case K::Sloc:
      return "sloc(" + c.var + ")";
    case K::Epsilon:
      return "eps";
    case K::Var:
      return c.var;
    case K::Path: {
      if (c.path.empty()) return "eps";
      std::string out;
      for (std::size_t i = 0; i < c.path.size(); ++i) out += (i ? "." : "") + to_string(c.path[i]);
      return out;
    }
  }
  return "?";
}

inline std::string to_string(const Value& v) {
  using K = Value::Kind;
  auto joined = [](const std::vector<Value>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + to_string(xs[i]);
    return out;
  };
  switch (v.kind) {
    case K::Name:
      return to_string(v.name);
    case K::Path:
      return to_string(Capability::path_of(v.path));
    case K::Tuple:
      return "(" + joined(v.items) + ")";
    case K::Cons: {
      const Value& head = v.items[0];
      std::string h = to_string(head);
      if (head.kind == K::Cons || head.kind == K::Path) h = "(" + h + ")";
      return h + ":" + to_string(v.items[1]);
    }
    case K::Nil:
      return "nil";
    case K::Unit:
      return "unit";
    case K::Var:
      return v.ident;
    case K::Call:
      return v.ident + "(" + joined(v.items) + ")";
  }
  return "?";
}

inline std::string to_string(const RelabelMap& f) {
  std::string out = "[";
  bool first = true;
  for (const auto& [from, to] : f.entries) {
    out += (first ? "" : ", ") + to + "/" + from;
    first = false;
  }
  return out + "]";
}

namespace detail {

// Positions: 0 = anywhere (body extends right), 1 = operand of +, 2 = operand of |, 3 = after a prefix.
inline std::string print(const Process& p, int pos);

inline std::string print_continuation(const Process& body) {
  if (body->kind == ProcKind::Zero) return "";
  return "." + print(body, 3);
}

inline std::string print(const Process& p, int pos) {
  auto wrap = [](const std::string& s) { return "(" + s + ")"; };
  switch (p->kind) {
    case ProcKind::Zero:
      return "0";
    case ProcKind::Call: {
      if (p->values.empty()) return p->ident;
      std::string out = p->ident + "(";
      for (std::size_t i = 0; i < p->values.size(); ++i) out += (i ? ", " : "") + to_string(p->values[i]);
      return out + ")";
    }
    case ProcKind::Cap:
      return to_string(p->cap) + print_continuation(p->body());
    case ProcKind::Input: {
      std::string out = p->ident + "?(";
      for (std::size_t i = 0; i < p->vars.size(); ++i) out += (i ? ", " : "") + p->vars[i];
      return out + ")" + print_continuation(p->body());
    }
    case ProcKind::Output: {
      const Value& v = p->values[0];
      std::string arg = v.kind == Value::Kind::Unit ? "" : to_string(v);
      if (v.kind == Value::Kind::Tuple) arg = arg.substr(1, arg.size() - 2);
      return p->ident + "!(" + arg + ")" + print_continuation(p->body());
    }
    case ProcKind::Tau:
      return "tau" + print_continuation(p->body());
    case ProcKind::Amb: {
      std::string inner = p->body()->kind == ProcKind::Zero ? "" : print(p->body(), 0);
      return to_string(p->amb) + "[" + inner + "]";
    }
    case ProcKind::Sum:
    case ProcKind::Par: {
      const bool is_sum = p->kind == ProcKind::Sum;
      std::string out;
      for (std::size_t i = 0; i < p->kids.size(); ++i)
        out += (i ? (is_sum ? " + " : " | ") : "") + print(p->kids[i], is_sum ? 1 : 2);
      const int own = is_sum ? 1 : 2;
      return pos >= own ? wrap(out) : out;
    }
    case ProcKind::ResAmb: {
      std::string out = "new " + to_string(p->amb) + " in " + print(p->body(), 0);
      return pos == 0 ? out : wrap(out);
    }
    case ProcKind::ResPort: {
      std::string out = "new port " + p->ident + " in " + print(p->body(), 0);
      return pos == 0 ? out : wrap(out);
    }
    case ProcKind::Relabel:
      return wrap(print(p->body(), 0)) + to_string(p->relabel);
    case ProcKind::Cond: {
      std::string out = "if " + to_string(p->values[0]) + " = " + to_string(p->values[1]) + " then " +
                        print(p->kids[0], 0) + " else " + print(p->kids[1], 0);
      return pos == 0 ? out : wrap(out);
    }
  }
  return "?";
}

}  // namespace detail

/// Concrete syntax accepted back by the parser.
inline std::string to_string(const Process& p) { return detail::print(p, 0); }

}  // namespace cmc
