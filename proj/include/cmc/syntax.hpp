#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cmc/error.hpp"
#include "cmc/names.hpp"

namespace cmc {

/// Prefix capabilities. `In`/`Out` name their target either literally or through a
/// variable (`var` non-empty). `Path` only appears transiently; normalization expands it.
struct Capability {
  enum class Kind { In, Out, Ploc, Sloc, Epsilon, Var, Path };

  Kind kind = Kind::Epsilon;
  AmbientName target;
  std::string var;
  std::vector<Capability> path;

  static Capability in(AmbientName n) { return {Kind::In, std::move(n), {}, {}}; }
  static Capability out(AmbientName n) { return {Kind::Out, std::move(n), {}, {}}; }
  static Capability in_var(std::string x) { return {Kind::In, {}, std::move(x), {}}; }
  static Capability out_var(std::string x) { return {Kind::Out, {}, std::move(x), {}}; }
  static Capability ploc(std::string x) { return {Kind::Ploc, {}, std::move(x), {}}; }
  static Capability sloc(std::string x) { return {Kind::Sloc, {}, std::move(x), {}}; }
  static Capability epsilon() { return {}; }
  static Capability variable(std::string x) { return {Kind::Var, {}, std::move(x), {}}; }
  static Capability path_of(std::vector<Capability> caps) {
    return {Kind::Path, {}, {}, std::move(caps)};
  }

  bool is_move() const { return kind == Kind::In || kind == Kind::Out; }
  bool has_var_target() const { return is_move() && !var.empty(); }

  bool operator==(const Capability&) const = default;
  bool operator<(const Capability& o) const;
};

/// Transmissible values plus the expression forms (variables, builtin calls) that
/// evaluate to them. A value is closed when it has no Var and no Call.
struct Value {
  enum class Kind { Name, Path, Tuple, Cons, Nil, Unit, Var, Call };

  Kind kind = Kind::Nil;
  AmbientName name;
  std::vector<Capability> path;
  std::vector<Value> items;
  std::string ident;

  static Value of_name(AmbientName n) {
    Value v;
    v.kind = Kind::Name;
    v.name = std::move(n);
    return v;
  }
  static Value of_path(std::vector<Capability> caps) {
    Value v;
    v.kind = Kind::Path;
    v.path = std::move(caps);
    return v;
  }
  static Value tuple(std::vector<Value> items) {
    Value v;
    v.kind = Kind::Tuple;
    v.items = std::move(items);
    return v;
  }
  static Value cons(Value head, Value tail) {
    Value v;
    v.kind = Kind::Cons;
    v.items = {std::move(head), std::move(tail)};
    return v;
  }
  static Value nil() { return {}; }
  static Value unit() {
    Value v;
    v.kind = Kind::Unit;
    return v;
  }
  static Value var(std::string x) {
    Value v;
    v.kind = Kind::Var;
    v.ident = std::move(x);
    return v;
  }
  static Value call(std::string fn, std::vector<Value> args) {
    Value v;
    v.kind = Kind::Call;
    v.ident = std::move(fn);
    v.items = std::move(args);
    return v;
  }
  static Value list(const std::vector<Value>& elems) {
    Value out = nil();
    for (auto it = elems.rbegin(); it != elems.rend(); ++it) out = cons(*it, out);
    return out;
  }

  bool operator==(const Value&) const = default;
  bool operator<(const Value& o) const;
};

inline bool Capability::operator<(const Capability& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (target != o.target) return target < o.target;
  if (var != o.var) return var < o.var;
  return std::lexicographical_compare(path.begin(), path.end(), o.path.begin(), o.path.end());
}

inline bool Value::operator<(const Value& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (name != o.name) return name < o.name;
  if (path != o.path)
    return std::lexicographical_compare(path.begin(), path.end(), o.path.begin(), o.path.end());
  if (items != o.items)
    return std::lexicographical_compare(items.begin(), items.end(), o.items.begin(), o.items.end());
  return ident < o.ident;
}

/// Relabelling function on port bases; identity outside its domain.
struct RelabelMap {
  std::map<std::string, std::string> entries;

  std::string apply(const std::string& base) const {
    auto it = entries.find(base);
    return it == entries.end() ? base : it->second;
  }
  bool is_identity() const {
    for (const auto& [from, to] : entries)
      if (from != to) return false;
    return true;
  }
  // (this ∘ inner): first inner, then this.
  RelabelMap after(const RelabelMap& inner) const {
    RelabelMap out;
    for (const auto& [from, to] : inner.entries) out.entries[from] = apply(to);
    for (const auto& [from, to] : entries)
      if (!inner.entries.count(from)) out.entries[from] = to;
    for (auto it = out.entries.begin(); it != out.entries.end();)
      it = it->first == it->second ? out.entries.erase(it) : std::next(it);
    return out;
  }

  auto operator<=>(const RelabelMap&) const = default;
  bool operator==(const RelabelMap&) const = default;
};

enum class ProcKind { Zero, Call, Cap, Input, Output, Tau, Amb, Sum, Par, ResAmb, ResPort, Relabel, Cond };

struct ProcNode;
using Process = std::shared_ptr<const ProcNode>;

/// One node of an immutable process term. Which fields are meaningful depends on `kind`:
///   Call    ident (constant), values (arguments)
///   Cap     cap, kids[0]
///   Input   ident (port), vars (pattern), kids[0]
///   Output  ident (port), values[0], kids[0]
///   Tau     kids[0]
///   Amb     amb, kids[0]
///   Sum/Par kids (at least two, never directly nested in a node of the same kind)
///   ResAmb  amb, kids[0]
///   ResPort ident, kids[0]
///   Relabel relabel, kids[0]
///   Cond    values[0] = values[1] ? kids[0] : kids[1]
struct ProcNode {
  ProcKind kind = ProcKind::Zero;
  std::string ident;
  std::vector<std::string> vars;
  std::vector<Value> values;
  Capability cap;
  AmbientName amb;
  RelabelMap relabel;
  std::vector<Process> kids;

  const Process& body() const { return kids.at(0); }
};

inline Process make_node(ProcNode n) { return std::make_shared<const ProcNode>(std::move(n)); }

inline Process zero() {
  static const Process z = make_node(ProcNode{});
  return z;
}

inline Process call(std::string name, std::vector<Value> args = {}) {
  ProcNode n;
  n.kind = ProcKind::Call;
  n.ident = std::move(name);
  n.values = std::move(args);
  return make_node(std::move(n));
}

inline Process prefix(Capability c, Process p) {
  ProcNode n;
  n.kind = ProcKind::Cap;
  n.cap = std::move(c);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process input(std::string port, std::vector<std::string> vars, Process p) {
  ProcNode n;
  n.kind = ProcKind::Input;
  n.ident = std::move(port);
  n.vars = std::move(vars);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process input(std::string port, std::string var, Process p) {
  return input(std::move(port), std::vector<std::string>{std::move(var)}, std::move(p));
}

inline Process output(std::string port, Value v, Process p) {
  ProcNode n;
  n.kind = ProcKind::Output;
  n.ident = std::move(port);
  n.values = {std::move(v)};
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process tau(Process p) {
  ProcNode n;
  n.kind = ProcKind::Tau;
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process amb(AmbientName name, Process p) {
  ProcNode n;
  n.kind = ProcKind::Amb;
  n.amb = std::move(name);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

namespace detail {
inline Process nary(ProcKind kind, std::vector<Process> parts) {
  std::vector<Process> flat;
  for (auto& p : parts) {
    if (p->kind == kind)
      flat.insert(flat.end(), p->kids.begin(), p->kids.end());
    else
      flat.push_back(std::move(p));
  }
  if (flat.empty()) return zero();
  if (flat.size() == 1) return flat.front();
  ProcNode n;
  n.kind = kind;
  n.kids = std::move(flat);
  return make_node(std::move(n));
}
}  // namespace detail

inline Process par(std::vector<Process> parts) { return detail::nary(ProcKind::Par, std::move(parts)); }
inline Process par(Process a, Process b) { return par(std::vector<Process>{std::move(a), std::move(b)}); }
inline Process sum(std::vector<Process> parts) { return detail::nary(ProcKind::Sum, std::move(parts)); }
inline Process sum(Process a, Process b) { return sum(std::vector<Process>{std::move(a), std::move(b)}); }

inline Process restrict(AmbientName name, Process p) {
  ProcNode n;
  n.kind = ProcKind::ResAmb;
  n.amb = std::move(name);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process restrict_port(std::string base, Process p) {
  ProcNode n;
  n.kind = ProcKind::ResPort;
  n.ident = std::move(base);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process relabel(Process p, RelabelMap f) {
  ProcNode n;
  n.kind = ProcKind::Relabel;
  n.relabel = std::move(f);
  n.kids = {std::move(p)};
  return make_node(std::move(n));
}

inline Process cond(Value lhs, Value rhs, Process then_branch, Process else_branch) {
  ProcNode n;
  n.kind = ProcKind::Cond;
  n.values = {std::move(lhs), std::move(rhs)};
  n.kids = {std::move(then_branch), std::move(else_branch)};
  return make_node(std::move(n));
}

/// Rebuilds a node of the same shape with new children.
inline Process with_kids(const ProcNode& n, std::vector<Process> kids) {
  if (n.kind == ProcKind::Par) return par(std::move(kids));
  if (n.kind == ProcKind::Sum) return sum(std::move(kids));
  ProcNode copy = n;
  copy.kids = std::move(kids);
  return make_node(std::move(copy));
}

/// The containment tree of named locations used by the builtin `path` function.
struct LocationTree {
  AmbientName root;
  std::set<AmbientName> nodes;
  std::map<AmbientName, AmbientName> parent;

  void add(const AmbientName& node, const std::optional<AmbientName>& parent_node) {
    if (nodes.count(node)) throw DefinitionError("location tree: duplicate node " + to_string(node));
    nodes.insert(node);
    if (parent_node)
      parent[node] = *parent_node;
    else
      root = node;
  }
  bool contains(const AmbientName& n) const { return nodes.count(n) > 0; }
};

struct Definition {
  std::vector<std::string> params;
  Process body;
};

/// Constant equations D(x̃) := P, plus the optional location tree and declared input
/// value universe used by the case studies.
struct Environment {
  std::map<std::string, Definition> defs;
  std::optional<LocationTree> tree;
  std::vector<Value> universe;

  const Definition& lookup(const std::string& name, std::size_t arity) const {
    auto it = defs.find(name);
    if (it == defs.end()) throw DefinitionError("unbound constant " + name);
    if (it->second.params.size() != arity)
      throw DefinitionError("arity mismatch for " + name + ": expected " +
                            std::to_string(it->second.params.size()) + ", got " + std::to_string(arity));
    return it->second;
  }
};

}  // namespace cmc
