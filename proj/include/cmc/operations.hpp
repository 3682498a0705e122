#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "cmc/location.hpp"
#include "cmc/syntax.hpp"

namespace cmc {

struct FreeNames {
  std::set<AmbientName> ambients;
  std::set<std::string> ports;

  bool operator==(const FreeNames&) const = default;
};

namespace detail {

struct NameScope {
  std::set<AmbientName> ambients;
  std::set<std::string> ports;
};

inline void note_ports(const PortSet& s, const NameScope& bound, FreeNames& out) {
  if (s.all) return;
  for (const auto& p : s.members)
    if (!bound.ports.count(p.base)) out.ports.insert(p.base);
}

inline void note_name(const AmbientName& n, const NameScope& bound, FreeNames& out) {
  if (!bound.ambients.count(n)) out.ambients.insert(n);
  note_ports(n.ports, bound, out);
}

inline void free_names_cap(const Capability& c, const NameScope& bound, FreeNames& out) {
  if (c.is_move() && c.var.empty()) note_name(c.target, bound, out);
  for (const auto& sub : c.path) free_names_cap(sub, bound, out);
}

inline void free_names_value(const Value& v, const NameScope& bound, FreeNames& out) {
  if (v.kind == Value::Kind::Name) note_name(v.name, bound, out);
  for (const auto& c : v.path) free_names_cap(c, bound, out);
  for (const auto& item : v.items) free_names_value(item, bound, out);
}

inline void free_names_rec(const Process& p, const NameScope& bound, FreeNames& out) {
  for (const auto& v : p->values) free_names_value(v, bound, out);
  switch (p->kind) {
    case ProcKind::Cap:
      free_names_cap(p->cap, bound, out);
      break;
    case ProcKind::Input:
    case ProcKind::Output:
      if (!bound.ports.count(p->ident)) out.ports.insert(p->ident);
      break;
    case ProcKind::Amb:
      note_name(p->amb, bound, out);
      break;
    case ProcKind::ResAmb: {
      note_ports(p->amb.ports, bound, out);
      NameScope inner = bound;
      inner.ambients.insert(p->amb);
      free_names_rec(p->body(), inner, out);
      return;
    }
    case ProcKind::ResPort: {
      NameScope inner = bound;
      inner.ports.insert(p->ident);
      free_names_rec(p->body(), inner, out);
      return;
    }
    case ProcKind::Relabel:
      for (const auto& [from, to] : p->relabel.entries) {
        if (!bound.ports.count(from)) out.ports.insert(from);
        if (!bound.ports.count(to)) out.ports.insert(to);
      }
      break;
    default:
      break;
  }
  for (const auto& k : p->kids) free_names_rec(k, bound, out);
}

}  // namespace detail

/// Ambient names and port bases with a free occurrence in `p`.
inline FreeNames free_names(const Process& p) {
  FreeNames out;
  detail::free_names_rec(p, {}, out);
  return out;
}

inline FreeNames free_names(const Value& v) {
  FreeNames out;
  detail::free_names_value(v, {}, out);
  return out;
}

inline FreeNames free_names(const Capability& c) {
  FreeNames out;
  detail::free_names_cap(c, {}, out);
  return out;
}

namespace detail {

inline void free_vars_cap(const Capability& c, const std::set<std::string>& bound, std::set<std::string>& out) {
  if ((c.kind == Capability::Kind::Var || c.has_var_target()) && !bound.count(c.var)) out.insert(c.var);
  for (const auto& sub : c.path) free_vars_cap(sub, bound, out);
}

inline void free_vars_value(const Value& v, const std::set<std::string>& bound, std::set<std::string>& out) {
  if (v.kind == Value::Kind::Var && !bound.count(v.ident)) out.insert(v.ident);
  for (const auto& c : v.path) free_vars_cap(c, bound, out);
  for (const auto& item : v.items) free_vars_value(item, bound, out);
}

inline void free_vars_rec(const Process& p, const std::set<std::string>& bound, std::set<std::string>& out) {
  for (const auto& v : p->values) free_vars_value(v, bound, out);
  if (p->kind == ProcKind::Input) {
    auto inner = bound;
    inner.insert(p->vars.begin(), p->vars.end());
    free_vars_rec(p->body(), inner, out);
    return;
  }
  if (p->kind == ProcKind::Cap) {
    if (p->cap.kind == Capability::Kind::Ploc || p->cap.kind == Capability::Kind::Sloc) {
      auto inner = bound;
      inner.insert(p->cap.var);
      free_vars_rec(p->body(), inner, out);
      return;
    }
    free_vars_cap(p->cap, bound, out);
  }
  for (const auto& k : p->kids) free_vars_rec(k, bound, out);
}

}  // namespace detail

inline std::set<std::string> free_vars(const Process& p) {
  std::set<std::string> out;
  detail::free_vars_rec(p, {}, out);
  return out;
}

inline std::set<std::string> free_vars(const Value& v) {
  std::set<std::string> out;
  detail::free_vars_value(v, {}, out);
  return out;
}

inline bool is_closed(const Value& v) {
  if (v.kind == Value::Kind::Var || v.kind == Value::Kind::Call) return false;
  for (const auto& c : v.path)
    if (c.has_var_target() || c.kind == Capability::Kind::Var) return false;
  for (const auto& item : v.items)
    if (!is_closed(item)) return false;
  return true;
}

namespace detail {

inline void idents_name(const AmbientName& n, std::set<std::string>& out) {
  out.insert(n.base);
  for (const auto& p : n.ports.members) out.insert(p.base);
}
inline void idents_cap(const Capability& c, std::set<std::string>& out) {
  if (c.is_move() && c.var.empty()) idents_name(c.target, out);
  if (!c.var.empty()) out.insert(c.var);
  for (const auto& s : c.path) idents_cap(s, out);
}
inline void idents_value(const Value& v, std::set<std::string>& out) {
  if (v.kind == Value::Kind::Name) idents_name(v.name, out);
  if (v.kind == Value::Kind::Var) out.insert(v.ident);
  for (const auto& c : v.path) idents_cap(c, out);
  for (const auto& i : v.items) idents_value(i, out);
}

}  // namespace detail

/// Every identifier (name, port, variable) used anywhere in `p`, bound or free.
inline std::set<std::string> all_idents(const Process& p) {
  std::set<std::string> out;
  std::function<void(const Process&)> walk = [&](const Process& q) {
    for (const auto& v : q->values) detail::idents_value(v, out);
    for (const auto& x : q->vars) out.insert(x);
    if (!q->ident.empty() && q->kind != ProcKind::Call) out.insert(q->ident);
    if (q->kind == ProcKind::Cap) detail::idents_cap(q->cap, out);
    if (q->kind == ProcKind::Amb || q->kind == ProcKind::ResAmb) detail::idents_name(q->amb, out);
    for (const auto& [from, to] : q->relabel.entries) {
      out.insert(from);
      out.insert(to);
    }
    for (const auto& k : q->kids) walk(k);
  };
  walk(p);
  return out;
}

/// `base` followed by the least numeric suffix that avoids `used`.
inline std::string fresh_ident(const std::string& base, const std::set<std::string>& used) {
  for (int i = 1;; ++i) {
    std::string candidate = base + std::to_string(i);
    if (!used.count(candidate)) return candidate;
  }
}

// ---------------------------------------------------------------------------
// Renaming. The replacement is assumed fresh for the term, so no capture can occur.

namespace detail {

inline AmbientName rename_port_in_name(const AmbientName& n, const std::string& from, const std::string& to) {
  if (n.ports.all) return n;
  AmbientName out = n;
  out.ports.members.clear();
  for (auto p : n.ports.members) {
    if (p.base == from) p.base = to;
    out.ports.members.insert(p);
  }
  return out;
}

struct NameMap {
  std::function<AmbientName(const AmbientName&)> name;
  std::function<std::string(const std::string&)> port;
};

inline Capability map_cap(const Capability& c, const NameMap& m) {
  Capability out = c;
  if (c.is_move() && c.var.empty()) out.target = m.name(c.target);
  for (auto& s : out.path) s = map_cap(s, m);
  return out;
}

inline Value map_value(const Value& v, const NameMap& m) {
  Value out = v;
  if (v.kind == Value::Kind::Name) out.name = m.name(v.name);
  for (auto& c : out.path) c = map_cap(c, m);
  for (auto& i : out.items) i = map_value(i, m);
  return out;
}

inline bool ports_mention(const PortSet& s, const std::string& base) {
  if (s.all) return false;
  for (const auto& p : s.members)
    if (p.base == base) return true;
  return false;
}

}  // namespace detail

/// Replaces free occurrences of ambient name `from` by `to`.
inline Process rename_ambient(const Process& p, const AmbientName& from, const AmbientName& to) {
  detail::NameMap m{[&](const AmbientName& n) { return n == from ? to : n; },
                    [](const std::string& s) { return s; }};
  if (p->kind == ProcKind::ResAmb && p->amb == from) return p;
  if (p->kind == ProcKind::ResPort && detail::ports_mention(from.ports, p->ident)) return p;
  ProcNode n = *p;
  for (auto& v : n.values) v = detail::map_value(v, m);
  if (n.kind == ProcKind::Cap) n.cap = detail::map_cap(n.cap, m);
  if (n.kind == ProcKind::Amb) n.amb = m.name(n.amb);
  for (auto& k : n.kids) k = rename_ambient(k, from, to);
  return with_kids(n, n.kids);
}

/// Replaces free occurrences of port base `from` by `to`, including inside port sets.
inline Process rename_port(const Process& p, const std::string& from, const std::string& to) {
  if (p->kind == ProcKind::ResPort && p->ident == from) return p;
  detail::NameMap m{[&](const AmbientName& n) { return detail::rename_port_in_name(n, from, to); },
                    [&](const std::string& s) { return s == from ? to : s; }};
  ProcNode n = *p;
  for (auto& v : n.values) v = detail::map_value(v, m);
  if (n.kind == ProcKind::Cap) n.cap = detail::map_cap(n.cap, m);
  if (n.kind == ProcKind::Amb || n.kind == ProcKind::ResAmb) n.amb = m.name(n.amb);
  if (n.kind == ProcKind::Input || n.kind == ProcKind::Output) n.ident = m.port(n.ident);
  if (n.kind == ProcKind::Relabel) {
    RelabelMap f;
    for (const auto& [a, b] : n.relabel.entries) f.entries[m.port(a)] = m.port(b);
    n.relabel = f;
  }
  for (auto& k : n.kids) k = rename_port(k, from, to);
  return with_kids(n, n.kids);
}

// ---------------------------------------------------------------------------
// Substitution

namespace detail {

inline Value subst_value(const Value& v, const std::string& x, const Value& by) {
  if (v.kind == Value::Kind::Var) return v.ident == x ? by : v;
  Value out = v;
  for (auto& c : out.path) {
    if (c.has_var_target() && c.var == x) {
      if (by.kind == Value::Kind::Name) {
        c.target = by.name;
        c.var.clear();
      } else if (by.kind == Value::Kind::Var) {
        c.var = by.ident;
      } else {
        throw TypeMismatch("value cannot stand for an ambient name in a path");
      }
    }
  }
  for (auto& i : out.items) i = subst_value(i, x, by);
  return out;
}

inline Process prefix_chain(const std::vector<Capability>& caps, Process tail) {
  if (caps.empty()) return prefix(Capability::epsilon(), std::move(tail));
  for (auto it = caps.rbegin(); it != caps.rend(); ++it) {
    if (it->kind == Capability::Kind::Path)
      tail = prefix_chain(it->path, std::move(tail));
    else
      tail = prefix(*it, std::move(tail));
  }
  return tail;
}

inline Capability subst_cap_target(const Capability& c, const std::string& x, const Value& by) {
  if (!c.has_var_target() || c.var != x) return c;
  Capability out = c;
  if (by.kind == Value::Kind::Name) {
    out.target = by.name;
    out.var.clear();
  } else if (by.kind == Value::Kind::Var) {
    out.var = by.ident;
  } else {
    throw TypeMismatch("only an ambient name can be the target of in/out");
  }
  return out;
}

struct SubstCtx {
  std::string var;
  Value by;
  FreeNames by_names;
  std::set<std::string> by_vars;
  std::set<std::string> used;
};

inline std::string fresh_for(SubstCtx& ctx, const std::string& base) {
  std::string f = fresh_ident(base, ctx.used);
  ctx.used.insert(f);
  return f;
}

inline Process subst_rec(const Process& p, SubstCtx& ctx);

// Rebinds input/ploc/sloc variables that would capture variables of the substituted value.
inline Process rebind_var(const Process& body, const std::string& old_var, const std::string& new_var) {
  SubstCtx inner{old_var, Value::var(new_var), {}, {}, {}};
  return subst_rec(body, inner);
}

inline Process subst_rec(const Process& p, SubstCtx& ctx) {
  const std::string& x = ctx.var;
  switch (p->kind) {
    case ProcKind::Zero:
      return p;
    case ProcKind::Input: {
      ProcNode n = *p;
      for (const auto& v : n.vars)
        if (v == x) return p;
      Process body = n.kids[0];
      for (auto& v : n.vars) {
        if (ctx.by_vars.count(v)) {
          std::string f = fresh_for(ctx, v);
          body = rebind_var(body, v, f);
          v = f;
        }
      }
      n.kids[0] = subst_rec(body, ctx);
      return make_node(std::move(n));
    }
    case ProcKind::Cap: {
      const Capability& c = p->cap;
      if (c.kind == Capability::Kind::Ploc || c.kind == Capability::Kind::Sloc) {
        if (c.var == x) return p;
        ProcNode n = *p;
        Process body = n.kids[0];
        if (ctx.by_vars.count(c.var)) {
          std::string f = fresh_for(ctx, c.var);
          body = rebind_var(body, c.var, f);
          n.cap.var = f;
        }
        n.kids[0] = subst_rec(body, ctx);
        return make_node(std::move(n));
      }
      Process body = subst_rec(p->body(), ctx);
      if (c.kind == Capability::Kind::Var && c.var == x) {
        switch (ctx.by.kind) {
          case Value::Kind::Path:
            return prefix_chain(ctx.by.path, body);
          case Value::Kind::Var:
            return prefix(Capability::variable(ctx.by.ident), body);
          default:
            throw TypeMismatch("only a capability path can occupy a capability position");
        }
      }
      Capability nc = subst_cap_target(c, x, ctx.by);
      for (auto& s : nc.path) s = subst_cap_target(s, x, ctx.by);
      return prefix(nc, body);
    }
    case ProcKind::ResAmb: {
      ProcNode n = *p;
      Process body = n.kids[0];
      if (ctx.by_names.ambients.count(n.amb)) {
        AmbientName f{fresh_for(ctx, n.amb.base), n.amb.ports};
        body = rename_ambient(body, n.amb, f);
        n.amb = f;
      }
      n.kids[0] = subst_rec(body, ctx);
      return make_node(std::move(n));
    }
    case ProcKind::ResPort: {
      ProcNode n = *p;
      Process body = n.kids[0];
      if (ctx.by_names.ports.count(n.ident)) {
        std::string f = fresh_for(ctx, n.ident);
        body = rename_port(body, n.ident, f);
        n.ident = f;
      }
      n.kids[0] = subst_rec(body, ctx);
      return make_node(std::move(n));
    }
    default: {
      ProcNode n = *p;
      for (auto& v : n.values) v = subst_value(v, x, ctx.by);
      for (auto& k : n.kids) k = subst_rec(k, ctx);
      return with_kids(n, n.kids);
    }
  }
}

}  // namespace detail

/// Capture-avoiding P{x ← v}. Throws TypeMismatch when `v` cannot occupy an occurrence site.
inline Process substitute(const Process& p, const std::string& x, const Value& v) {
  detail::SubstCtx ctx{x, v, free_names(v), free_vars(v), all_idents(p)};
  for (const auto& n : ctx.by_names.ambients) ctx.used.insert(n.base);
  ctx.used.insert(ctx.by_names.ports.begin(), ctx.by_names.ports.end());
  // Binders spelled like a free name of `v` are renamed too, so printing stays unambiguous.
  for (const auto& n : ctx.by_names.ambients) ctx.by_vars.insert(n.base);
  ctx.used.insert(ctx.by_vars.begin(), ctx.by_vars.end());
  return detail::subst_rec(p, ctx);
}

/// Simultaneous-style substitution for patterns; variables are distinct so sequential is fine.
inline Process substitute_all(Process p, const std::vector<std::string>& vars, const std::vector<Value>& values) {
  for (std::size_t i = 0; i < vars.size(); ++i) p = substitute(p, vars[i], values[i]);
  return p;
}

/// Matches a received value against an input pattern (one variable binds the whole value,
/// several variables destructure a tuple of that arity).
inline std::optional<std::vector<Value>> match_pattern(const std::vector<std::string>& vars, const Value& v) {
  if (vars.size() == 1) return std::vector<Value>{v};
  if (vars.empty()) {
    if (v.kind == Value::Kind::Unit) return std::vector<Value>{};
    return std::nullopt;
  }
  if (v.kind != Value::Kind::Tuple || v.items.size() != vars.size()) return std::nullopt;
  return v.items;
}

// ---------------------------------------------------------------------------
// Evaluation of builtin value functions: path(src, dst), hd(list), tl(list).

inline std::optional<Value> evaluate(const Value& v, const Environment& env) {
  switch (v.kind) {
    case Value::Kind::Var:
      return std::nullopt;
    case Value::Kind::Call: {
      std::vector<Value> args;
      for (const auto& a : v.items) {
        auto e = evaluate(a, env);
        if (!e) return std::nullopt;
        args.push_back(*e);
      }
      if (v.ident == "path" && args.size() == 2 && env.tree && args[0].kind == Value::Kind::Name &&
          args[1].kind == Value::Kind::Name && env.tree->contains(args[0].name) &&
          env.tree->contains(args[1].name))
        return Value::of_path(path(*env.tree, args[0].name, args[1].name));
      if (v.ident == "hd" && args.size() == 1 && args[0].kind == Value::Kind::Cons) return args[0].items[0];
      if (v.ident == "tl" && args.size() == 1 && args[0].kind == Value::Kind::Cons) return args[0].items[1];
      return std::nullopt;
    }
    default: {
      if (!is_closed(v) && free_vars(v).size() > 0) return std::nullopt;
      Value out = v;
      for (auto& i : out.items) {
        auto e = evaluate(i, env);
        if (!e) return std::nullopt;
        i = *e;
      }
      if (out.kind == Value::Kind::Path) {
        std::vector<Capability> flat;
        std::function<void(const Capability&)> add = [&](const Capability& c) {
          if (c.kind == Capability::Kind::Path)
            for (const auto& s : c.path) add(s);
          else if (c.kind != Capability::Kind::Epsilon)
            flat.push_back(c);
        };
        for (const auto& c : out.path) add(c);
        out.path = flat;
      }
      return out;
    }
  }
}

/// Evaluates where possible, leaving stuck sub-expressions in place.
inline Value simplify(const Value& v, const Environment& env) {
  if (auto e = evaluate(v, env)) return *e;
  Value out = v;
  for (auto& i : out.items) i = simplify(i, env);
  return out;
}

// ---------------------------------------------------------------------------
// Alpha-equivalence

namespace detail {

struct AlphaMaps {
  std::map<AmbientName, AmbientName> amb_fwd, amb_bwd;
  std::map<std::string, std::string> port_fwd, port_bwd;
  std::map<std::string, std::string> var_fwd, var_bwd;
};

template <class K>
bool same_binding(const std::map<K, K>& fwd, const std::map<K, K>& bwd, const K& a, const K& b) {
  auto f = fwd.find(a);
  auto r = bwd.find(b);
  if (f == fwd.end() && r == bwd.end()) return true;
  return f != fwd.end() && r != bwd.end() && f->second == b && r->second == a;
}

inline bool alpha_port(const AlphaMaps& m, const std::string& a, const std::string& b) {
  if (!same_binding(m.port_fwd, m.port_bwd, a, b)) return false;
  return m.port_fwd.count(a) || a == b;
}

inline bool alpha_portset(const AlphaMaps& m, const PortSet& a, const PortSet& b) {
  if (a.all != b.all || a.members.size() != b.members.size()) return false;
  std::set<PortName> mapped;
  for (auto p : a.members) {
    auto it = m.port_fwd.find(p.base);
    if (it != m.port_fwd.end())
      p.base = it->second;
    else if (m.port_bwd.count(p.base))
      return false;
    mapped.insert(p);
  }
  return mapped == b.members;
}

inline bool alpha_name(const AlphaMaps& m, const AmbientName& a, const AmbientName& b) {
  auto f = m.amb_fwd.find(a);
  auto r = m.amb_bwd.find(b);
  if (f != m.amb_fwd.end() || r != m.amb_bwd.end())
    return f != m.amb_fwd.end() && r != m.amb_bwd.end() && f->second == b && r->second == a;
  return a.base == b.base && alpha_portset(m, a.ports, b.ports);
}

inline bool alpha_var(const AlphaMaps& m, const std::string& a, const std::string& b) {
  if (!same_binding(m.var_fwd, m.var_bwd, a, b)) return false;
  return m.var_fwd.count(a) || a == b;
}

inline bool alpha_cap(const AlphaMaps& m, const Capability& a, const Capability& b) {
  if (a.kind != b.kind || a.path.size() != b.path.size()) return false;
  if (a.is_move()) {
    if (a.var.empty() != b.var.empty()) return false;
    if (!a.var.empty()) return alpha_var(m, a.var, b.var);
    return alpha_name(m, a.target, b.target);
  }
  if (a.kind == Capability::Kind::Var) return alpha_var(m, a.var, b.var);
  for (std::size_t i = 0; i < a.path.size(); ++i)
    if (!alpha_cap(m, a.path[i], b.path[i])) return false;
  return true;
}

inline bool alpha_value(const AlphaMaps& m, const Value& a, const Value& b) {
  if (a.kind != b.kind || a.items.size() != b.items.size() || a.path.size() != b.path.size()) return false;
  switch (a.kind) {
    case Value::Kind::Name:
      return alpha_name(m, a.name, b.name);
    case Value::Kind::Var:
      return alpha_var(m, a.ident, b.ident);
    case Value::Kind::Call:
      if (a.ident != b.ident) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.path.size(); ++i)
    if (!alpha_cap(m, a.path[i], b.path[i])) return false;
  for (std::size_t i = 0; i < a.items.size(); ++i)
    if (!alpha_value(m, a.items[i], b.items[i])) return false;
  return true;
}

inline bool alpha_rec(const AlphaMaps& m, const Process& p, const Process& q) {
  if (p->kind != q->kind || p->kids.size() != q->kids.size() || p->values.size() != q->values.size())
    return false;
  for (std::size_t i = 0; i < p->values.size(); ++i)
    if (!alpha_value(m, p->values[i], q->values[i])) return false;

  auto kids_equal = [&](const AlphaMaps& mm) {
    for (std::size_t i = 0; i < p->kids.size(); ++i)
      if (!alpha_rec(mm, p->kids[i], q->kids[i])) return false;
    return true;
  };

  switch (p->kind) {
    case ProcKind::Call:
      if (p->ident != q->ident) return false;
      break;
    case ProcKind::Cap: {
      const auto& a = p->cap;
      const auto& b = q->cap;
      if (a.kind == Capability::Kind::Ploc || a.kind == Capability::Kind::Sloc) {
        if (a.kind != b.kind) return false;
        AlphaMaps inner = m;
        inner.var_fwd[a.var] = b.var;
        inner.var_bwd[b.var] = a.var;
        return kids_equal(inner);
      }
      if (!alpha_cap(m, a, b)) return false;
      break;
    }
    case ProcKind::Input: {
      if (!alpha_port(m, p->ident, q->ident) || p->vars.size() != q->vars.size()) return false;
      AlphaMaps inner = m;
      for (std::size_t i = 0; i < p->vars.size(); ++i) {
        inner.var_fwd[p->vars[i]] = q->vars[i];
        inner.var_bwd[q->vars[i]] = p->vars[i];
      }
      return kids_equal(inner);
    }
    case ProcKind::Output:
      if (!alpha_port(m, p->ident, q->ident)) return false;
      break;
    case ProcKind::Amb:
      if (!alpha_name(m, p->amb, q->amb)) return false;
      break;
    case ProcKind::ResAmb: {
      if (!alpha_portset(m, p->amb.ports, q->amb.ports)) return false;
      AlphaMaps inner = m;
      inner.amb_fwd[p->amb] = q->amb;
      inner.amb_bwd[q->amb] = p->amb;
      return kids_equal(inner);
    }
    case ProcKind::ResPort: {
      AlphaMaps inner = m;
      // Ambient binders decorated with the port no longer reach occurrences below; the partner
      // side is poisoned so a one-sided shadow cannot match.
      const AmbientName poison("");
      for (auto it = inner.amb_fwd.begin(); it != inner.amb_fwd.end();) {
        if (!ports_mention(it->first.ports, p->ident)) {
          ++it;
          continue;
        }
        inner.amb_bwd[it->second] = poison;
        it = inner.amb_fwd.erase(it);
      }
      for (auto it = inner.amb_bwd.begin(); it != inner.amb_bwd.end();) {
        if (!ports_mention(it->first.ports, q->ident)) {
          ++it;
          continue;
        }
        if (inner.amb_fwd.count(it->second)) inner.amb_fwd[it->second] = poison;
        it = inner.amb_bwd.erase(it);
      }
      inner.port_fwd[p->ident] = q->ident;
      inner.port_bwd[q->ident] = p->ident;
      return kids_equal(inner);
    }
    case ProcKind::Relabel: {
      if (p->relabel.entries.size() != q->relabel.entries.size()) return false;
      auto it = q->relabel.entries.begin();
      for (const auto& [from, to] : p->relabel.entries) {
        if (!alpha_port(m, from, it->first) || !alpha_port(m, to, it->second)) return false;
        ++it;
      }
      break;
    }
    default:
      break;
  }
  return kids_equal(m);
}

}  // namespace detail

/// Identity up to consistent renaming of bound ambient names, ports and variables.
inline bool alpha_equal(const Process& p, const Process& q) { return detail::alpha_rec({}, p, q); }

}  // namespace cmc
