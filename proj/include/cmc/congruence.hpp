#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cmc/operations.hpp"
#include "cmc/printer.hpp"
#include "cmc/syntax.hpp"

namespace cmc {

struct NormalizeOptions {
  // Successive unguarded unfoldings allowed before giving up on a constant.
  int unfold_budget = 16;
  // Extra unfoldings of constants that sit under a prefix.
  int guarded_unfold = 0;
};

/// A restriction binder: either an ambient name or a port.
struct Binder {
  bool is_port = false;
  AmbientName amb;
  std::string port;

  const std::string& base() const { return is_port ? port : amb.base; }
  bool operator==(const Binder&) const = default;
};

/// ν binders (b1 .. bk) (parts[0] | ... | parts[n-1]), with no restriction at the top of any part.
struct Region {
  std::vector<Binder> binders;
  std::vector<Process> parts;
};

inline Process assemble(const Region& r) {
  Process body = par(r.parts);
  for (auto it = r.binders.rbegin(); it != r.binders.rend(); ++it)
    body = it->is_port ? restrict_port(it->port, body) : restrict(it->amb, body);
  return body;
}

/// Splits a term into its leading restrictions and parallel components.
inline Region open_region(Process p) {
  Region r;
  for (;;) {
    if (p->kind == ProcKind::ResAmb) {
      r.binders.push_back(Binder{false, p->amb, {}});
    } else if (p->kind == ProcKind::ResPort) {
      r.binders.push_back(Binder{true, {}, p->ident});
    } else {
      break;
    }
    p = p->body();
  }
  if (p->kind == ProcKind::Par)
    r.parts = p->kids;
  else if (p->kind != ProcKind::Zero)
    r.parts = {p};
  return r;
}

namespace detail {

inline std::string strip_digits(const std::string& s) {
  std::size_t end = s.size();
  while (end > 1 && std::isdigit(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(0, end);
}

class Normalizer {
 public:
  Normalizer(const Environment& env, NormalizeOptions opts) : env_(env), opts_(opts) {
    for (const auto& [name, d] : env.defs) {
      auto ids = all_idents(d.body);
      used_.insert(ids.begin(), ids.end());
      used_.insert(d.params.begin(), d.params.end());
    }
  }

  Process run(const Process& p) {
    auto ids = all_idents(p);
    used_.insert(ids.begin(), ids.end());
    return process(p, true, opts_.guarded_unfold, 0);
  }

 private:
  const Environment& env_;
  NormalizeOptions opts_;
  std::set<std::string> used_;

  std::string fresh(const std::string& base) {
    std::string f = fresh_ident(strip_digits(base), used_);
    used_.insert(f);
    return f;
  }

  static bool mentions(const FreeNames& fn, const Binder& b) {
    if (b.is_port) return fn.ports.count(b.port) > 0;
    for (const auto& n : fn.ambients)
      if (n.base == b.amb.base) return true;
    return false;
  }

  void rename(Region& r, std::size_t binder_index) {
    Binder& b = r.binders[binder_index];
    std::string f = fresh(b.base());
    for (auto& part : r.parts) {
      if (b.is_port)
        part = rename_port(part, b.port, f);
      else
        part = rename_ambient(part, b.amb, AmbientName(f, b.amb.ports));
    }
    // Later binders' decorations may mention a renamed port.
    if (b.is_port) {
      for (std::size_t j = binder_index + 1; j < r.binders.size(); ++j)
        if (!r.binders[j].is_port) r.binders[j].amb = rename_port_in_name(r.binders[j].amb, b.port, f);
      b.port = f;
    } else {
      b.amb.base = f;
    }
  }

  Process process(const Process& p, bool active, int guarded_left, int chain) {
    Region r = region(p, active, guarded_left, chain);
    FreeNames fn = free_names(par(r.parts));
    Region kept;
    kept.parts = r.parts;
    for (const auto& b : r.binders) {
      bool live = b.is_port ? fn.ports.count(b.port) > 0 : fn.ambients.count(b.amb) > 0;
      if (live) kept.binders.push_back(b);
    }
    return assemble(kept);
  }

  Process guarded(const Process& p, int guarded_left) { return process(p, false, guarded_left, 0); }

  Process unfold(const Process& p) {
    std::vector<Value> args;
    for (const auto& v : p->values) args.push_back(simplify(v, env_));
    const Definition& d = env_.lookup(p->ident, args.size());
    Process body = substitute_all(d.body, d.params, args);
    auto ids = all_idents(body);
    used_.insert(ids.begin(), ids.end());
    return body;
  }

  Region single(Process p) {
    Region r;
    if (p->kind != ProcKind::Zero) r.parts = {std::move(p)};
    return r;
  }

  Region region(const Process& p, bool active, int guarded_left, int chain) {
    switch (p->kind) {
      case ProcKind::Zero:
        return {};
      case ProcKind::Call: {
        if (!active && guarded_left <= 0) {
          std::vector<Value> args;
          for (const auto& v : p->values) args.push_back(simplify(v, env_));
          return single(call(p->ident, args));
        }
        if (chain >= opts_.unfold_budget)
          throw BudgetExceeded("unfolding budget exhausted at constant " + p->ident);
        return region(unfold(p), active, active ? guarded_left : guarded_left - 1, chain + 1);
      }
      case ProcKind::Cap: {
        const Capability& c = p->cap;
        if (c.kind == Capability::Kind::Epsilon) return region(p->body(), active, guarded_left, chain);
        if (c.kind == Capability::Kind::Path) return region(prefix_chain(c.path, p->body()), active, guarded_left, chain);
        return single(prefix(c, guarded(p->body(), guarded_left)));
      }
      case ProcKind::Input:
        return single(input(p->ident, p->vars, guarded(p->body(), guarded_left)));
      case ProcKind::Output:
        return single(output(p->ident, simplify(p->values[0], env_), guarded(p->body(), guarded_left)));
      case ProcKind::Tau:
        return single(tau(guarded(p->body(), guarded_left)));
      case ProcKind::Cond: {
        auto lhs = evaluate(p->values[0], env_);
        auto rhs = evaluate(p->values[1], env_);
        if (lhs && rhs && is_closed(*lhs) && is_closed(*rhs))
          return region(*lhs == *rhs ? p->kids[0] : p->kids[1], active, guarded_left, chain);
        return single(cond(simplify(p->values[0], env_), simplify(p->values[1], env_),
                           guarded(p->kids[0], guarded_left), guarded(p->kids[1], guarded_left)));
      }
      case ProcKind::Sum: {
        std::vector<Process> kids;
        for (const auto& k : p->kids) {
          Process n = process(k, active, guarded_left, chain);
          if (n->kind != ProcKind::Zero) kids.push_back(n);
        }
        Process s = sum(kids);
        if (s->kind == ProcKind::Sum || s->kind == ProcKind::Zero) return single(s);
        return open_region(s);
      }
      case ProcKind::Relabel: {
        Process body = process(p->body(), active, guarded_left, chain);
        RelabelMap f = p->relabel;
        if (body->kind == ProcKind::Relabel) {
          f = f.after(body->relabel);
          body = body->body();
        }
        if (body->kind == ProcKind::Zero) return {};
        if (f.is_identity()) return open_region(body);
        return single(relabel(body, f));
      }
      case ProcKind::Amb: {
        Region r = region(p->body(), active, guarded_left, chain);
        for (std::size_t i = 0; i < r.binders.size(); ++i) {
          const Binder& b = r.binders[i];
          bool clash = b.is_port ? detail::ports_mention(p->amb.ports, b.port) : b.amb.base == p->amb.base;
          if (clash) rename(r, i);
        }
        Region out;
        out.binders = r.binders;
        out.parts = {amb(p->amb, par(r.parts))};
        return out;
      }
      case ProcKind::ResAmb:
      case ProcKind::ResPort: {
        Binder b = p->kind == ProcKind::ResAmb ? Binder{false, p->amb, {}} : Binder{true, {}, p->ident};
        Region r = region(p->body(), active, guarded_left, chain);
        for (std::size_t i = 0; i < r.binders.size(); ++i) {
          const Binder& inner = r.binders[i];
          bool shadows = inner.is_port == b.is_port && inner.base() == b.base();
          // ν m{a} ν a P: the inner port binder would capture the a of m{a}.
          if (!b.is_port && inner.is_port && detail::ports_mention(b.amb.ports, inner.port)) shadows = true;
          if (shadows) rename(r, i);
        }
        r.binders.insert(r.binders.begin(), b);
        return r;
      }
      case ProcKind::Par: {
        std::vector<Region> kids;
        for (const auto& k : p->kids) kids.push_back(region(k, active, guarded_left, chain));
        std::vector<FreeNames> fns;
        for (const auto& k : kids) {
          fns.push_back(free_names(par(k.parts)));
          for (const auto& b : k.binders)
            if (!b.is_port && !b.amb.ports.all)
              for (const auto& pn : b.amb.ports.members) fns.back().ports.insert(pn.base);
        }
        Region out;
        for (std::size_t i = 0; i < kids.size(); ++i) {
          for (std::size_t bi = 0; bi < kids[i].binders.size(); ++bi) {
            const Binder& b = kids[i].binders[bi];
            bool clash = false;
            for (std::size_t j = 0; j < kids.size() && !clash; ++j)
              if (j != i && mentions(fns[j], b)) clash = true;
            for (const auto& o : out.binders)
              if (o.is_port == b.is_port && o.base() == b.base()) clash = true;
            if (clash) rename(kids[i], bi);
            out.binders.push_back(kids[i].binders[bi]);
          }
          out.parts.insert(out.parts.end(), kids[i].parts.begin(), kids[i].parts.end());
        }
        return out;
      }
    }
    return {};
  }
};

}  // namespace detail

/// Structural normal form: values evaluated, closed conditionals resolved, `eps` and
/// paths expanded, zeros dropped, unguarded constants unfolded, and restrictions pulled
/// to the root of each region with unused binders removed.
inline Process normalize(const Process& p, const Environment& env, NormalizeOptions opts = {}) {
  return detail::Normalizer(env, opts).run(p);
}

// ---------------------------------------------------------------------------
// Canonical keys

namespace detail {

class KeyEncoder {
 public:
  std::string encode(const Process& p) { return proc(p); }

 private:
  struct Ctx {
    std::vector<std::string> slots;  // "" while a bound name has not been numbered yet
    std::map<AmbientName, std::vector<int>> amb;
    std::map<std::string, std::vector<int>> port;
    std::map<std::string, std::vector<int>> var;
    int next_id = 0;
    int var_level = 0;
    bool anon = false;
  };
  Ctx ctx_;
  static constexpr std::size_t kMaxOrderings = 2000;

  std::string slot(int index) {
    std::string& s = ctx_.slots[index];
    if (!s.empty()) return s;
    if (ctx_.anon) return "?";
    s = "#" + std::to_string(ctx_.next_id++);
    return s;
  }

  std::string port(const std::string& base) {
    auto it = ctx_.port.find(base);
    if (it != ctx_.port.end() && !it->second.empty()) return "p" + slot(it->second.back());
    return base;
  }

  std::string portset(const PortSet& s) {
    if (s.all) return "";
    std::vector<std::string> items;
    for (const auto& p : s.members) items.push_back((p.co ? "~" : "") + port(p.base));
    std::sort(items.begin(), items.end());
    std::string out = "{";
    for (const auto& i : items) out += i + ",";
    return out + "}";
  }

  std::string name(const AmbientName& n) {
    auto it = ctx_.amb.find(n);
    if (it != ctx_.amb.end() && !it->second.empty()) return "a" + slot(it->second.back()) + portset(n.ports);
    return n.base + portset(n.ports);
  }

  std::string var(const std::string& x) {
    auto it = ctx_.var.find(x);
    if (it != ctx_.var.end() && !it->second.empty()) return ctx_.slots[it->second.back()];
    return "%" + x;
  }

  std::string cap(const Capability& c) {
    using K = Capability::Kind;
    switch (c.kind) {
      case K::In:
        return "in " + (c.var.empty() ? name(c.target) : var(c.var));
      case K::Out:
        return "out " + (c.var.empty() ? name(c.target) : var(c.var));
      case K::Var:
        return "cv " + var(c.var);
      case K::Epsilon:
        return "eps";
      case K::Path: {
        std::string out = "path(";
        for (const auto& s : c.path) out += cap(s) + ";";
        return out + ")";
      }
      default:
        return "?cap";
    }
  }

  std::string value(const Value& v) {
    using K = Value::Kind;
    std::string out;
    switch (v.kind) {
      case K::Name:
        return "n:" + name(v.name);
      case K::Var:
        return "v:" + var(v.ident);
      case K::Nil:
        return "nil";
      case K::Unit:
        return "unit";
      case K::Path:
        out = "P(";
        for (const auto& c : v.path) out += cap(c) + ";";
        return out + ")";
      case K::Tuple:
        out = "T(";
        break;
      case K::Cons:
        out = "L(";
        break;
      case K::Call:
        out = "F:" + v.ident + "(";
        break;
    }
    for (const auto& i : v.items) out += value(i) + ",";
    return out + ")";
  }

  int push_var(const std::string& x) {
    ctx_.slots.push_back("$" + std::to_string(ctx_.var_level++));
    ctx_.var[x].push_back(static_cast<int>(ctx_.slots.size()) - 1);
    return 0;
  }
  void pop_var(const std::string& x) {
    ctx_.var[x].pop_back();
    --ctx_.var_level;
  }

  // Encodes an unordered collection of subterms, choosing the least encoding over
  // the orderings that are not already fixed by the anonymous keys.
  std::string multiset(const std::vector<Process>& kids, const std::string& open, const std::string& sep) {
    std::vector<std::string> anon(kids.size());
    {
      Ctx saved = ctx_;
      ctx_.anon = true;
      for (std::size_t i = 0; i < kids.size(); ++i) {
        anon[i] = proc(kids[i]);
        ctx_ = saved;
        ctx_.anon = true;
      }
      ctx_ = saved;
    }
    std::vector<std::size_t> order(kids.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return anon[a] < anon[b]; });

    auto render = [&](const std::vector<std::size_t>& ord) {
      std::string out = open;
      for (std::size_t i = 0; i < ord.size(); ++i) out += (i ? sep : "") + proc(kids[ord[i]]);
      return out + ")";
    };
    if (ctx_.anon) return render(order);

    // Tied groups whose members still mention unnumbered names.
    std::vector<std::pair<std::size_t, std::size_t>> groups;
    std::size_t combos = 1;
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i;
      while (j < order.size() && anon[order[j]] == anon[order[i]]) ++j;
      if (j - i > 1 && anon[order[i]].find('?') != std::string::npos) {
        groups.push_back({i, j});
        for (std::size_t k = 2; k <= j - i && combos <= kMaxOrderings; ++k) combos *= k;
      }
      i = j;
    }
    if (groups.empty() || combos > kMaxOrderings) return render(order);

    std::string best;
    Ctx best_ctx;
    bool have = false;
    const Ctx start = ctx_;
    std::function<void(std::size_t)> enumerate = [&](std::size_t g) {
      if (g == groups.size()) {
        ctx_ = start;
        std::string s = render(order);
        if (!have || s < best) {
          best = s;
          best_ctx = ctx_;
          have = true;
        }
        return;
      }
      auto first = order.begin() + static_cast<std::ptrdiff_t>(groups[g].first);
      auto last = order.begin() + static_cast<std::ptrdiff_t>(groups[g].second);
      std::sort(first, last);
      do {
        enumerate(g + 1);
      } while (std::next_permutation(first, last));
    };
    enumerate(0);
    ctx_ = best_ctx;
    return best;
  }

  std::string proc(const Process& p) {
    switch (p->kind) {
      case ProcKind::Zero:
        return "0";
      case ProcKind::Call: {
        std::string out = "C:" + p->ident + "(";
        for (const auto& v : p->values) out += value(v) + ",";
        return out + ")";
      }
      case ProcKind::Cap: {
        const Capability& c = p->cap;
        if (c.kind == Capability::Kind::Ploc || c.kind == Capability::Kind::Sloc) {
          push_var(c.var);
          std::string out = std::string(c.kind == Capability::Kind::Ploc ? "ploc." : "sloc.") + proc(p->body());
          pop_var(c.var);
          return out;
        }
        return cap(c) + "." + proc(p->body());
      }
      case ProcKind::Input: {
        std::string out = port(p->ident) + "?" + std::to_string(p->vars.size()) + ".";
        for (const auto& x : p->vars) push_var(x);
        out += proc(p->body());
        for (auto it = p->vars.rbegin(); it != p->vars.rend(); ++it) pop_var(*it);
        return out;
      }
      case ProcKind::Output: {
        std::string out = port(p->ident) + "!" + value(p->values[0]) + ".";
        return out + proc(p->body());
      }
      case ProcKind::Tau:
        return "t." + proc(p->body());
      case ProcKind::Amb: {
        std::string n = name(p->amb);
        return n + "[" + proc(p->body()) + "]";
      }
      case ProcKind::Sum:
        return multiset(p->kids, "+(", " ");
      case ProcKind::Par:
        return multiset(p->kids, "|(", " ");
      case ProcKind::ResAmb:
      case ProcKind::ResPort: {
        Region r = open_region(p);
        std::vector<int> pushed;
        for (const auto& b : r.binders) {
          ctx_.slots.push_back("");
          int idx = static_cast<int>(ctx_.slots.size()) - 1;
          if (b.is_port)
            ctx_.port[b.port].push_back(idx);
          else
            ctx_.amb[b.amb].push_back(idx);
        }
        std::string body = r.parts.size() == 1 ? proc(r.parts[0]) : multiset(r.parts, "|(", " ");
        for (const auto& b : r.binders) {
          if (b.is_port)
            ctx_.port[b.port].pop_back();
          else
            ctx_.amb[b.amb].pop_back();
        }
        return "new" + std::to_string(r.binders.size()) + "(" + body + ")";
      }
      case ProcKind::Relabel: {
        std::vector<std::string> entries;
        for (const auto& [from, to] : p->relabel.entries) entries.push_back(port(from) + ">" + port(to));
        std::sort(entries.begin(), entries.end());
        std::string out = "R[";
        for (const auto& e : entries) out += e + ",";
        return out + "](" + proc(p->body()) + ")";
      }
      case ProcKind::Cond: {
        std::string out = "if(" + value(p->values[0]) + "=" + value(p->values[1]) + ")";
        out += "(" + proc(p->kids[0]) + ")";
        return out + "(" + proc(p->kids[1]) + ")";
      }
    }
    return "?";
  }
};

// Orders parallel and sum components by their printed form so display is deterministic.
inline Process sort_for_display(const Process& p) {
  std::vector<Process> kids;
  for (const auto& k : p->kids) kids.push_back(sort_for_display(k));
  if (p->kind == ProcKind::Par || p->kind == ProcKind::Sum) {
    std::vector<std::pair<std::string, Process>> keyed;
    for (const auto& k : kids) keyed.push_back({to_string(k), k});
    std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    kids.clear();
    for (auto& [s, k] : keyed) kids.push_back(k);
  }
  if (kids.empty()) return p;
  return with_kids(*p, kids);
}

}  // namespace detail

/// A normal form with a key that is equal for structurally congruent terms.
struct CanonicalForm {
  Process term;
  std::string key;
  std::size_t hash = 0;
};

/// Key of a term that is already in normal form.
inline std::string canonical_key(const Process& normalized) { return detail::KeyEncoder().encode(normalized); }

inline CanonicalForm canonical(const Process& p, const Environment& env, NormalizeOptions opts = {}) {
  CanonicalForm out;
  Process n = normalize(p, env, opts);
  out.term = detail::sort_for_display(n);
  out.key = canonical_key(n);
  out.hash = std::hash<std::string>{}(out.key);
  return out;
}

/// Decides P ≡ Q by comparing canonical keys, also trying a few extra unfoldings of
/// guarded constants on each side so that a constant and its one-step unfolding agree.
inline bool struct_congruent(const Process& p, const Process& q, const Environment& env, int max_extra_unfold = 2) {
  std::vector<std::string> keys_p;
  std::vector<std::string> keys_q;
  for (int d = 0; d <= max_extra_unfold; ++d) {
    NormalizeOptions o;
    o.guarded_unfold = d;
    keys_p.push_back(canonical(p, env, o).key);
    keys_q.push_back(canonical(q, env, o).key);
  }
  for (const auto& a : keys_p)
    for (const auto& b : keys_q)
      if (a == b) return true;
  return false;
}

/// Free ambient names with an unrestricted occurrence at top level (the strong barbs).
inline std::set<AmbientName> top_level_ambients(const Process& normalized) {
  Region r = open_region(normalized);
  std::set<AmbientName> bound;
  std::set<std::string> bound_ports;
  for (const auto& b : r.binders) {
    if (b.is_port)
      bound_ports.insert(b.port);
    else
      bound.insert(b.amb);
  }
  // A name whose decoration mentions a private port is itself private.
  auto hidden = [&](const AmbientName& n) {
    for (const auto& port : bound_ports)
      if (detail::ports_mention(n.ports, port)) return true;
    return false;
  };
  std::set<AmbientName> out;
  for (const auto& part : r.parts)
    if (part->kind == ProcKind::Amb && !bound.count(part->amb) && !hidden(part->amb)) out.insert(part->amb);
  return out;
}

}  // namespace cmc
