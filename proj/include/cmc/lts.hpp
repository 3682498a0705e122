#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "cmc/congruence.hpp"
#include "cmc/operations.hpp"
#include "cmc/printer.hpp"

namespace cmc {

/// Which rule produced a τ; diagnostics only.
struct TauNote {
  enum class Kind { None, Prefix, Comm, In, Out, Ploc, Sloc };
  Kind kind = Kind::None;
  std::string port;
  Value value;
  AmbientName name;

  bool operator==(const TauNote&) const = default;
};

// Value rendering with ambient decorations dropped, as in annotated traces like b(dr).
inline std::string short_value(const Value& v) {
  switch (v.kind) {
    case Value::Kind::Name:
      return v.name.base;
    case Value::Kind::Tuple: {
      std::string out = "(";
      for (std::size_t i = 0; i < v.items.size(); ++i) out += (i ? "," : "") + short_value(v.items[i]);
      return out + ")";
    }
    case Value::Kind::Cons:
      return short_value(v.items[0]) + ":" + short_value(v.items[1]);
    default:
      return to_string(v);
  }
}

/// Short form used in traces: b(dr), in, out, ploc, sloc, tau.
inline std::string short_note(const TauNote& n) {
  switch (n.kind) {
    case TauNote::Kind::None:
      return "";
    case TauNote::Kind::Prefix:
      return "tau";
    case TauNote::Kind::Comm: {
      std::string v = short_value(n.value);
      if (n.value.kind == Value::Kind::Tuple) v = v.substr(1, v.size() - 2);
      return n.port + "(" + v + ")";
    }
    case TauNote::Kind::In:
      return "in";
    case TauNote::Kind::Out:
      return "out";
    case TauNote::Kind::Ploc:
      return "ploc";
    case TauNote::Kind::Sloc:
      return "sloc";
  }
  return "";
}

/// Long form naming the ambient involved: in n, out m, ploc(sm), b(dr{b,c1}).
inline std::string full_note(const TauNote& n) {
  switch (n.kind) {
    case TauNote::Kind::Comm:
      return n.port + "(" + to_string(n.value) + ")";
    case TauNote::Kind::In:
      return "in " + to_string(n.name);
    case TauNote::Kind::Out:
      return "out " + to_string(n.name);
    case TauNote::Kind::Ploc:
      return "ploc(" + to_string(n.name) + ")";
    case TauNote::Kind::Sloc:
      return "sloc(" + to_string(n.name) + ")";
    default:
      return short_note(n);
  }
}

struct Label {
  enum class Kind {
    Tau,
    Input,   // a(v)
    Output,  // ~a(v)
    In,      // in n
    Out,     // out n
    // auxiliary
    Enter,
    Move,
    Exit,
    Ploc,
    Sloc,
    Ploc1,
    Sloc1,
    Amb
  };
  Kind kind = Kind::Tau;
  std::string port;
  Value value;
  AmbientName name;
  std::string var;
  TauNote note;

  bool is_aux() const { return kind >= Kind::Enter; }
  bool is_action() const { return kind == Kind::Input || kind == Kind::Output; }
  bool is_capability() const { return kind == Kind::In || kind == Kind::Out; }

  static Label tau(TauNote n = {}) {
    Label l;
    l.note = std::move(n);
    return l;
  }
  static Label input(std::string a, Value v = {}) {
    Label l;
    l.kind = Kind::Input;
    l.port = std::move(a);
    l.value = std::move(v);
    return l;
  }
  static Label output(std::string a, Value v) {
    Label l;
    l.kind = Kind::Output;
    l.port = std::move(a);
    l.value = std::move(v);
    return l;
  }
  static Label of_name(Kind k, AmbientName n) {
    Label l;
    l.kind = k;
    l.name = std::move(n);
    return l;
  }
  static Label of_var(Kind k, std::string z) {
    Label l;
    l.kind = k;
    l.var = std::move(z);
    return l;
  }

  // Identity ignoring the τ note.
  std::string key() const {
    switch (kind) {
      case Kind::Tau:
        return "tau";
      case Kind::Input:
        return port + "?(" + cmc::to_string(value) + ")";
      case Kind::Output:
        return port + "!(" + cmc::to_string(value) + ")";
      case Kind::In:
        return "in " + cmc::to_string(name);
      case Kind::Out:
        return "out " + cmc::to_string(name);
      case Kind::Enter:
        return "enter " + cmc::to_string(name);
      case Kind::Move:
        return "move " + cmc::to_string(name);
      case Kind::Exit:
        return "exit " + cmc::to_string(name);
      case Kind::Ploc:
        return "ploc(" + var + ")";
      case Kind::Sloc:
        return "sloc(" + var + ")";
      case Kind::Ploc1:
        return "ploc1(" + var + ")";
      case Kind::Sloc1:
        return "sloc1(" + var + ")";
      case Kind::Amb:
        return "amb " + cmc::to_string(name);
    }
    return "?";
  }
  std::string to_string() const { return key(); }
};

/// (ν privates)⟨excerpt⟩residue
struct Concretion {
  std::vector<Binder> privates;
  Process excerpt;
  Process residue;
};

/// Outcome of a derivation: a process, a concretion, or (for inputs, before the received
/// value is chosen) a process abstracted over the pattern variables.
struct Outcome {
  enum class Kind { Proc, Concr, Abstraction };
  Kind kind = Kind::Proc;
  Process proc;
  Concretion concr;
  std::vector<std::string> vars;

  static Outcome of(Process p) {
    Outcome o;
    o.proc = std::move(p);
    return o;
  }
  static Outcome of(Concretion k) {
    Outcome o;
    o.kind = Kind::Concr;
    o.concr = std::move(k);
    return o;
  }
  static Outcome abstraction(std::vector<std::string> vars, Process p) {
    Outcome o;
    o.kind = Kind::Abstraction;
    o.vars = std::move(vars);
    o.proc = std::move(p);
    return o;
  }
};

struct Derivation {
  Label label;
  Outcome outcome;
};

struct LtsOptions {
  // Extend (Sum) from action labels to capability and auxiliary labels.
  bool sum_all_labels = true;
  NormalizeOptions normalize;
};

/// Reserved variable for ploc1/sloc1 lookahead; the parser never produces a `$`.
inline const std::string kLookaheadVar = "$z";

namespace detail {

inline bool binder_in(const Binder& b, const FreeNames& fn) {
  return b.is_port ? fn.ports.count(b.port) > 0 : fn.ambients.count(b.amb) > 0;
}

inline bool binder_clashes(const Binder& b, const FreeNames& fn) {
  if (b.is_port) return fn.ports.count(b.port) > 0;
  for (const auto& n : fn.ambients)
    if (n.base == b.amb.base) return true;
  return false;
}

inline Process restrict_all(const std::vector<Binder>& bs, Process p) {
  for (auto it = bs.rbegin(); it != bs.rend(); ++it)
    p = it->is_port ? restrict_port(it->port, p) : restrict(it->amb, p);
  return p;
}

class SosEngine {
 public:
  SosEngine(const Environment& env, LtsOptions opts) : env_(env), opts_(opts) {}

  void reserve_idents(const Process& p) {
    auto ids = all_idents(p);
    used_.insert(ids.begin(), ids.end());
  }

  std::vector<Derivation> derive(const Process& p, int depth = 0) {
    auto hit = cache_.find(p.get());
    if (hit != cache_.end()) return hit->second.second;
    auto result = derive_uncached(p, depth);
    cache_[p.get()] = {p, result};
    return result;
  }

  std::vector<Derivation> derive_uncached(const Process& p, int depth) {
    using LK = Label::Kind;
    std::vector<Derivation> out;
    switch (p->kind) {
      case ProcKind::Zero:
      case ProcKind::Cond:
        break;
      case ProcKind::Call: {
        // (Const)
        if (depth >= opts_.normalize.unfold_budget) throw BudgetExceeded("unfolding budget exhausted at " + p->ident);
        std::vector<Value> args;
        for (const auto& v : p->values) args.push_back(simplify(v, env_));
        const Definition& d = env_.lookup(p->ident, args.size());
        Process body = normalize(substitute_all(d.body, d.params, args), env_, opts_.normalize);
        reserve_idents(body);
        return derive(body, depth + 1);
      }
      case ProcKind::Cap:
        derive_prefix(p, out);
        break;
      case ProcKind::Input:
        out.push_back({Label::input(p->ident), Outcome::abstraction(p->vars, p->body())});
        break;
      case ProcKind::Output:
        // (Output); stuck while the value cannot be evaluated.
        if (is_closed(p->values[0])) out.push_back({Label::output(p->ident, p->values[0]), Outcome::of(p->body())});
        break;
      case ProcKind::Tau:
        out.push_back({Label::tau({TauNote::Kind::Prefix, {}, {}, {}}), Outcome::of(p->body())});
        break;
      case ProcKind::Sum:
        // (Sum), optionally extended beyond action labels.
        for (const auto& k : p->kids)
          for (auto& d : derive(k, depth))
            if (opts_.sum_all_labels || d.label.is_action() || d.label.kind == LK::Tau) out.push_back(std::move(d));
        break;
      case ProcKind::Relabel:
        derive_relabel(p, depth, out);
        break;
      case ProcKind::ResAmb:
      case ProcKind::ResPort:
        derive_restriction(p, depth, out);
        break;
      case ProcKind::Amb:
        derive_ambient(p, depth, out);
        break;
      case ProcKind::Par:
        derive_par(p, depth, out);
        break;
    }
    return out;
  }

  std::string fresh(const std::string& base) {
    std::string f = fresh_ident(strip_digits(base), used_);
    used_.insert(f);
    return f;
  }

  // Renames the concretion's private names away from `avoid`.
  Concretion separate(Concretion k, const FreeNames& avoid) {
    for (auto& b : k.privates) {
      if (!binder_clashes(b, avoid)) continue;
      std::string f = fresh(b.base());
      if (b.is_port) {
        k.excerpt = rename_port(k.excerpt, b.port, f);
        k.residue = rename_port(k.residue, b.port, f);
        b.port = f;
      } else {
        AmbientName nn(f, b.amb.ports);
        k.excerpt = rename_ambient(k.excerpt, b.amb, nn);
        k.residue = rename_ambient(k.residue, b.amb, nn);
        b.amb = nn;
      }
    }
    return k;
  }

 private:
  const Environment& env_;
  LtsOptions opts_;
  std::set<std::string> used_;
  std::map<const ProcNode*, std::pair<Process, std::vector<Derivation>>> cache_;

  static FreeNames merge(FreeNames a, const FreeNames& b) {
    a.ambients.insert(b.ambients.begin(), b.ambients.end());
    a.ports.insert(b.ports.begin(), b.ports.end());
    return a;
  }

  void derive_prefix(const Process& p, std::vector<Derivation>& out) {
    using CK = Capability::Kind;
    const Capability& c = p->cap;
    switch (c.kind) {
      case CK::In:
      case CK::Out:
        // (Act); a capability still naming a variable is stuck.
        if (c.var.empty())
          out.push_back({Label::of_name(c.kind == CK::In ? Label::Kind::In : Label::Kind::Out, c.target),
                         Outcome::of(p->body())});
        break;
      case CK::Ploc:
      case CK::Sloc: {
        // (Act-Ploc), (Act-Sloc)
        Process next;
        try {
          next = substitute(p->body(), c.var, Value::var(kLookaheadVar));
        } catch (const TypeMismatch&) {
          break;
        }
        out.push_back({Label::of_var(c.kind == CK::Ploc ? Label::Kind::Ploc : Label::Kind::Sloc, kLookaheadVar),
                       Outcome::of(next)});
        break;
      }
      default:
        break;
    }
  }

  void derive_relabel(const Process& p, int depth, std::vector<Derivation>& out) {
    const RelabelMap& f = p->relabel;
    for (auto& d : derive(p->body(), depth)) {
      // (Rel): only action labels are renamed.
      if (d.label.is_action()) d.label.port = f.apply(d.label.port);
      if (d.label.kind == Label::Kind::Tau && d.label.note.kind == TauNote::Kind::Comm)
        d.label.note.port = f.apply(d.label.note.port);
      switch (d.outcome.kind) {
        case Outcome::Kind::Proc:
        case Outcome::Kind::Abstraction:
          d.outcome.proc = relabel(d.outcome.proc, f);
          break;
        case Outcome::Kind::Concr: {
          // The ports named by f are free; privates sharing them are renamed first.
          FreeNames named;
          for (const auto& [from, to] : f.entries) named.ports.insert({from, to});
          d.outcome.concr = separate(d.outcome.concr, named);
          d.outcome.concr.excerpt = relabel(d.outcome.concr.excerpt, f);
          d.outcome.concr.residue = relabel(d.outcome.concr.residue, f);
          break;
        }
      }
      out.push_back(std::move(d));
    }
  }

  static bool label_mentions(const Label& l, const Binder& b) {
    if (b.is_port) {
      // Ports in a decoration are free names of the decorated name.
      if (l.is_action()) {
        return l.port == b.port || free_names(l.value).ports.count(b.port) > 0;
      }
      switch (l.kind) {
        case Label::Kind::In:
        case Label::Kind::Out:
        case Label::Kind::Enter:
        case Label::Kind::Move:
        case Label::Kind::Exit:
        case Label::Kind::Amb:
          return detail::ports_mention(l.name.ports, b.port);
        default:
          return false;
      }
    }
    switch (l.kind) {
      case Label::Kind::Input:
      case Label::Kind::Output:
        return free_names(l.value).ambients.count(b.amb) > 0;
      case Label::Kind::In:
      case Label::Kind::Out:
      case Label::Kind::Enter:
      case Label::Kind::Move:
      case Label::Kind::Exit:
      case Label::Kind::Amb:
        return l.name == b.amb;
      default:
        return false;
    }
  }

  void derive_restriction(const Process& p, int depth, std::vector<Derivation>& out) {
    Binder b = p->kind == ProcKind::ResAmb ? Binder{false, p->amb, {}} : Binder{true, {}, p->ident};
    for (auto& d : derive(p->body(), depth)) {
      // (λ-Res) and (Res-Act): the bound name may not occur in the label.
      if (label_mentions(d.label, b)) continue;
      switch (d.outcome.kind) {
        case Outcome::Kind::Proc:
        case Outcome::Kind::Abstraction:
          d.outcome.proc = restrict_all({b}, d.outcome.proc);
          break;
        case Outcome::Kind::Concr: {
          Concretion& k = d.outcome.concr;
          if (binder_in(b, free_names(k.excerpt)))
            k.privates.insert(k.privates.begin(), b);
          else
            k.residue = restrict_all({b}, k.residue);
          break;
        }
      }
      out.push_back(std::move(d));
    }
  }

  void derive_ambient(const Process& p, int depth, std::vector<Derivation>& out) {
    using LK = Label::Kind;
    const AmbientName& m = p->amb;
    // (Co-Enter), (Sib-Amb)
    out.push_back({Label::of_name(LK::Move, m), Outcome::of(Concretion{{}, p->body(), zero()})});
    out.push_back({Label::of_name(LK::Amb, m), Outcome::of(p->body())});

    for (auto& d : derive(p->body(), depth)) {
      const Label& l = d.label;
      switch (l.kind) {
        case LK::In:
          // (Enter)
          out.push_back(
              {Label::of_name(LK::Enter, l.name), Outcome::of(Concretion{{}, amb(m, d.outcome.proc), zero()})});
          break;
        case LK::Out:
          // (Exit)
          out.push_back(
              {Label::of_name(LK::Exit, l.name), Outcome::of(Concretion{{}, amb(m, d.outcome.proc), zero()})});
          break;
        case LK::Exit: {
          // (τ-Out), with (**) by renaming the privates.
          if (l.name != m) break;
          Concretion k = separate(d.outcome.concr, FreeNames{{m}, {}});
          Process target = restrict_all(k.privates, par(k.excerpt, amb(m, k.residue)));
          out.push_back({Label::tau({TauNote::Kind::Out, {}, {}, m}), Outcome::of(target)});
          break;
        }
        case LK::Tau:
          // (τ-Amb)
          out.push_back({l, Outcome::of(amb(m, d.outcome.proc))});
          break;
        case LK::Input:
        case LK::Output:
          // (Global-Com)
          if (m.ports.admits(l.port)) {
            Derivation g = d;
            g.outcome.proc = amb(m, d.outcome.proc);
            out.push_back(std::move(g));
          }
          break;
        case LK::Ploc:
        case LK::Sloc:
          // (Ploc1), (Sloc1): the lookahead step stays in place with the placeholder still free.
          out.push_back({Label::of_var(l.kind == LK::Ploc ? LK::Ploc1 : LK::Sloc1, kLookaheadVar),
                         Outcome::of(amb(m, d.outcome.proc))});
          break;
        case LK::Ploc1: {
          // (τ-Ploc)
          try {
            Process target = substitute(d.outcome.proc, kLookaheadVar, Value::of_name(m));
            out.push_back({Label::tau({TauNote::Kind::Ploc, {}, {}, m}), Outcome::of(amb(m, target))});
          } catch (const TypeMismatch&) {
          }
          break;
        }
        default:
          break;
      }
    }
  }

  void derive_par(const Process& p, int depth, std::vector<Derivation>& out) {
    using LK = Label::Kind;
    const auto& kids = p->kids;
    const std::size_t n = kids.size();
    std::vector<std::vector<Derivation>> ds(n);
    for (std::size_t i = 0; i < n; ++i) ds[i] = derive(kids[i], depth);

    auto rest_of = [&](std::size_t i, std::size_t j = SIZE_MAX) {
      std::vector<Process> r;
      for (std::size_t k = 0; k < n; ++k)
        if (k != i && k != j) r.push_back(kids[k]);
      return r;
    };

    for (std::size_t i = 0; i < n; ++i) {
      auto rest = rest_of(i);
      Process rest_par = par(rest);
      for (const auto& d : ds[i]) {
        Derivation w = d;
        switch (d.outcome.kind) {
          case Outcome::Kind::Proc:
            // (Par-Act), (λ-Par); (Par-Amb) keeps only the ambient's contents.
            if (d.label.kind != LK::Amb) w.outcome.proc = par(d.outcome.proc, rest_par);
            break;
          case Outcome::Kind::Abstraction:
            w.outcome.proc = par(d.outcome.proc, rest_par);
            break;
          case Outcome::Kind::Concr: {
            Concretion k = separate(d.outcome.concr, free_names(rest_par));
            k.residue = par(k.residue, rest_par);
            w.outcome = Outcome::of(k);
            break;
          }
        }
        out.push_back(std::move(w));
      }
    }

    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        for (const auto& di : ds[i]) {
          if (di.label.kind == LK::Output) {
            // (Par-Com)
            for (const auto& dj : ds[j]) {
              if (dj.label.kind != LK::Input || dj.label.port != di.label.port) continue;
              auto vals = match_pattern(dj.outcome.vars, di.label.value);
              if (!vals) continue;
              Process received;
              try {
                received = substitute_all(dj.outcome.proc, dj.outcome.vars, *vals);
              } catch (const TypeMismatch&) {
                continue;
              }
              auto parts = rest_of(i, j);
              parts.push_back(di.outcome.proc);
              parts.push_back(received);
              out.push_back({Label::tau({TauNote::Kind::Comm, di.label.port, di.label.value, {}}),
                             Outcome::of(par(parts))});
            }
          } else if (di.label.kind == LK::Enter) {
            // (τ-In) with (*) by renaming privates apart.
            for (const auto& dj : ds[j]) {
              if (dj.label.kind != LK::Move || dj.label.name != di.label.name) continue;
              const AmbientName& host = dj.label.name;
              FreeNames outside = merge(free_names(par(rest_of(i, j))), FreeNames{{host}, {}});
              Concretion kq = dj.outcome.concr;
              Concretion kp = separate(di.outcome.concr, merge(outside, free_names(par(kq.excerpt, kq.residue))));
              FreeNames avoid_q = merge(outside, free_names(par(kp.excerpt, kp.residue)));
              for (const auto& b : kp.privates) {
                if (b.is_port)
                  avoid_q.ports.insert(b.port);
                else
                  avoid_q.ambients.insert(b.amb);
              }
              kq = separate(kq, avoid_q);
              Process moved = amb(host, par(kp.excerpt, kq.excerpt));
              Process inner = restrict_all(kp.privates, restrict_all(kq.privates, par({moved, kp.residue, kq.residue})));
              auto parts = rest_of(i, j);
              parts.push_back(inner);
              out.push_back({Label::tau({TauNote::Kind::In, {}, {}, dj.label.name}), Outcome::of(par(parts))});
            }
          } else if (di.label.kind == LK::Sloc1) {
            // (τ-Sloc): the sibling is found among the other components by (Sib-Amb)/(Par-Amb).
            std::set<AmbientName> siblings;
            for (const auto& dj : ds[j])
              if (dj.label.kind == LK::Amb) siblings.insert(dj.label.name);
            for (const auto& nb : siblings) {
              Process filled;
              try {
                filled = substitute(di.outcome.proc, kLookaheadVar, Value::of_name(nb));
              } catch (const TypeMismatch&) {
                continue;
              }
              auto others = rest_of(i);
              others.push_back(filled);
              out.push_back({Label::tau({TauNote::Kind::Sloc, {}, {}, nb}), Outcome::of(par(others))});
            }
          }
        }
      }
    }
  }
};

}  // namespace detail

/// The closed values a received input may take: closed output values occurring anywhere
/// in the system or the definitions, free ambient names, and declared entries.
struct ValueUniverse {
  std::vector<Value> values;

  static ValueUniverse of(const Process& system, const Environment& env) {
    std::set<Value> vs(env.universe.begin(), env.universe.end());
    std::function<void(const Process&)> walk = [&](const Process& q) {
      if (q->kind == ProcKind::Output) {
        Value v = simplify(q->values[0], env);
        if (is_closed(v)) vs.insert(v);
      }
      for (const auto& k : q->kids) walk(k);
    };
    walk(system);
    for (const auto& [name, d] : env.defs) walk(d.body);
    for (const auto& n : free_names(system).ambients) vs.insert(Value::of_name(n));
    ValueUniverse u;
    u.values.assign(vs.begin(), vs.end());
    return u;
  }
};

struct Transition {
  Label label;
  CanonicalForm target;
};

/// Auxiliary and first-class derivations of `p` exactly as the rules produce them.
inline std::vector<Derivation> aux_transitions(const Process& p, const Environment& env, LtsOptions opts = {}) {
  detail::SosEngine engine(env, opts);
  Process n = normalize(p, env, opts.normalize);
  engine.reserve_idents(n);
  for (const auto& [name, d] : env.defs) engine.reserve_idents(d.body);
  return engine.derive(n);
}

/// First-class transitions (τ, inputs over the universe, outputs, in/out), targets in canonical form.
/// Several derivations reaching the same target under the same label are reported once.
inline std::vector<Transition> transitions(const Process& p, const Environment& env, const ValueUniverse& universe,
                                           LtsOptions opts = {}) {
  std::vector<Transition> out;
  std::set<std::pair<std::string, std::string>> seen;
  auto emit = [&](Label l, const Process& target) {
    CanonicalForm cf = canonical(target, env, opts.normalize);
    std::string k = l.key() + (l.kind == Label::Kind::Tau ? "|" + full_note(l.note) : "");
    if (!seen.insert({k, cf.key}).second) return;
    out.push_back({std::move(l), std::move(cf)});
  };
  for (auto& d : aux_transitions(p, env, opts)) {
    const Label& l = d.label;
    if (l.is_aux() || (l.kind != Label::Kind::Tau && !l.is_action() && !l.is_capability())) continue;
    if (l.kind == Label::Kind::Input) {
      for (const auto& v : universe.values) {
        auto vals = match_pattern(d.outcome.vars, v);
        if (!vals) continue;
        Process next;
        try {
          next = substitute_all(d.outcome.proc, d.outcome.vars, *vals);
        } catch (const TypeMismatch&) {
          continue;
        }
        emit(Label::input(l.port, v), next);
      }
      continue;
    }
    emit(l, d.outcome.proc);
  }
  return out;
}

inline std::vector<Transition> transitions(const Process& p, const Environment& env, LtsOptions opts = {}) {
  return transitions(p, env, ValueUniverse::of(p, env), opts);
}

// ---------------------------------------------------------------------------
// Explicit state spaces

struct LtsEdge {
  std::size_t src = 0;
  Label label;
  std::size_t dst = 0;
};

struct LtsGraph {
  std::vector<CanonicalForm> states;
  std::vector<LtsEdge> edges;
  std::size_t root = 0;
  bool truncated = false;

  std::vector<std::vector<std::size_t>> out_edges() const {
    std::vector<std::vector<std::size_t>> idx(states.size());
    for (std::size_t e = 0; e < edges.size(); ++e) idx[edges[e].src].push_back(e);
    return idx;
  }
};

struct ExploreOptions {
  std::size_t max_states = 100000;
  bool tau_only = false;
  LtsOptions lts;
  // States further than this many steps from the root are kept but not expanded.
  std::optional<std::size_t> max_depth;
  // Input values; computed from the explored term when absent.
  std::optional<ValueUniverse> universe;
};

/// Breadth-first construction of the reachable LTS. State ids follow discovery order, which is
/// deterministic because transitions are enumerated in a fixed order.
inline LtsGraph explore(const Process& p, const Environment& env, ExploreOptions opts = {}) {
  LtsGraph g;
  ValueUniverse universe = opts.universe ? *opts.universe : ValueUniverse::of(p, env);
  std::unordered_map<std::string, std::size_t> index;
  std::deque<std::size_t> frontier;
  std::vector<std::size_t> depth;
  auto add = [&](const CanonicalForm& cf, std::size_t d) -> std::optional<std::size_t> {
    auto it = index.find(cf.key);
    if (it != index.end()) return it->second;
    if (g.states.size() >= opts.max_states) {
      g.truncated = true;
      return std::nullopt;
    }
    index[cf.key] = g.states.size();
    g.states.push_back(cf);
    depth.push_back(d);
    frontier.push_back(g.states.size() - 1);
    return g.states.size() - 1;
  };
  add(canonical(p, env, opts.lts.normalize), 0);
  while (!frontier.empty()) {
    std::size_t s = frontier.front();
    frontier.pop_front();
    if (opts.max_depth && depth[s] >= *opts.max_depth) continue;
    auto ts = transitions(g.states[s].term, env, universe, opts.lts);
    std::vector<LtsEdge> local;
    for (auto& t : ts) {
      if (opts.tau_only && t.label.kind != Label::Kind::Tau) continue;
      auto dst = add(t.target, depth[s] + 1);
      if (dst) local.push_back({s, t.label, *dst});
    }
    std::stable_sort(local.begin(), local.end(), [](const LtsEdge& a, const LtsEdge& b) {
      if (a.label.key() != b.label.key()) return a.label.key() < b.label.key();
      return a.dst < b.dst;
    });
    g.edges.insert(g.edges.end(), local.begin(), local.end());
  }
  return g;
}

/// τ* α τ* successors for every state and non-τ label key, and τ* (reflexive) for τ.
struct WeakClosure {
  std::vector<std::set<std::size_t>> tau_star;
  std::vector<std::map<std::string, std::set<std::size_t>>> weak;
};

inline WeakClosure weak_closure(const LtsGraph& g) {
  const std::size_t n = g.states.size();
  WeakClosure w;
  w.tau_star.assign(n, {});
  w.weak.assign(n, {});
  std::vector<std::vector<std::size_t>> tau_succ(n);
  for (const auto& e : g.edges)
    if (e.label.kind == Label::Kind::Tau) tau_succ[e.src].push_back(e.dst);
  for (std::size_t s = 0; s < n; ++s) {
    std::vector<std::size_t> stack{s};
    w.tau_star[s].insert(s);
    while (!stack.empty()) {
      std::size_t u = stack.back();
      stack.pop_back();
      for (auto v : tau_succ[u])
        if (w.tau_star[s].insert(v).second) stack.push_back(v);
    }
  }
  auto idx = g.out_edges();
  for (std::size_t s = 0; s < n; ++s) {
    for (auto u : w.tau_star[s]) {
      for (auto e : idx[u]) {
        const auto& edge = g.edges[e];
        if (edge.label.kind == Label::Kind::Tau) continue;
        auto& targets = w.weak[s][edge.label.key()];
        targets.insert(w.tau_star[edge.dst].begin(), w.tau_star[edge.dst].end());
      }
    }
    w.weak[s]["tau"] = w.tau_star[s];
  }
  return w;
}

}  // namespace cmc
