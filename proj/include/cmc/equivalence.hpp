#pragma once

#include <algorithm>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "cmc/error.hpp"
#include "cmc/lts.hpp"
#include "cmc/parser.hpp"
#include "cmc/reduction.hpp"

namespace cmc {

enum class Tri { No, Yes, Unknown };

inline std::string to_string(Tri t) {
  switch (t) {
    case Tri::No:
      return "no";
    case Tri::Yes:
      return "yes";
    case Tri::Unknown:
      return "unknown";
  }
  return "?";
}

/// β ∈ {in n, out n, enter n, move n, exit n}.
struct CapBarb {
  Label::Kind kind = Label::Kind::Move;
  AmbientName name;

  std::string key() const { return Label::of_name(kind, name).key(); }

  // "move n", "enter n{a}", ...
  static CapBarb parse(const std::string& text) {
    static const std::map<std::string, Label::Kind> kinds{{"in", Label::Kind::In},
                                                          {"out", Label::Kind::Out},
                                                          {"enter", Label::Kind::Enter},
                                                          {"move", Label::Kind::Move},
                                                          {"exit", Label::Kind::Exit}};
    auto sp = text.find(' ');
    auto it = kinds.find(text.substr(0, sp));
    if (sp == std::string::npos || it == kinds.end())
      throw Error("capability barb must be one of in/out/enter/move/exit followed by a name: " + text);
    Value v = parse_value(text.substr(sp + 1));
    if (v.kind != Value::Kind::Name) throw Error("capability barb needs an ambient name: " + text);
    return {it->second, v.name};
  }
};

struct EquivOptions {
  std::size_t max_states = 100000;
  LtsOptions lts;
};

// ---------------------------------------------------------------------------
// Barbs

inline bool has_barb(const CanonicalForm& state, const AmbientName& n) {
  return top_level_ambients(state.term).count(n) > 0;
}

inline bool has_cap_barb(const Process& p, const CapBarb& beta, const Environment& env, const LtsOptions& opts = {}) {
  for (const auto& d : aux_transitions(p, env, opts))
    if (d.label.kind == beta.kind && d.label.name == beta.name) return true;
  return false;
}

namespace detail {

template <class Pred>
Tri weak_predicate(const Process& p, const Environment& env, const EquivOptions& opts, Pred pred) {
  ExploreOptions eo;
  eo.max_states = opts.max_states;
  eo.tau_only = true;
  eo.lts = opts.lts;
  LtsGraph g = explore(p, env, eo);
  for (const auto& s : g.states)
    if (pred(s)) return Tri::Yes;
  return g.truncated ? Tri::Unknown : Tri::No;
}

}  // namespace detail

/// p ⇓ n: some τ*-successor has n at top level.
inline Tri weak_barb(const Process& p, const AmbientName& n, const Environment& env, EquivOptions opts = {}) {
  return detail::weak_predicate(p, env, opts, [&](const CanonicalForm& s) { return has_barb(s, n); });
}

/// p ⇓ β: some τ*-successor has a β-labelled (possibly auxiliary) transition.
inline Tri weak_cap_barb(const Process& p, const CapBarb& beta, const Environment& env, EquivOptions opts = {}) {
  return detail::weak_predicate(p, env, opts,
                                [&](const CanonicalForm& s) { return has_cap_barb(s.term, beta, env, opts.lts); });
}

// ---------------------------------------------------------------------------
// Bisimulation

struct BisimVerdict {
  Tri equivalent = Tri::Unknown;
  // Visible labels after which one side reaches a state whose barb the other side cannot match.
  // With an empty failing_barb the last label is one the other side cannot answer at all.
  std::vector<std::string> witness;
  std::string failing_barb;
  // "left" when the left term shows the barb, "right" otherwise.
  std::string barb_side;
  std::size_t states = 0;
  bool truncated = false;
};

/// Joint state space of two terms explored over a shared value universe.
struct JointLts {
  LtsGraph graph;
  std::size_t left_root = 0;
  std::size_t right_root = 0;
  std::size_t left_size = 0;
};

inline JointLts joint_lts(const Process& p, const Process& q, const Environment& env, const EquivOptions& opts) {
  ValueUniverse u = ValueUniverse::of(par(p, q), env);
  ExploreOptions eo;
  eo.max_states = opts.max_states;
  eo.lts = opts.lts;
  eo.universe = u;
  LtsGraph gp = explore(p, env, eo);
  LtsGraph gq = explore(q, env, eo);
  JointLts j;
  j.graph = gp;
  j.left_root = gp.root;
  j.left_size = gp.states.size();
  const std::size_t off = gp.states.size();
  j.right_root = gq.root + off;
  j.graph.states.insert(j.graph.states.end(), gq.states.begin(), gq.states.end());
  for (auto e : gq.edges) {
    e.src += off;
    e.dst += off;
    j.graph.edges.push_back(std::move(e));
  }
  j.graph.truncated = gp.truncated || gq.truncated;
  return j;
}

/// Coarsest partition of a finite LTS that respects the initial colouring and is stable under
/// the τ-saturated transition relation (τ* for τ, τ*ατ* otherwise). Returns a block per state.
inline std::vector<std::size_t> weak_bisim_partition(const LtsGraph& g, const WeakClosure& w,
                                                     const std::vector<std::string>& colour) {
  const std::size_t n = g.states.size();
  std::vector<std::size_t> block(n);
  {
    std::map<std::string, std::size_t> ids;
    for (std::size_t s = 0; s < n; ++s) block[s] = ids.emplace(colour[s], ids.size()).first->second;
  }
  for (;;) {
    using Signature = std::pair<std::size_t, std::set<std::pair<std::string, std::size_t>>>;
    std::map<Signature, std::size_t> ids;
    std::vector<std::size_t> next(n);
    for (std::size_t s = 0; s < n; ++s) {
      Signature sig{block[s], {}};
      for (const auto& [label, targets] : w.weak[s])
        for (auto t : targets) sig.second.insert({label, block[t]});
      next[s] = ids.emplace(std::move(sig), ids.size()).first->second;
    }
    const bool stable = ids.size() == std::set<std::size_t>(block.begin(), block.end()).size();
    block = std::move(next);
    if (stable) return block;
  }
}

namespace detail {

// Barbs per state, already closed under τ*.
inline std::vector<std::set<std::string>> weak_barb_sets(const std::vector<std::set<std::string>>& strong,
                                                         const WeakClosure& w) {
  std::vector<std::set<std::string>> out(strong.size());
  for (std::size_t s = 0; s < strong.size(); ++s)
    for (auto t : w.tau_star[s]) out[s].insert(strong[t].begin(), strong[t].end());
  return out;
}

// Searches for a visible trace after which `from` reaches a state with a weak barb that no state
// reachable from `other` along the same trace has, or a trace `other` cannot follow.
inline bool find_witness(std::size_t from, std::size_t other, const WeakClosure& w,
                         const std::vector<std::set<std::string>>& barbs, std::vector<std::string>& trace,
                         std::string& barb) {
  using Node = std::pair<std::size_t, std::set<std::size_t>>;
  std::map<Node, std::pair<Node, std::string>> parent;
  std::set<Node> seen;
  std::deque<Node> queue;
  Node start{from, w.tau_star[other]};
  seen.insert(start);
  queue.push_back(start);
  auto trace_to = [&](Node at) {
    trace.clear();
    while (at != start) {
      const auto& [prev, label] = parent.at(at);
      trace.push_back(label);
      at = prev;
    }
    std::reverse(trace.begin(), trace.end());
  };
  while (!queue.empty()) {
    Node cur = queue.front();
    queue.pop_front();
    std::set<std::string> matched;
    for (auto s : cur.second) matched.insert(barbs[s].begin(), barbs[s].end());
    for (const auto& b : barbs[cur.first]) {
      if (matched.count(b)) continue;
      barb = b;
      trace_to(cur);
      return true;
    }
    for (const auto& [label, targets] : w.weak[cur.first]) {
      if (label == "tau") continue;
      std::set<std::size_t> others;
      for (auto s : cur.second) {
        auto it = w.weak[s].find(label);
        if (it != w.weak[s].end()) others.insert(it->second.begin(), it->second.end());
      }
      if (others.empty()) {
        barb.clear();
        trace_to(cur);
        trace.push_back(label);
        return true;
      }
      for (auto t : targets) {
        Node nxt{t, others};
        if (!seen.insert(nxt).second) continue;
        parent.emplace(nxt, std::make_pair(cur, label));
        queue.push_back(std::move(nxt));
      }
    }
  }
  return false;
}

inline BisimVerdict decide(const JointLts& j, const std::vector<std::set<std::string>>& strong_barbs) {
  BisimVerdict v;
  v.states = j.graph.states.size();
  v.truncated = j.graph.truncated;
  if (v.truncated) return v;
  WeakClosure w = weak_closure(j.graph);
  auto barbs = weak_barb_sets(strong_barbs, w);
  std::vector<std::string> colour;
  for (const auto& b : barbs) {
    std::string c;
    for (const auto& x : b) c += x + "\n";
    colour.push_back(c);
  }
  auto block = weak_bisim_partition(j.graph, w, colour);
  if (block[j.left_root] == block[j.right_root]) {
    v.equivalent = Tri::Yes;
    return v;
  }
  v.equivalent = Tri::No;
  if (find_witness(j.left_root, j.right_root, w, barbs, v.witness, v.failing_barb))
    v.barb_side = "left";
  else if (find_witness(j.right_root, j.left_root, w, barbs, v.witness, v.failing_barb))
    v.barb_side = "right";
  return v;
}

}  // namespace detail

/// Weak barbed bisimilarity: visible labels are inputs, outputs and in/out capabilities,
/// τ steps are answered by τ*, and a top-level ambient must be matched weakly.
inline BisimVerdict weak_barbed_bisim(const Process& p, const Process& q, const Environment& env,
                                      EquivOptions opts = {}) {
  JointLts j = joint_lts(p, q, env, opts);
  std::vector<std::set<std::string>> strong;
  for (const auto& s : j.graph.states) {
    std::set<std::string> b;
    for (const auto& n : top_level_ambients(s.term)) b.insert(to_string(n));
    strong.push_back(std::move(b));
  }
  return detail::decide(j, strong);
}

/// The β-barbed variant: the only observed barb is β.
inline BisimVerdict weak_cap_barbed_bisim(const Process& p, const Process& q, const CapBarb& beta,
                                          const Environment& env, EquivOptions opts = {}) {
  JointLts j = joint_lts(p, q, env, opts);
  std::vector<std::set<std::string>> strong;
  for (const auto& s : j.graph.states) {
    std::set<std::string> b;
    if (has_cap_barb(s.term, beta, env, opts.lts)) b.insert(beta.key());
    strong.push_back(std::move(b));
  }
  return detail::decide(j, strong);
}

// ---------------------------------------------------------------------------
// Contexts

namespace detail {

inline void require_context(const Process& hole, const AmbientName& target, const AmbientName& shown,
                            const AmbientName& k, const std::string& a) {
  if (target.ports.admits(a))
    throw PreconditionError("port " + a + " must not be admitted by " + to_string(target));
  if (!k.ports.admits(a))
    throw PreconditionError("port " + a + " must be admitted by " + to_string(k));
  FreeNames fn = free_names(hole);
  if (fn.ambients.count(shown)) throw PreconditionError(to_string(shown) + " is free in the hole");
  if (fn.ambients.count(k)) throw PreconditionError(to_string(k) + " is free in the hole");
  if (k == target || k == shown || target == shown)
    throw PreconditionError("context names must be pairwise distinct");
}

// new shown (hole) | new port a (k[in target.out target.a!()] | a?().shown[body])
inline Process gadget(const Process& hole, const AmbientName& target, const AmbientName& shown,
                      const AmbientName& k, const std::string& a, const Process& body, const AmbientName& hidden) {
  Process messenger =
      amb(k, prefix(Capability::in(target), prefix(Capability::out(target), output(a, Value::unit(), zero()))));
  Process receiver = input(a, std::vector<std::string>{}, amb(shown, body));
  return par(restrict(hidden, hole), restrict_port(a, par(messenger, receiver)));
}

}  // namespace detail

/// C1[R] = (new m_A)R | (new port a)(k_C[in n_B.out n_B.a!()] | a?().m_A[P]).
/// R ⇓ move n_B iff C1[R] ⇓ m_A.
inline Process build_context_C1(const Process& hole, const AmbientName& n_B, const AmbientName& m_A,
                                const AmbientName& k_C, const std::string& a, const Process& body = zero()) {
  detail::require_context(hole, n_B, m_A, k_C, a);
  return detail::gadget(hole, n_B, m_A, k_C, a, body, m_A);
}

/// C2[R] = (new n_B)R | (new port a)(k_C[in m_A.out m_A.a!()] | a?().n_B[P]).
/// R ⇓ m_A iff C2[R] ⇓ move n_B.
inline Process build_context_C2(const Process& hole, const AmbientName& m_A, const AmbientName& n_B,
                                const AmbientName& k_C, const std::string& a, const Process& body = zero()) {
  detail::require_context(hole, m_A, n_B, k_C, a);
  return detail::gadget(hole, m_A, n_B, k_C, a, body, n_B);
}

// ---------------------------------------------------------------------------
// Reduction against τ

enum class Subcalculus { T1, T3 };

/// T1 has no action or τ prefixes, no choice and no relabelling; T3 additionally admits ploc/sloc,
/// which T1 forbids. Constants are checked through their definitions.
inline bool in_subcalculus(const Process& p, Subcalculus which, const Environment& env = {}) {
  std::set<std::string> visited;
  std::function<bool(const Process&)> ok = [&](const Process& q) -> bool {
    switch (q->kind) {
      case ProcKind::Input:
      case ProcKind::Output:
      case ProcKind::Tau:
      case ProcKind::Sum:
      case ProcKind::Relabel:
      case ProcKind::Cond:
        return false;
      case ProcKind::Cap:
        if (which == Subcalculus::T1 && (q->cap.kind == Capability::Kind::Ploc || q->cap.kind == Capability::Kind::Sloc))
          return false;
        break;
      case ProcKind::Call: {
        if (!visited.insert(q->ident).second) return true;
        auto d = env.defs.find(q->ident);
        if (d != env.defs.end() && !ok(d->second.body)) return false;
        break;
      }
      default:
        break;
    }
    for (const auto& k : q->kids)
      if (!ok(k)) return false;
    return true;
  };
  return ok(p);
}

struct CoincidenceReport {
  std::set<std::string> reduction_targets;
  std::set<std::string> tau_targets;
  // Soundness failures: reductions without a matching τ-target.
  std::set<std::string> unmatched_reductions;
  // Completeness failures: τ-targets that no reduction reaches.
  std::set<std::string> unmatched_taus;
  // Printed form of every key above.
  std::map<std::string, std::string> display;
  bool exploratory_completeness = false;
  bool sound() const { return unmatched_reductions.empty(); }
  bool complete() const { return unmatched_taus.empty(); }
  bool coincide() const { return sound() && complete(); }
};

/// Compares {P' | P -> P'} and {P' | P --τ--> P'} up to ≡. For T3 a reduction is also matched
/// by a longer τ-sequence (up to `tau_depth` steps) and completeness is only reported.
inline CoincidenceReport coincidence_check(const Process& p, const Environment& env,
                                           Subcalculus which = Subcalculus::T1, std::size_t tau_depth = 3,
                                           LtsOptions opts = {}) {
  if (!in_subcalculus(p, which, env)) throw PreconditionError("term outside the sub-calculus: " + to_string(p));
  CoincidenceReport r;
  r.exploratory_completeness = which == Subcalculus::T3;
  for (const auto& red : reductions(p, env, opts.normalize)) {
    r.reduction_targets.insert(red.target.key);
    r.display[red.target.key] = to_string(red.target.term);
  }
  std::vector<CanonicalForm> frontier;
  for (const auto& t : transitions(p, env, opts))
    if (t.label.kind == Label::Kind::Tau && r.tau_targets.insert(t.target.key).second) {
      r.display[t.target.key] = to_string(t.target.term);
      frontier.push_back(t.target);
    }

  std::set<std::string> reachable = r.tau_targets;
  if (which == Subcalculus::T3) {
    for (std::size_t depth = 1; depth < tau_depth && !frontier.empty(); ++depth) {
      std::vector<CanonicalForm> next;
      for (const auto& s : frontier)
        for (const auto& t : transitions(s.term, env, opts))
          if (t.label.kind == Label::Kind::Tau && reachable.insert(t.target.key).second) next.push_back(t.target);
      frontier = std::move(next);
    }
  }
  for (const auto& k : r.reduction_targets)
    if (!reachable.count(k)) r.unmatched_reductions.insert(k);
  for (const auto& k : r.tau_targets)
    if (!r.reduction_targets.count(k)) r.unmatched_taus.insert(k);
  return r;
}

}  // namespace cmc
