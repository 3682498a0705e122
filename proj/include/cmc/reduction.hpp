#pragma once

#include <string>
#include <vector>

#include "cmc/congruence.hpp"
#include "cmc/operations.hpp"

namespace cmc {

struct RedexAnnotation {
  enum class Kind { RedIn, RedOut, RedPloc, RedSloc };
  Kind kind = Kind::RedIn;
  AmbientName mover;
  AmbientName target;
  // Indices of the enclosing ambients, from the top-level component down to the redex's context.
  std::vector<std::size_t> path;

  std::string to_string() const {
    switch (kind) {
      case Kind::RedIn:
        return cmc::to_string(mover) + " in " + cmc::to_string(target);
      case Kind::RedOut:
        return cmc::to_string(mover) + " out " + cmc::to_string(target);
      case Kind::RedPloc:
        return cmc::to_string(mover) + " ploc " + cmc::to_string(target);
      case Kind::RedSloc:
        return cmc::to_string(mover) + " sloc " + cmc::to_string(target);
    }
    return "?";
  }
};

struct Reduction {
  RedexAnnotation redex;
  CanonicalForm target;
};

namespace detail {

struct PartsStep {
  RedexAnnotation redex;
  std::vector<Process> parts;
};

inline std::vector<Process> amb_parts(const Process& a) { return open_region(a->body()).parts; }

inline std::vector<Process> without(const std::vector<Process>& xs, std::size_t i, std::size_t j = SIZE_MAX) {
  std::vector<Process> out;
  for (std::size_t k = 0; k < xs.size(); ++k)
    if (k != i && k != j) out.push_back(xs[k]);
  return out;
}

// In/out prefixes only count once their target is a name rather than a variable.
inline bool is_cap(const Process& p, Capability::Kind kind) {
  if (p->kind != ProcKind::Cap || p->cap.kind != kind) return false;
  return !p->cap.is_move() || p->cap.var.empty();
}

// Substitution of a name for a capability variable; ill-typed instances are not redexes.
inline std::optional<Process> try_substitute(const Process& p, const std::string& x, const AmbientName& n) {
  try {
    return substitute(p, x, Value::of_name(n));
  } catch (const TypeMismatch&) {
    return std::nullopt;
  }
}

// All one-step rewrites of the multiset `parts` (the contents of one location).
inline std::vector<PartsStep> reduce_parts(const std::vector<Process>& parts) {
  using K = Capability::Kind;
  std::vector<PartsStep> out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const Process& pi = parts[i];
    if (pi->kind != ProcKind::Amb) continue;
    const AmbientName& m = pi->amb;
    auto body = amb_parts(pi);

    for (std::size_t c = 0; c < body.size(); ++c) {
      const Process& comp = body[c];
      // (Red In): m[in n.P | Q] | n[R] -> n[m[P | Q] | R]
      if (is_cap(comp, K::In)) {
        for (std::size_t j = 0; j < parts.size(); ++j) {
          if (j == i || parts[j]->kind != ProcKind::Amb || parts[j]->amb != comp->cap.target) continue;
          auto moved = without(body, c);
          moved.push_back(comp->body());
          auto host = amb_parts(parts[j]);
          host.push_back(amb(m, par(moved)));
          PartsStep s{{RedexAnnotation::Kind::RedIn, m, parts[j]->amb, {}}, without(parts, i, j)};
          s.parts.push_back(amb(parts[j]->amb, par(host)));
          out.push_back(std::move(s));
        }
      }
      // (Red Sloc): m[P] | n[sloc(x).Q | S] -> m[P] | n[Q{x<-m} | S]
      if (is_cap(comp, K::Sloc)) {
        for (std::size_t j = 0; j < parts.size(); ++j) {
          if (j == i || parts[j]->kind != ProcKind::Amb) continue;
          auto q = try_substitute(comp->body(), comp->cap.var, parts[j]->amb);
          if (!q) continue;
          auto nb = without(body, c);
          nb.push_back(*q);
          PartsStep s{{RedexAnnotation::Kind::RedSloc, m, parts[j]->amb, {}}, parts};
          s.parts[i] = amb(m, par(nb));
          out.push_back(std::move(s));
        }
      }
    }

    // Redexes whose context is m itself: a child k of m doing out m or ploc.
    for (std::size_t c = 0; c < body.size(); ++c) {
      const Process& child = body[c];
      if (child->kind != ProcKind::Amb) continue;
      auto cbody = amb_parts(child);
      for (std::size_t d = 0; d < cbody.size(); ++d) {
        const Process& comp = cbody[d];
        // (Red Out): m[k[out m.P | Q] | R] -> k[P | Q] | m[R]
        if (is_cap(comp, K::Out) && comp->cap.target == m) {
          auto moved = without(cbody, d);
          moved.push_back(comp->body());
          PartsStep s{{RedexAnnotation::Kind::RedOut, child->amb, m, {}}, without(parts, i)};
          s.parts.push_back(amb(child->amb, par(moved)));
          s.parts.push_back(amb(m, par(without(body, c))));
          out.push_back(std::move(s));
        }
        // (Red Ploc): m[k[ploc(x).P | Q] | R] -> m[k[P{x<-m} | Q] | R]
        if (is_cap(comp, K::Ploc)) {
          auto q = try_substitute(comp->body(), comp->cap.var, m);
          if (!q) continue;
          auto kb = without(cbody, d);
          kb.push_back(*q);
          auto mb = body;
          mb[c] = amb(child->amb, par(kb));
          PartsStep s{{RedexAnnotation::Kind::RedPloc, child->amb, m, {}}, parts};
          s.parts[i] = amb(m, par(mb));
          out.push_back(std::move(s));
        }
      }
    }

    // Ambient context: reduce inside m.
    for (auto& inner : reduce_parts(body)) {
      PartsStep s{inner.redex, parts};
      s.redex.path.insert(s.redex.path.begin(), i);
      s.parts[i] = amb(m, par(inner.parts));
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace detail

/// Every P' with p -> P' by (Red In), (Red Out), (Red Ploc) and (Red Sloc) under ν, | and
/// ambient contexts. Redexes are matched on the normal form, which realizes (Red ≡).
inline std::vector<Reduction> reductions(const Process& p, const Environment& env, NormalizeOptions opts = {}) {
  Region r = open_region(normalize(p, env, opts));
  std::vector<Reduction> out;
  for (auto& step : detail::reduce_parts(r.parts)) {
    Region next{r.binders, step.parts};
    out.push_back({step.redex, canonical(assemble(next), env, opts)});
  }
  return out;
}

struct ReductionTrace {
  std::vector<Reduction> steps;
  bool exhausted = false;  // stopped at max_steps while reductions remained
};

/// Repeatedly applies the reduction whose target has the least canonical key.
inline ReductionTrace reduce_fully(const Process& p, const Environment& env, std::size_t max_steps,
                                   NormalizeOptions opts = {}) {
  ReductionTrace trace;
  Process current = p;
  for (;;) {
    auto next = reductions(current, env, opts);
    if (next.empty()) return trace;
    if (trace.steps.size() >= max_steps) {
      trace.exhausted = true;
      return trace;
    }
    auto best = std::min_element(next.begin(), next.end(),
                                 [](const Reduction& a, const Reduction& b) { return a.target.key < b.target.key; });
    trace.steps.push_back(*best);
    current = best->target.term;
  }
}

}  // namespace cmc
