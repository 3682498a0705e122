// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cmc/cmc.hpp"
#include "support/bisim_oracle.hpp"
#include "support/enumerate.hpp"
#include "support/sos_oracle.hpp"

using namespace cmc;

namespace {

// Pinned budgets and sample sizes.
constexpr double kCaseStudySeconds = 5.0;
constexpr double kCoincidenceSeconds = 60.0;
constexpr int kCoincidenceTerms = 1000;
constexpr std::size_t kCoincidenceSize = 8;
constexpr int kLocalityTerms = 500;
constexpr int kAxiomInstances = 200;
constexpr int kLemmaShapeTerms = 500;
constexpr int kContextTerms = 200;
constexpr std::size_t kContextStateCap = 10000;
constexpr int kGatingInstances = 500;
constexpr int kRandomLtsCount = 200;
constexpr std::size_t kRandomLtsStates = 50;
constexpr std::size_t kExhaustiveSize = 6;
constexpr std::size_t kFullAlphabetSize = 4;
constexpr int kRoundTripTerms = 1000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f s", s);
  return buf;
}

std::string join(const std::vector<std::string>& xs, const std::string& sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? sep : "") + xs[i];
  return out;
}

// Maximal τ-paths from the root; `cyclic` is set when a path revisits a state.
void tau_paths(const LtsGraph& g, std::size_t s, std::vector<std::size_t>& on_path, std::vector<std::string>& notes,
               std::vector<std::vector<std::string>>& out, bool& cyclic) {
  const auto succ = g.out_edges();
  bool any = false;
  for (auto e : succ[s]) {
    const LtsEdge& edge = g.edges[e];
    if (edge.label.kind != Label::Kind::Tau) continue;
    any = true;
    if (std::find(on_path.begin(), on_path.end(), edge.dst) != on_path.end()) {
      cyclic = true;
      continue;
    }
    on_path.push_back(edge.dst);
    notes.push_back(short_note(edge.label.note));
    tau_paths(g, edge.dst, on_path, notes, out, cyclic);
    notes.pop_back();
    on_path.pop_back();
  }
  if (!any) out.push_back(notes);
}

// ---------------------------------------------------------------------------

Verdict hospital_traces() {
  auto t0 = Clock::now();
  CaseStudy h = hospital_system();
  ExploreOptions opts;
  opts.max_states = 10000;
  LtsGraph g = explore(h.system, h.env, opts);
  std::vector<std::size_t> on_path{g.root};
  std::vector<std::string> notes;
  std::vector<std::vector<std::string>> paths;
  bool cyclic = false;
  tau_paths(g, g.root, on_path, notes, paths, cyclic);
  std::set<std::string> got;
  for (const auto& p : paths) got.insert(join(p));
  const std::set<std::string> want{"b(dr) c1(v) a(v)", "out b(k) in b(w) c2(v) a(v)"};
  const double secs = since(t0);
  Verdict o;
  o.pass = !g.truncated && !cyclic && got == want && secs < kCaseStudySeconds;
  o.detail = std::to_string(g.states.size()) + " states, sequences {" + join({got.begin(), got.end()}, " ; ") + "}, " +
             fmt_seconds(secs);
  return o;
}

Verdict mall_trace() {
  auto t0 = Clock::now();
  CaseStudy m = mall_system();
  LtsGraph g = explore(m.system, m.env);
  const auto succ = g.out_edges();
  std::vector<TauNote> seq;
  std::size_t s = g.root;
  bool unique = true;
  for (;;) {
    std::vector<std::size_t> taus;
    for (auto e : succ[s])
      if (g.edges[e].label.kind == Label::Kind::Tau) taus.push_back(e);
    if (taus.empty()) break;
    if (taus.size() != 1 || seq.size() > g.states.size()) {
      unique = false;
      break;
    }
    seq.push_back(g.edges[taus[0]].label.note);
    s = g.edges[taus[0]].dst;
  }
  using K = TauNote::Kind;
  const std::vector<std::pair<K, std::string>> want{{K::Ploc, ""}, {K::Comm, "a"}, {K::Comm, "b"}, {K::Comm, "c"},
                                                     {K::Comm, "a"}, {K::Out, "m"},  {K::In, "n"}};
  bool shape = seq.size() == want.size();
  std::string path_value;
  for (std::size_t i = 0; shape && i < seq.size(); ++i) {
    const std::string who = seq[i].kind == K::Comm ? seq[i].port : seq[i].kind == K::Ploc ? "" : seq[i].name.base;
    shape = seq[i].kind == want[i].first && who == want[i].second;
    if (seq[i].kind == K::Comm && seq[i].port == "c") path_value = to_string(seq[i].value);
  }
  Process expected = parse_process(
      "new port a in new port b in new port c in (sm[m[] | n[client[C' | pda[P']]]] | server[S'])");
  Process final_state = g.states[s].term;
  const bool final_ok = struct_congruent(final_state, expected, m.env);
  const double secs = since(t0);
  std::vector<std::string> shown;
  for (const auto& n : seq) shown.push_back(short_note(n));
  Verdict o;
  o.pass = unique && shape && path_value == "out m.in n" && final_ok && secs < kCaseStudySeconds;
  o.detail = "sequence " + join(shown) + ", path value " + path_value + ", final " + to_string(final_state) +
             (final_ok ? " (matches)" : " (DIFFERS)") + ", " + fmt_seconds(secs);
  return o;
}

Verdict coincidence_T1() {
  auto t0 = Clock::now();
  GenOptions g;
  g.size = kCoincidenceSize;
  TermGenerator gen(101, g);
  Environment env;
  int failures = 0, with_steps = 0;
  std::string first;
  for (int i = 0; i < kCoincidenceTerms; ++i) {
    Process p = gen.next();
    CoincidenceReport r = coincidence_check(p, env, Subcalculus::T1);
    if (!r.reduction_targets.empty()) ++with_steps;
    if (!r.coincide()) {
      if (first.empty()) first = to_string(p);
      ++failures;
    }
  }
  const double secs = since(t0);
  Verdict o;
  o.pass = failures == 0 && secs < kCoincidenceSeconds;
  o.detail = std::to_string(kCoincidenceTerms) + " terms (" + std::to_string(with_steps) + " with reductions), " +
             std::to_string(failures) + " failures" + (first.empty() ? "" : ", first: " + first) + ", " +
             fmt_seconds(secs);
  return o;
}

Verdict soundness_T3() {
  auto t0 = Clock::now();
  GenOptions g;
  g.size = kCoincidenceSize;
  g.locality = true;
  TermGenerator gen(202, g);
  Environment env;
  int unsound = 0, incomplete = 0, with_steps = 0;
  std::string first;
  for (int i = 0; i < kLocalityTerms; ++i) {
    Process p = gen.next();
    CoincidenceReport r = coincidence_check(p, env, Subcalculus::T3);
    if (!r.reduction_targets.empty()) ++with_steps;
    if (!r.sound()) {
      if (first.empty()) first = to_string(p);
      ++unsound;
    }
    if (!r.complete()) ++incomplete;
  }
  Verdict o;
  o.pass = unsound == 0;
  o.detail = std::to_string(kLocalityTerms) + " terms (" + std::to_string(with_steps) + " with reductions), " +
             std::to_string(unsound) + " soundness failures" + (first.empty() ? "" : ", first: " + first) +
             "; exploratory completeness mismatches: " + std::to_string(incomplete) + ", " + fmt_seconds(since(t0));
  return o;
}

// A free ambient name of p with the given base, if any.
std::optional<AmbientName> free_name_with_base(const Process& p, const std::string& base) {
  for (const auto& n : free_names(p).ambients)
    if (n.base == base) return n;
  return std::nullopt;
}

Verdict congruence_axioms() {
  auto t0 = Clock::now();
  GenOptions full;
  full.size = 5;
  full.locality = full.actions = full.sums = full.relabels = true;
  GenOptions scoped = full;
  scoped.ambients = {"m", "r", "s"};
  TermGenerator gen(303, full), gen_scoped(304, scoped);
  std::mt19937_64 rng(305);

  std::map<std::string, int> failures;
  auto check = [&](const std::string& axiom, const Process& l, const Process& r, const Environment& env = {}) {
    if (!struct_congruent(l, r, env)) ++failures[axiom];
    else failures.emplace(axiom, 0);
  };
  auto binder_in = [&](const Process& q, const std::string& base) {
    return free_name_with_base(q, base).value_or(AmbientName(base));
  };

  for (int i = 0; i < kAxiomInstances; ++i) {
    Process p = gen.next(), q = gen.next(), r = gen.next();
    Process qs = gen_scoped.next();
    check("Par Comm", par(p, q), par(q, p));
    check("Par Assoc", par(par(p, q), r), par(p, par(q, r)));
    check("Zero Par", par(p, zero()), p);
    check("Sum Comm", sum(p, q), sum(q, p));
    check("Sum Assoc", sum(sum(p, q), r), sum(p, sum(q, r)));
    check("Zero Identity", sum(p, zero()), p);

    // A(x) := a!(x).P and the recursive D(x) := a!(x).(P | D(x)).
    Environment env;
    const Value v = Value::of_name(AmbientName(i % 2 ? "m" : "n"));
    env.defs["A"] = Definition{{"x"}, output("a", Value::var("x"), p)};
    env.defs["D"] = Definition{{"x"}, output("a", Value::var("x"), par(p, call("D", {Value::var("x")})))};
    check("Const", call("A", {v}), output("a", v, p), env);
    check("Const", call("D", {v}), output("a", v, par(p, call("D", {v}))), env);

    const AmbientName rn = binder_in(qs, "r"), sn = binder_in(qs, "s");
    check("Res Par", restrict(rn, par(p, qs)), par(p, restrict(rn, qs)));
    check("Res Amb", restrict(rn, amb(AmbientName("m"), qs)), amb(AmbientName("m"), restrict(rn, qs)));
    if (rng() % 2)
      check("Res Res", restrict(rn, restrict(sn, qs)), restrict(sn, restrict(rn, qs)));
    else {
      // The port binder must not occur in rn's decoration, otherwise the swap captures it.
      std::string port = "a";
      for (const char* c : {"a", "b", "c", "d", "e"})
        if (!rn.ports.members.count(PortName{c, false}) && !rn.ports.members.count(PortName{c, true})) {
          port = c;
          break;
        }
      check("Res Res", restrict(rn, restrict_port(port, qs)), restrict_port(port, restrict(rn, qs)));
    }
    check("Zero Res", restrict(rn, zero()), zero());
    check("Epsilon", prefix(Capability::epsilon(), p), p);
  }
  int total = 0;
  std::vector<std::string> parts;
  for (const auto& [axiom, n] : failures) {
    total += n;
    if (n) parts.push_back(axiom + "=" + std::to_string(n));
  }
  Verdict o;
  o.pass = total == 0;
  o.detail = std::to_string(failures.size()) + " axioms x " + std::to_string(kAxiomInstances) + " instances, " +
             std::to_string(total) + " failures" + (parts.empty() ? "" : " (" + join(parts, ", ") + ")") + ", " +
             fmt_seconds(since(t0));
  return o;
}

// Re-matches an enter/move concretion against the decompositions of the source. Excerpt and
// residue are compared together, under the same binders, by tagging each with its own ambient.
bool rematches(const Process& source, const Derivation& d, const Environment& env) {
  const AmbientName tag_x("excerpt_tag"), tag_y("residue_tag");
  const Concretion& k = d.outcome.concr;
  Process got = par(amb(tag_x, k.excerpt), amb(tag_y, k.residue));
  for (auto it = k.privates.rbegin(); it != k.privates.rend(); ++it)
    got = it->is_port ? restrict_port(it->port, got) : restrict(it->amb, got);

  Region top = open_region(normalize(source, env));
  auto under_top = [&](const Process& excerpt, const Process& residue) {
    Region r{top.binders, {amb(tag_x, excerpt), amb(tag_y, residue)}};
    return assemble(r);
  };
  auto others = [&](std::size_t skip) {
    std::vector<Process> rest;
    for (std::size_t i = 0; i < top.parts.size(); ++i)
      if (i != skip) rest.push_back(top.parts[i]);
    return par(rest);
  };

  for (std::size_t i = 0; i < top.parts.size(); ++i) {
    const Process& part = top.parts[i];
    if (part->kind != ProcKind::Amb) continue;
    if (d.label.kind == Label::Kind::Move) {
      // P = ν q (n[Q1] | Q2), excerpt Q1, residue Q2
      if (part->amb == d.label.name && struct_congruent(under_top(part->body(), others(i)), got, env)) return true;
      continue;
    }
    // P = ν p (k[in n.P1 | P2] | P3), excerpt k[P1 | P2], residue P3
    Region body = open_region(part->body());
    for (std::size_t j = 0; j < body.parts.size(); ++j) {
      const Process& c = body.parts[j];
      if (c->kind != ProcKind::Cap || c->cap.kind != Capability::Kind::In || !c->cap.var.empty() ||
          c->cap.target != d.label.name)
        continue;
      Region rest = body;
      rest.parts[j] = c->body();
      if (struct_congruent(under_top(amb(part->amb, assemble(rest)), others(i)), got, env)) return true;
    }
  }
  return false;
}

Verdict lemma_shapes() {
  auto t0 = Clock::now();
  TermGenerator gen(404);
  Environment env;
  int enters = 0, moves = 0, failures = 0;
  std::string first;
  for (int i = 0; i < kLemmaShapeTerms; ++i) {
    Process p = gen.next();
    for (const auto& d : aux_transitions(p, env)) {
      if (d.label.kind != Label::Kind::Enter && d.label.kind != Label::Kind::Move) continue;
      (d.label.kind == Label::Kind::Enter ? enters : moves)++;
      if (!rematches(p, d, env)) {
        if (first.empty()) first = d.label.key() + " from " + to_string(p);
        ++failures;
      }
    }
  }
  Verdict o;
  o.pass = failures == 0 && enters > 0 && moves > 0;
  o.detail = std::to_string(kLemmaShapeTerms) + " terms, " + std::to_string(enters) + " enter and " +
             std::to_string(moves) + " move transitions, " + std::to_string(failures) + " failures" +
             (first.empty() ? "" : ", first: " + first) + ", " + fmt_seconds(since(t0));
  return o;
}

Verdict context_lemmas() {
  auto t0 = Clock::now();
  GenOptions g;
  g.size = 6;
  g.ambients = {"m", "n"};
  TermGenerator gen(505, g);
  Environment env;
  EquivOptions cap;
  cap.max_states = kContextStateCap;
  const std::string port = "g";
  const AmbientName fresh_shown("f", PortSet::of({})), gadget("c");

  // A free name of R with the given base that does not admit the gadget port, or base{b}.
  auto room = [&](const Process& r, const std::string& base) {
    for (const auto& n : free_names(r).ambients)
      if (n.base == base && !n.ports.admits(port)) return n;
    return AmbientName(base, PortSet::of({PortName{"b", false}}));
  };

  int decided3 = 0, decided4 = 0, unknown = 0, failures = 0, positive = 0;
  std::string first;
  for (int i = 0; i < kContextTerms; ++i) {
    Process r = gen.next();

    const AmbientName n_b = room(r, "n");
    Tri lhs = weak_cap_barb(r, CapBarb{Label::Kind::Move, n_b}, env, cap);
    Tri rhs = weak_barb(build_context_C1(r, n_b, fresh_shown, gadget, port), fresh_shown, env, cap);
    if (lhs == Tri::Unknown || rhs == Tri::Unknown) {
      ++unknown;
    } else {
      ++decided3;
      positive += lhs == Tri::Yes;
      if (lhs != rhs) {
        ++failures;
        if (first.empty()) first = "C1 on " + to_string(r);
      }
    }

    const AmbientName m_a = room(r, "m");
    lhs = weak_barb(r, m_a, env, cap);
    rhs = weak_cap_barb(build_context_C2(r, m_a, fresh_shown, gadget, port, zero()),
                        CapBarb{Label::Kind::Move, fresh_shown}, env, cap);
    if (lhs == Tri::Unknown || rhs == Tri::Unknown) {
      ++unknown;
    } else {
      ++decided4;
      positive += lhs == Tri::Yes;
      if (lhs != rhs) {
        ++failures;
        if (first.empty()) first = "C2 on " + to_string(r);
      }
    }
  }
  Verdict o;
  o.pass = failures == 0;
  o.detail = std::to_string(decided3) + " C1 and " + std::to_string(decided4) + " C2 instances decided (" +
             std::to_string(positive) + " positive), " + std::to_string(unknown) + " indeterminate excluded, " +
             std::to_string(failures) + " failures" + (first.empty() ? "" : ", first: " + first) + ", " +
             fmt_seconds(since(t0));
  return o;
}

Verdict global_com_gating() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(606);
  const std::vector<std::string> ports{"a", "b", "c", "d"};
  Environment env;
  int failures = 0, admitted = 0;
  for (int i = 0; i < kGatingInstances; ++i) {
    const bool everything = rng() % 4 == 0;
    std::set<std::string> members;
    std::set<PortName> decl;
    for (const auto& p : ports)
      if (rng() % 2) {
        members.insert(p);
        decl.insert(PortName{p, false});
      }
    const AmbientName m("m", everything ? PortSet::everything() : PortSet::of(decl));
    const std::string a = ports[rng() % ports.size()];
    const Value v = Value::of_name(AmbientName(rng() % 2 ? "n" : "k"));
    const bool expected = everything || members.count(a) > 0;
    admitted += expected;
    bool shown = false;
    for (const auto& t : transitions(amb(m, output(a, v, zero())), env))
      shown |= t.label.kind == Label::Kind::Output && t.label.port == a && t.label.value == v;
    failures += shown != expected;
  }
  Verdict o;
  o.pass = failures == 0;
  o.detail = std::to_string(kGatingInstances) + " port sets (" + std::to_string(admitted) + " admitting), " +
             std::to_string(failures) + " failures, " + fmt_seconds(since(t0));
  return o;
}

Verdict bisimulation_oracle() {
  auto t0 = Clock::now();
  std::mt19937_64 rng(707);
  long pairs = 0, related = 0, disagreements = 0;
  for (int i = 0; i < kRandomLtsCount; ++i) {
    oracle::SmallLts l = oracle::random_lts(rng, kRandomLtsStates);
    LtsGraph g = oracle::to_graph(l);
    WeakClosure w = weak_closure(g);
    std::vector<std::string> colour;
    for (const auto& b : detail::weak_barb_sets(l.barbs, w)) colour.push_back(join({b.begin(), b.end()}, ","));
    std::vector<std::size_t> block = weak_bisim_partition(g, w, colour);
    oracle::NaiveBisim naive(l);
    for (std::size_t p = 0; p < l.states; ++p)
      for (std::size_t q = 0; q < l.states; ++q) {
        ++pairs;
        related += naive.related(p, q);
        disagreements += (block[p] == block[q]) != naive.related(p, q);
      }
  }
  Verdict o;
  o.pass = disagreements == 0;
  o.detail = std::to_string(kRandomLtsCount) + " LTSs, " + std::to_string(pairs) + " state pairs (" +
             std::to_string(related) + " bisimilar), " + std::to_string(disagreements) + " disagreements, " +
             fmt_seconds(since(t0));
  return o;
}

Verdict sos_exhaustive() {
  auto t0 = Clock::now();
  Environment env;
  long terms = 0, diffs = 0, with_tau = 0;
  std::string first;
  auto run = [&](const std::vector<std::string>& tokens, std::size_t size) {
    enumerate::Enumerator e(enumerate::alphabet(tokens));
    for (const auto& p : e.closed_up_to(size)) {
      ++terms;
      std::set<oracle::Edge> engine;
      for (const auto& t : transitions(p, env)) engine.insert({t.label.key(), t.target.key});
      with_tau += std::any_of(engine.begin(), engine.end(), [](const auto& x) { return x.first == "tau"; });
      if (engine != oracle::transitions(p, env)) {
        ++diffs;
        if (first.empty()) first = to_string(p);
      }
    }
  };
  const std::vector<std::string> core{"m[]",  "n{a}[]", "in n{a}", "out m", "ploc",  "sloc",
                                      "a!(m)", "a?(x)",  "in x",    "new m", "[b/a]"};
  run(core, kExhaustiveSize);
  const long core_terms = terms;
  run(enumerate::all_tokens(), kFullAlphabetSize);
  Verdict o;
  o.pass = diffs == 0;
  o.detail = std::to_string(core_terms) + " closed terms of size <= " + std::to_string(kExhaustiveSize) + " over {" +
             join(core, ", ") + "} plus " + std::to_string(terms - core_terms) + " of size <= " +
             std::to_string(kFullAlphabetSize) + " over all " + std::to_string(enumerate::all_tokens().size()) +
             " tokens (" + std::to_string(with_tau) + " with a tau), " + std::to_string(diffs) + " diffs" +
             (first.empty() ? "" : ", first: " + first) + ", " + fmt_seconds(since(t0));
  return o;
}

Verdict parser_round_trip() {
  auto t0 = Clock::now();
  GenOptions g;
  g.size = 10;
  g.locality = g.actions = g.sums = g.relabels = true;
  TermGenerator gen(808, g);
  int failures = 0;
  std::string first;
  for (int i = 0; i < kRoundTripTerms; ++i) {
    Process p = gen.next();
    const std::string text = to_string(p);
    bool ok = false;
    try {
      Process q = parse_process(text);
      ok = alpha_equal(p, q) && to_string(q) == text;
    } catch (const Error&) {
    }
    if (!ok) {
      ++failures;
      if (first.empty()) first = text;
    }
  }
  Verdict o;
  o.pass = failures == 0;
  o.detail = std::to_string(kRoundTripTerms) + " terms, " + std::to_string(failures) + " failures" +
             (first.empty() ? "" : ", first: " + first) + ", " + fmt_seconds(since(t0));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"hospital traces", hospital_traces},
      {"mall trace and final state", mall_trace},
      {"reduction/tau coincidence on T'", coincidence_T1},
      {"ploc/sloc soundness on T'''", soundness_T3},
      {"structural congruence axioms", congruence_axioms},
      {"enter/move decomposition shapes", lemma_shapes},
      {"C1/C2 context lemmas", context_lemmas},
      {"Global-Com port gating", global_com_gating},
      {"partition refinement vs naive fixpoint", bisimulation_oracle},
      {"SOS exhaustiveness at small size", sos_exhaustive},
      {"parser round trip", parser_round_trip},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1 < 10 ? " " : "") << i + 1 << "  " << criteria[i].first
              << ": " << o.detail << std::endl;
  }
  std::cout << criteria.size() - failed << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
