#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "cmc/cmc.hpp"

using json = nlohmann::ordered_json;
using namespace cmc;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kError = 2;
constexpr int kIndeterminate = 3;

std::size_t default_max_states() {
  if (const char* env = std::getenv("CMC_MAX_STATES")) {
    try {
      return std::stoul(env);
    } catch (const std::exception&) {
      throw Error(std::string("CMC_MAX_STATES is not a number: ") + env);
    }
  }
  return 100000;
}

struct Loaded {
  Process system;
  Environment env;
};

Loaded load(const std::string& file) {
  SourceFile f = load_source(file);
  if (!f.system) throw Error(file + ": no system declaration");
  return {*f.system, std::move(f.env)};
}

std::string tau_mark(const TauNote& n) { return "τ_{" + short_note(n) + "}"; }

json tri_json(Tri t) {
  if (t == Tri::Unknown) return nullptr;
  return t == Tri::Yes;
}

int tri_exit(Tri t) { return t == Tri::Yes ? kOk : t == Tri::No ? kNegative : kIndeterminate; }

// τ-successors in a fixed order: by full note, then by target.
std::vector<Transition> tau_steps(const Process& p, const Environment& env) {
  std::vector<Transition> out;
  for (auto& t : transitions(p, env))
    if (t.label.kind == Label::Kind::Tau) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(), [](const Transition& a, const Transition& b) {
    auto ka = full_note(a.label.note), kb = full_note(b.label.note);
    return ka != kb ? ka < kb : a.target.key < b.target.key;
  });
  return out;
}

// ---------------------------------------------------------------------------
// trace

struct TraceArgs {
  std::string file;
  std::size_t max_steps = 1000;
  std::size_t max_states = 0;
  bool all = false;
  bool json = false;
};

int run_single_trace(const TraceArgs& a, const Loaded& m) {
  CanonicalForm cur = canonical(m.system, m.env);
  json steps = json::array();
  std::vector<std::string> marks;
  std::ostringstream text;
  text << "0  " << to_string(cur.term) << "\n";
  bool exhausted = false;
  for (std::size_t i = 1;; ++i) {
    auto next = tau_steps(cur.term, m.env);
    if (next.empty()) break;
    if (i > a.max_steps) {
      exhausted = true;
      break;
    }
    const Transition& t = next.front();
    cur = t.target;
    marks.push_back(tau_mark(t.label.note));
    text << i << "  " << marks.back() << "  " << to_string(cur.term) << "\n";
    steps.push_back({{"note", short_note(t.label.note)}, {"detail", full_note(t.label.note)}, {"term", to_string(cur.term)}});
  }
  if (a.json) {
    json out{{"schema", 1}, {"initial", to_string(canonical(m.system, m.env).term)}, {"steps", steps},
             {"final", to_string(cur.term)}, {"exhausted", exhausted}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << text.str() << "sequence:";
    for (const auto& s : marks) std::cout << " " << s;
    std::cout << "\nfinal: " << to_string(cur.term) << "\n";
    if (exhausted) std::cout << "stopped after " << a.max_steps << " steps\n";
  }
  return exhausted ? kIndeterminate : kOk;
}

int run_all_traces(const TraceArgs& a, const Loaded& m) {
  ExploreOptions eo;
  eo.tau_only = true;
  eo.max_states = a.max_states;
  LtsGraph g = explore(m.system, m.env, eo);
  auto idx = g.out_edges();
  // (notes, final state or empty when the sequence ends by revisiting a state)
  std::set<std::pair<std::vector<std::string>, std::string>> sequences;
  bool cut = g.truncated;
  std::vector<std::string> notes;
  std::vector<bool> on_path(g.states.size(), false);
  std::function<void(std::size_t)> walk = [&](std::size_t s) {
    if (sequences.size() >= 10000 || notes.size() > a.max_steps) {
      cut = true;
      return;
    }
    if (idx[s].empty()) {
      sequences.insert({notes, to_string(g.states[s].term)});
      return;
    }
    on_path[s] = true;
    for (auto e : idx[s]) {
      const auto& edge = g.edges[e];
      notes.push_back(short_note(edge.label.note));
      if (on_path[edge.dst])
        sequences.insert({notes, ""});
      else
        walk(edge.dst);
      notes.pop_back();
    }
    on_path[s] = false;
  };
  walk(g.root);
  if (a.json) {
    json seqs = json::array();
    for (const auto& [ns, fin] : sequences)
      seqs.push_back({{"notes", ns}, {"final", fin.empty() ? json(nullptr) : json(fin)}, {"loops", fin.empty()}});
    json out{{"schema", 1}, {"sequences", seqs}, {"states", g.states.size()}, {"truncated", cut}};
    std::cout << out.dump(2) << "\n";
  } else {
    for (const auto& [ns, fin] : sequences) {
      for (std::size_t i = 0; i < ns.size(); ++i) std::cout << (i ? " " : "") << "τ_{" << ns[i] << "}";
      std::cout << (fin.empty() ? "  (returns to an earlier state)" : "  =>  " + fin) << "\n";
    }
    std::cout << sequences.size() << " maximal sequences over " << g.states.size() << " states"
              << (cut ? " (truncated)" : "") << "\n";
  }
  return cut ? kIndeterminate : kOk;
}

// ---------------------------------------------------------------------------
// step

struct StepArgs {
  std::string file;
  std::string script;
  std::string record;
};

int run_step(const StepArgs& a, const Loaded& m) {
  std::ifstream script_file;
  if (!a.script.empty()) {
    script_file.open(a.script);
    if (!script_file) throw Error("cannot open " + a.script);
  }
  std::istream& in = a.script.empty() ? std::cin : script_file;
  std::ofstream record;
  if (!a.record.empty()) {
    record.open(a.record);
    if (!record) throw Error("cannot write " + a.record);
  }
  CanonicalForm cur = canonical(m.system, m.env);
  for (;;) {
    std::cout << "state: " << to_string(cur.term) << "\n";
    auto next = tau_steps(cur.term, m.env);
    if (next.empty()) {
      std::cout << "no τ-transitions\n";
      break;
    }
    for (std::size_t i = 0; i < next.size(); ++i)
      std::cout << "  [" << i + 1 << "] " << tau_mark(next[i].label.note) << " " << full_note(next[i].label.note)
                << "  ->  " << to_string(next[i].target.term) << "\n";
    std::cout << "choice (q to stop)> " << std::flush;
    std::string tok;
    if (!(in >> tok) || tok == "q") {
      std::cout << "\n";
      break;
    }
    std::size_t k = 0;
    try {
      k = std::stoul(tok);
    } catch (const std::exception&) {
      throw Error("not a choice: " + tok);
    }
    if (k == 0 || k > next.size()) throw Error("choice out of range: " + tok);
    if (!a.script.empty()) std::cout << tok << "\n";
    if (record) record << k << "\n";
    cur = next[k - 1].target;
  }
  std::cout << "final: " << to_string(cur.term) << "\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// transitions

json graph_json(const LtsGraph& g) {
  json states = json::array(), edges = json::array();
  for (std::size_t i = 0; i < g.states.size(); ++i) states.push_back({{"id", i}, {"term", to_string(g.states[i].term)}});
  for (const auto& e : g.edges)
    edges.push_back({{"src", e.src},
                     {"label", e.label.key()},
                     {"dst", e.dst},
                     {"note", e.label.kind == Label::Kind::Tau ? full_note(e.label.note) : ""}});
  return {{"schema", 1}, {"states", states}, {"edges", edges}, {"root", g.root}, {"truncated", g.truncated}};
}

int run_transitions(const Loaded& m, std::size_t depth, std::size_t max_states, bool as_json) {
  ExploreOptions eo;
  eo.max_depth = depth;
  eo.max_states = max_states;
  LtsGraph g = explore(m.system, m.env, eo);
  if (as_json) {
    std::cout << graph_json(g).dump(2) << "\n";
  } else {
    for (std::size_t i = 0; i < g.states.size(); ++i) std::cout << "s" << i << "  " << to_string(g.states[i].term) << "\n";
    for (const auto& e : g.edges) {
      std::cout << "s" << e.src << " --" << e.label.key() << "--> s" << e.dst;
      if (e.label.kind == Label::Kind::Tau) std::cout << "  [" << full_note(e.label.note) << "]";
      std::cout << "\n";
    }
    if (g.truncated) std::cout << "(truncated)\n";
  }
  return g.truncated ? kIndeterminate : kOk;
}

// ---------------------------------------------------------------------------
// equiv

Environment merge_envs(const Environment& a, const Environment& b) {
  Environment out = a;
  for (const auto& [name, d] : b.defs) {
    auto it = out.defs.find(name);
    if (it == out.defs.end()) {
      out.defs[name] = d;
    } else if (it->second.params != d.params || to_string(it->second.body) != to_string(d.body)) {
      throw DefinitionError("conflicting definitions of " + name);
    }
  }
  if (!out.tree) out.tree = b.tree;
  out.universe.insert(out.universe.end(), b.universe.begin(), b.universe.end());
  return out;
}

int run_equiv(const std::string& fa, const std::string& fb, const std::string& mode, const std::string& beta,
              std::size_t max_states, bool as_json) {
  Loaded a = load(fa), b = load(fb);
  Environment env = merge_envs(a.env, b.env);
  EquivOptions opts;
  opts.max_states = max_states;
  BisimVerdict v;
  if (mode == "barbed") {
    v = weak_barbed_bisim(a.system, b.system, env, opts);
  } else {
    if (beta.empty()) throw Error("--mode cap needs --beta");
    v = weak_cap_barbed_bisim(a.system, b.system, CapBarb::parse(beta), env, opts);
  }
  if (as_json) {
    json out{{"schema", 1},
             {"equivalent", tri_json(v.equivalent)},
             {"witness", v.witness},
             {"failing_barb", v.failing_barb.empty() ? json(nullptr) : json(v.failing_barb)},
             {"side", v.barb_side.empty() ? json(nullptr) : json(v.barb_side)},
             {"states", v.states},
             {"truncated", v.truncated}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << "equivalent: " << to_string(v.equivalent) << "\n";
    if (v.equivalent == Tri::No) {
      std::cout << "witness:";
      if (v.witness.empty()) std::cout << " (empty trace)";
      for (const auto& l : v.witness) std::cout << " " << l;
      std::cout << "\n";
      if (!v.failing_barb.empty())
        std::cout << "failing barb: " << v.failing_barb << " (shown by the " << v.barb_side << " term only)\n";
      else if (!v.barb_side.empty())
        std::cout << "the " << (v.barb_side == "left" ? "right" : "left") << " term cannot follow the last label\n";
    }
    std::cout << "states: " << v.states << (v.truncated ? " (truncated)" : "") << "\n";
  }
  return tri_exit(v.equivalent);
}

// ---------------------------------------------------------------------------
// coincide

struct CoincideArgs {
  std::string file;
  std::size_t random = 0;
  std::size_t size = 8;
  std::uint64_t seed = 1;
  std::string calculus = "T1";
  bool json = false;
};

int run_coincide(const CoincideArgs& a) {
  const Subcalculus which = a.calculus == "T3" ? Subcalculus::T3 : Subcalculus::T1;
  std::vector<std::pair<Process, Environment>> terms;
  if (!a.file.empty()) {
    Loaded m = load(a.file);
    terms.emplace_back(m.system, m.env);
  }
  GenOptions go;
  go.size = a.size;
  go.locality = which == Subcalculus::T3;
  TermGenerator gen(a.seed, go);
  for (std::size_t i = 0; i < a.random; ++i) terms.emplace_back(gen.next(), Environment{});
  if (terms.empty()) throw Error("give a file or --random N");

  std::size_t unsound = 0, incomplete = 0;
  json reports = json::array();
  for (const auto& [p, env] : terms) {
    CoincidenceReport r = coincidence_check(p, env, which);
    unsound += !r.sound();
    incomplete += !r.complete();
    auto shown = [&](const std::set<std::string>& keys) {
      std::vector<std::string> out;
      for (const auto& k : keys) out.push_back(r.display.at(k));
      return out;
    };
    if (a.json) {
      reports.push_back({{"term", to_string(p)},
                         {"reductions", r.reduction_targets.size()},
                         {"taus", r.tau_targets.size()},
                         {"unmatched_reductions", shown(r.unmatched_reductions)},
                         {"unmatched_taus", shown(r.unmatched_taus)},
                         {"coincide", r.coincide()}});
      continue;
    }
    std::string status = r.coincide() ? "ok" : !r.sound() ? "UNSOUND" : r.exploratory_completeness ? "open" : "INCOMPLETE";
    std::cout << status << "  " << to_string(p) << "  reductions=" << r.reduction_targets.size()
              << " taus=" << r.tau_targets.size() << "\n";
    for (const auto& t : shown(r.unmatched_reductions)) std::cout << "    reduction without τ: " << t << "\n";
    for (const auto& t : shown(r.unmatched_taus)) std::cout << "    τ without reduction: " << t << "\n";
  }
  const bool failed = unsound > 0 || (which == Subcalculus::T1 && incomplete > 0);
  if (a.json) {
    json out{{"schema", 1},          {"calculus", a.calculus}, {"terms", terms.size()}, {"soundness_failures", unsound},
             {"completeness_failures", incomplete}, {"completeness_exploratory", which == Subcalculus::T3},
             {"reports", reports}};
    std::cout << out.dump(2) << "\n";
  } else {
    std::cout << terms.size() << " terms, " << unsound << " soundness failures, " << incomplete
              << " completeness failures" << (which == Subcalculus::T3 ? " (exploratory)" : "") << "\n";
  }
  return failed ? kNegative : kOk;
}

// ---------------------------------------------------------------------------
// barbs

int run_barbs(const Loaded& m, std::size_t max_states, bool as_json) {
  ExploreOptions eo;
  eo.tau_only = true;
  eo.max_states = max_states;
  LtsGraph g = explore(m.system, m.env, eo);
  auto cap_barbs = [&](const Process& p) {
    std::set<std::string> out;
    for (const auto& d : aux_transitions(p, m.env)) {
      using K = Label::Kind;
      if (d.label.kind == K::In || d.label.kind == K::Out || d.label.kind == K::Enter || d.label.kind == K::Move ||
          d.label.kind == K::Exit)
        out.insert(d.label.key());
    }
    return out;
  };
  auto amb_barbs = [](const CanonicalForm& s) {
    std::set<std::string> out;
    for (const auto& n : top_level_ambients(s.term)) out.insert(to_string(n));
    return out;
  };
  const auto& root = g.states[g.root];
  std::set<std::string> strong = amb_barbs(root), strong_cap = cap_barbs(root.term), weak, weak_cap;
  for (const auto& s : g.states) {
    auto b = amb_barbs(s);
    weak.insert(b.begin(), b.end());
    auto c = cap_barbs(s.term);
    weak_cap.insert(c.begin(), c.end());
  }
  if (as_json) {
    json out{{"schema", 1},          {"barbs", strong}, {"weak_barbs", weak}, {"capability_barbs", strong_cap},
             {"weak_capability_barbs", weak_cap}, {"states", g.states.size()}, {"truncated", g.truncated}};
    std::cout << out.dump(2) << "\n";
  } else {
    auto line = [](const std::string& title, const std::set<std::string>& xs) {
      std::cout << title << ":";
      for (const auto& x : xs) std::cout << " " << x;
      std::cout << "\n";
    };
    line("barbs", strong);
    line("weak barbs", weak);
    line("capability barbs", strong_cap);
    line("weak capability barbs", weak_cap);
    if (g.truncated) std::cout << "(truncated after " << g.states.size() << " states)\n";
  }
  return g.truncated ? kIndeterminate : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Explore processes of the calculus of mobile context-aware ambients"};
  app.require_subcommand(1);
  std::size_t max_states = 0;
  bool as_json = false;

  TraceArgs trace;
  auto* trace_cmd = app.add_subcommand("trace", "Print an annotated τ-sequence from the system");
  trace_cmd->add_option("file", trace.file, "Model file")->required()->check(CLI::ExistingFile);
  trace_cmd->add_option("--max-steps", trace.max_steps, "Stop after this many steps");
  trace_cmd->add_flag("--all", trace.all, "Print every maximal τ-sequence");
  trace_cmd->add_flag("--json", trace.json, "JSON output");
  trace_cmd->add_option("--max-states", max_states, "State budget for --all");

  StepArgs step;
  auto* step_cmd = app.add_subcommand("step", "Choose τ-transitions one at a time");
  step_cmd->add_option("file", step.file, "Model file")->required()->check(CLI::ExistingFile);
  step_cmd->add_option("--script", step.script, "Read choices from a file");
  step_cmd->add_option("--record", step.record, "Write the choices made to a file");

  std::string trans_file;
  std::size_t depth = 1;
  auto* trans_cmd = app.add_subcommand("transitions", "List first-class transitions");
  trans_cmd->add_option("file", trans_file, "Model file")->required()->check(CLI::ExistingFile);
  trans_cmd->add_option("--depth", depth, "Exploration depth");
  trans_cmd->add_option("--max-states", max_states, "State budget");
  trans_cmd->add_flag("--json", as_json, "JSON output");

  std::string fa, fb, mode = "barbed", beta;
  auto* equiv_cmd = app.add_subcommand("equiv", "Decide weak (capability) barbed bisimilarity");
  equiv_cmd->add_option("left", fa, "Model file")->required()->check(CLI::ExistingFile);
  equiv_cmd->add_option("right", fb, "Model file")->required()->check(CLI::ExistingFile);
  equiv_cmd->add_option("--mode", mode, "barbed or cap")->check(CLI::IsMember({"barbed", "cap"}));
  equiv_cmd->add_option("--beta", beta, "Capability barb for --mode cap, e.g. \"move n\"");
  equiv_cmd->add_option("--max-states", max_states, "State budget");
  equiv_cmd->add_flag("--json", as_json, "JSON output");

  CoincideArgs co;
  auto* co_cmd = app.add_subcommand("coincide", "Compare reductions with τ-transitions");
  co_cmd->add_option("file", co.file, "Model file")->check(CLI::ExistingFile);
  co_cmd->add_option("--random", co.random, "Number of generated terms");
  co_cmd->add_option("--size", co.size, "Maximum size of generated terms");
  co_cmd->add_option("--seed", co.seed, "Generator seed");
  co_cmd->add_option("--calculus", co.calculus, "T1 (no ploc/sloc) or T3")->check(CLI::IsMember({"T1", "T3"}));
  co_cmd->add_flag("--json", co.json, "JSON output");

  std::string barbs_file;
  auto* barbs_cmd = app.add_subcommand("barbs", "List strong and weak barbs");
  barbs_cmd->add_option("file", barbs_file, "Model file")->required()->check(CLI::ExistingFile);
  barbs_cmd->add_option("--max-states", max_states, "State budget");
  barbs_cmd->add_flag("--json", as_json, "JSON output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kError;
  }

  try {
    if (max_states == 0) max_states = default_max_states();
    trace.max_states = max_states;
    if (*trace_cmd) {
      Loaded m = load(trace.file);
      return trace.all ? run_all_traces(trace, m) : run_single_trace(trace, m);
    }
    if (*step_cmd) return run_step(step, load(step.file));
    if (*trans_cmd) return run_transitions(load(trans_file), depth, max_states, as_json);
    if (*equiv_cmd) return run_equiv(fa, fb, mode, beta, max_states, as_json);
    if (*co_cmd) return run_coincide(co);
    if (*barbs_cmd) return run_barbs(load(barbs_file), max_states, as_json);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kError;
  }
  return kError;
}
