#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "cmc/syntax.hpp"

namespace cmc {

/// Which constructors a generated term may use. The defaults give terms of the sub-calculus
/// without action prefixes, choice, relabelling and ploc/sloc.
struct GenOptions {
  std::size_t size = 8;
  std::vector<std::string> ambients{"m", "n", "k"};
  std::vector<std::string> ports{"a", "b"};
  bool decorations = true;
  bool restrictions = true;
  bool locality = false;  // ploc, sloc
  bool actions = false;   // inputs, outputs, tau
  bool sums = false;
  bool relabels = false;
};

/// Random closed processes with at most `size` constructors. Each ambient base receives one port
/// set per term so that capabilities naming it usually match an ambient.
class TermGenerator {
 public:
  explicit TermGenerator(std::uint64_t seed, GenOptions opts = {}) : rng_(seed), opts_(std::move(opts)) {}

  Process next() {
    decoration_.clear();
    for (const auto& base : opts_.ambients) decoration_[base] = random_ports();
    vars_.clear();
    std::size_t size = opts_.size - pick((opts_.size + 1) / 2);
    return gen(size, false);
  }

  const GenOptions& options() const { return opts_; }

 private:
  std::mt19937_64 rng_;
  GenOptions opts_;
  std::map<std::string, PortSet> decoration_;
  std::vector<std::string> vars_;
  int var_counter_ = 0;

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  bool coin() { return pick(2) == 0; }

  PortSet random_ports() {
    if (!opts_.decorations || pick(3) == 0) return PortSet::everything();
    std::set<PortName> ps;
    for (const auto& p : opts_.ports)
      if (coin()) ps.insert(PortName{p, false});
    return PortSet::of(std::move(ps));
  }

  AmbientName name() {
    const std::string& base = opts_.ambients[pick(opts_.ambients.size())];
    return AmbientName(base, decoration_[base]);
  }

  std::string port() { return opts_.ports[pick(opts_.ports.size())]; }

  std::string fresh_var() { return "x" + std::to_string(var_counter_++ % 4); }

  Capability move_cap(bool in) {
    if (!vars_.empty() && pick(3) == 0) {
      const std::string& v = vars_[pick(vars_.size())];
      return in ? Capability::in_var(v) : Capability::out_var(v);
    }
    return in ? Capability::in(name()) : Capability::out(name());
  }

  Value value() {
    if (!vars_.empty() && coin()) return Value::var(vars_[pick(vars_.size())]);
    if (pick(4) == 0) return Value::unit();
    return Value::of_name(name());
  }

  Process binding(const std::string& x, std::size_t size, bool inside) {
    vars_.push_back(x);
    Process body = gen(size, inside);
    vars_.pop_back();
    return body;
  }

  Process sub(std::size_t size) { return size == 0 ? zero() : gen(size, true); }

  // A ready-to-fire mobility redex with random bodies of `size` constructors in total.
  Process redex(std::size_t size) {
    const AmbientName x = name(), y = name();
    const std::size_t a = size == 0 ? 0 : pick(size + 1), b = size - a;
    switch (pick(opts_.locality ? 4 : 2)) {
      case 0:
        return par(amb(x, prefix(Capability::in(y), sub(a))), amb(y, sub(b)));
      case 1:
        return amb(y, par(amb(x, prefix(Capability::out(y), sub(a))), sub(b)));
      case 2: {
        std::string v = fresh_var();
        return amb(y, par(amb(x, prefix(Capability::ploc(v), a ? binding(v, a, true) : zero())), sub(b)));
      }
      default: {
        std::string v = fresh_var();
        return par(amb(x, prefix(Capability::sloc(v), a ? binding(v, a, true) : zero())), amb(y, sub(b)));
      }
    }
  }

  // Capabilities are drawn mostly inside ambients, where they can fire.
  Process gen(std::size_t size, bool inside) {
    if (size <= 1) {
      if (pick(6) == 0) return zero();
      if (inside && coin()) return prefix(move_cap(coin()), zero());
      return amb(name(), zero());
    }
    enum Choice { Amb, Par, In, Out, Res, ResPort, Ploc, Sloc, Input, Output, Tau, Sum, Rel, Redex };
    std::vector<Choice> menu{Amb, Amb, Amb, Par, Par, Par};
    if (size >= 3) menu.insert(menu.end(), {Redex, Redex, Redex});
    if (inside) menu.insert(menu.end(), {In, In, Out, Out});
    else menu.insert(menu.end(), {Par, Par, In});
    if (opts_.restrictions) menu.insert(menu.end(), {Res, ResPort});
    if (opts_.locality) menu.insert(menu.end(), {Ploc, Sloc});
    if (opts_.actions) menu.insert(menu.end(), {Input, Output, Tau});
    if (opts_.sums) menu.push_back(Sum);
    if (opts_.relabels) menu.push_back(Rel);
    const std::size_t rest = size - 1;
    const Choice choice = menu[pick(menu.size())];
    switch (choice) {
      case Amb:
        return amb(name(), gen(rest, true));
      case Redex:
        return redex(size - 3);
      case Par:
      case Sum: {
        if (rest < 2) return gen(rest, inside);
        const std::size_t left = 1 + pick(rest - 1);
        Process a = gen(left, inside);
        Process b = gen(rest - left, inside);
        return choice == Sum ? sum(a, b) : par(a, b);
      }
      case In:
        return prefix(move_cap(true), gen(rest, inside));
      case Out:
        return prefix(move_cap(false), gen(rest, inside));
      case Res:
        return restrict(name(), gen(rest, inside));
      case ResPort:
        return restrict_port(port(), gen(rest, inside));
      case Ploc: {
        std::string x = fresh_var();
        return prefix(Capability::ploc(x), binding(x, rest, inside));
      }
      case Sloc: {
        std::string x = fresh_var();
        return prefix(Capability::sloc(x), binding(x, rest, inside));
      }
      case Input: {
        std::string x = fresh_var();
        return input(port(), x, binding(x, rest, inside));
      }
      case Output:
        return output(port(), value(), gen(rest, inside));
      case Tau:
        return tau(gen(rest, inside));
      case Rel: {
        RelabelMap f;
        f.entries[port()] = port();
        return relabel(gen(rest, inside), f);
      }
    }
    return zero();
  }
};

}  // namespace cmc
