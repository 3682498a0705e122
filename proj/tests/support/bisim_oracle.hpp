#pragma once

// Weak barbed bisimilarity by the textbook greatest fixed point: start from all pairs with equal
// weak barbs and delete pairs that fail a challenge until nothing changes. Challenges are strong
// steps answered by weak ones; the closure is a plain boolean Warshall pass.

#include <cstdint>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "cmc/lts.hpp"

namespace oracle {

struct SmallLts {
  std::size_t states = 0;
  struct Edge {
    std::size_t src;
    std::string label;  // "tau" or a visible action
    std::size_t dst;
  };
  std::vector<Edge> edges;
  std::vector<std::set<std::string>> barbs;  // strong barbs per state
};

inline SmallLts random_lts(std::mt19937_64& rng, std::size_t max_states = 50) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  SmallLts l;
  l.states = 1 + pick(max_states);
  const std::vector<std::string> labels{"tau", "tau", "a", "b"};
  const std::size_t edges = pick(2 * l.states + 1);
  for (std::size_t i = 0; i < edges; ++i) l.edges.push_back({pick(l.states), labels[pick(labels.size())], pick(l.states)});
  l.barbs.resize(l.states);
  for (auto& b : l.barbs) {
    if (pick(4) == 0) b.insert("m");
    if (pick(6) == 0) b.insert("n");
  }
  return l;
}

// Same LTS as a graph the library accepts; visible labels become inputs on the named port.
inline cmc::LtsGraph to_graph(const SmallLts& l) {
  cmc::LtsGraph g;
  for (std::size_t s = 0; s < l.states; ++s) {
    cmc::CanonicalForm c;
    c.key = "s" + std::to_string(s);
    g.states.push_back(c);
  }
  for (const auto& e : l.edges)
    g.edges.push_back({e.src, e.label == "tau" ? cmc::Label::tau() : cmc::Label::input(e.label), e.dst});
  return g;
}

class NaiveBisim {
 public:
  explicit NaiveBisim(const SmallLts& l) : l_(l), n_(l.states) {
    tau_star_.assign(n_, std::vector<bool>(n_, false));
    for (std::size_t s = 0; s < n_; ++s) tau_star_[s][s] = true;
    for (const auto& e : l.edges)
      if (e.label == "tau") tau_star_[e.src][e.dst] = true;
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t i = 0; i < n_; ++i)
        if (tau_star_[i][k])
          for (std::size_t j = 0; j < n_; ++j)
            if (tau_star_[k][j]) tau_star_[i][j] = true;

    weak_barbs_.resize(n_);
    for (std::size_t s = 0; s < n_; ++s)
      for (std::size_t t = 0; t < n_; ++t)
        if (tau_star_[s][t]) weak_barbs_[s].insert(l.barbs[t].begin(), l.barbs[t].end());

    rel_.assign(n_, std::vector<bool>(n_, false));
    for (std::size_t p = 0; p < n_; ++p)
      for (std::size_t q = 0; q < n_; ++q) rel_[p][q] = weak_barbs_[p] == weak_barbs_[q];
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t p = 0; p < n_; ++p)
        for (std::size_t q = 0; q < n_; ++q)
          if (rel_[p][q] && (!answers(p, q) || !answers(q, p))) {
            rel_[p][q] = rel_[q][p] = false;
            changed = true;
          }
    }
  }

  bool related(std::size_t p, std::size_t q) const { return rel_[p][q]; }
  const std::set<std::string>& weak_barbs(std::size_t s) const { return weak_barbs_[s]; }

 private:
  const SmallLts& l_;
  std::size_t n_;
  std::vector<std::vector<bool>> tau_star_;
  std::vector<std::set<std::string>> weak_barbs_;
  std::vector<std::vector<bool>> rel_;

  // q reaches some q2 related to p2 by τ* (label "tau") or τ* label τ*.
  bool reply(std::size_t q, const std::string& label, std::size_t p2, bool p_is_left) const {
    for (std::size_t a = 0; a < n_; ++a) {
      if (!tau_star_[q][a]) continue;
      if (label == "tau") {
        if (p_is_left ? rel_[p2][a] : rel_[a][p2]) return true;
        continue;
      }
      for (const auto& e : l_.edges) {
        if (e.src != a || e.label != label) continue;
        for (std::size_t b = 0; b < n_; ++b)
          if (tau_star_[e.dst][b] && (p_is_left ? rel_[p2][b] : rel_[b][p2])) return true;
      }
    }
    return false;
  }

  // Every strong step of p is matched weakly by q.
  bool answers(std::size_t p, std::size_t q) const {
    for (const auto& e : l_.edges)
      if (e.src == p && !reply(q, e.label, e.dst, true)) return false;
    return true;
  }
};

}  // namespace oracle
