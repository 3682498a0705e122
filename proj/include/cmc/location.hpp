#pragma once

#include <algorithm>
#include <vector>

#include "cmc/syntax.hpp"

namespace cmc {

/// The capability sequence that moves an ambient sitting inside `src` to inside `dst`:
/// `out` every node from `src` up to the least common ancestor, then `in` every node
/// down to `dst`. Empty when `src == dst`.
inline std::vector<Capability> path(const LocationTree& tree, const AmbientName& src, const AmbientName& dst) {
  if (!tree.contains(src)) throw PreconditionError("path: node not in tree: " + to_string(src));
  if (!tree.contains(dst)) throw PreconditionError("path: node not in tree: " + to_string(dst));

  auto ancestors = [&](const AmbientName& n) {
    std::vector<AmbientName> chain{n};
    for (auto it = tree.parent.find(n); it != tree.parent.end(); it = tree.parent.find(it->second))
      chain.push_back(it->second);
    return chain;
  };
  const auto up = ancestors(src);
  const auto down = ancestors(dst);

  std::size_t lca_up = up.size();
  std::size_t lca_down = down.size();
  for (std::size_t i = 0; i < up.size() && lca_up == up.size(); ++i) {
    auto hit = std::find(down.begin(), down.end(), up[i]);
    if (hit != down.end()) {
      lca_up = i;
      lca_down = static_cast<std::size_t>(hit - down.begin());
    }
  }

  std::vector<Capability> caps;
  for (std::size_t i = 0; i < lca_up; ++i) caps.push_back(Capability::out(up[i]));
  for (std::size_t i = lca_down; i-- > 0;) caps.push_back(Capability::in(down[i]));
  return caps;
}

}  // namespace cmc
