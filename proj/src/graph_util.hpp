#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <vector>

#include "idg/instance.hpp"

namespace idg::detail {

// Backward BFS from every Goal state over the edges (s, a) accepted by
// `keep`. Returns the number of obeyed steps to the nearest goal.
template <typename Keep>
std::vector<std::optional<std::size_t>> distances_to_goal(const IdgInstance& instance, Keep keep) {
  const std::size_t n = instance.state_count();
  std::vector<std::vector<std::uint32_t>> reverse(n);
  for (std::uint32_t s = 0; s < n; ++s) {
    const auto acts = instance.actions(StateId{s});
    for (std::uint32_t a = 0; a < acts.size(); ++a) {
      if (keep(StateId{s}, ActionId{a}, acts[a].target)) {
        reverse[acts[a].target.value].push_back(s);
      }
    }
  }
  std::vector<std::optional<std::size_t>> dist(n);
  std::deque<std::uint32_t> queue;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (instance.state_class(StateId{s}) == StateClass::Goal) {
      dist[s] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const std::uint32_t v = queue.front();
    queue.pop_front();
    for (std::uint32_t u : reverse[v]) {
      if (!dist[u]) {
        dist[u] = *dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

}  // namespace idg::detail
