#pragma once

#include <vector>

#include "coopcache/core.hpp"

namespace coopcache::testing {

// Graph with explicit coverage sets; positions are placeholders.
inline AssociationGraph graph_of(int num_bs, std::vector<std::vector<int>> covering) {
  AssociationGraph g;
  g.bs_positions.assign(static_cast<std::size_t>(num_bs), Point{});
  g.user_positions.assign(covering.size(), Point{});
  g.radius = 1.0;
  g.covering = std::move(covering);
  return g;
}

}  // namespace coopcache::testing
