#pragma once

#include <utility>
#include <vector>

#include "topocf/core.hpp"
#include "topocf/topology.hpp"

namespace fixture {

/// Graph with the given centers and ratios; each edge is weighted by the
/// distance between its centers.
inline topocf::TopologyGraph graph(const std::vector<topocf::CSCode>& centers,
                                   const std::vector<double>& ratios,
                                   const std::vector<std::pair<int, int>>& edges) {
  topocf::TopologyGraph g;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    topocf::TopologyNode n;
    n.id = static_cast<int>(i);
    n.center = centers[i];
    n.abnormal_ratio = ratios[i];
    n.member_ids = {"m" + std::to_string(i)};
    n.members = {i};
    n.centroid2d = {static_cast<double>(i), 0.0};
    g.nodes.push_back(n);
  }
  for (auto [a, b] : edges)
    g.edges.push_back({std::min(a, b), std::max(a, b), topocf::euclidean(centers[a], centers[b])});
  return g;
}

inline topocf::CSCode at(double x, double y = 0.0) { return {x, y, 0, 0, 0, 0, 0, 0}; }

}  // namespace fixture
