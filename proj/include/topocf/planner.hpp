#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "topocf/core.hpp"
#include "topocf/topology.hpp"

namespace topocf {

/// Dense symmetric edge weights: +inf off-edge, 0 on the diagonal.
struct DistanceMatrix {
  std::size_t n = 0;
  std::vector<double> d;

  double at(std::size_t i, std::size_t j) const { return d[i * n + j]; }
};

DistanceMatrix adjacency_matrix(const TopologyGraph& g);

struct PathPlan {
  std::vector<int> node_ids;               ///< initial node first, goal last
  std::vector<double> cumulative_lengths;  ///< starts at 0, one entry per node

  double length() const { return cumulative_lengths.empty() ? 0.0 : cumulative_lengths.back(); }
};

/// Single-source Dijkstra distances (+inf where unreachable).
std::vector<double> dijkstra_distances(const DistanceMatrix& m, int src);

/// Minimum-weight path; among equal-weight paths the lexicographically
/// smallest node sequence. Throws UnreachableError naming both ids.
PathPlan shortest_path(const DistanceMatrix& m, int src, int dst);

/// Predicate on a node's abnormal ratio.
using RatioFilter = std::function<bool(double)>;

/// argmin of |cs - center|, ties to the lowest id, over nodes passing the
/// filter. Throws Error(no_candidate) if none qualifies.
int nearest_node(const CSCode& cs, const TopologyGraph& g, const RatioFilter& filter = {});

enum class GoalMode { purest_nearest, random };

struct PlannerConfig {
  GoalMode goal_mode = GoalMode::purest_nearest;
  double abnormal_purity = 0.9;  ///< abnormal target: ratio >= this
  double normal_purity = 0.1;    ///< normal target: ratio <= this
  std::uint64_t seed = 0;        ///< random mode
};

/// Whether a node's ratio qualifies it as a goal of the target class.
bool qualifies(double abnormal_ratio, ClassLabel target, const PlannerConfig& cfg);

/// purest_nearest: minimal Dijkstra distance from src, then purer ratio, then
/// lower id; throws UnreachableError(src, first qualifying id) when every
/// qualifying node is unreachable. random: uniform over qualifying nodes with
/// SplitMix64(cfg.seed). Throws Error(no_candidate) if none qualifies.
int select_goal_node(const TopologyGraph& g, ClassLabel target, const PlannerConfig& cfg,
                     int src);

/// nearest node -> goal of the opposite class -> shortest path.
PathPlan plan_for(const CSCode& cs, ClassLabel query_label, const TopologyGraph& g,
                  const DistanceMatrix& m, const PlannerConfig& cfg);

}  // namespace topocf
