#include "topocf/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topocf/error.hpp"
#include "topocf/rng.hpp"

namespace topocf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_node(const DistanceMatrix& m, int id) {
  if (id < 0 || static_cast<std::size_t>(id) >= m.n)
    throw Error(ErrorKind::contract, "node id " + std::to_string(id) + " out of range [0, " +
                                         std::to_string(m.n) + ")");
}

bool tight(double w, double rest, double total) {
  return std::abs(w + rest - total) <= 1e-12 * std::max(1.0, total);
}

// Depth-first search over tight edges in ascending id order; the first
// complete path found is the lexicographically smallest shortest path.
bool descend(const DistanceMatrix& m, const std::vector<double>& to_dst, int u, int dst,
             std::vector<char>& on_path, std::vector<int>& path) {
  if (u == dst) return true;
  for (std::size_t v = 0; v < m.n; ++v) {
    const double w = m.at(static_cast<std::size_t>(u), v);
    if (static_cast<int>(v) == u || std::isinf(w) || on_path[v] || std::isinf(to_dst[v])) continue;
    if (!tight(w, to_dst[v], to_dst[static_cast<std::size_t>(u)])) continue;
    on_path[v] = 1;
    path.push_back(static_cast<int>(v));
    if (descend(m, to_dst, static_cast<int>(v), dst, on_path, path)) return true;
    path.pop_back();
    on_path[v] = 0;
  }
  return false;
}

}  // namespace

DistanceMatrix adjacency_matrix(const TopologyGraph& g) {
  DistanceMatrix m;
  m.n = g.nodes.size();
  m.d.assign(m.n * m.n, kInf);
  for (std::size_t i = 0; i < m.n; ++i) m.d[i * m.n + i] = 0.0;
  for (const auto& e : g.edges) {
    const auto a = static_cast<std::size_t>(e.a);
    const auto b = static_cast<std::size_t>(e.b);
    m.d[a * m.n + b] = m.d[b * m.n + a] = e.weight;
  }
  return m;
}

std::vector<double> dijkstra_distances(const DistanceMatrix& m, int src) {
  check_node(m, src);
  std::vector<double> dist(m.n, kInf);
  std::vector<char> done(m.n, 0);
  dist[static_cast<std::size_t>(src)] = 0.0;
  for (std::size_t round = 0; round < m.n; ++round) {
    std::size_t u = m.n;
    for (std::size_t v = 0; v < m.n; ++v)
      if (!done[v] && !std::isinf(dist[v]) && (u == m.n || dist[v] < dist[u])) u = v;
    if (u == m.n) break;
    done[u] = 1;
    for (std::size_t v = 0; v < m.n; ++v) {
      const double w = m.at(u, v);
      if (!done[v] && !std::isinf(w) && dist[u] + w < dist[v]) dist[v] = dist[u] + w;
    }
  }
  return dist;
}

PathPlan shortest_path(const DistanceMatrix& m, int src, int dst) {
  check_node(m, src);
  check_node(m, dst);
  PathPlan plan;
  if (src == dst) {
    plan.node_ids = {src};
    plan.cumulative_lengths = {0.0};
    return plan;
  }
  const auto to_dst = dijkstra_distances(m, dst);
  if (std::isinf(to_dst[static_cast<std::size_t>(src)])) throw UnreachableError(src, dst);

  std::vector<char> on_path(m.n, 0);
  on_path[static_cast<std::size_t>(src)] = 1;
  plan.node_ids = {src};
  if (!descend(m, to_dst, src, dst, on_path, plan.node_ids))
    throw Error(ErrorKind::contract, "no tight path reconstructed from " + std::to_string(src) +
                                         " to " + std::to_string(dst));
  plan.cumulative_lengths = {0.0};
  for (std::size_t k = 1; k < plan.node_ids.size(); ++k)
    plan.cumulative_lengths.push_back(
        plan.cumulative_lengths.back() +
        m.at(static_cast<std::size_t>(plan.node_ids[k - 1]), static_cast<std::size_t>(plan.node_ids[k])));
  return plan;
}

int nearest_node(const CSCode& cs, const TopologyGraph& g, const RatioFilter& filter) {
  int best = -1;
  double best_d = kInf;
  for (const auto& node : g.nodes) {
    if (filter && !filter(node.abnormal_ratio)) continue;
    const double d = euclidean(cs, node.center);
    if (best < 0 || d < best_d) best = node.id, best_d = d;
  }
  if (best < 0) throw Error(ErrorKind::no_candidate, "no graph node passes the filter");
  return best;
}

bool qualifies(double abnormal_ratio, ClassLabel target, const PlannerConfig& cfg) {
  return target == ClassLabel::abnormal ? abnormal_ratio >= cfg.abnormal_purity
                                        : abnormal_ratio <= cfg.normal_purity;
}

int select_goal_node(const TopologyGraph& g, ClassLabel target, const PlannerConfig& cfg,
                     int src) {
  std::vector<int> cand;
  for (const auto& node : g.nodes)
    if (qualifies(node.abnormal_ratio, target, cfg)) cand.push_back(node.id);
  if (cand.empty())
    throw Error(ErrorKind::no_candidate,
                std::string("no node qualifies as a ") + to_string(target) + " goal");

  if (cfg.goal_mode == GoalMode::random) {
    SplitMix64 rng(cfg.seed);
    return cand[rng.below(cand.size())];
  }

  const auto m = adjacency_matrix(g);
  const auto dist = dijkstra_distances(m, src);
  // Purity measured toward the target class.
  auto purity = [&](int id) {
    const double r = g.nodes[static_cast<std::size_t>(id)].abnormal_ratio;
    return target == ClassLabel::abnormal ? r : 1.0 - r;
  };
  int best = -1;
  for (int id : cand) {
    const double d = dist[static_cast<std::size_t>(id)];
    if (std::isinf(d)) continue;
    if (best < 0) {
      best = id;
      continue;
    }
    const double bd = dist[static_cast<std::size_t>(best)];
    if (d < bd || (d == bd && purity(id) > purity(best))) best = id;
  }
  if (best < 0) throw UnreachableError(src, cand.front());
  return best;
}

PathPlan plan_for(const CSCode& cs, ClassLabel query_label, const TopologyGraph& g,
                  const DistanceMatrix& m, const PlannerConfig& cfg) {
  if (g.nodes.empty()) throw Error(ErrorKind::no_candidate, "topology graph has no nodes");
  const int src = nearest_node(cs, g);
  const auto target = query_label == ClassLabel::abnormal ? ClassLabel::normal : ClassLabel::abnormal;
  const int goal = select_goal_node(g, target, cfg, src);
  return shortest_path(m, src, goal);
}

}  // namespace topocf
