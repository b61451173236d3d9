#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topocf/core.hpp"
#include "topocf/embedding.hpp"

namespace topocf {

struct CoverConfig {
  int nx = 8;
  int ny = 8;
  double overlap = 0.35;  ///< fraction of bin width added on each side, in [0, 0.5)
};

struct DbscanConfig {
  /// Fixed radius. When unset each bin uses eps_factor times the mean distance
  /// from its points to their k-th nearest neighbour (k = knn, or n - 1 if smaller).
  std::optional<double> eps;
  double eps_factor = 1.5;
  int knn = 3;
  int min_pts = 4;  ///< neighbour count includes the point itself
};

struct CoverBin {
  int index = 0;  ///< row-major: iy * nx + ix
  int ix = 0;
  int iy = 0;
  std::vector<std::size_t> members;  ///< ascending sample indices
};

/// Non-empty bins of a uniform nx x ny grid over the bounding box (expanded by
/// 1e-9 per side), each widened by overlap * width on both sides. Bins are
/// closed rectangles. Throws Error(empty_input) on an empty embedding.
std::vector<CoverBin> build_cover(const Embedding2D& emb, const CoverConfig& cfg);

inline constexpr int kNoise = -1;

/// Labels 0..m-1 per point, kNoise for noise. Clusters are connected
/// components of core points; cluster ids follow the lowest core index of each
/// component. A border point joins the cluster of the lowest-index core point
/// within eps of it.
std::vector<int> dbscan(const std::vector<Point2>& points, double eps, int min_pts);

/// Radius used for a bin when DbscanConfig::eps is unset.
double adaptive_eps(const std::vector<Point2>& points, const DbscanConfig& cfg);

struct TopologyNode {
  int id = 0;
  int bin = 0;
  int cluster = 0;
  std::vector<std::size_t> members;  ///< ascending sample indices
  std::vector<std::string> member_ids;
  CSCode center{};
  double abnormal_ratio = 0.0;
  Point2 centroid2d{};
};

struct TopologyEdge {
  int a = 0;  ///< a < b
  int b = 0;
  double weight = 0.0;
};

struct TopologyGraph {
  std::vector<TopologyNode> nodes;
  std::vector<TopologyEdge> edges;  ///< sorted by (a, b)
};

/// One node per (bin, cluster) in bin row-major then cluster order; an edge
/// for every node pair with a shared member, weighted by the 8-D distance
/// between centers. `labels[k]` aligns with `covers[k].members`.
TopologyGraph build_graph(const std::vector<CoverBin>& covers,
                          const std::vector<std::vector<int>>& labels, const Dataset& d,
                          const Embedding2D& emb);

struct MapperConfig {
  CoverConfig cover;
  DbscanConfig dbscan;
  bool stratified_clustering = false;  ///< cluster each class separately within a bin
};

/// Per-bin DBSCAN labels for a cover.
std::vector<std::vector<int>> cluster_bins(const std::vector<CoverBin>& covers,
                                           const Embedding2D& emb, const Dataset& d,
                                           const MapperConfig& cfg);

TopologyGraph build_mapper(const Dataset& d, const Embedding2D& emb, const MapperConfig& cfg);

}  // namespace topocf
