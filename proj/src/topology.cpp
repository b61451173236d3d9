#include "topocf/topology.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "topocf/error.hpp"

namespace topocf {

namespace {

double dist2d(const Point2& a, const Point2& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  return std::sqrt(dx * dx + dy * dy);
}

bool shares_member(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i;
    else ++j;
  }
  return false;
}

}  // namespace

std::vector<CoverBin> build_cover(const Embedding2D& emb, const CoverConfig& cfg) {
  if (emb.empty()) throw Error(ErrorKind::empty_input, "cover of an empty embedding");
  if (cfg.nx < 1 || cfg.ny < 1) throw Error(ErrorKind::contract, "cover needs nx, ny >= 1");
  if (!(cfg.overlap >= 0.0 && cfg.overlap < 0.5))
    throw Error(ErrorKind::contract, "cover overlap must lie in [0, 0.5)");

  double lo[2] = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double hi[2] = {-lo[0], -lo[1]};
  for (const auto& p : emb)
    for (int k = 0; k < 2; ++k) lo[k] = std::min(lo[k], p[k]), hi[k] = std::max(hi[k], p[k]);
  for (int k = 0; k < 2; ++k) lo[k] -= 1e-9, hi[k] += 1e-9;
  const double wx = (hi[0] - lo[0]) / cfg.nx;
  const double wy = (hi[1] - lo[1]) / cfg.ny;

  std::vector<CoverBin> bins;
  for (int iy = 0; iy < cfg.ny; ++iy) {
    const double y0 = lo[1] + iy * wy - cfg.overlap * wy;
    const double y1 = lo[1] + (iy + 1) * wy + cfg.overlap * wy;
    for (int ix = 0; ix < cfg.nx; ++ix) {
      const double x0 = lo[0] + ix * wx - cfg.overlap * wx;
      const double x1 = lo[0] + (ix + 1) * wx + cfg.overlap * wx;
      CoverBin bin{iy * cfg.nx + ix, ix, iy, {}};
      for (std::size_t i = 0; i < emb.size(); ++i)
        if (emb[i][0] >= x0 && emb[i][0] <= x1 && emb[i][1] >= y0 && emb[i][1] <= y1)
          bin.members.push_back(i);
      if (!bin.members.empty()) bins.push_back(std::move(bin));
    }
  }
  return bins;
}

std::vector<int> dbscan(const std::vector<Point2>& points, double eps, int min_pts) {
  const std::size_t n = points.size();
  std::vector<int> label(n, kNoise);
  if (n == 0) return label;
  if (!(eps > 0.0)) throw Error(ErrorKind::contract, "dbscan eps must be positive");
  if (min_pts < 1) throw Error(ErrorKind::contract, "dbscan min_pts must be >= 1");

  std::vector<std::vector<std::size_t>> nbr(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (dist2d(points[i], points[j]) <= eps) nbr[i].push_back(j);

  std::vector<char> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = nbr[i].size() >= static_cast<std::size_t>(min_pts);

  int next = 0;
  std::vector<std::size_t> stack;
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i] || label[i] != kNoise) continue;
    label[i] = next;
    stack.assign(1, i);
    while (!stack.empty()) {
      const auto u = stack.back();
      stack.pop_back();
      for (auto v : nbr[u])
        if (core[v] && label[v] == kNoise) label[v] = next, stack.push_back(v);
    }
    ++next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) continue;
    for (auto j : nbr[i])  // ascending, so the first core hit has the lowest index
      if (core[j]) {
        label[i] = label[j];
        break;
      }
  }
  return label;
}

double adaptive_eps(const std::vector<Point2>& points, const DbscanConfig& cfg) {
  if (cfg.eps) return *cfg.eps;
  const std::size_t n = points.size();
  constexpr double kFloor = 1e-12;
  if (n < 2) return kFloor;
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(std::max(cfg.knn, 1)), n - 1);
  double total = 0.0;
  std::vector<double> d;
  for (std::size_t i = 0; i < n; ++i) {
    d.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) d.push_back(dist2d(points[i], points[j]));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    total += d[k - 1];
  }
  return std::max(kFloor, cfg.eps_factor * total / static_cast<double>(n));
}

std::vector<std::vector<int>> cluster_bins(const std::vector<CoverBin>& covers,
                                           const Embedding2D& emb, const Dataset& d,
                                           const MapperConfig& cfg) {
  std::vector<std::vector<int>> labels;
  labels.reserve(covers.size());
  for (const auto& bin : covers) {
    std::vector<int> lab(bin.members.size(), kNoise);
    if (!cfg.stratified_clustering) {
      std::vector<Point2> pts;
      for (auto i : bin.members) pts.push_back(emb[i]);
      lab = dbscan(pts, adaptive_eps(pts, cfg.dbscan), cfg.dbscan.min_pts);
    } else {
      int offset = 0;
      for (auto cls : {ClassLabel::normal, ClassLabel::abnormal}) {
        std::vector<std::size_t> slot;
        std::vector<Point2> pts;
        for (std::size_t k = 0; k < bin.members.size(); ++k)
          if (d.records[bin.members[k]].label == cls) slot.push_back(k), pts.push_back(emb[bin.members[k]]);
        if (pts.empty()) continue;
        const auto sub = dbscan(pts, adaptive_eps(pts, cfg.dbscan), cfg.dbscan.min_pts);
        int most = -1;
        for (std::size_t k = 0; k < sub.size(); ++k) {
          if (sub[k] != kNoise) lab[slot[k]] = sub[k] + offset;
          most = std::max(most, sub[k]);
        }
        offset += most + 1;
      }
    }
    labels.push_back(std::move(lab));
  }
  return labels;
}

TopologyGraph build_graph(const std::vector<CoverBin>& covers,
                          const std::vector<std::vector<int>>& labels, const Dataset& d,
                          const Embedding2D& emb) {
  if (labels.size() != covers.size())
    throw Error(ErrorKind::contract, "one label vector per cover bin required");
  TopologyGraph g;
  for (std::size_t b = 0; b < covers.size(); ++b) {
    const auto& bin = covers[b];
    const auto& lab = labels[b];
    if (lab.size() != bin.members.size())
      throw Error(ErrorKind::contract, "label vector does not match bin membership");
    const int clusters = lab.empty() ? 0 : *std::max_element(lab.begin(), lab.end()) + 1;
    for (int c = 0; c < clusters; ++c) {
      TopologyNode node;
      node.bin = bin.index;
      node.cluster = c;
      for (std::size_t k = 0; k < lab.size(); ++k)
        if (lab[k] == c) node.members.push_back(bin.members[k]);
      if (node.members.empty()) continue;
      node.id = static_cast<int>(g.nodes.size());
      std::size_t abnormal = 0;
      for (auto i : node.members) {
        const auto& r = d.records.at(i);
        node.member_ids.push_back(r.id);
        for (std::size_t k = 0; k < kCsDim; ++k) node.center[k] += r.cs[k];
        node.centroid2d[0] += emb.at(i)[0];
        node.centroid2d[1] += emb.at(i)[1];
        abnormal += r.label == ClassLabel::abnormal;
      }
      const double m = static_cast<double>(node.members.size());
      for (auto& v : node.center) v /= m;
      node.centroid2d[0] /= m;
      node.centroid2d[1] /= m;
      node.abnormal_ratio = static_cast<double>(abnormal) / m;
      g.nodes.push_back(std::move(node));
    }
  }
  for (std::size_t a = 0; a < g.nodes.size(); ++a)
    for (std::size_t b = a + 1; b < g.nodes.size(); ++b)
      if (shares_member(g.nodes[a].members, g.nodes[b].members))
        g.edges.push_back({static_cast<int>(a), static_cast<int>(b),
                           euclidean(g.nodes[a].center, g.nodes[b].center)});
  return g;
}

TopologyGraph build_mapper(const Dataset& d, const Embedding2D& emb, const MapperConfig& cfg) {
  if (emb.size() != d.records.size())
    throw Error(ErrorKind::contract, "embedding has " + std::to_string(emb.size()) +
                                         " points for " + std::to_string(d.records.size()) +
                                         " records");
  const auto covers = build_cover(emb, cfg.cover);
  const auto labels = cluster_bins(covers, emb, d, cfg);
  return build_graph(covers, labels, d, emb);
}

}  // namespace topocf
