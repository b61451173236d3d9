#include "topocf/postprocess.hpp"

#include <algorithm>
#include <cmath>

#include "topocf/error.hpp"

namespace topocf {

int histogram_bin(double v, int bins) {
  const int b = static_cast<int>(std::floor(v * bins));
  return std::clamp(b, 0, bins - 1);
}

int otsu_bin(const std::vector<float>& values, int bins, bool support_only) {
  std::vector<double> hist(static_cast<std::size_t>(bins), 0.0);
  for (float v : values) hist[static_cast<std::size_t>(histogram_bin(v, bins))] += 1.0;
  if (support_only) hist[0] = 0.0;

  double total = 0.0, moment = 0.0;
  int occupied = 0, only = bins;
  for (int b = 0; b < bins; ++b) {
    total += hist[b];
    moment += b * hist[b];
    if (hist[b] > 0.0) ++occupied, only = b;
  }
  if (occupied == 0) return bins;
  if (occupied == 1) return only == 0 ? bins : only;

  double w0 = 0.0, m0 = 0.0, best = -1.0;
  int best_t = bins;
  for (int t = 1; t < bins; ++t) {
    w0 += hist[t - 1];
    m0 += (t - 1) * hist[t - 1];
    const double w1 = total - w0;
    if (w0 <= 0.0 || w1 <= 0.0) continue;
    const double mu0 = m0 / w0;
    const double mu1 = (moment - m0) / w1;
    const double between = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
    if (between > best) best = between, best_t = t;
  }
  return best_t;
}

std::vector<std::pair<int, int>> disk(int radius) {
  std::vector<std::pair<int, int>> out;
  const int lim = radius * (radius + 1);
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= lim) out.emplace_back(dy, dx);
  return out;
}

namespace {

Mask morph(const Mask& m, int radius, bool erosion) {
  if (radius <= 0) return m;
  const auto se = disk(radius);
  Mask out(m.height, m.width);
  for (int r = 0; r < m.height; ++r)
    for (int c = 0; c < m.width; ++c) {
      bool hit = erosion;
      for (auto [dy, dx] : se) {
        const int rr = r + dy, cc = c + dx;
        const bool inside = rr >= 0 && rr < m.height && cc >= 0 && cc < m.width;
        const bool fg = inside ? m.at(rr, cc) != 0 : erosion;
        if (erosion && !fg) {
          hit = false;
          break;
        }
        if (!erosion && fg) {
          hit = true;
          break;
        }
      }
      out.at(r, c) = hit;
    }
  return out;
}

}  // namespace

Mask erode(const Mask& m, int radius) { return morph(m, radius, true); }
Mask dilate(const Mask& m, int radius) { return morph(m, radius, false); }
Mask open(const Mask& m, int radius) { return dilate(erode(m, radius), radius); }
Mask close(const Mask& m, int radius) { return erode(dilate(m, radius), radius); }

std::vector<int> label_components(const Mask& m, int connectivity, int* count) {
  if (connectivity != 4 && connectivity != 8)
    throw Error(ErrorKind::contract, "connectivity must be 4 or 8");
  std::vector<int> label(m.size(), 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < m.height; ++r)
    for (int c = 0; c < m.width; ++c) {
      const auto i = static_cast<std::size_t>(r) * m.width + c;
      if (!m.data[i] || label[i]) continue;
      label[i] = ++next;
      stack.assign(1, {r, c});
      while (!stack.empty()) {
        auto [y, x] = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) {
            if ((dy == 0 && dx == 0) || (connectivity == 4 && dy != 0 && dx != 0)) continue;
            const int yy = y + dy, xx = x + dx;
            if (yy < 0 || yy >= m.height || xx < 0 || xx >= m.width) continue;
            const auto j = static_cast<std::size_t>(yy) * m.width + xx;
            if (m.data[j] && !label[j]) label[j] = next, stack.emplace_back(yy, xx);
          }
      }
    }
  if (count) *count = next;
  return label;
}

Mask remove_small_components(const Mask& m, int min_px, int connectivity) {
  int k = 0;
  const auto label = label_components(m, connectivity, &k);
  std::vector<int> size(static_cast<std::size_t>(k) + 1, 0);
  for (int l : label) ++size[static_cast<std::size_t>(l)];
  Mask out(m.height, m.width);
  for (std::size_t i = 0; i < label.size(); ++i)
    out.data[i] = label[i] != 0 && size[static_cast<std::size_t>(label[i])] >= min_px;
  return out;
}

Mask postprocess(const Image& heatmap, const PostprocConfig& cfg) {
  if (cfg.bins < 2) throw Error(ErrorKind::contract, "threshold histogram needs >= 2 bins");
  if (cfg.open_radius < 0 || cfg.close_radius < 0 || cfg.min_component_px < 0)
    throw Error(ErrorKind::contract, "postprocess radii and sizes must be non-negative");

  float peak = 0.0f;
  for (float v : heatmap.data) peak = std::max(peak, v);
  Mask m(heatmap.height, heatmap.width);
  if (!(peak > 0.0f)) return m;

  std::vector<float> norm(heatmap.size());
  for (std::size_t i = 0; i < norm.size(); ++i)
    norm[i] = static_cast<float>(static_cast<double>(heatmap.data[i]) / peak);

  if (cfg.threshold_mode == ThresholdMode::otsu) {
    const int t = otsu_bin(norm, cfg.bins, cfg.otsu_support_only);
    for (std::size_t i = 0; i < norm.size(); ++i)
      m.data[i] = histogram_bin(norm[i], cfg.bins) >= t;
  } else {
    for (std::size_t i = 0; i < norm.size(); ++i) m.data[i] = norm[i] >= cfg.fixed_threshold;
  }
  m = open(m, cfg.open_radius);
  m = close(m, cfg.close_radius);
  return remove_small_components(m, cfg.min_component_px, cfg.connectivity);
}

}  // namespace topocf
