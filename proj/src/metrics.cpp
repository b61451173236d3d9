#include "topocf/metrics.hpp"

#include "topocf/error.hpp"

namespace topocf {

std::size_t mask_area(const Mask& m) {
  std::size_t n = 0;
  for (auto v : m.data) n += v != 0;
  return n;
}

std::size_t intersection_area(const Mask& p, const Mask& g) {
  check_same_shape(p, g, "intersection_area");
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) n += (p.data[i] != 0) & (g.data[i] != 0);
  return n;
}

double iou(const Mask& p, const Mask& g) {
  const std::size_t inter = intersection_area(p, g);
  const std::size_t uni = mask_area(p) + mask_area(g) - inter;
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double dice(const Mask& p, const Mask& g) {
  const std::size_t inter = intersection_area(p, g);
  const std::size_t total = mask_area(p) + mask_area(g);
  if (total == 0) return 1.0;
  return static_cast<double>(2 * inter) / static_cast<double>(total);
}

MetricsReport mean_report(const std::vector<MaskPair>& pairs) {
  if (pairs.empty()) throw Error(ErrorKind::empty_input, "mean_report needs at least one pair");
  std::vector<SampleScore> scores;
  scores.reserve(pairs.size());
  for (const auto& pr : pairs) scores.push_back({pr.id, iou(*pr.pred, *pr.gt), dice(*pr.pred, *pr.gt)});
  return mean_report(std::move(scores));
}

MetricsReport mean_report(std::vector<SampleScore> scores) {
  if (scores.empty()) throw Error(ErrorKind::empty_input, "mean_report needs at least one score");
  MetricsReport r;
  r.n = scores.size();
  for (const auto& s : scores) {
    r.mean_iou += s.iou;
    r.mean_dice += s.dice;
  }
  r.mean_iou /= static_cast<double>(r.n);
  r.mean_dice /= static_cast<double>(r.n);
  r.per_sample = std::move(scores);
  return r;
}

}  // namespace topocf
