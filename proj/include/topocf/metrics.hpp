#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "topocf/core.hpp"

namespace topocf {

std::size_t mask_area(const Mask& m);
/// Pixels set in both masks. Throws Error(contract) on shape mismatch.
std::size_t intersection_area(const Mask& p, const Mask& g);

/// |p & g| / |p | g|. Both empty scores 1; exactly one empty scores 0.
double iou(const Mask& p, const Mask& g);
/// 2 |p & g| / (|p| + |g|), same empty-mask conventions as iou().
double dice(const Mask& p, const Mask& g);

struct SampleScore {
  std::string id;
  double iou = 0.0;
  double dice = 0.0;
};

struct MetricsReport {
  std::vector<SampleScore> per_sample;
  double mean_iou = 0.0;
  double mean_dice = 0.0;
  std::size_t n = 0;
};

struct MaskPair {
  const Mask* pred = nullptr;
  const Mask* gt = nullptr;
  std::string id;
};

/// Throws Error(empty_input) for an empty list.
MetricsReport mean_report(const std::vector<MaskPair>& pairs);
/// Averages precomputed scores (used when some records failed upstream and
/// are scored 0). Throws Error(empty_input) for an empty list.
MetricsReport mean_report(std::vector<SampleScore> scores);

}  // namespace topocf
