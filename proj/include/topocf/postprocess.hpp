#pragma once

#include <vector>

#include "topocf/core.hpp"

namespace topocf {

enum class ThresholdMode { otsu, fixed };

struct PostprocConfig {
  ThresholdMode threshold_mode = ThresholdMode::otsu;
  double fixed_threshold = 0.5;
  int bins = 256;
  /// Leave bin 0 out of the Otsu histogram so the exact-zero background of a
  /// difference map does not pull the threshold toward the lesion tail.
  bool otsu_support_only = true;
  int open_radius = 1;
  int close_radius = 2;
  int min_component_px = 10;
  int connectivity = 8;  ///< 4 or 8
};

/// Bin of a value in [0, 1] on a `bins`-bin histogram.
int histogram_bin(double v, int bins);

/// Otsu threshold as a bin index t: pixels with bin >= t are foreground.
/// The first maximiser of the between-class variance wins. Returns `bins`
/// (nothing passes) when the histogram is empty; when only one bin is
/// occupied that bin is the threshold unless it is bin 0.
int otsu_bin(const std::vector<float>& values, int bins, bool support_only);

/// Discrete disk: offsets with dx^2 + dy^2 <= r (r + 1); r = 1 is the 3x3 square.
std::vector<std::pair<int, int>> disk(int radius);
/// Pixels outside the image count as foreground.
Mask erode(const Mask& m, int radius);
/// Pixels outside the image count as background.
Mask dilate(const Mask& m, int radius);
Mask open(const Mask& m, int radius);
Mask close(const Mask& m, int radius);

/// Component labels 1..k (0 = background), numbered in raster order.
std::vector<int> label_components(const Mask& m, int connectivity, int* count = nullptr);
Mask remove_small_components(const Mask& m, int min_px, int connectivity);

/// Normalise by max, threshold, open, close, drop small components.
Mask postprocess(const Image& heatmap, const PostprocConfig& cfg);

}  // namespace topocf
