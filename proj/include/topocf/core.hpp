#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace topocf {

inline constexpr std::size_t kCsDim = 8;

/// Single-channel raster, row-major, values in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int h, int w, float fill = 0.0f)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  float at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Image&, const Image&) = default;
};

/// Binary raster; every entry is 0 or 1.
struct Mask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  Mask() = default;
  Mask(int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), data(static_cast<std::size_t>(h) * w, fill) {}

  std::uint8_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * width + c]; }
  std::uint8_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * width + c]; }
  std::size_t size() const { return data.size(); }

  friend bool operator==(const Mask&, const Mask&) = default;
};

enum class ClassLabel { normal, abnormal };

const char* to_string(ClassLabel label);
/// Accepts "normal" / "abnormal"; anything else yields nullopt.
std::optional<ClassLabel> parse_label(const std::string& text);

using CSCode = std::array<double, kCsDim>;
using ISCode = std::vector<double>;

struct SampleRecord {
  std::string id;
  ClassLabel label = ClassLabel::normal;
  CSCode cs{};
  ISCode is;
  std::optional<Image> image;
  std::optional<Mask> gt_mask;
};

enum class Split { train, test };

struct Dataset {
  std::vector<SampleRecord> records;
  Split split = Split::test;
};

struct Finding {
  std::string kind;  ///< "empty", "duplicate-id", "dimension-mismatch", "pixel-range", ...
  std::string detail;

  friend bool operator==(const Finding&, const Finding&) = default;
};

struct ValidationReport {
  bool valid = true;
  std::vector<Finding> findings;

  std::size_t count(const std::string& kind) const;
  friend bool operator==(const ValidationReport&, const ValidationReport&) = default;
};

/// Checks id uniqueness, IS-dimension consistency, code finiteness, image
/// shape and pixel range, and mask binarity and shape. Never throws.
ValidationReport validate_dataset(const Dataset& d);

struct DatasetStats {
  std::size_t n_normal = 0;
  std::size_t n_abnormal = 0;
  std::size_t cs_dim = kCsDim;
  std::size_t is_dim = 0;
  std::optional<std::pair<int, int>> image_shape;  ///< (height, width) when images are attached
};

/// Throws Error(contract) when validate_dataset reports problems.
DatasetStats dataset_stats(const Dataset& d);

/// Throws Error(contract) unless the image is at least 8x8 with finite values in [0, 1].
void check_image(const Image& img, const char* what = "image");
void check_same_shape(const Image& a, const Image& b, const char* what);
void check_same_shape(const Mask& a, const Mask& b, const char* what);

double euclidean(const CSCode& a, const CSCode& b);

}  // namespace topocf
