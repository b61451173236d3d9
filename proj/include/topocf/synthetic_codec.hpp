#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "topocf/codec.hpp"

namespace topocf {

/// Analytic phantom codec.
///
/// IS layout (6 values): head_cx, head_cy, head_rx, head_ry, shade, texture_seed.
/// CS layout (8 values): amp, lx, ly, sigma, ecc, angle, rim, reserved.
/// Coordinates are fractions of the image side; pixel (r, c) sits at
/// u = (c + 0.5) / W, v = (r + 0.5) / H.
namespace phantom {

inline constexpr std::size_t kIsDim = 6;
inline constexpr int kDefaultSize = 64;

inline constexpr double kInsideLevel = 0.32;
inline constexpr double kOutsideLevel = 0.22;
inline constexpr double kTextureAmplitude = 0.015;
inline constexpr double kRimHalfWidth = 0.15;

inline constexpr double kClassifierSlope = 40.0;
inline constexpr double kClassifierOffset = 0.15;

inline constexpr double kAbnormalAmpMin = 0.3;
inline constexpr double kAbnormalAmpMax = 0.8;
inline constexpr double kNormalAmpMax = 0.05;

struct PhantomParams {
  double head_cx = 0.5, head_cy = 0.5;
  double head_rx = 0.35, head_ry = 0.35;
  double shade = 0.0;
  std::uint32_t texture_seed = 0;  ///< 0 disables texture

  static PhantomParams from_code(const ISCode& is);
  ISCode to_code() const;
};

struct LesionParams {
  double amp = 0.0;
  double lx = 0.5, ly = 0.5;
  double sigma = 0.06;
  double ecc = 1.0;
  double angle = 0.0;
  double rim = 0.0;

  static LesionParams from_code(const CSCode& cs);
  CSCode to_code() const;
  /// Semi-axes of the lesion's 1-sigma ellipse in image-width units.
  double sigma_a() const;
  double sigma_b() const;
};

Image background(const ISCode& is, int height, int width);
/// Lesion intensity L = amp * exp(-q / 2) without the rim or background.
std::vector<double> lesion_field(const CSCode& cs, int height, int width);
Image render(const CSCode& cs, const ISCode& is, int height, int width);
/// Full-width-half-maximum region {L >= amp / 2}; empty when amp == 0.
Mask fwhm_mask(const CSCode& cs, int height, int width);
/// Percentile with linear interpolation between order statistics; q in [0, 1].
double percentile(std::vector<float> values, double q);
/// m = p99.5 - median, p = 1 / (1 + exp(-40 (m - 0.15))).
double classify(const Image& image);

}  // namespace phantom

/// Content-addressed store of generated images and their codes. Images are
/// keyed by a digest of their 8-bit quantisation, so a float image and its
/// PGM round trip resolve to the same entry.
class SyntheticRegistry {
 public:
  struct Entry {
    std::string id;
    Codes codes;
  };

  void add(const std::string& id, const Codes& codes, const Image& image);
  /// Candidates whose quantised digest matches; empty when unknown.
  std::vector<const Entry*> candidates(const Image& image) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  int height() const { return height_; }
  int width() const { return width_; }
  void set_shape(int height, int width) { height_ = height, width_ = width; }

  static std::uint64_t image_key(const Image& image);

 private:
  std::vector<Entry> entries_;
  std::unordered_multimap<std::uint64_t, std::size_t> index_;
  int height_ = phantom::kDefaultSize;
  int width_ = phantom::kDefaultSize;
};

class SyntheticCodec : public Codec {
 public:
  explicit SyntheticCodec(int height = phantom::kDefaultSize, int width = phantom::kDefaultSize,
                          std::shared_ptr<const SyntheticRegistry> registry = nullptr);

  CodecContract contract() const override;
  Image decode(const CSCode& cs, const ISCode& is) const override;
  /// Registry lookup, verified by re-rendering the candidate codes.
  /// Throws Error(not_in_registry) for unknown images.
  Codes encode(const Image& image) const override;
  double classify(const Image& image) const override;

 private:
  int height_;
  int width_;
  std::shared_ptr<const SyntheticRegistry> registry_;
};

struct SyntheticData {
  Dataset dataset;
  std::vector<Mask> masks;  ///< ground truth, aligned with dataset.records
  std::shared_ptr<SyntheticRegistry> registry;
};

/// Seeded phantom dataset. Normals come first, ids are "s0000", "s0001", ...
/// Every draw comes from one SplitMix64 stream seeded with `seed`.
SyntheticData make_dataset(std::size_t n_normal, std::size_t n_abnormal, std::uint64_t seed,
                           int size = phantom::kDefaultSize);

/// Attaches rendered images and FWHM masks to records and fills a registry.
/// Used by dataset factories that sample codes themselves.
SyntheticData materialize(Dataset dataset, int size = phantom::kDefaultSize);

}  // namespace topocf
