#include "topocf/synthetic_codec.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "topocf/digest.hpp"
#include "topocf/error.hpp"
#include "topocf/rng.hpp"

namespace topocf {
namespace phantom {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }

// Pixel-centre coordinates as fractions of the image side.
double ucoord(int c, int width) { return (c + 0.5) / width; }
double vcoord(int r, int height) { return (r + 0.5) / height; }

struct Wave {
  double fx, fy, phase;
};

std::vector<Wave> texture_waves(std::uint32_t seed) {
  std::vector<Wave> waves;
  if (seed == 0) return waves;
  SplitMix64 rng(seed);
  for (int k = 0; k < 4; ++k) {
    Wave w{};
    w.fx = rng.uniform(2.0, 6.0);
    w.fy = rng.uniform(2.0, 6.0);
    w.phase = rng.uniform(0.0, kTwoPi);
    waves.push_back(w);
  }
  return waves;
}

std::vector<double> background_field(const ISCode& is, int height, int width) {
  const auto p = PhantomParams::from_code(is);
  const auto waves = texture_waves(p.texture_seed);
  std::vector<double> out(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    const double v = vcoord(r, height);
    for (int c = 0; c < width; ++c) {
      const double u = ucoord(c, width);
      const double du = (u - p.head_cx) / p.head_rx;
      const double dv = (v - p.head_cy) / p.head_ry;
      const double r2 = du * du + dv * dv;
      double value = kOutsideLevel;
      if (r2 <= 1.0) {
        value = kInsideLevel * (1.0 - p.shade * r2);
        if (!waves.empty()) {
          double t = 0.0;
          for (const auto& w : waves) t += std::sin(kTwoPi * (w.fx * u + w.fy * v) + w.phase);
          value += kTextureAmplitude * t / static_cast<double>(waves.size());
        }
      }
      out[static_cast<std::size_t>(r) * width + c] = std::clamp(value, 0.0, 1.0);
    }
  }
  return out;
}

// Rotated anisotropic quadratic form q(x, y) of the lesion ellipse.
std::vector<double> quadratic_form(const LesionParams& p, int height, int width) {
  const double sa = p.sigma_a();
  const double sb = p.sigma_b();
  const double ca = std::cos(p.angle);
  const double sn = std::sin(p.angle);
  std::vector<double> q(static_cast<std::size_t>(height) * width);
  for (int r = 0; r < height; ++r) {
    const double dy = vcoord(r, height) - p.ly;
    for (int c = 0; c < width; ++c) {
      const double dx = ucoord(c, width) - p.lx;
      const double a = (ca * dx + sn * dy) / sa;
      const double b = (-sn * dx + ca * dy) / sb;
      q[static_cast<std::size_t>(r) * width + c] = a * a + b * b;
    }
  }
  return q;
}

}  // namespace

PhantomParams PhantomParams::from_code(const ISCode& is) {
  if (is.size() != kIsDim)
    throw Error(ErrorKind::contract, "phantom IS code needs " + std::to_string(kIsDim) +
                                         " values, got " + std::to_string(is.size()));
  PhantomParams p;
  p.head_cx = is[0];
  p.head_cy = is[1];
  p.head_rx = std::max(is[2], 1e-3);
  p.head_ry = std::max(is[3], 1e-3);
  p.shade = is[4];
  p.texture_seed = static_cast<std::uint32_t>(std::clamp(std::llround(is[5]), 0LL, 0xFFFFFFFFLL));
  return p;
}

ISCode PhantomParams::to_code() const {
  return {head_cx, head_cy, head_rx, head_ry, shade, static_cast<double>(texture_seed)};
}

LesionParams LesionParams::from_code(const CSCode& cs) {
  LesionParams p;
  p.amp = cs[0];
  p.lx = cs[1];
  p.ly = cs[2];
  p.sigma = std::max(cs[3], 1e-3);
  p.ecc = std::max(cs[4], 1e-3);
  p.angle = cs[5];
  p.rim = cs[6];
  return p;
}

CSCode LesionParams::to_code() const { return {amp, lx, ly, sigma, ecc, angle, rim, 0.0}; }

double LesionParams::sigma_a() const { return sigma * std::sqrt(ecc); }
double LesionParams::sigma_b() const { return sigma / std::sqrt(ecc); }

Image background(const ISCode& is, int height, int width) {
  const auto field = background_field(is, height, width);
  Image img(height, width);
  for (std::size_t i = 0; i < field.size(); ++i) img.data[i] = static_cast<float>(field[i]);
  return img;
}

std::vector<double> lesion_field(const CSCode& cs, int height, int width) {
  const auto p = LesionParams::from_code(cs);
  std::vector<double> out(static_cast<std::size_t>(height) * width, 0.0);
  if (p.amp == 0.0) return out;
  const auto q = quadratic_form(p, height, width);
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = p.amp * std::exp(-q[i] / 2.0);
  return out;
}

Image render(const CSCode& cs, const ISCode& is, int height, int width) {
  const auto p = LesionParams::from_code(cs);
  if (p.amp == 0.0) return background(is, height, width);
  auto field = background_field(is, height, width);
  const auto q = quadratic_form(p, height, width);
  Image img(height, width);
  for (std::size_t i = 0; i < q.size(); ++i) {
    double v = field[i] + p.amp * std::exp(-q[i] / 2.0);
    if (std::abs(std::sqrt(q[i]) - 1.0) <= kRimHalfWidth) v += p.rim * p.amp;
    img.data[i] = static_cast<float>(std::clamp(v, 0.0, 1.0));
  }
  return img;
}

Mask fwhm_mask(const CSCode& cs, int height, int width) {
  const double amp = cs[0];
  Mask m(height, width);
  if (amp == 0.0) return m;
  const auto field = lesion_field(cs, height, width);
  for (std::size_t i = 0; i < field.size(); ++i) m.data[i] = field[i] >= amp / 2.0;
  return m;
}

double percentile(std::vector<float> values, double q) {
  if (values.empty()) throw Error(ErrorKind::empty_input, "percentile of no values");
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(lo), values.end());
  const double a = values[lo];
  double b = a;
  if (hi != lo) b = *std::min_element(values.begin() + static_cast<std::ptrdiff_t>(hi), values.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

double classify(const Image& image) {
  const double m = percentile(image.data, 0.995) - percentile(image.data, 0.5);
  return 1.0 / (1.0 + std::exp(-kClassifierSlope * (m - kClassifierOffset)));
}

}  // namespace phantom

std::uint64_t SyntheticRegistry::image_key(const Image& image) {
  std::vector<unsigned char> bytes(image.size());
  for (std::size_t i = 0; i < image.size(); ++i)
    bytes[i] = static_cast<unsigned char>(std::lround(std::clamp(image.data[i], 0.0f, 1.0f) * 255.0f));
  const std::int32_t shape[2] = {image.height, image.width};
  return fnv1a64(bytes.data(), bytes.size(), fnv1a64(shape, sizeof shape));
}

void SyntheticRegistry::add(const std::string& id, const Codes& codes, const Image& image) {
  index_.emplace(image_key(image), entries_.size());
  entries_.push_back({id, codes});
}

std::vector<const SyntheticRegistry::Entry*> SyntheticRegistry::candidates(const Image& image) const {
  std::vector<std::size_t> hits;
  auto [lo, hi] = index_.equal_range(image_key(image));
  for (auto it = lo; it != hi; ++it) hits.push_back(it->second);
  std::sort(hits.begin(), hits.end());
  std::vector<const Entry*> out;
  for (auto i : hits) out.push_back(&entries_[i]);
  return out;
}

SyntheticCodec::SyntheticCodec(int height, int width,
                               std::shared_ptr<const SyntheticRegistry> registry)
    : height_(height), width_(width), registry_(std::move(registry)) {
  if (height < 8 || width < 8) throw Error(ErrorKind::contract, "codec image shape below 8x8");
}

CodecContract SyntheticCodec::contract() const {
  return {kCsDim, phantom::kIsDim, height_, width_};
}

Image SyntheticCodec::decode(const CSCode& cs, const ISCode& is) const {
  check_codes(is);
  return phantom::render(cs, is, height_, width_);
}

Codes SyntheticCodec::encode(const Image& image) const {
  if (registry_) {
    const auto key = SyntheticRegistry::image_key(image);
    for (const auto* entry : registry_->candidates(image)) {
      const Image again = phantom::render(entry->codes.cs, entry->codes.is, image.height, image.width);
      if (SyntheticRegistry::image_key(again) == key && again.height == image.height) {
        bool same = true;
        for (std::size_t i = 0; i < image.size() && same; ++i)
          same = std::lround(again.data[i] * 255.0f) == std::lround(image.data[i] * 255.0f);
        if (same) return entry->codes;
      }
    }
  }
  throw Error(ErrorKind::not_in_registry, "image is not in the synthetic registry");
}

double SyntheticCodec::classify(const Image& image) const {
  check_image(image);
  return phantom::classify(image);
}

SyntheticData materialize(Dataset dataset, int size) {
  SyntheticData out;
  out.registry = std::make_shared<SyntheticRegistry>();
  out.registry->set_shape(size, size);
  for (auto& r : dataset.records) {
    r.image = phantom::render(r.cs, r.is, size, size);
    r.gt_mask = phantom::fwhm_mask(r.cs, size, size);
    out.masks.push_back(*r.gt_mask);
    out.registry->add(r.id, {r.cs, r.is}, *r.image);
  }
  out.dataset = std::move(dataset);
  return out;
}

SyntheticData make_dataset(std::size_t n_normal, std::size_t n_abnormal, std::uint64_t seed,
                           int size) {
  using namespace phantom;
  SplitMix64 rng(seed);
  Dataset ds;
  ds.split = Split::test;
  const std::size_t n = n_normal + n_abnormal;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "s%04zu", i);
    rec.id = id;
    rec.label = i < n_normal ? ClassLabel::normal : ClassLabel::abnormal;

    PhantomParams head;
    head.head_cx = as_float(rng.uniform(0.35, 0.65));
    head.head_cy = as_float(rng.uniform(0.35, 0.65));
    head.head_rx = as_float(rng.uniform(0.25, 0.45));
    head.head_ry = as_float(rng.uniform(0.25, 0.45));
    head.shade = as_float(rng.uniform(0.0, 0.3));
    head.texture_seed = static_cast<std::uint32_t>(1 + rng.below((1u << 24) - 1));

    // Lesion site uniform over the inner 60% of the head ellipse.
    const double rad = std::sqrt(rng.uniform()) * 0.6;
    const double theta = rng.uniform(0.0, kTwoPi);
    LesionParams les;
    les.lx = as_float(head.head_cx + rad * head.head_rx * std::cos(theta));
    les.ly = as_float(head.head_cy + rad * head.head_ry * std::sin(theta));
    les.amp = as_float(rng.uniform(kAbnormalAmpMin, kAbnormalAmpMax));
    les.sigma = as_float(rng.uniform(0.035, 0.12));
    les.ecc = as_float(rng.uniform(0.5, 2.0));
    les.angle = as_float(rng.uniform(0.0, std::numbers::pi));
    les.rim = as_float(rng.uniform(0.0, 0.5));
    if (rec.label == ClassLabel::normal) les.amp = 0.0;

    rec.cs = les.to_code();
    rec.is = head.to_code();
    ds.records.push_back(std::move(rec));
  }
  return materialize(std::move(ds), size);
}

}  // namespace topocf
