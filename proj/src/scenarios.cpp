#include "topocf/scenarios.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>

#include "topocf/rng.hpp"

namespace topocf {

namespace {
double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }
}  // namespace

SyntheticData make_arc_dataset(std::size_t n_normal, std::size_t n_abnormal, std::uint64_t seed,
                               int size) {
  using namespace phantom;
  SplitMix64 rng(seed);
  Dataset ds;
  const std::size_t n = n_normal + n_abnormal;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord rec;
    char id[32];
    std::snprintf(id, sizeof id, "a%04zu", i);
    rec.id = id;
    rec.label = i < n_normal ? ClassLabel::normal : ClassLabel::abnormal;

    PhantomParams head;
    head.head_cx = as_float(rng.uniform(0.4, 0.6));
    head.head_cy = as_float(rng.uniform(0.4, 0.6));
    head.head_rx = as_float(rng.uniform(0.3, 0.45));
    head.head_ry = as_float(rng.uniform(0.3, 0.45));
    head.shade = as_float(rng.uniform(0.0, 0.3));
    head.texture_seed = static_cast<std::uint32_t>(1 + rng.below((1u << 24) - 1));

    const double phi = rng.uniform(0.0, std::numbers::pi / 2.0);
    LesionParams les;
    if (rec.label == ClassLabel::abnormal) {
      les.amp = as_float(0.3 + 0.5 * std::cos(phi));
      les.sigma = as_float(0.03 + 0.09 * std::sin(phi));
    } else {
      les.amp = 0.0;
      les.sigma = 0.12;
    }
    les.lx = as_float(0.5 + rng.uniform(-0.02, 0.02));
    les.ly = as_float(0.5 + rng.uniform(-0.02, 0.02));
    les.ecc = as_float(rng.uniform(0.5, 2.0));
    les.angle = as_float(rng.uniform(0.0, std::numbers::pi));
    les.rim = as_float(rng.uniform(0.0, 0.5));

    rec.cs = les.to_code();
    rec.is = head.to_code();
    ds.records.push_back(std::move(rec));
  }
  return materialize(std::move(ds), size);
}

}  // namespace topocf
