#pragma once

#include <cstdint>

#include "topocf/synthetic_codec.hpp"

namespace topocf {

/// Curved-manifold variant of make_dataset. Abnormal lesion codes lie on a
/// quarter arc in the (amp, sigma) plane of CS space,
///   amp = 0.3 + 0.5 cos(phi), sigma = 0.03 + 0.09 sin(phi), phi ~ U[0, pi/2],
/// all centred near the image middle (+-0.02); normals have amp 0 and sigma
/// 0.12. The chord from an abnormal code to a normal one cuts through the
/// interior of the arc, where no training code lives.
SyntheticData make_arc_dataset(std::size_t n_normal, std::size_t n_abnormal, std::uint64_t seed,
                               int size = phantom::kDefaultSize);

}  // namespace topocf
