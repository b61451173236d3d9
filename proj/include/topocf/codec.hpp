#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "topocf/core.hpp"

namespace topocf {

struct CodecContract {
  std::size_t cs_dim = kCsDim;
  std::size_t is_dim = 0;
  int height = 0;
  int width = 0;
};

struct Codes {
  CSCode cs{};
  ISCode is;
};

/// Generation backend: images <-> (CS, IS) codes, plus an image-level
/// abnormality classifier used as the stopping oracle of counterfactual walks.
class Codec {
 public:
  virtual ~Codec() = default;

  virtual CodecContract contract() const = 0;
  virtual Image decode(const CSCode& cs, const ISCode& is) const = 0;
  virtual Codes encode(const Image& image) const = 0;
  /// Probability that the image is abnormal, in (0, 1).
  virtual double classify(const Image& image) const = 0;

  /// Batched forms. The defaults loop; process-backed codecs override them to
  /// amortise one process launch over many rows.
  virtual std::vector<Image> decode_batch(const std::vector<Codes>& codes) const;
  virtual std::vector<double> classify_batch(const std::vector<Image>& images) const;

 protected:
  /// Throws Error(contract) if is.size() differs from contract().is_dim.
  void check_codes(const ISCode& is) const;
};

}  // namespace topocf
