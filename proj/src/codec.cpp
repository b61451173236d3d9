#include "topocf/codec.hpp"

#include <string>

#include "topocf/error.hpp"

namespace topocf {

std::vector<Image> Codec::decode_batch(const std::vector<Codes>& codes) const {
  std::vector<Image> out;
  out.reserve(codes.size());
  for (const auto& c : codes) out.push_back(decode(c.cs, c.is));
  return out;
}

std::vector<double> Codec::classify_batch(const std::vector<Image>& images) const {
  std::vector<double> out;
  out.reserve(images.size());
  for (const auto& img : images) out.push_back(classify(img));
  return out;
}

void Codec::check_codes(const ISCode& is) const {
  const auto want = contract().is_dim;
  if (is.size() != want)
    throw Error(ErrorKind::contract, "IS code has " + std::to_string(is.size()) +
                                         " values, codec expects " + std::to_string(want));
}

}  // namespace topocf
