#include "../oracles.hpp"
#include "doctest.h"
#include "topocf/error.hpp"
#include "topocf/metrics.hpp"

using namespace topocf;

namespace {

Mask square(int h, int w, int r0, int c0, int side) {
  Mask m(h, w);
  for (int r = r0; r < r0 + side; ++r)
    for (int c = c0; c < c0 + side; ++c) m.at(r, c) = 1;
  return m;
}

}  // namespace

TEST_SUITE("metrics") {
  TEST_CASE("areas") {
    CHECK(mask_area(Mask(4, 4)) == 0);
    CHECK(mask_area(Mask(4, 4, 1)) == 16);
    Mask checker(4, 4);
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) checker.at(r, c) = (r + c) % 2;
    CHECK(mask_area(checker) == 8);
  }

  TEST_CASE("intersections") {
    CHECK(intersection_area(square(8, 8, 0, 0, 2), square(8, 8, 5, 5, 2)) == 0);
    Mask seven(8, 8);
    for (int i = 0; i < 7; ++i) seven.data[static_cast<std::size_t>(i) * 5] = 1;
    CHECK(intersection_area(seven, seven) == 7);
    CHECK(intersection_area(square(8, 8, 0, 0, 2), square(8, 8, 1, 1, 2)) == 1);
    CHECK_THROWS_AS(intersection_area(Mask(4, 4), Mask(4, 5)), Error);
  }

  TEST_CASE("one pixel of overlap between 2x2 squares") {
    const auto a = square(8, 8, 0, 0, 2), b = square(8, 8, 1, 1, 2);
    CHECK(iou(a, b) == 1.0 / 7.0);
    CHECK(dice(a, b) == 0.25);
  }

  TEST_CASE("conventions") {
    const auto a = square(8, 8, 2, 2, 3);
    CHECK(iou(a, a) == 1.0);
    CHECK(dice(a, a) == 1.0);
    CHECK(iou(Mask(8, 8), Mask(8, 8)) == 1.0);
    CHECK(dice(Mask(8, 8), Mask(8, 8)) == 1.0);
    CHECK(dice(a, square(8, 8, 6, 6, 2)) == 0.0);
    CHECK(iou(a, Mask(8, 8)) == 0.0);
  }

  TEST_CASE("reports") {
    const auto a = square(8, 8, 0, 0, 3), b = square(8, 8, 5, 5, 3);
    auto r = mean_report(std::vector<MaskPair>{{&a, &b, "x"}});
    CHECK(r.n == 1);
    CHECK(r.mean_iou == iou(a, b));
    r = mean_report(std::vector<MaskPair>{{&a, &a, "same"}, {&a, &b, "apart"}});
    CHECK(r.mean_iou == 0.5);
    CHECK(r.per_sample[1].id == "apart");
    CHECK_THROWS_AS(mean_report(std::vector<MaskPair>{}), Error);
  }

  TEST_CASE("random pairs agree with pixel counting") {
    SplitMix64 rng(11);
    for (int k = 0; k < 200; ++k) {
      const auto p = oracle::random_mask(rng, 16, 16);
      const auto g = oracle::random_mask(rng, 16, 16);
      CHECK(iou(p, g) == oracle::iou(p, g));
      CHECK(dice(p, g) == oracle::dice(p, g));
      CHECK(iou(p, g) == iou(g, p));
      CHECK(dice(p, g) >= iou(p, g));
    }
  }
}
