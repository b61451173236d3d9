#include <cmath>

#include "doctest.h"
#include "topocf/error.hpp"
#include "topocf/metrics.hpp"
#include "topocf/postprocess.hpp"

using namespace topocf;

TEST_SUITE("postprocess") {
  TEST_CASE("disks") {
    CHECK(disk(0).size() == 1);
    CHECK(disk(1).size() == 9);
    CHECK(disk(2).size() == 21);
  }

  TEST_CASE("zero heatmap gives an empty mask") {
    CHECK(mask_area(postprocess(Image(32, 32), PostprocConfig{})) == 0);
  }

  TEST_CASE("bimodal square is recovered exactly") {
    Image h(48, 48, 0.05f);
    for (int r = 10; r < 30; ++r)
      for (int c = 14; c < 34; ++c) h.at(r, c) = 0.9f;
    const Mask m = postprocess(h, PostprocConfig{});
    Mask want(48, 48);
    for (int r = 10; r < 30; ++r)
      for (int c = 14; c < 34; ++c) want.at(r, c) = 1;
    CHECK(m == want);

    // Otsu on the two-level histogram puts the cut between the two bins.
    const int t = otsu_bin(h.data, 256, true);
    CHECK(t > histogram_bin(0.05, 256));
    CHECK(t <= histogram_bin(0.9, 256));
  }

  TEST_CASE("small blobs are dropped") {
    Image h(32, 32, 0.0f);
    for (int r = 4; r < 6; ++r)
      for (int c = 4; c < 6; ++c) h.at(r, c) = 1.0f;
    PostprocConfig cfg;
    cfg.open_radius = 0;
    cfg.close_radius = 0;
    CHECK(mask_area(postprocess(h, cfg)) == 0);
    for (int r = 20; r < 24; ++r)
      for (int c = 20; c < 24; ++c) h.at(r, c) = 1.0f;
    CHECK(mask_area(postprocess(h, cfg)) == 16);
  }

  TEST_CASE("rescaling the heatmap does not change the mask") {
    Image h(40, 40);
    for (int r = 0; r < 40; ++r)
      for (int c = 0; c < 40; ++c) {
        const double dx = (c - 20) / 6.0, dy = (r - 18) / 8.0;
        h.at(r, c) = static_cast<float>(std::exp(-(dx * dx + dy * dy) / 2.0));
      }
    const Mask base = postprocess(h, PostprocConfig{});
    Image half = h;
    for (auto& v : half.data) v *= 0.5f;
    CHECK(postprocess(half, PostprocConfig{}) == base);
  }

  TEST_CASE("components and morphology") {
    Mask m(6, 6);
    m.at(0, 0) = m.at(1, 1) = 1;  // diagonal neighbours
    m.at(4, 4) = 1;
    int n4 = 0, n8 = 0;
    label_components(m, 4, &n4);
    label_components(m, 8, &n8);
    CHECK(n4 == 3);
    CHECK(n8 == 2);
    CHECK_THROWS_AS(label_components(m, 6), Error);

    Mask full(6, 6, 1);
    CHECK(erode(full, 1) == full);  // the border counts as foreground
    Mask dot(7, 7);
    dot.at(3, 3) = 1;
    CHECK(mask_area(dilate(dot, 1)) == 9);
    CHECK(mask_area(open(dot, 1)) == 0);
    CHECK(close(dot, 1) == dot);
  }

  TEST_CASE("fixed threshold") {
    Image h(16, 16, 0.0f);
    for (int r = 0; r < 8; ++r)
      for (int c = 0; c < 8; ++c) h.at(r, c) = 1.0f;
    h.at(12, 12) = 0.3f;
    PostprocConfig cfg;
    cfg.threshold_mode = ThresholdMode::fixed;
    cfg.fixed_threshold = 0.5;
    CHECK(mask_area(postprocess(h, cfg)) == 64);
  }
}
