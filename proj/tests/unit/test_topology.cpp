#include <set>

#include "../oracles.hpp"
#include "doctest.h"
#include "topocf/embedding.hpp"
#include "topocf/error.hpp"
#include "topocf/synthetic_codec.hpp"
#include "topocf/topology.hpp"

using namespace topocf;

namespace {

Dataset labelled(std::size_t n, std::size_t n_abnormal) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    SampleRecord r;
    r.id = "p" + std::to_string(i);
    r.label = i < n_abnormal ? ClassLabel::abnormal : ClassLabel::normal;
    r.cs[0] = static_cast<double>(i);
    r.cs[1] = static_cast<double>(i * i);
    r.is = {0.0};
    d.records.push_back(r);
  }
  return d;
}

bool in_bin(const CoverBin& b, std::size_t i) {
  return std::find(b.members.begin(), b.members.end(), i) != b.members.end();
}

}  // namespace

TEST_SUITE("topology") {
  TEST_CASE("cover basics") {
    auto bins = build_cover({{0.3, 0.7}}, CoverConfig{1, 1, 0.0});
    REQUIRE(bins.size() == 1);
    CHECK(bins[0].members == std::vector<std::size_t>{0});
    CHECK_THROWS_AS(build_cover({}, CoverConfig{}), Error);
    CHECK_THROWS_AS(build_cover({{0, 0}}, CoverConfig{1, 1, 0.5}), Error);
  }

  TEST_CASE("overlap membership follows interval arithmetic") {
    // x range [0, 1] expanded by 1e-9: w = (1 + 2e-9) / 2, bins widened by w / 4.
    const Embedding2D emb{{0.0, 0.0}, {0.4, 0.0}, {0.6, 0.0}, {1.0, 0.0}};
    const auto bins = build_cover(emb, CoverConfig{2, 1, 0.25});
    REQUIRE(bins.size() == 2);
    const double lo = -1e-9, w = (1.0 + 2e-9) / 2.0, g = 0.25 * w;
    for (std::size_t i = 0; i < emb.size(); ++i)
      for (int b = 0; b < 2; ++b) {
        const bool want = emb[i][0] >= lo + b * w - g && emb[i][0] <= lo + (b + 1) * w + g;
        CHECK(in_bin(bins[static_cast<std::size_t>(b)], i) == want);
      }
    CHECK(in_bin(bins[0], 2));  // 0.6 lies in the left bin's overlap strip
    CHECK(in_bin(bins[1], 1));
  }

  TEST_CASE("zero overlap still covers every point") {
    SplitMix64 rng(4);
    Embedding2D emb;
    for (int i = 0; i < 100; ++i) emb.push_back({rng.uniform(), rng.uniform()});
    emb.push_back({0.5, 0.5});
    const auto bins = build_cover(emb, CoverConfig{4, 4, 0.0});
    std::vector<int> hits(emb.size(), 0);
    for (const auto& b : bins)
      for (auto i : b.members) ++hits[i];
    for (int h : hits) CHECK(h >= 1);
  }

  TEST_CASE("dbscan small cases") {
    CHECK(dbscan({}, 0.5, 4).empty());
    CHECK(dbscan({{1.0, 1.0}}, 0.5, 1) == std::vector<int>{0});
    CHECK(dbscan({{1.0, 1.0}}, 0.5, 2) == std::vector<int>{kNoise});
    // Two core chains and one isolated point; the last point is a border of both.
    const std::vector<Point2> pts{{0, 0}, {0.1, 0}, {0.2, 0}, {5, 5}, {9, 9}};
    CHECK(dbscan(pts, 0.15, 2) == std::vector<int>{0, 0, 0, kNoise, kNoise});
  }

  TEST_CASE("dbscan agrees with the definition") {
    SplitMix64 rng(21);
    for (int k = 0; k < 20; ++k) {
      const auto pts = oracle::random_blobs(rng, 60);
      const auto labels = dbscan(pts, 0.2, 4);
      CHECK(oracle::check_dbscan(pts, 0.2, 4, labels) == "");
    }
  }

  TEST_CASE("graph from one bin and one cluster") {
    const Dataset d = labelled(5, 2);
    Embedding2D emb(5, Point2{0.0, 0.0});
    CoverBin bin;
    bin.members = {0, 1, 2, 3, 4};
    const auto g = build_graph({bin}, {{0, 0, 0, 0, 0}}, d, emb);
    REQUIRE(g.nodes.size() == 1);
    CHECK(g.edges.empty());
    CHECK(g.nodes[0].center[0] == 2.0);
    CHECK(g.nodes[0].center[1] == 6.0);
    CHECK(g.nodes[0].abnormal_ratio == 0.4);
  }

  TEST_CASE("shared member makes exactly one edge") {
    const Dataset d = labelled(4, 1);
    const Embedding2D emb{{0, 0}, {0.1, 0}, {0.9, 0}, {1.0, 0}};
    CoverBin left, right;
    left.index = 0, right.index = 1;
    left.members = {0, 1, 2};
    right.members = {2, 3};
    const auto g = build_graph({left, right}, {{0, 0, 0}, {0, 0}}, d, emb);
    REQUIRE(g.nodes.size() == 2);
    REQUIRE(g.edges.size() == 1);
    CHECK(g.edges[0].a == 0);
    CHECK(g.edges[0].b == 1);
    CHECK(g.edges[0].weight == doctest::Approx(euclidean(g.nodes[0].center, g.nodes[1].center)));
  }

  TEST_CASE("all noise gives an empty graph") {
    const Dataset d = labelled(3, 1);
    CoverBin bin;
    bin.members = {0, 1, 2};
    const auto g = build_graph({bin}, {{kNoise, kNoise, kNoise}}, d, Embedding2D(3));
    CHECK(g.nodes.empty());
    CHECK(g.edges.empty());
  }

  TEST_CASE("mapper on the synthetic set separates the classes") {
    const auto data = make_dataset(50, 50, 42);
    EmbeddingConfig ec;
    ec.seed = 42;
    const auto emb = tsne_fit(cs_points(data.dataset), ec).embedding;
    const MapperConfig mc;
    const auto g = build_mapper(data.dataset, emb, mc);
    int pure = 0, heavy = 0;
    for (const auto& n : g.nodes) {
      pure += n.abnormal_ratio == 0.0;
      heavy += n.abnormal_ratio >= 0.8;
      CHECK(n.abnormal_ratio >= 0.0);
      CHECK(n.abnormal_ratio <= 1.0);
      CHECK(n.member_ids.size() == n.members.size());
    }
    CHECK(pure > 0);
    CHECK(heavy > 0);

    MapperConfig strat = mc;
    strat.stratified_clustering = true;
    for (const auto& n : build_mapper(data.dataset, emb, strat).nodes)
      CHECK((n.abnormal_ratio == 0.0 || n.abnormal_ratio == 1.0));
  }
}
