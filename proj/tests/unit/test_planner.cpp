#include <cmath>
#include <limits>

#include "../oracles.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "topocf/error.hpp"
#include "topocf/planner.hpp"

using namespace topocf;
using fixture::at;

TEST_SUITE("planner") {
  TEST_CASE("adjacency of small graphs") {
    auto m = adjacency_matrix(fixture::graph({at(0)}, {0}, {}));
    CHECK(m.n == 1);
    CHECK(m.at(0, 0) == 0.0);

    m = adjacency_matrix(fixture::graph({at(0), at(1)}, {0, 1}, {}));
    CHECK(std::isinf(m.at(0, 1)));
    CHECK(std::isinf(m.at(1, 0)));

    // Centers (0,0), (3,4), (3,0) joined as a path 0-1-2.
    m = adjacency_matrix(fixture::graph({at(0, 0), at(3, 4), at(3, 0)}, {0, 0, 0}, {{0, 1}, {1, 2}}));
    CHECK(m.at(0, 1) == 5.0);
    CHECK(m.at(1, 2) == 4.0);
    CHECK(m.at(2, 1) == 4.0);
    CHECK(std::isinf(m.at(0, 2)));
  }

  TEST_CASE("trivial and unreachable paths") {
    const auto m = adjacency_matrix(fixture::graph({at(0), at(1), at(5)}, {0, 0, 1}, {{0, 1}}));
    const auto p = shortest_path(m, 1, 1);
    CHECK(p.node_ids == std::vector<int>{1});
    CHECK(p.length() == 0.0);
    try {
      shortest_path(m, 0, 2);
      FAIL("expected unreachable");
    } catch (const UnreachableError& e) {
      CHECK(e.src() == 0);
      CHECK(e.dst() == 2);
      CHECK(exit_code(e.kind()) == 4);
    }
  }

  TEST_CASE("ties resolve to the lexicographically smallest sequence") {
    // 0-1-3 and 0-2-3 both cost 2.
    const double inf = std::numeric_limits<double>::infinity();
    DistanceMatrix m{4, {0, 1, 1, inf, 1, 0, inf, 1, 1, inf, 0, 1, inf, 1, 1, 0}};
    CHECK(shortest_path(m, 0, 3).node_ids == std::vector<int>{0, 1, 3});
    CHECK(shortest_path(m, 3, 0).node_ids == std::vector<int>{3, 1, 0});
  }

  TEST_CASE("random graphs agree with enumeration") {
    SplitMix64 rng(5);
    for (int k = 0; k < 60; ++k) {
      const auto g = oracle::random_graph(rng, 8, 14);
      DistanceMatrix m{static_cast<std::size_t>(g.n), g.w};
      for (int s = 0; s < g.n; ++s)
        for (int t = 0; t < g.n; ++t) {
          const auto best = oracle::enumerate_paths(g.w, g.n, s, t);
          if (!best.length) {
            CHECK_THROWS_AS(shortest_path(m, s, t), UnreachableError);
            continue;
          }
          const auto p = shortest_path(m, s, t);
          CHECK(p.length() == *best.length);
          CHECK(p.node_ids == best.nodes);
          for (std::size_t i = 1; i < p.node_ids.size(); ++i)
            CHECK(p.cumulative_lengths[i] - p.cumulative_lengths[i - 1] ==
                  m.at(p.node_ids[i - 1], p.node_ids[i]));
        }
    }
  }

  TEST_CASE("nearest node") {
    const auto g = fixture::graph({at(0), at(2), at(-2), at(5)}, {0, 0.5, 1, 1}, {});
    CHECK(nearest_node(at(2), g) == 1);
    CHECK(nearest_node(at(0), g) == 0);
    CHECK(nearest_node(at(1), g) == 0);  // equidistant from 0 and 1
    CHECK(nearest_node(at(0), g, [](double r) { return r >= 0.9; }) == 2);
    CHECK_THROWS_AS(nearest_node(at(0), g, [](double) { return false; }), Error);

    SplitMix64 rng(9);
    std::vector<CSCode> centres;
    for (int i = 0; i < 20; ++i) {
      CSCode c;
      for (auto& v : c) v = rng.normal();
      centres.push_back(c);
    }
    const auto big = fixture::graph(centres, std::vector<double>(20, 0.0), {});
    for (int q = 0; q < 50; ++q) {
      CSCode c;
      for (auto& v : c) v = rng.normal();
      int want = 0;
      for (int i = 1; i < 20; ++i)
        if (euclidean(c, centres[i]) < euclidean(c, centres[want])) want = i;
      CHECK(nearest_node(c, big) == want);
      CSCode scaled = c;
      for (auto& v : scaled) v *= 3.0;
      std::vector<CSCode> sc = centres;
      for (auto& cc : sc)
        for (auto& v : cc) v *= 3.0;
      CHECK(nearest_node(scaled, fixture::graph(sc, std::vector<double>(20, 0.0), {})) == want);
    }
  }

  TEST_CASE("goal selection") {
    PlannerConfig cfg;
    // Only node 2 is normal-pure.
    auto g = fixture::graph({at(0), at(1), at(2)}, {1.0, 0.6, 0.0}, {{0, 1}, {1, 2}});
    CHECK(select_goal_node(g, ClassLabel::normal, cfg, 0) == 2);
    cfg.goal_mode = GoalMode::random;
    cfg.seed = 77;
    CHECK(select_goal_node(g, ClassLabel::normal, cfg, 0) == 2);

    // 5-node fixture. From node 0: d(4) = 2 via 0-1-4, d(3) = 3 via 0-2-3.
    g = fixture::graph({at(0), at(1), at(0, 1), at(0, 3), at(1, 1)}, {1.0, 0.8, 0.5, 0.05, 0.0},
                       {{0, 1}, {0, 2}, {2, 3}, {1, 4}});
    cfg.goal_mode = GoalMode::purest_nearest;
    CHECK(select_goal_node(g, ClassLabel::normal, cfg, 0) == 4);
    // From node 2: d(3) = 2, d(4) = 3 via 2-0-1-4.
    CHECK(select_goal_node(g, ClassLabel::normal, cfg, 2) == 3);
    // Equal distances: the purer node wins over the lower id.
    const auto tie = fixture::graph({at(0), at(1), at(-1)}, {1.0, 0.1, 0.0}, {{0, 1}, {0, 2}});
    CHECK(select_goal_node(tie, ClassLabel::normal, cfg, 0) == 2);

    cfg.goal_mode = GoalMode::random;
    const int first = select_goal_node(g, ClassLabel::normal, cfg, 0);
    CHECK(select_goal_node(g, ClassLabel::normal, cfg, 0) == first);

    cfg.goal_mode = GoalMode::purest_nearest;
    CHECK_THROWS_AS(select_goal_node(fixture::graph({at(0)}, {1.0}, {}), ClassLabel::normal, cfg, 0), Error);
    CHECK_THROWS_AS(
        select_goal_node(fixture::graph({at(0), at(1)}, {1.0, 0.0}, {}), ClassLabel::normal, cfg, 0),
        UnreachableError);
  }

  TEST_CASE("plan_for walks from the nearest node to an opposite-class goal") {
    const auto g = fixture::graph({at(0), at(1), at(2)}, {1.0, 0.5, 0.0}, {{0, 1}, {1, 2}});
    const auto m = adjacency_matrix(g);
    const auto p = plan_for(at(0.1), ClassLabel::abnormal, g, m, PlannerConfig{});
    CHECK(p.node_ids == std::vector<int>{0, 1, 2});
    CHECK(p.cumulative_lengths == std::vector<double>{0.0, 1.0, 2.0});
  }
}
