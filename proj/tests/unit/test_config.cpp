#include "doctest.h"
#include "topocf/config.hpp"
#include "topocf/error.hpp"

using namespace topocf;

namespace {

ParseError parse_failure(const std::string& text) {
  try {
    parse_config(text, "run.ini");
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0, 0, "");
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const PipelineConfig c = parse_config("");
    CHECK(c.seed == 0);
    CHECK(c.embedding.perplexity == 30.0);
    CHECK(c.embedding.iterations == 1000);
    CHECK(c.mapper.cover.nx == 8);
    CHECK(c.mapper.dbscan.min_pts == 4);
    CHECK_FALSE(c.mapper.dbscan.eps);
    CHECK(c.planner.goal_mode == GoalMode::purest_nearest);
    CHECK(c.walk.flip_threshold == 0.5);
    CHECK(c.postproc.close_radius == 2);
    CHECK(c.codec.kind == CodecKind::synthetic);
    CHECK(c.codec.timeout_s == 300.0);
  }

  TEST_CASE("every section parses") {
    const auto c = parse_config(
        "seed = 9\n"
        "[embedding]\nperplexity = 12\nstandardize = true\n"
        "[cover]\nnx = 5\noverlap = 0.2\n"
        "[dbscan]\neps = 0.75\nmin_pts = 3\nstratified_clustering = yes\n"
        "[planner]\ngoal_mode = random\nabnormal_purity = 0.8\n"
        "[walk]\nmode = linear\nflip_threshold = 0.6\n"
        "[postproc]\nthreshold_mode = fixed\nfixed_threshold = 0.4\nconnectivity = 4\n"
        "[codec]\nkind = subprocess\ncommand = ./codec {op} {dir}\ntimeout_s = 5\nis_dim = 4\n");
    CHECK(c.seed == 9);
    CHECK(c.embedding.seed == 9);
    CHECK(c.planner.seed == 9);
    CHECK(c.embedding.perplexity == 12.0);
    CHECK(c.embedding.standardize);
    CHECK(c.mapper.cover.nx == 5);
    CHECK(c.mapper.dbscan.eps == 0.75);
    CHECK(c.mapper.stratified_clustering);
    CHECK(c.planner.goal_mode == GoalMode::random);
    CHECK(c.walk.mode == WalkMode::linear);
    CHECK(c.postproc.threshold_mode == ThresholdMode::fixed);
    CHECK(c.postproc.connectivity == 4);
    CHECK(c.codec.kind == CodecKind::subprocess);
    CHECK(c.codec.command == "./codec {op} {dir}");
    CHECK(c.codec.is_dim == 4);
    CHECK_NOTHROW(validate_config(c));
  }

  TEST_CASE("unknown keys and sections are rejected with positions") {
    auto e = parse_failure("[cover]\nnx = 4\n  colour = red\n");
    CHECK(e.line() == 3);
    CHECK(e.column() == 3);
    e = parse_failure("seed = 1\n\n[paint]\nx = 1\n");
    CHECK(e.line() == 3);
    e = parse_failure("[embedding]\nperplexity = lots\n");
    CHECK(e.line() == 2);
    CHECK(std::string(e.what()).find("embedding.perplexity") != std::string::npos);
    e = parse_failure("[walk]\nmode = sideways\n");
    CHECK(e.line() == 2);
  }

  TEST_CASE("range violations are contract errors") {
    PipelineConfig c;
    c.mapper.cover.overlap = 0.5;
    CHECK_THROWS_AS(validate_config(c), Error);
    c = PipelineConfig{};
    c.walk.flip_threshold = 1.0;
    CHECK_THROWS_AS(validate_config(c), Error);
    c = PipelineConfig{};
    c.embedding.iterations = 100;
    CHECK_THROWS_AS(validate_config(c), Error);
  }

  TEST_CASE("config echo names every section") {
    const auto j = config_to_json(PipelineConfig{});
    for (const char* k : {"seed", "embedding", "cover", "dbscan", "planner", "walk", "postproc", "codec"})
      CHECK(j.contains(k));
  }
}
