#include <cmath>

#include "doctest.h"
#include "topocf/core.hpp"
#include "topocf/error.hpp"
#include "topocf/synthetic_codec.hpp"

using namespace topocf;

namespace {

SampleRecord rec(const std::string& id, ClassLabel label, std::size_t is_dim = 2) {
  SampleRecord r;
  r.id = id;
  r.label = label;
  r.is.assign(is_dim, 0.5);
  return r;
}

}  // namespace

TEST_SUITE("core") {
  TEST_CASE("duplicate ids are reported once") {
    Dataset d;
    d.records = {rec("s1", ClassLabel::normal), rec("s1", ClassLabel::abnormal)};
    const auto report = validate_dataset(d);
    CHECK_FALSE(report.valid);
    CHECK(report.count("duplicate-id") == 1);
  }

  TEST_CASE("empty dataset is invalid") {
    const auto report = validate_dataset(Dataset{});
    CHECK_FALSE(report.valid);
    CHECK(report.count("empty") == 1);
  }

  TEST_CASE("generated dataset validates cleanly and idempotently") {
    const auto data = make_dataset(5, 5, 3);
    const auto a = validate_dataset(data.dataset);
    CHECK(a.valid);
    CHECK(a.findings.empty());
    CHECK(a == validate_dataset(data.dataset));
  }

  TEST_CASE("dimension, range and mask findings") {
    Dataset d;
    d.records = {rec("a", ClassLabel::normal, 2), rec("b", ClassLabel::normal, 3)};
    CHECK(validate_dataset(d).count("dimension-mismatch") == 1);

    d.records = {rec("a", ClassLabel::normal)};
    d.records[0].image = Image(8, 8, 0.5f);
    d.records[0].image->data[3] = 1.5f;
    CHECK(validate_dataset(d).count("pixel-range") == 1);

    d.records[0].image->data[3] = 0.2f;
    d.records[0].gt_mask = Mask(8, 8);
    d.records[0].gt_mask->data[0] = 2;
    CHECK(validate_dataset(d).count("mask-values") == 1);

    d.records[0].gt_mask = Mask(8, 8);
    d.records[0].cs[2] = std::nan("");
    CHECK(validate_dataset(d).count("non-finite-code") == 1);
  }

  TEST_CASE("stats count classes") {
    Dataset d;
    for (int i = 0; i < 3; ++i) d.records.push_back(rec("n" + std::to_string(i), ClassLabel::normal));
    for (int i = 0; i < 2; ++i) d.records.push_back(rec("a" + std::to_string(i), ClassLabel::abnormal));
    auto s = dataset_stats(d);
    CHECK(s.n_normal == 3);
    CHECK(s.n_abnormal == 2);
    CHECK(s.is_dim == 2);

    d.records.resize(3);
    CHECK(dataset_stats(d).n_abnormal == 0);

    const auto data = make_dataset(20, 30, 1);
    s = dataset_stats(data.dataset);
    CHECK(s.n_normal == 20);
    CHECK(s.n_abnormal == 30);
    CHECK(s.cs_dim == 8);
    CHECK(s.n_normal + s.n_abnormal == data.dataset.records.size());
    REQUIRE(s.image_shape);
    CHECK(s.image_shape->first == 64);
  }

  TEST_CASE("stats reject invalid datasets") {
    CHECK_THROWS_AS(dataset_stats(Dataset{}), Error);
  }

  TEST_CASE("labels round trip") {
    CHECK(parse_label("normal") == ClassLabel::normal);
    CHECK(parse_label(to_string(ClassLabel::abnormal)) == ClassLabel::abnormal);
    CHECK_FALSE(parse_label("Abnormal"));
  }

  TEST_CASE("image checks") {
    CHECK_NOTHROW(check_image(Image(8, 8, 0.0f)));
    CHECK_THROWS_AS(check_image(Image(7, 8)), Error);
    Image bad(8, 8);
    bad.data[0] = -0.1f;
    CHECK_THROWS_AS(check_image(bad), Error);
  }

  TEST_CASE("error kinds map to exit codes") {
    CHECK(exit_code(ErrorKind::parse) == 2);
    CHECK(exit_code(ErrorKind::io) == 2);
    CHECK(exit_code(ErrorKind::contract) == 3);
    CHECK(exit_code(ErrorKind::unreachable) == 4);
    CHECK(exit_code(ErrorKind::no_candidate) == 4);
    const ParseError e("f.csv", 3, 7, "bad");
    CHECK(std::string(e.what()) == "f.csv:3:7: bad");
    CHECK(e.line() == 3);
    CHECK(e.column() == 7);
  }
}
