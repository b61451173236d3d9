#include <filesystem>

#include "doctest.h"
#include "topocf/error.hpp"
#include "topocf/io.hpp"
#include "topocf/plot.hpp"
#include "topocf/synthetic_codec.hpp"

using namespace topocf;
namespace fs = std::filesystem;

namespace {

template <class F>
ParseError parse_failure(F&& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e;
  }
  FAIL("expected a parse error");
  return ParseError("", 0, 0, "");
}

std::string scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "topocf-io-test";
  fs::create_directories(dir);
  return (dir / name).string();
}

}  // namespace

TEST_SUITE("io") {
  TEST_CASE("pgm round trip") {
    Image img(9, 11);
    for (std::size_t i = 0; i < img.size(); ++i) img.data[i] = static_cast<float>(i % 256) / 255.0f;
    const auto back = io::decode_pgm(io::encode_pgm(img));
    CHECK(back == img);

    Mask m(5, 6);
    m.at(2, 3) = 1;
    io::write_pgm(scratch("m.pgm"), m);
    CHECK(io::read_mask_pgm(scratch("m.pgm")) == m);
  }

  TEST_CASE("pgm header comments and errors") {
    const std::string body = std::string("P5\n# made by hand\n2 1\n255\n") + '\x00' + '\xff';
    const auto img = io::decode_pgm(body);
    CHECK(img.width == 2);
    CHECK(img.at(0, 1) == 1.0f);

    auto e = parse_failure([] { io::decode_pgm("P2\n1 1\n255\n0", "x.pgm"); });
    CHECK(e.line() == 1);
    e = parse_failure([] { io::decode_pgm("P5\n4 4\n255\nab", "x.pgm"); });
    CHECK(std::string(e.what()).find("truncated") != std::string::npos);
    e = parse_failure([] { io::decode_pgm("P5\n4\nq 4\n255\n", "x.pgm"); });
    CHECK(e.line() == 3);
    CHECK(e.column() == 1);
    CHECK_THROWS_AS(io::decode_pgm("P5\n1 1\n65535\n00"), ParseError);
  }

  TEST_CASE("codes csv round trip is value-identical") {
    const auto data = make_dataset(4, 4, 31);
    const auto text = io::format_codes_csv(data.dataset);
    CHECK(text.rfind("id,label,cs_0,cs_1,cs_2,cs_3,cs_4,cs_5,cs_6,cs_7,is_0,", 0) == 0);
    const auto back = io::parse_codes_csv(text);
    REQUIRE(back.records.size() == 8);
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(back.records[i].id == data.dataset.records[i].id);
      CHECK(back.records[i].label == data.dataset.records[i].label);
      CHECK(back.records[i].cs == data.dataset.records[i].cs);
      CHECK(back.records[i].is == data.dataset.records[i].is);
    }
    CHECK(io::format_codes_csv(back) == text);

    const auto empty = io::format_codes_csv(Dataset{});
    CHECK(empty == "id,label,cs_0,cs_1,cs_2,cs_3,cs_4,cs_5,cs_6,cs_7\n");
    CHECK(io::parse_codes_csv(empty).records.empty());
  }

  TEST_CASE("codes csv errors carry positions") {
    const std::string head = "id,label,cs_0,cs_1,cs_2,cs_3,cs_4,cs_5,cs_6,cs_7,is_0\n";
    auto e = parse_failure([&] { io::parse_codes_csv(head + "a,normal,0,0,0,x,0,0,0,0,1\n", "c.csv"); });
    CHECK(e.line() == 2);
    CHECK(e.column() == 16);
    e = parse_failure([&] { io::parse_codes_csv(head + "a,sick,0,0,0,0,0,0,0,0,1\n", "c.csv"); });
    CHECK(e.column() == 3);
    e = parse_failure([&] { io::parse_codes_csv(head + "a,normal,0,0\n", "c.csv"); });
    CHECK(e.line() == 2);
    e = parse_failure([&] { io::parse_codes_csv("id,label,cs_0\n", "c.csv"); });
    CHECK(e.line() == 1);
    CHECK(std::string(e.what()).rfind("c.csv:1:", 0) == 0);
  }

  TEST_CASE("embedding csv aligns by id") {
    const auto data = make_dataset(2, 1, 3);
    const Embedding2D emb{{0.5, -1.25}, {3.0, 4.0}, {1e-3f, 7.0}};
    const auto path = scratch("emb.csv");
    std::string text = io::format_embedding_csv(data.dataset, emb);
    io::write_file_atomic(path, text);
    CHECK(io::read_embedding_csv(path, data.dataset) == emb);

    // Reordered rows still line up with the dataset.
    const auto nl1 = text.find('\n'), nl2 = text.find('\n', nl1 + 1);
    const std::string swapped = text.substr(0, nl1 + 1) + text.substr(nl2 + 1) + text.substr(nl1 + 1, nl2 - nl1);
    io::write_file_atomic(path, swapped);
    CHECK(io::read_embedding_csv(path, data.dataset) == emb);
  }

  TEST_CASE("ndv1 round trip and validation") {
    const auto data = make_dataset(3, 3, 6);
    const auto t = io::codes_tensor(data.dataset);
    const auto bytes = io::encode_ndv1(t);
    CHECK(bytes.size() == 16 + 6 * 14 * 8);
    CHECK(bytes.substr(0, 4) == "NDV1");
    const auto back = io::decode_ndv1(bytes);
    CHECK(back.dims == t.dims);
    CHECK(back.values == t.values);

    io::Tensor small{io::DType::u8, {3}, {1, 2, 255}};
    CHECK(io::decode_ndv1(io::encode_ndv1(small)).values == small.values);
    io::Tensor f{io::DType::f32, {2, 2}, {0.5, -1.0, 3.25, 8.0}};
    CHECK(io::decode_ndv1(io::encode_ndv1(f)).values == f.values);

    CHECK_THROWS_AS(io::decode_ndv1(bytes.substr(0, 10)), ParseError);
    CHECK_THROWS_AS(io::decode_ndv1(bytes.substr(0, bytes.size() - 1)), ParseError);
    std::string bad = bytes;
    bad[4] = 9;
    CHECK_THROWS_AS(io::decode_ndv1(bad), ParseError);
  }

  TEST_CASE("graph json round trip") {
    const auto data = make_dataset(3, 3, 1);
    TopologyGraph g;
    for (int i = 0; i < 2; ++i) {
      TopologyNode n;
      n.id = i;
      n.members = {static_cast<std::size_t>(i), 2};
      n.member_ids = {data.dataset.records[static_cast<std::size_t>(i)].id, data.dataset.records[2].id};
      n.center[0] = 0.25 * i;
      n.abnormal_ratio = 0.5;
      n.centroid2d = {1.5, -2.0 * i};
      g.nodes.push_back(n);
    }
    g.edges.push_back({0, 1, 0.25});
    const auto j = nlohmann::json::parse(io::dump(io::graph_to_json(g)));
    const auto back = io::graph_from_json(j, &data.dataset);
    REQUIRE(back.nodes.size() == 2);
    CHECK(back.nodes[1].members == g.nodes[1].members);
    CHECK(back.nodes[1].center == g.nodes[1].center);
    CHECK(back.nodes[1].centroid2d == g.nodes[1].centroid2d);
    CHECK(back.edges.size() == 1);
    CHECK(back.edges[0].weight == 0.25);
    CHECK(io::dump(io::graph_to_json(back)) == io::dump(io::graph_to_json(g)));
  }

  TEST_CASE("json syntax errors carry positions") {
    const auto e = parse_failure([] { io::parse_json("{\n  \"a\": 1,\n  \"b\": ]\n}", "g.json"); });
    CHECK(e.line() == 3);
    CHECK(e.column() == 8);
  }

  TEST_CASE("registry json rebuilds a working codec") {
    const auto data = make_dataset(3, 3, 77);
    const auto reg = io::registry_from_json(nlohmann::json::parse(io::dump(io::registry_to_json(*data.registry))));
    CHECK(reg->size() == 6);
    SyntheticCodec codec(64, 64, reg);
    CHECK(codec.encode(*data.dataset.records[4].image).cs == data.dataset.records[4].cs);
  }

  TEST_CASE("atomic writes create parents and leave no temporaries") {
    const auto dir = fs::path(scratch("nested")) / "a" / "b";
    fs::remove_all(fs::path(scratch("nested")));
    io::write_file_atomic((dir / "x.txt").string(), "hello");
    CHECK(io::read_file((dir / "x.txt").string()) == "hello");
    std::size_t files = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
    CHECK(files == 1);
    CHECK_THROWS_AS(io::read_file((dir / "missing").string()), Error);
  }

  TEST_CASE("graph plot") {
    TopologyGraph g;
    TopologyNode n;
    n.abnormal_ratio = 0.25;
    n.member_ids = {"x"};
    g.nodes.push_back(n);
    const auto svg = graph_svg(g);
    std::size_t circles = 0;
    for (auto p = svg.find("<circle class=\"node\""); p != std::string::npos; p = svg.find("<circle class=\"node\"", p + 1))
      ++circles;
    CHECK(circles == 1);
    CHECK(svg.find(">0.25</text>") != std::string::npos);
    CHECK(graph_svg(g) == svg);
  }
}
