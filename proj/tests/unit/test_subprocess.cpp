#include <chrono>
#include <filesystem>

#include "doctest.h"
#include "topocf/error.hpp"
#include "topocf/io.hpp"
#include "topocf/subprocess_codec.hpp"

using namespace topocf;
namespace fs = std::filesystem;

namespace {

std::string script(const std::string& name) { return std::string(TOPOCF_TEST_DATA) + "/" + name; }

SubprocessCodecOptions options(const std::string& name, double timeout = 10.0) {
  SubprocessCodecOptions o;
  o.command = "sh " + script(name);
  o.timeout_s = timeout;
  o.is_dim = 2;
  o.height = 8;
  o.width = 8;
  o.work_root = (fs::temp_directory_path() / ("topocf-bridge-" + name)).string();
  fs::remove_all(o.work_root);
  return o;
}

Codes codes(double amp) {
  Codes c;
  c.cs[0] = amp;
  c.is = {0.25, 0.75};
  return c;
}

}  // namespace

TEST_SUITE("subprocess") {
  TEST_CASE("command expansion") {
    CHECK(expand_command("codec {op} --in {dir}", "decode", "/tmp/r 1") == "codec decode --in '/tmp/r 1'");
    CHECK(expand_command("codec", "encode", "/x") == "codec encode '/x'");
    CHECK(expand_command("c {dir}", "classify", "/it's") == "c '/it'\\''s'");
  }

  TEST_CASE("decode returns one golden image per row") {
    const SubprocessCodec codec(options("echo_codec.sh"));
    const auto golden = io::read_pgm(script("golden_8x8.pgm"));
    const auto images = codec.decode_batch({codes(0.1), codes(0.2), codes(0.3)});
    REQUIRE(images.size() == 3);
    for (const auto& img : images) CHECK(img == golden);
    CHECK(codec.decode(codes(0.5).cs, codes(0.5).is) == golden);
  }

  TEST_CASE("request layout on disk") {
    auto o = options("echo_codec.sh");
    o.keep_requests = true;
    const SubprocessCodec codec(o);
    codec.decode_batch({codes(0.1), codes(0.2)});
    const auto req = io::read_file(o.work_root + "/req-000000/request.csv");
    CHECK(req ==
          "id,op,cs_0,cs_1,cs_2,cs_3,cs_4,cs_5,cs_6,cs_7,is_0,is_1\n"
          "r000000,decode,0.1,0,0,0,0,0,0,0,0.25,0.75\n"
          "r000001,decode,0.2,0,0,0,0,0,0,0,0.25,0.75\n");
    codec.classify(Image(8, 8, 0.5f));
    CHECK(io::read_file(o.work_root + "/req-000001/request.csv") == "id,op,image\nr000000,classify,in/r000000.pgm\n");
    CHECK(fs::exists(o.work_root + "/req-000001/in/r000000.pgm"));
  }

  TEST_CASE("classify and encode parse their response tables") {
    const SubprocessCodec codec(options("echo_codec.sh"));
    CHECK(codec.classify_batch({Image(8, 8), Image(8, 8, 1.0f)}) == std::vector<double>{0.25, 0.25});
    const auto c = codec.encode(Image(8, 8, 0.5f));
    CHECK(c.cs[0] == 0.5);
    CHECK(c.cs[6] == 0.6);
    CHECK(c.is == std::vector<double>{7.0, 8.0});
    CHECK(codec.contract().is_dim == 2);
    CHECK_THROWS_AS(codec.decode(codes(0.1).cs, ISCode{1.0}), Error);
  }

  TEST_CASE("nonzero exit carries status and stderr") {
    const SubprocessCodec codec(options("fail_codec.sh"));
    try {
      codec.classify(Image(8, 8));
      FAIL("expected a bridge error");
    } catch (const BridgeError& e) {
      CHECK(e.exit_status() == 1);
      CHECK(e.stderr_text().find("model weights not found") != std::string::npos);
      CHECK(e.kind() == ErrorKind::bridge);
    }
  }

  TEST_CASE("malformed responses are bridge errors") {
    const SubprocessCodec codec(options("malformed_codec.sh"));
    CHECK_THROWS_AS(codec.classify(Image(8, 8)), BridgeError);
    CHECK_THROWS_AS(codec.encode(Image(8, 8)), BridgeError);
    CHECK_THROWS_AS(codec.decode(codes(0.1).cs, codes(0.1).is), BridgeError);
  }

  TEST_CASE("timeout kills the process group") {
    const SubprocessCodec codec(options("slow_codec.sh", 0.3));
    const auto start = std::chrono::steady_clock::now();
    try {
      codec.classify(Image(8, 8));
      FAIL("expected a timeout");
    } catch (const BridgeError& e) {
      CHECK(e.exit_status() == -1);
      CHECK(std::string(e.what()).find("timed out") != std::string::npos);
    }
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(5));
  }

  TEST_CASE("successful requests are cleaned up") {
    const auto o = options("echo_codec.sh");
    {
      const SubprocessCodec codec(o);
      codec.classify(Image(8, 8));
    }
    CHECK_FALSE(fs::exists(o.work_root + "/req-000000"));
  }
}
