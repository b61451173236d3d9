#pragma once

#include <chrono>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace topocf {

inline constexpr const char* kToolVersion = "0.1.0";

/// Per-run record written next to a subcommand's outputs. Everything except
/// `timings_ms` is a function of the inputs and the seed.
class RunManifest {
 public:
  RunManifest(std::string command, std::uint64_t seed, nlohmann::ordered_json config);

  /// Records the FNV-1a 64 digest of an input file under `name`.
  void add_input(const std::string& name, const std::string& path);
  /// Records an output file name, relative to the output directory.
  void add_output(const std::string& name);
  void set_timing(const std::string& stage, double milliseconds);
  void set_extra(const std::string& key, nlohmann::ordered_json value);

  nlohmann::ordered_json to_json() const;

 private:
  std::string command_;
  std::uint64_t seed_;
  nlohmann::ordered_json config_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
  nlohmann::ordered_json extra_ = nlohmann::ordered_json::object();
};

/// Stopwatch; `ms()` is the time since construction.
class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace topocf
