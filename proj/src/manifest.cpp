#include "topocf/manifest.hpp"

#include "topocf/digest.hpp"
#include "topocf/io.hpp"

namespace topocf {

RunManifest::RunManifest(std::string command, std::uint64_t seed, nlohmann::ordered_json config)
    : command_(std::move(command)), seed_(seed), config_(std::move(config)) {}

void RunManifest::add_input(const std::string& name, const std::string& path) {
  inputs_.emplace_back(name, hex64(fnv1a64(io::read_file(path))));
}

void RunManifest::add_output(const std::string& name) { outputs_.push_back(name); }

void RunManifest::set_timing(const std::string& stage, double milliseconds) {
  timings_.emplace_back(stage, milliseconds);
}

void RunManifest::set_extra(const std::string& key, nlohmann::ordered_json value) {
  extra_[key] = std::move(value);
}

nlohmann::ordered_json RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["tool"] = "topocf";
  j["version"] = kToolVersion;
  j["command"] = command_;
  j["seed"] = seed_;
  j["config"] = config_;
  nlohmann::ordered_json in = nlohmann::ordered_json::object();
  for (const auto& [name, digest] : inputs_) in[name] = "fnv1a64:" + digest;
  j["inputs"] = in;
  j["outputs"] = outputs_;
  for (const auto& [k, v] : extra_.items()) j[k] = v;
  nlohmann::ordered_json t = nlohmann::ordered_json::object();
  for (const auto& [stage, ms] : timings_) t[stage] = ms;
  j["timings_ms"] = t;
  return j;
}

}  // namespace topocf
