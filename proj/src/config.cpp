#include "topocf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "topocf/error.hpp"

namespace topocf {

namespace pt = boost::property_tree;

void PipelineConfig::apply_seed(std::uint64_t s) {
  seed = s;
  embedding.seed = s;
  planner.seed = s;
}

SegmentConfig PipelineConfig::segment_config(bool match_8bit) const {
  SegmentConfig sc;
  sc.walk = walk;
  sc.post = postproc;
  sc.planner = planner;
  sc.match_8bit = match_8bit;
  return sc;
}

namespace {

struct Position {
  std::size_t line = 0;
  std::size_t column = 1;
};

// Line and column of `key` inside `[section]` (section "" = before any
// header); line 0 if not found.
Position locate(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto b = line.find_first_not_of(" \t");
    if (b == std::string::npos) continue;
    if (line[b] == '[') {
      const auto e = line.find(']', b);
      current = line.substr(b + 1, e == std::string::npos ? std::string::npos : e - b - 1);
      continue;
    }
    if (current != section) continue;
    const auto eq = line.find('=', b);
    if (eq == std::string::npos) continue;
    auto k = line.substr(b, eq - b);
    k.erase(k.find_last_not_of(" \t") + 1);
    if (k == key) return {no, b + 1};
  }
  return {};
}

std::size_t locate_section(const std::string& text, const std::string& section) {
  std::istringstream in(text);
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto b = line.find_first_not_of(" \t");
    if (b != std::string::npos && line.compare(b, section.size() + 2, "[" + section + "]") == 0)
      return no;
  }
  return 0;
}

struct Ctx {
  const std::string& text;
  const std::string& source;
  std::string section;

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    const auto at = locate(text, section, key);
    throw ParseError(source, at.line, at.column,
                     (section.empty() ? key : section + "." + key) + ": " + what);
  }
};

double to_double(const Ctx& c, const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) c.fail(key, "expected a number, got '" + v + "'");
  return out;
}

long long to_int(const Ctx& c, const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) c.fail(key, "expected an integer, got '" + v + "'");
  return out;
}

std::uint64_t to_u64(const Ctx& c, const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || p != end) c.fail(key, "expected an unsigned integer, got '" + v + "'");
  return out;
}

bool to_bool(const Ctx& c, const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  c.fail(key, "expected a boolean, got '" + v + "'");
}

using Setter = std::function<void(const Ctx&, const std::string&, const std::string&)>;

template <class T>
Setter real(T& field) {
  return [&field](const Ctx& c, const std::string& k, const std::string& v) {
    field = static_cast<T>(to_double(c, k, v));
  };
}

template <class T>
Setter integer(T& field) {
  return [&field](const Ctx& c, const std::string& k, const std::string& v) {
    field = static_cast<T>(to_int(c, k, v));
  };
}

Setter boolean(bool& field) {
  return [&field](const Ctx& c, const std::string& k, const std::string& v) { field = to_bool(c, k, v); };
}

std::map<std::string, std::map<std::string, Setter>> schema(PipelineConfig& cfg) {
  auto& e = cfg.embedding;
  auto& cv = cfg.mapper.cover;
  auto& db = cfg.mapper.dbscan;
  auto& pl = cfg.planner;
  auto& w = cfg.walk;
  auto& pp = cfg.postproc;
  auto& cd = cfg.codec;
  return {
      {"",
       {{"seed", [&cfg](const Ctx& c, const std::string& k, const std::string& v) {
          cfg.apply_seed(to_u64(c, k, v));
        }}}},
      {"embedding",
       {{"perplexity", real(e.perplexity)},
        {"iterations", integer(e.iterations)},
        {"learning_rate", real(e.learning_rate)},
        {"early_exaggeration", real(e.early_exaggeration)},
        {"exaggeration_iterations", integer(e.exaggeration_iterations)},
        {"initial_momentum", real(e.initial_momentum)},
        {"final_momentum", real(e.final_momentum)},
        {"min_gain", real(e.min_gain)},
        {"init_stddev", real(e.init_stddev)},
        {"entropy_tolerance", real(e.entropy_tolerance)},
        {"max_bisection_steps", integer(e.max_bisection_steps)},
        {"standardize", boolean(e.standardize)}}},
      {"cover", {{"nx", integer(cv.nx)}, {"ny", integer(cv.ny)}, {"overlap", real(cv.overlap)}}},
      {"dbscan",
       {{"eps",
         [&db](const Ctx& c, const std::string& k, const std::string& v) {
           if (v == "auto") db.eps.reset();
           else db.eps = to_double(c, k, v);
         }},
        {"eps_factor", real(db.eps_factor)},
        {"knn", integer(db.knn)},
        {"min_pts", integer(db.min_pts)},
        {"stratified_clustering", boolean(cfg.mapper.stratified_clustering)}}},
      {"planner",
       {{"goal_mode",
         [&pl](const Ctx& c, const std::string& k, const std::string& v) {
           if (v == "purest_nearest") pl.goal_mode = GoalMode::purest_nearest;
           else if (v == "random") pl.goal_mode = GoalMode::random;
           else c.fail(k, "expected purest_nearest or random, got '" + v + "'");
         }},
        {"abnormal_purity", real(pl.abnormal_purity)},
        {"normal_purity", real(pl.normal_purity)}}},
      {"walk",
       {{"mode",
         [&w](const Ctx& c, const std::string& k, const std::string& v) {
           auto m = parse_walk_mode(v);
           if (!m) c.fail(k, "expected graph, linear or direct, got '" + v + "'");
           w.mode = *m;
         }},
        {"flip_threshold", real(w.flip_threshold)},
        {"max_steps", integer(w.max_steps)},
        {"linear_step", real(w.linear_step)}}},
      {"postproc",
       {{"threshold_mode",
         [&pp](const Ctx& c, const std::string& k, const std::string& v) {
           if (v == "otsu") pp.threshold_mode = ThresholdMode::otsu;
           else if (v == "fixed") pp.threshold_mode = ThresholdMode::fixed;
           else c.fail(k, "expected otsu or fixed, got '" + v + "'");
         }},
        {"fixed_threshold", real(pp.fixed_threshold)},
        {"bins", integer(pp.bins)},
        {"otsu_support_only", boolean(pp.otsu_support_only)},
        {"open_radius", integer(pp.open_radius)},
        {"close_radius", integer(pp.close_radius)},
        {"min_component_px", integer(pp.min_component_px)},
        {"connectivity", integer(pp.connectivity)}}},
      {"codec",
       {{"kind",
         [&cd](const Ctx& c, const std::string& k, const std::string& v) {
           if (v == "synthetic") cd.kind = CodecKind::synthetic;
           else if (v == "subprocess") cd.kind = CodecKind::subprocess;
           else c.fail(k, "expected synthetic or subprocess, got '" + v + "'");
         }},
        {"command", [&cd](const Ctx&, const std::string&, const std::string& v) { cd.command = v; }},
        {"timeout_s", real(cd.timeout_s)},
        {"is_dim", integer(cd.is_dim)},
        {"image_size", integer(cd.image_size)}}},
  };
}

}  // namespace

PipelineConfig parse_config(const std::string& text, const std::string& source) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(source, e.line(), 1, e.message());
  }

  PipelineConfig cfg;
  const auto table = schema(cfg);
  for (const auto& [name, child] : tree) {
    if (child.empty() && !child.data().empty()) {  // root-level key
      Ctx ctx{text, source, ""};
      const auto& keys = table.at("");
      auto it = keys.find(name);
      if (it == keys.end()) ctx.fail(name, "unknown key");
      it->second(ctx, name, child.data());
      continue;
    }
    Ctx ctx{text, source, name};
    auto sec = table.find(name);
    if (sec == table.end() || name.empty()) {
      throw ParseError(source, locate_section(text, name), 1, "unknown section [" + name + "]");
    }
    for (const auto& [key, value] : child) {
      auto it = sec->second.find(key);
      if (it == sec->second.end()) ctx.fail(key, "unknown key");
      it->second(ctx, key, value.data());
    }
  }
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void validate_config(const PipelineConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw Error(ErrorKind::contract, std::string("config: ") + what);
  };
  const auto& e = cfg.embedding;
  require(e.perplexity > 0.0, "embedding.perplexity must be positive");
  require(e.iterations >= 250, "embedding.iterations must be >= 250");
  require(e.learning_rate > 0.0, "embedding.learning_rate must be positive");
  require(e.min_gain > 0.0, "embedding.min_gain must be positive");
  require(e.max_bisection_steps >= 1, "embedding.max_bisection_steps must be >= 1");
  require(cfg.mapper.cover.nx >= 1 && cfg.mapper.cover.ny >= 1, "cover.nx and cover.ny must be >= 1");
  require(cfg.mapper.cover.overlap >= 0.0 && cfg.mapper.cover.overlap < 0.5,
          "cover.overlap must lie in [0, 0.5)");
  require(!cfg.mapper.dbscan.eps || *cfg.mapper.dbscan.eps > 0.0, "dbscan.eps must be positive");
  require(cfg.mapper.dbscan.min_pts >= 1, "dbscan.min_pts must be >= 1");
  require(cfg.mapper.dbscan.knn >= 1, "dbscan.knn must be >= 1");
  require(cfg.walk.flip_threshold > 0.0 && cfg.walk.flip_threshold < 1.0,
          "walk.flip_threshold must lie in (0, 1)");
  require(cfg.walk.max_steps >= 0, "walk.max_steps must be >= 0");
  require(cfg.walk.linear_step > 0.0 && cfg.walk.linear_step <= 1.0, "walk.linear_step must lie in (0, 1]");
  require(cfg.postproc.bins >= 2, "postproc.bins must be >= 2");
  require(cfg.postproc.open_radius >= 0 && cfg.postproc.close_radius >= 0, "postproc radii must be >= 0");
  require(cfg.postproc.min_component_px >= 0, "postproc.min_component_px must be >= 0");
  require(cfg.postproc.connectivity == 4 || cfg.postproc.connectivity == 8,
          "postproc.connectivity must be 4 or 8");
  require(cfg.codec.timeout_s > 0.0, "codec.timeout_s must be positive");
  require(cfg.codec.image_size >= 8, "codec.image_size must be >= 8");
  require(cfg.codec.is_dim >= 0, "codec.is_dim must be >= 0");
}

nlohmann::ordered_json config_to_json(const PipelineConfig& cfg) {
  using nlohmann::ordered_json;
  const auto& e = cfg.embedding;
  const auto& cv = cfg.mapper.cover;
  const auto& db = cfg.mapper.dbscan;
  ordered_json j;
  j["seed"] = cfg.seed;
  j["embedding"] = {{"perplexity", e.perplexity},
                    {"iterations", e.iterations},
                    {"learning_rate", e.learning_rate},
                    {"early_exaggeration", e.early_exaggeration},
                    {"exaggeration_iterations", e.exaggeration_iterations},
                    {"initial_momentum", e.initial_momentum},
                    {"final_momentum", e.final_momentum},
                    {"min_gain", e.min_gain},
                    {"init_stddev", e.init_stddev},
                    {"entropy_tolerance", e.entropy_tolerance},
                    {"max_bisection_steps", e.max_bisection_steps},
                    {"standardize", e.standardize}};
  j["cover"] = {{"nx", cv.nx}, {"ny", cv.ny}, {"overlap", cv.overlap}};
  j["dbscan"] = {{"eps", db.eps ? ordered_json(*db.eps) : ordered_json("auto")},
                 {"eps_factor", db.eps_factor},
                 {"knn", db.knn},
                 {"min_pts", db.min_pts},
                 {"stratified_clustering", cfg.mapper.stratified_clustering}};
  j["planner"] = {{"goal_mode", cfg.planner.goal_mode == GoalMode::random ? "random" : "purest_nearest"},
                  {"abnormal_purity", cfg.planner.abnormal_purity},
                  {"normal_purity", cfg.planner.normal_purity}};
  j["walk"] = {{"mode", to_string(cfg.walk.mode)},
               {"flip_threshold", cfg.walk.flip_threshold},
               {"max_steps", cfg.walk.max_steps},
               {"linear_step", cfg.walk.linear_step}};
  j["postproc"] = {{"threshold_mode", cfg.postproc.threshold_mode == ThresholdMode::otsu ? "otsu" : "fixed"},
                   {"fixed_threshold", cfg.postproc.fixed_threshold},
                   {"bins", cfg.postproc.bins},
                   {"otsu_support_only", cfg.postproc.otsu_support_only},
                   {"open_radius", cfg.postproc.open_radius},
                   {"close_radius", cfg.postproc.close_radius},
                   {"min_component_px", cfg.postproc.min_component_px},
                   {"connectivity", cfg.postproc.connectivity}};
  j["codec"] = {{"kind", cfg.codec.kind == CodecKind::synthetic ? "synthetic" : "subprocess"},
                {"command", cfg.codec.command},
                {"timeout_s", cfg.codec.timeout_s},
                {"is_dim", cfg.codec.is_dim},
                {"image_size", cfg.codec.image_size}};
  return j;
}

}  // namespace topocf
