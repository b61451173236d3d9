#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "topocf/embedding.hpp"
#include "topocf/planner.hpp"
#include "topocf/postprocess.hpp"
#include "topocf/segmenter.hpp"
#include "topocf/topology.hpp"

namespace topocf {

enum class CodecKind { synthetic, subprocess };

struct CodecSettings {
  CodecKind kind = CodecKind::synthetic;
  std::string command;  ///< subprocess: template with {op} and {dir} placeholders
  double timeout_s = 300.0;
  int is_dim = 0;       ///< subprocess: declared IS dimension
  int image_size = 64;  ///< synthetic render size
};

/// Every tunable of a run. INI layout, one section per stage:
///
///   seed = 42
///   [embedding]  perplexity iterations learning_rate early_exaggeration
///                exaggeration_iterations initial_momentum final_momentum
///                min_gain init_stddev entropy_tolerance max_bisection_steps standardize
///   [cover]      nx ny overlap
///   [dbscan]     eps (number or "auto") eps_factor knn min_pts stratified_clustering
///   [planner]    goal_mode (purest_nearest|random) abnormal_purity normal_purity
///   [walk]       mode (graph|linear|direct) flip_threshold max_steps linear_step
///   [postproc]   threshold_mode (otsu|fixed) fixed_threshold bins otsu_support_only
///                open_radius close_radius min_component_px connectivity
///   [codec]      kind (synthetic|subprocess) command timeout_s is_dim image_size
///
/// Unknown sections or keys are rejected.
struct PipelineConfig {
  EmbeddingConfig embedding;
  MapperConfig mapper;
  PlannerConfig planner;
  WalkConfig walk;
  PostprocConfig postproc;
  CodecSettings codec;
  std::uint64_t seed = 0;

  /// Pushes `seed` into the embedding and planner settings.
  void apply_seed(std::uint64_t s);
  SegmentConfig segment_config(bool match_8bit) const;
};

/// Throws ParseError (with line and column) on malformed text, unknown keys or
/// bad values; Error(contract) when a value violates its range.
PipelineConfig parse_config(const std::string& text, const std::string& source = "<config>");
PipelineConfig load_config(const std::string& path);
void validate_config(const PipelineConfig& cfg);

/// Canonical JSON echo of every field (used in run manifests).
nlohmann::ordered_json config_to_json(const PipelineConfig& cfg);

}  // namespace topocf
