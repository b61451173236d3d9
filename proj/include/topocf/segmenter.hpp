#pragma once

#include <optional>
#include <string>
#include <vector>

#include "topocf/codec.hpp"
#include "topocf/planner.hpp"
#include "topocf/postprocess.hpp"
#include "topocf/topology.hpp"

namespace topocf {

enum class WalkMode { graph_path, linear, direct_reference };

const char* to_string(WalkMode mode);
std::optional<WalkMode> parse_walk_mode(const std::string& text);  ///< graph|linear|direct or full names

struct WalkConfig {
  WalkMode mode = WalkMode::graph_path;
  double flip_threshold = 0.5;
  int max_steps = 0;         ///< 0: every node of the path
  double linear_step = 0.1;  ///< the linear walk visits t = step, 2 step, ..., 1
};

struct TraceStep {
  CSCode cs{};
  Image image;
  double p_abnormal = 0.0;
  double t = 0.0;    ///< interpolation parameter (linear walk), 1 for direct
  int node_id = -1;  ///< graph walk only
};

struct CounterfactualTrace {
  std::vector<TraceStep> steps;
  std::optional<std::size_t> flip_index;
  bool no_flip = false;

  /// The flip step, or the last step when nothing flipped.
  const TraceStep& chosen() const;
};

/// True when p_abnormal has crossed to the class opposite the query:
/// abnormal query -> p <= 1 - threshold, normal query -> p >= threshold.
bool is_flipped(double p_abnormal, ClassLabel query_label, double threshold);

/// Decodes each path node's center with the query's IS code and stops at the
/// first flip.
CounterfactualTrace counterfactual_walk(const SampleRecord& query, const PathPlan& plan,
                                        const TopologyGraph& g, const Codec& codec,
                                        const WalkConfig& cfg);

/// cs(t) = cs_q + t (cs_r - cs_q) for t = 0.1, 0.2, ..., 1.0, same stopping rule.
CounterfactualTrace linear_walk(const SampleRecord& query, const SampleRecord& reference,
                                const Codec& codec, const WalkConfig& cfg);

/// Single step decode(cs_r, is_q).
CounterfactualTrace direct_reference(const SampleRecord& query, const SampleRecord& reference,
                                     const Codec& codec, const WalkConfig& cfg = {});

/// |a - b| divided by its maximum; an all-zero difference stays all-zero.
/// Throws Error(contract) on shape mismatch.
Image difference_map(const Image& original, const Image& counterfactual);

/// Rounds every pixel to the nearest multiple of 1/255.
Image quantize_8bit(const Image& img);

struct SegmentConfig {
  WalkConfig walk;
  PostprocConfig post;
  PlannerConfig planner;
  /// Quantise counterfactuals to 8 bits before differencing; set when the
  /// originals were read from 8-bit files.
  bool match_8bit = false;
};

struct SegmentationResult {
  std::string id;
  WalkMode mode = WalkMode::graph_path;
  Image heatmap;
  Mask mask;
  CounterfactualTrace trace;
  std::optional<PathPlan> plan;
  std::optional<std::string> reference_id;
  double reference_distance = 0.0;  ///< |cs_q - cs_r| for linear and direct modes
  std::string error;                ///< non-empty when this record failed

  bool ok() const { return error.empty(); }
};

/// Opposite-class record used by linear and direct modes: the nearest in CS
/// space under purest_nearest goal mode, otherwise a uniform draw from
/// SplitMix64(seed). Throws Error(no_candidate) if none exists.
const SampleRecord& select_reference(const Dataset& d, const SampleRecord& query,
                                     const PlannerConfig& cfg, std::uint64_t seed);

/// Segments one record; errors propagate.
SegmentationResult segment_record(const SampleRecord& query, const Dataset& d,
                                  const TopologyGraph& g, const DistanceMatrix& m,
                                  const Codec& codec, const SegmentConfig& cfg,
                                  std::uint64_t record_seed);

/// Graph-mode segmentation along a precomputed plan; errors propagate.
SegmentationResult segment_with_plan(const SampleRecord& query, const PathPlan& plan,
                                     const TopologyGraph& g, const Codec& codec,
                                     const SegmentConfig& cfg);

/// Seed handed to the k-th abnormal record (0-based, input order).
std::uint64_t record_seed(std::uint64_t base_seed, std::uint64_t k);

/// Every abnormal record in input order. Per-record failures are captured in
/// SegmentationResult::error and the run continues; a BridgeError from an
/// external codec aborts the run. In random goal mode the
/// k-th abnormal record draws with seed SplitMix64(planner.seed + k).next().
std::vector<SegmentationResult> segment_dataset(const Dataset& d, const TopologyGraph& g,
                                                const Codec& codec, const SegmentConfig& cfg);

}  // namespace topocf
