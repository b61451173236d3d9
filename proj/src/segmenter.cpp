#include "topocf/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "topocf/error.hpp"
#include "topocf/rng.hpp"

namespace topocf {

const char* to_string(WalkMode mode) {
  switch (mode) {
    case WalkMode::graph_path: return "graph_path";
    case WalkMode::linear: return "linear";
    case WalkMode::direct_reference: return "direct_reference";
  }
  return "graph_path";
}

std::optional<WalkMode> parse_walk_mode(const std::string& text) {
  if (text == "graph" || text == "graph_path") return WalkMode::graph_path;
  if (text == "linear") return WalkMode::linear;
  if (text == "direct" || text == "direct_reference") return WalkMode::direct_reference;
  return std::nullopt;
}

const TraceStep& CounterfactualTrace::chosen() const {
  if (steps.empty()) throw Error(ErrorKind::contract, "empty counterfactual trace");
  return flip_index ? steps[*flip_index] : steps.back();
}

bool is_flipped(double p_abnormal, ClassLabel query_label, double threshold) {
  return query_label == ClassLabel::abnormal ? p_abnormal <= 1.0 - threshold
                                             : p_abnormal >= threshold;
}

namespace {

void check_walk(const WalkConfig& cfg) {
  if (!(cfg.flip_threshold > 0.0 && cfg.flip_threshold < 1.0))
    throw Error(ErrorKind::contract, "flip_threshold must lie in (0, 1)");
}

// Appends one step and reports whether it flipped.
bool push_step(CounterfactualTrace& trace, TraceStep step, const SampleRecord& query,
               const Codec& codec, const WalkConfig& cfg) {
  step.image = codec.decode(step.cs, query.is);
  step.p_abnormal = codec.classify(step.image);
  const bool flip = is_flipped(step.p_abnormal, query.label, cfg.flip_threshold);
  trace.steps.push_back(std::move(step));
  if (flip) trace.flip_index = trace.steps.size() - 1;
  return flip;
}

}  // namespace

CounterfactualTrace counterfactual_walk(const SampleRecord& query, const PathPlan& plan,
                                        const TopologyGraph& g, const Codec& codec,
                                        const WalkConfig& cfg) {
  check_walk(cfg);
  if (plan.node_ids.empty()) throw Error(ErrorKind::contract, "empty path plan");
  std::size_t limit = plan.node_ids.size();
  if (cfg.max_steps > 0) limit = std::min(limit, static_cast<std::size_t>(cfg.max_steps));
  CounterfactualTrace trace;
  for (std::size_t k = 0; k < limit; ++k) {
    const int id = plan.node_ids[k];
    if (id < 0 || static_cast<std::size_t>(id) >= g.nodes.size())
      throw Error(ErrorKind::contract, "path references unknown node " + std::to_string(id));
    TraceStep step;
    step.cs = g.nodes[static_cast<std::size_t>(id)].center;
    step.node_id = id;
    step.t = limit > 1 ? static_cast<double>(k) / static_cast<double>(limit - 1) : 1.0;
    if (push_step(trace, std::move(step), query, codec, cfg)) return trace;
  }
  trace.no_flip = true;
  return trace;
}

CounterfactualTrace linear_walk(const SampleRecord& query, const SampleRecord& reference,
                                const Codec& codec, const WalkConfig& cfg) {
  check_walk(cfg);
  if (!(cfg.linear_step > 0.0 && cfg.linear_step <= 1.0))
    throw Error(ErrorKind::contract, "linear_step must lie in (0, 1]");
  // t = k / K with integer k keeps the grid exact (k * 0.1 drifts).
  const int count = static_cast<int>(std::lround(1.0 / cfg.linear_step));
  CounterfactualTrace trace;
  for (int k = 1; k <= count; ++k) {
    TraceStep step;
    step.t = static_cast<double>(k) / static_cast<double>(count);
    for (std::size_t i = 0; i < kCsDim; ++i)
      step.cs[i] = query.cs[i] + step.t * (reference.cs[i] - query.cs[i]);
    if (push_step(trace, std::move(step), query, codec, cfg)) return trace;
  }
  trace.no_flip = true;
  return trace;
}

CounterfactualTrace direct_reference(const SampleRecord& query, const SampleRecord& reference,
                                     const Codec& codec, const WalkConfig& cfg) {
  check_walk(cfg);
  CounterfactualTrace trace;
  TraceStep step;
  step.cs = reference.cs;
  step.t = 1.0;
  if (!push_step(trace, std::move(step), query, codec, cfg)) trace.no_flip = true;
  return trace;
}

Image difference_map(const Image& original, const Image& counterfactual) {
  check_same_shape(original, counterfactual, "difference_map");
  Image out(original.height, original.width);
  float peak = 0.0f;
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.data[i] = std::abs(original.data[i] - counterfactual.data[i]);
    peak = std::max(peak, out.data[i]);
  }
  if (peak > 0.0f)
    for (auto& v : out.data) v = static_cast<float>(static_cast<double>(v) / peak);
  return out;
}

Image quantize_8bit(const Image& img) {
  Image out = img;
  for (auto& v : out.data)
    v = static_cast<float>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f)) / 255.0f;
  return out;
}

const SampleRecord& select_reference(const Dataset& d, const SampleRecord& query,
                                     const PlannerConfig& cfg, std::uint64_t seed) {
  const auto target = query.label == ClassLabel::abnormal ? ClassLabel::normal : ClassLabel::abnormal;
  std::vector<const SampleRecord*> cand;
  for (const auto& r : d.records)
    if (r.label == target) cand.push_back(&r);
  if (cand.empty())
    throw Error(ErrorKind::no_candidate,
                std::string("no ") + to_string(target) + " record to use as reference");
  if (cfg.goal_mode == GoalMode::random) {
    SplitMix64 rng(seed);
    return *cand[rng.below(cand.size())];
  }
  const SampleRecord* best = cand.front();
  double best_d = euclidean(query.cs, best->cs);
  for (const auto* r : cand) {
    const double dist = euclidean(query.cs, r->cs);
    if (dist < best_d) best = r, best_d = dist;
  }
  return *best;
}

namespace {

void finish_result(SegmentationResult& res, const SampleRecord& query, const Codec& codec,
                   const SegmentConfig& cfg) {
  const Image original = query.image ? *query.image : codec.decode(query.cs, query.is);
  Image cf = res.trace.chosen().image;
  if (cfg.match_8bit) cf = quantize_8bit(cf);
  res.heatmap = difference_map(original, cf);
  res.mask = postprocess(res.heatmap, cfg.post);
}

}  // namespace

SegmentationResult segment_with_plan(const SampleRecord& query, const PathPlan& plan,
                                     const TopologyGraph& g, const Codec& codec,
                                     const SegmentConfig& cfg) {
  SegmentationResult res;
  res.id = query.id;
  res.mode = WalkMode::graph_path;
  res.plan = plan;
  res.trace = counterfactual_walk(query, plan, g, codec, cfg.walk);
  finish_result(res, query, codec, cfg);
  return res;
}

SegmentationResult segment_record(const SampleRecord& query, const Dataset& d,
                                  const TopologyGraph& g, const DistanceMatrix& m,
                                  const Codec& codec, const SegmentConfig& cfg,
                                  std::uint64_t record_seed) {
  if (cfg.walk.mode == WalkMode::graph_path) {
    PlannerConfig pc = cfg.planner;
    pc.seed = record_seed;
    return segment_with_plan(query, plan_for(query.cs, query.label, g, m, pc), g, codec, cfg);
  }
  SegmentationResult res;
  res.id = query.id;
  res.mode = cfg.walk.mode;
  const SampleRecord& ref = select_reference(d, query, cfg.planner, record_seed);
  res.reference_id = ref.id;
  res.reference_distance = euclidean(query.cs, ref.cs);
  res.trace = cfg.walk.mode == WalkMode::linear ? linear_walk(query, ref, codec, cfg.walk)
                                                : direct_reference(query, ref, codec, cfg.walk);
  finish_result(res, query, codec, cfg);
  return res;
}

std::uint64_t record_seed(std::uint64_t base_seed, std::uint64_t k) {
  return SplitMix64(base_seed + k).next();
}

std::vector<SegmentationResult> segment_dataset(const Dataset& d, const TopologyGraph& g,
                                                const Codec& codec, const SegmentConfig& cfg) {
  const auto m = adjacency_matrix(g);
  std::vector<SegmentationResult> out;
  std::uint64_t k = 0;
  for (const auto& rec : d.records) {
    if (rec.label != ClassLabel::abnormal) continue;
    const std::uint64_t seed = record_seed(cfg.planner.seed, k++);
    try {
      out.push_back(segment_record(rec, d, g, m, codec, cfg, seed));
    } catch (const BridgeError&) {
      throw;
    } catch (const Error& e) {
      SegmentationResult failed;
      failed.id = rec.id;
      failed.mode = cfg.walk.mode;
      failed.error = std::string(to_string(e.kind())) + ": " + e.what();
      const auto shape = codec.contract();
      const int h = rec.image ? rec.image->height : shape.height;
      const int w = rec.image ? rec.image->width : shape.width;
      failed.heatmap = Image(h, w);
      failed.mask = Mask(h, w);
      out.push_back(std::move(failed));
    }
  }
  return out;
}

}  // namespace topocf
