#include "topocf/pipeline.hpp"

#include <unordered_map>

#include "topocf/error.hpp"

namespace topocf {

MetricsReport score_results(const std::vector<SegmentationResult>& results, const Dataset& d) {
  std::unordered_map<std::string, const SampleRecord*> by_id;
  for (const auto& r : d.records) by_id.emplace(r.id, &r);
  std::vector<SampleScore> scores;
  for (const auto& res : results) {
    auto it = by_id.find(res.id);
    if (it == by_id.end() || !it->second->gt_mask)
      throw Error(ErrorKind::contract, "no ground-truth mask for '" + res.id + "'");
    if (!res.ok()) {
      scores.push_back({res.id, 0.0, 0.0});
      continue;
    }
    const Mask& gt = *it->second->gt_mask;
    scores.push_back({res.id, iou(res.mask, gt), dice(res.mask, gt)});
  }
  return mean_report(std::move(scores));
}

PipelineOutput run_pipeline(const Dataset& d, const Codec& codec, const PipelineConfig& cfg,
                            bool match_8bit) {
  PipelineOutput out;
  out.tsne = tsne_fit(cs_points(d), cfg.embedding);
  out.graph = build_mapper(d, out.tsne.embedding, cfg.mapper);
  out.results = segment_dataset(d, out.graph, codec, cfg.segment_config(match_8bit));
  out.report = score_results(out.results, d);
  return out;
}

}  // namespace topocf
