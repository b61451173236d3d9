#pragma once

#include <vector>

#include "topocf/codec.hpp"
#include "topocf/config.hpp"
#include "topocf/metrics.hpp"
#include "topocf/segmenter.hpp"

namespace topocf {

/// Scores segmentation results against each record's gt_mask. Failed records
/// score 0 on both metrics. Throws Error(empty_input) when there are no results.
MetricsReport score_results(const std::vector<SegmentationResult>& results, const Dataset& d);

struct PipelineOutput {
  TsneResult tsne;
  TopologyGraph graph;
  std::vector<SegmentationResult> results;
  MetricsReport report;
};

/// embed -> mapper graph -> segment every abnormal record -> score, in memory.
PipelineOutput run_pipeline(const Dataset& d, const Codec& codec, const PipelineConfig& cfg,
                            bool match_8bit = false);

}  // namespace topocf
