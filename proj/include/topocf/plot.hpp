#pragma once

#include <string>

#include "topocf/core.hpp"
#include "topocf/embedding.hpp"
#include "topocf/topology.hpp"

namespace topocf {

struct PlotStyle {
  int size = 640;     ///< square canvas side in px
  int margin = 40;
  double min_radius = 8.0;
  double max_radius = 22.0;
};

/// Node-edge diagram placed by each node's centroid2d. One `<circle class="node">`
/// per node, filled from blue (ratio 0) to red (ratio 1), with the abnormal
/// ratio printed inside as "%.2f".
std::string graph_svg(const TopologyGraph& g, const PlotStyle& style = {});

/// Scatter of the embedding, one `<circle class="normal|abnormal">` per record.
std::string embedding_svg(const Dataset& d, const Embedding2D& emb, const PlotStyle& style = {});

}  // namespace topocf
