#pragma once

#include "relgraph/adjacency.hpp"

#include <span>

namespace relgraph {

/// mask(i,j) · shape_similarity(i,j) · distance_weight(center_distance(i,j), lambda).
[[nodiscard]] ScoreMatrix spatial_scores(std::span<const Box> boxes, const GraphConfig& cfg,
                                         const MaskMatrix& mask);

/// overlap_mask → spatial_scores → topk_select.
[[nodiscard]] Adjacency build_spatial_graph(std::span<const Box> boxes, const GraphConfig& cfg);

}  // namespace relgraph
