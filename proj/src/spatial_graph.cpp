#include "relgraph/spatial_graph.hpp"

#include "relgraph/error.hpp"

namespace relgraph {

ScoreMatrix spatial_scores(std::span<const Box> boxes, const GraphConfig& cfg,
                           const MaskMatrix& mask) {
  const auto n = static_cast<Index>(boxes.size());
  if (mask.rows() != n || mask.cols() != n) {
    throw DimensionError("mask shape does not match the number of boxes");
  }
  ScoreMatrix s = ScoreMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Box& a = boxes[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < n; ++j) {
      if (mask(i, j) == 0) {
        continue;
      }
      const Box& b = boxes[static_cast<std::size_t>(j)];
      const double v = shape_similarity(a, b) * distance_weight(center_distance(a, b), cfg.lambda);
      s(i, j) = v;
      s(j, i) = v;
    }
  }
  // Forced-unmasked diagonal (test configurations only).
  for (Index i = 0; i < n; ++i) {
    if (mask(i, i) != 0) {
      const Box& a = boxes[static_cast<std::size_t>(i)];
      s(i, i) = shape_similarity(a, a) * distance_weight(0.0, cfg.lambda);
    }
  }
  return s;
}

Adjacency build_spatial_graph(std::span<const Box> boxes, const GraphConfig& cfg) {
  cfg.validate();
  const MaskMatrix mask = overlap_mask(boxes, cfg.overlap_threshold);
  return topk_select(spatial_scores(boxes, cfg, mask), cfg.k);
}

}  // namespace relgraph
