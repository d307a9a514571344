#pragma once

#include "relgraph/geometry.hpp"
#include "relgraph/types.hpp"

#include <span>
#include <utility>
#include <vector>

namespace relgraph {

/// Undirected, unweighted graph over N regions: symmetric, zero diagonal, {0,1} entries.
/// Stored as sorted neighbor lists.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(Index n) : neighbors_(static_cast<std::size_t>(n)) {}

  /// Builds from an arbitrary list of pairs; self-pairs are dropped and duplicates merged.
  static Adjacency from_edges(Index n, std::span<const std::pair<Index, Index>> edges);
  /// Builds from a dense 0/1 matrix; throws DimensionError if it is not square and symmetric.
  static Adjacency from_dense(const Matrix& dense);

  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(neighbors_.size()); }
  [[nodiscard]] bool has_edge(Index i, Index j) const;
  [[nodiscard]] Index degree(Index i) const { return static_cast<Index>(neighbors_[static_cast<std::size_t>(i)].size()); }
  [[nodiscard]] const std::vector<Index>& neighbors(Index i) const { return neighbors_[static_cast<std::size_t>(i)]; }
  /// Number of undirected edges.
  [[nodiscard]] Index edge_count() const noexcept;
  /// Pairs (i, j) with i < j in lexicographic order.
  [[nodiscard]] std::vector<std::pair<Index, Index>> edges() const;
  [[nodiscard]] Matrix to_dense() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::vector<std::vector<Index>> neighbors_;
};

/// Graph-construction knobs shared by the semantic and spatial builders.
struct GraphConfig {
  /// Edges kept per row before symmetrization.
  int k = 64;
  /// IoU strictly above this suppresses a pair.
  double overlap_threshold = 0.5;
  double lambda = kDefaultLambda;

  void validate() const;
};

/// δ(i, j): 0 on the diagonal and where iou > tau, 1 elsewhere.
[[nodiscard]] MaskMatrix overlap_mask(std::span<const Box> boxes, double tau);

/// Row-wise top-K before symmetrization. Row i lists the selected columns, best first.
/// Only strictly positive scores are eligible. Ties go to the larger score first, then to the
/// lexicographically smaller (min(i,j), max(i,j)) pair.
[[nodiscard]] std::vector<std::vector<Index>> topk_rows(const ScoreMatrix& scores, int k);

/// topk_rows followed by OR-symmetrization.
[[nodiscard]] Adjacency topk_select(const ScoreMatrix& scores, int k);

/// Entry-wise union. Throws DimensionError on size mismatch.
[[nodiscard]] Adjacency fuse_graphs(const Adjacency& a, const Adjacency& b);

/// Edges present in both graphs.
[[nodiscard]] Adjacency intersect_graphs(const Adjacency& a, const Adjacency& b);

}  // namespace relgraph
