#pragma once

#include "relgraph/adjacency.hpp"
#include "relgraph/types.hpp"

#include <Eigen/SparseCore>

#include <random>
#include <span>
#include <utility>
#include <vector>

namespace relgraph {

/// D − E for the degree matrix D of E. Rows sum to zero.
[[nodiscard]] Matrix combinatorial_laplacian(const Adjacency& graph);

/// D^{-1/2} (D − E) D^{-1/2}, dense. Rows and columns of degree-zero nodes are all zero.
[[nodiscard]] Matrix normalized_laplacian(const Adjacency& graph);

/// Sparse normalized Laplacian of a weighted undirected graph, kept together with the edge
/// weights so gradients can be routed back to them.
class LaplacianOperator {
 public:
  using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  LaplacianOperator() = default;
  explicit LaplacianOperator(const Adjacency& graph);
  /// edges are undirected pairs (i < j); weights must be positive.
  LaplacianOperator(Index n, std::vector<std::pair<Index, Index>> edges, std::vector<double> weights);

  [[nodiscard]] Index size() const noexcept { return n_; }
  [[nodiscard]] Matrix apply(const Matrix& x) const { return matrix_ * x; }
  [[nodiscard]] Matrix dense() const { return Matrix(matrix_); }
  [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }
  [[nodiscard]] const std::vector<std::pair<Index, Index>>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<double>& weights() const noexcept { return weights_; }

  /// Chains d loss / d L̂(i,j), given as g(i, j) for each stored edge in both orientations,
  /// back to d loss / d weight per edge.
  [[nodiscard]] std::vector<double> weight_gradients(std::span<const double> grad_ij,
                                                     std::span<const double> grad_ji) const;

 private:
  void build();

  Index n_ = 0;
  std::vector<std::pair<Index, Index>> edges_;
  std::vector<double> weights_;
  std::vector<double> degree_;
  std::vector<double> inv_sqrt_degree_;
  SparseMatrix matrix_;
};

/// Trainable GCN weights W^1..W^L (each D × D) and the LeakyReLU slope.
struct GcnParams {
  std::vector<Matrix> weights;
  double slope = 0.01;

  [[nodiscard]] int layers() const noexcept { return static_cast<int>(weights.size()); }
  [[nodiscard]] Index dim() const noexcept { return weights.empty() ? 0 : weights.front().rows(); }

  static GcnParams init(Index dim, int layers, std::mt19937_64& rng, double slope = 0.01);
  static GcnParams zeros(Index dim, int layers, double slope = 0.01);
  [[nodiscard]] GcnParams zeros_like() const { return zeros(dim(), layers(), slope); }

  /// Throws DimensionError unless every weight is dim × dim and L >= 1.
  void validate() const;
};

/// Activations recorded by gcn_forward.
struct GcnTape {
  LaplacianOperator laplacian;
  GcnParams params;
  std::vector<Matrix> hidden;          // H^(0) = f, ..., H^(L)
  std::vector<Matrix> projected;       // H^(l-1) W^l
  std::vector<Matrix> pre_activations; // L̂ H^(l-1) W^l
};

struct GcnOutput {
  Matrix features;  // f + H^(L)
  GcnTape tape;
};

struct GcnGradients {
  Matrix features;
  GcnParams params;
  /// d loss / d edge weight, aligned with tape.laplacian.edges(); filled on request only.
  std::vector<double> edge_weights;
};

/// H^(l) = σ(L̂ H^(l-1) W^l), f̃ = f + H^(L). Throws NumericError on non-finite activations.
[[nodiscard]] GcnOutput gcn_forward(const Matrix& features, const LaplacianOperator& laplacian,
                                    const GcnParams& params);
[[nodiscard]] GcnOutput gcn_forward(const Matrix& features, const Adjacency& graph,
                                    const GcnParams& params);

[[nodiscard]] GcnGradients gcn_backward(const GcnTape& tape, const Matrix& grad_out,
                                        bool edge_weight_grads = false);

}  // namespace relgraph
