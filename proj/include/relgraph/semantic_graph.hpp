#pragma once

#include "relgraph/adjacency.hpp"
#include "relgraph/types.hpp"

#include <random>
#include <span>
#include <vector>

namespace relgraph {

struct DenseLayer {
  Matrix weight;  // in × out
  Matrix bias;    // 1 × out
};

/// Intermediate values of one encoder pass, needed to backpropagate into its weights.
struct EncoderTape {
  std::vector<Matrix> inputs;          // input to each layer
  std::vector<Matrix> pre_activations; // affine output of each layer
};

/// Multilayer perceptron Φ projecting region features into the relatedness space.
/// LeakyReLU between layers, no activation after the last one.
class SemanticEncoder {
 public:
  SemanticEncoder() = default;

  /// Layer widths chain input_dim → widths[0] → widths[1] → ...; weights Glorot-uniform, biases 0.
  static SemanticEncoder init(int input_dim, std::span<const int> widths, std::mt19937_64& rng,
                              double slope = 0.01);
  /// Default architecture D → D → max(1, D/2).
  static SemanticEncoder init_default(int input_dim, std::mt19937_64& rng, double slope = 0.01);

  [[nodiscard]] int input_dim() const;
  [[nodiscard]] int output_dim() const;
  [[nodiscard]] double slope() const noexcept { return slope_; }
  void set_slope(double slope) noexcept { slope_ = slope; }

  [[nodiscard]] std::vector<DenseLayer>& layers() noexcept { return layers_; }
  [[nodiscard]] const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  /// Throws DimensionError if widths do not chain, ConfigError on non-finite weights.
  void validate() const;

  [[nodiscard]] Matrix forward(const Matrix& features, EncoderTape* tape = nullptr) const;

  /// Accumulates d loss / d weights into grads (same layout as this encoder) and returns
  /// d loss / d features.
  Matrix backward(const EncoderTape& tape, const Matrix& grad_out, SemanticEncoder& grads) const;

  /// Same architecture with every weight zero.
  [[nodiscard]] SemanticEncoder zeros_like() const;

 private:
  std::vector<DenseLayer> layers_;
  double slope_ = 0.01;
};

/// ⟨Φ(p_i), Φ(p_j)⟩ for every pair, before masking and normalization.
[[nodiscard]] Matrix raw_semantic_scores(const Matrix& embeddings);

/// mask(i,j) · sigmoid(⟨Φ(p_i), Φ(p_j)⟩).
[[nodiscard]] ScoreMatrix semantic_scores(const Matrix& features, const SemanticEncoder& enc,
                                          const MaskMatrix& mask);

/// Same, from already-computed embeddings.
[[nodiscard]] ScoreMatrix semantic_scores_from_embeddings(const Matrix& embeddings,
                                                          const MaskMatrix& mask);

/// overlap_mask → semantic_scores → topk_select.
[[nodiscard]] Adjacency build_semantic_graph(const Matrix& features, std::span<const Box> boxes,
                                             const SemanticEncoder& enc, const GraphConfig& cfg);

}  // namespace relgraph
