#pragma once

#include "relgraph/adjacency.hpp"
#include "relgraph/gcn.hpp"
#include "relgraph/scene.hpp"
#include "relgraph/semantic_graph.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace relgraph {

/// Ablation arm: which relationship graphs feed the reasoning module.
enum class Mode { kBaseline, kSemanticOnly, kSpatialOnly, kFull };

[[nodiscard]] std::string_view mode_name(Mode mode) noexcept;
/// Accepts baseline | sem | semantic-only | spa | spatial-only | full.
[[nodiscard]] Mode parse_mode(std::string_view text);
[[nodiscard]] bool uses_semantic(Mode mode) noexcept;
[[nodiscard]] bool uses_spatial(Mode mode) noexcept;

struct ModelConfig {
  GraphConfig graph;
  int gcn_layers = 2;
  double slope = 0.01;
  /// Extension: semantic-only edges of the fused graph carry their sigmoid score as weight,
  /// which lets gradients reach the encoder. Off by default (edges are binary).
  bool soft_edges = false;
  /// Weight of the pairwise same-class BCE on semantic scores; the only route by which the
  /// encoder is trained when soft_edges is off.
  double aux_score_weight = 0.0;

  void validate() const;
  [[nodiscard]] bool encoder_trainable() const noexcept {
    return soft_edges || aux_score_weight > 0.0;
  }
};

/// Linear classification head: logits = f̃ W + b.
struct Classifier {
  Matrix weight;  // D × C
  Matrix bias;    // 1 × C
};

/// Every trainable tensor of the pipeline. Also used as the gradient and velocity container.
struct Params {
  SemanticEncoder encoder;
  GcnParams gcn;
  Classifier head;

  /// Draw order: head, GCN, encoder, each from its own derived stream.
  static Params init(int feature_dim, int num_classes, const ModelConfig& cfg, std::uint64_t seed);
  [[nodiscard]] Params zeros_like() const;

  [[nodiscard]] int feature_dim() const noexcept { return static_cast<int>(head.weight.rows()); }
  [[nodiscard]] int num_classes() const noexcept { return static_cast<int>(head.weight.cols()); }

  /// Visits (name, tensor) in a fixed order.
  template <class F>
  void for_each(F&& fn) {
    for_each_impl(*this, fn);
  }
  template <class F>
  void for_each(F&& fn) const {
    for_each_impl(*this, fn);
  }

  [[nodiscard]] std::size_t parameter_count() const;

 private:
  template <class Self, class F>
  static void for_each_impl(Self& self, F& fn) {
    auto& layers = self.encoder.layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      fn("encoder." + std::to_string(l) + ".weight", layers[l].weight);
      fn("encoder." + std::to_string(l) + ".bias", layers[l].bias);
    }
    for (std::size_t l = 0; l < self.gcn.weights.size(); ++l) {
      fn("gcn." + std::to_string(l + 1) + ".weight", self.gcn.weights[l]);
    }
    fn(std::string("head.weight"), self.head.weight);
    fn(std::string("head.bias"), self.head.bias);
  }
};

/// Graph structure of one scene for one mode. Treated as a constant of the differentiable pass.
struct Structure {
  Mode mode = Mode::kBaseline;
  MaskMatrix mask;
  Adjacency semantic;
  Adjacency spatial;
  Adjacency fused;
};

[[nodiscard]] Structure build_structure(const Scene& scene, const SemanticEncoder& encoder, Mode mode,
                                        const ModelConfig& cfg);

struct LossResult {
  double loss = 0.0;
  Matrix logits;  // N × C
};

/// Mean cross-entropy of softmax(head(f̃)) over regions (plus the optional auxiliary term).
/// When grads is non-null, scale · d loss / d params is added into it.
LossResult evaluate_loss(const Scene& scene, const Structure& structure, const Params& params,
                         const ModelConfig& cfg, Params* grads = nullptr, double scale = 1.0);

/// Builds the structure and evaluates the loss. Throws NumericError on a non-finite loss.
[[nodiscard]] double forward_loss(const Scene& scene, const Params& params, Mode mode,
                                  const ModelConfig& cfg);

/// Index of the largest logit per row; ties go to the smaller class index.
[[nodiscard]] std::vector<int> predict(const Matrix& logits);

}  // namespace relgraph
