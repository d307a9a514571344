#include "relgraph/semantic_graph.hpp"

#include "relgraph/error.hpp"
#include "relgraph/init.hpp"

#include <algorithm>
#include <string>

namespace relgraph {

SemanticEncoder SemanticEncoder::init(int input_dim, std::span<const int> widths,
                                      std::mt19937_64& rng, double slope) {
  if (input_dim < 1 || widths.empty()) {
    throw ConfigError("encoder needs a positive input dim and at least one layer");
  }
  SemanticEncoder enc;
  enc.slope_ = slope;
  int fan_in = input_dim;
  for (int width : widths) {
    if (width < 1) {
      throw ConfigError("encoder layer widths must be positive");
    }
    enc.layers_.push_back({glorot_uniform(fan_in, width, rng), Matrix::Zero(1, width)});
    fan_in = width;
  }
  return enc;
}

SemanticEncoder SemanticEncoder::init_default(int input_dim, std::mt19937_64& rng, double slope) {
  const int widths[] = {input_dim, std::max(1, input_dim / 2)};
  return init(input_dim, widths, rng, slope);
}

int SemanticEncoder::input_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.front().weight.rows());
}

int SemanticEncoder::output_dim() const {
  return layers_.empty() ? 0 : static_cast<int>(layers_.back().weight.cols());
}

void SemanticEncoder::validate() const {
  if (layers_.empty()) {
    throw DimensionError("encoder has no layers");
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    if (layer.bias.rows() != 1 || layer.bias.cols() != layer.weight.cols()) {
      throw DimensionError("encoder layer " + std::to_string(l) + ": bias shape mismatch");
    }
    if (l > 0 && layer.weight.rows() != layers_[l - 1].weight.cols()) {
      throw DimensionError("encoder layer " + std::to_string(l) + ": widths do not chain");
    }
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) {
      throw ConfigError("encoder layer " + std::to_string(l) + ": non-finite weights");
    }
  }
}

Matrix SemanticEncoder::forward(const Matrix& features, EncoderTape* tape) const {
  if (features.cols() != input_dim()) {
    throw DimensionError("encoder expects feature dim " + std::to_string(input_dim()) + ", got " +
                         std::to_string(features.cols()));
  }
  if (tape != nullptr) {
    tape->inputs.clear();
    tape->pre_activations.clear();
  }
  Matrix h = features;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    Matrix z = h * layers_[l].weight;
    z.rowwise() += layers_[l].bias.row(0);
    if (tape != nullptr) {
      tape->inputs.push_back(h);
      tape->pre_activations.push_back(z);
    }
    if (l + 1 < layers_.size()) {
      h = z.unaryExpr([s = slope_](double v) { return leaky_relu(v, s); });
    } else {
      h = std::move(z);
    }
  }
  return h;
}

Matrix SemanticEncoder::backward(const EncoderTape& tape, const Matrix& grad_out,
                                 SemanticEncoder& grads) const {
  if (tape.inputs.size() != layers_.size() || grads.layers_.size() != layers_.size()) {
    throw DimensionError("encoder tape does not match the encoder");
  }
  Matrix g = grad_out;
  for (std::size_t l = layers_.size(); l-- > 0;) {
    if (l + 1 < layers_.size()) {
      g = g.cwiseProduct(tape.pre_activations[l].unaryExpr(
          [s = slope_](double v) { return leaky_relu_grad(v, s); }));
    }
    grads.layers_[l].weight.noalias() += tape.inputs[l].transpose() * g;
    grads.layers_[l].bias += g.colwise().sum();
    g = (g * layers_[l].weight.transpose()).eval();
  }
  return g;
}

SemanticEncoder SemanticEncoder::zeros_like() const {
  SemanticEncoder z = *this;
  for (auto& layer : z.layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
  return z;
}

Matrix raw_semantic_scores(const Matrix& embeddings) {
  return embeddings * embeddings.transpose();
}

ScoreMatrix semantic_scores_from_embeddings(const Matrix& embeddings, const MaskMatrix& mask) {
  const Index n = embeddings.rows();
  if (mask.rows() != n || mask.cols() != n) {
    throw DimensionError("mask shape does not match the number of regions");
  }
  const Matrix raw = raw_semantic_scores(embeddings);
  ScoreMatrix s(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      s(i, j) = mask(i, j) != 0 ? sigmoid(raw(i, j)) : 0.0;
    }
  }
  // Gram products can differ in the last bit between (i,j) and (j,i).
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      s(j, i) = s(i, j);
    }
  }
  return s;
}

ScoreMatrix semantic_scores(const Matrix& features, const SemanticEncoder& enc,
                            const MaskMatrix& mask) {
  return semantic_scores_from_embeddings(enc.forward(features), mask);
}

Adjacency build_semantic_graph(const Matrix& features, std::span<const Box> boxes,
                               const SemanticEncoder& enc, const GraphConfig& cfg) {
  cfg.validate();
  if (static_cast<Index>(boxes.size()) != features.rows()) {
    throw DimensionError("boxes and features disagree on the number of regions");
  }
  const MaskMatrix mask = overlap_mask(boxes, cfg.overlap_threshold);
  return topk_select(semantic_scores(features, enc, mask), cfg.k);
}

}  // namespace relgraph
