#include "relgraph/model.hpp"

#include "relgraph/error.hpp"
#include "relgraph/init.hpp"
#include "relgraph/seeds.hpp"
#include "relgraph/spatial_graph.hpp"

#include <cmath>
#include <random>

namespace relgraph {

std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::kBaseline:
      return "baseline";
    case Mode::kSemanticOnly:
      return "sem";
    case Mode::kSpatialOnly:
      return "spa";
    case Mode::kFull:
      return "full";
  }
  return "unknown";
}

Mode parse_mode(std::string_view text) {
  if (text == "baseline") return Mode::kBaseline;
  if (text == "sem" || text == "semantic-only") return Mode::kSemanticOnly;
  if (text == "spa" || text == "spatial-only") return Mode::kSpatialOnly;
  if (text == "full") return Mode::kFull;
  throw ConfigError("unknown mode '" + std::string(text) + "' (baseline, sem, spa, full)");
}

bool uses_semantic(Mode mode) noexcept {
  return mode == Mode::kSemanticOnly || mode == Mode::kFull;
}

bool uses_spatial(Mode mode) noexcept {
  return mode == Mode::kSpatialOnly || mode == Mode::kFull;
}

void ModelConfig::validate() const {
  graph.validate();
  if (gcn_layers < 1) {
    throw ConfigError("model config: at least one GCN layer required");
  }
  if (!(slope >= 0.0 && slope < 1.0)) {
    throw ConfigError("model config: LeakyReLU slope must lie in [0, 1)");
  }
  if (!(aux_score_weight >= 0.0) || !std::isfinite(aux_score_weight)) {
    throw ConfigError("model config: aux score weight must be >= 0");
  }
}

Params Params::init(int feature_dim, int num_classes, const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (feature_dim < 1 || num_classes < 1) {
    throw ConfigError("model needs positive feature dim and class count");
  }
  Params p;
  std::mt19937_64 head_rng(derive_seed(seed, 1));
  p.head.weight = glorot_uniform(feature_dim, num_classes, head_rng);
  p.head.bias = Matrix::Zero(1, num_classes);
  std::mt19937_64 gcn_rng(derive_seed(seed, 2));
  p.gcn = GcnParams::init(feature_dim, cfg.gcn_layers, gcn_rng, cfg.slope);
  std::mt19937_64 enc_rng(derive_seed(seed, 3));
  p.encoder = SemanticEncoder::init_default(feature_dim, enc_rng, cfg.slope);
  return p;
}

Params Params::zeros_like() const {
  Params z = *this;
  z.for_each([](const std::string&, Matrix& t) { t.setZero(); });
  return z;
}

std::size_t Params::parameter_count() const {
  std::size_t total = 0;
  for_each([&](const std::string&, const Matrix& t) { total += static_cast<std::size_t>(t.size()); });
  return total;
}

Structure build_structure(const Scene& scene, const SemanticEncoder& encoder, Mode mode,
                          const ModelConfig& cfg) {
  Structure s;
  s.mode = mode;
  const Index n = scene.size();
  s.semantic = Adjacency(n);
  s.spatial = Adjacency(n);
  if (mode == Mode::kBaseline) {
    s.fused = Adjacency(n);
    return s;
  }
  cfg.graph.validate();
  const auto boxes = scene.boxes();
  s.mask = overlap_mask(boxes, cfg.graph.overlap_threshold);
  if (uses_semantic(mode)) {
    s.semantic = topk_select(semantic_scores(scene.features, encoder, s.mask), cfg.graph.k);
  }
  if (uses_spatial(mode)) {
    s.spatial = topk_select(spatial_scores(boxes, cfg.graph, s.mask), cfg.graph.k);
  }
  s.fused = fuse_graphs(s.semantic, s.spatial);
  return s;
}

namespace {

/// Per-row log-softmax cross-entropy; fills probs when requested.
double cross_entropy(const Matrix& logits, const std::vector<Region>& regions, Matrix* probs) {
  const Index n = logits.rows();
  double total = 0.0;
  if (probs != nullptr) {
    probs->resize(logits.rows(), logits.cols());
  }
  for (Index i = 0; i < n; ++i) {
    const double mx = logits.row(i).maxCoeff();
    double denom = 0.0;
    for (Index c = 0; c < logits.cols(); ++c) {
      denom += std::exp(logits(i, c) - mx);
    }
    const double log_z = mx + std::log(denom);
    total += log_z - logits(i, regions[static_cast<std::size_t>(i)].label);
    if (probs != nullptr) {
      for (Index c = 0; c < logits.cols(); ++c) {
        (*probs)(i, c) = std::exp(logits(i, c) - log_z);
      }
    }
  }
  return n > 0 ? total / static_cast<double>(n) : 0.0;
}

}  // namespace

LossResult evaluate_loss(const Scene& scene, const Structure& structure, const Params& params,
                         const ModelConfig& cfg, Params* grads, double scale) {
  const Index n = scene.size();
  if (scene.feature_dim() != params.feature_dim()) {
    throw DimensionError("scene feature dim " + std::to_string(scene.feature_dim()) +
                         " does not match model dim " + std::to_string(params.feature_dim()));
  }
  if (structure.fused.size() != n) {
    throw DimensionError("structure was built for a different scene");
  }
  const Mode mode = structure.mode;
  const bool reasoning = mode != Mode::kBaseline;
  const bool need_embeddings =
      uses_semantic(mode) && (cfg.soft_edges || cfg.aux_score_weight > 0.0);

  // Encoder pass, only when its output enters the loss.
  EncoderTape enc_tape;
  Matrix embeddings;
  if (need_embeddings) {
    embeddings = params.encoder.forward(scene.features, &enc_tape);
  }
  const auto pair_sigmoid = [&](Index i, Index j) {
    return sigmoid(embeddings.row(i).dot(embeddings.row(j)));
  };

  // Reasoning.
  Matrix reasoned;
  GcnTape gcn_tape;
  std::vector<std::size_t> soft_edge_ids;  // edges whose weight is a semantic score
  std::vector<double> soft_edge_scores;
  if (reasoning) {
    auto edges = structure.fused.edges();
    std::vector<double> weights(edges.size(), 1.0);
    if (cfg.soft_edges && uses_semantic(mode)) {
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        if (!structure.spatial.has_edge(i, j)) {
          weights[e] = pair_sigmoid(i, j);
          soft_edge_ids.push_back(e);
          soft_edge_scores.push_back(weights[e]);
        }
      }
    }
    GcnOutput out = gcn_forward(scene.features, LaplacianOperator(n, std::move(edges), std::move(weights)),
                                params.gcn);
    reasoned = std::move(out.features);
    gcn_tape = std::move(out.tape);
  }
  const Matrix& f_tilde = reasoning ? reasoned : scene.features;

  LossResult result;
  result.logits = f_tilde * params.head.weight;
  result.logits.rowwise() += params.head.bias.row(0);
  Matrix probs;
  result.loss = cross_entropy(result.logits, scene.regions, grads != nullptr ? &probs : nullptr);

  // Auxiliary pairwise relatedness term over unmasked pairs.
  const bool aux = uses_semantic(mode) && cfg.aux_score_weight > 0.0;
  double aux_pairs = 0.0;
  if (aux) {
    double bce = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (structure.mask(i, j) == 0) continue;
        const double r = embeddings.row(i).dot(embeddings.row(j));
        const bool same = scene.regions[static_cast<std::size_t>(i)].label ==
                          scene.regions[static_cast<std::size_t>(j)].label;
        // −log σ(r) = softplus(−r); −log(1 − σ(r)) = softplus(r).
        const double z = same ? -r : r;
        bce += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
        aux_pairs += 1.0;
      }
    }
    if (aux_pairs > 0.0) {
      result.loss += cfg.aux_score_weight * bce / aux_pairs;
    }
  }

  if (!std::isfinite(result.loss)) {
    throw NumericError("non-finite loss");
  }
  if (grads == nullptr) {
    return result;
  }

  // Backward.
  Matrix grad_logits = probs;
  for (Index i = 0; i < n; ++i) {
    grad_logits(i, scene.regions[static_cast<std::size_t>(i)].label) -= 1.0;
  }
  grad_logits *= scale / static_cast<double>(std::max<Index>(n, 1));
  grads->head.weight.noalias() += f_tilde.transpose() * grad_logits;
  grads->head.bias += grad_logits.colwise().sum();

  Matrix grad_embeddings;
  if (need_embeddings) {
    grad_embeddings = Matrix::Zero(embeddings.rows(), embeddings.cols());
  }
  if (reasoning) {
    const Matrix grad_f_tilde = grad_logits * params.head.weight.transpose();
    const bool edge_grads = !soft_edge_ids.empty();
    GcnGradients g = gcn_backward(gcn_tape, grad_f_tilde, edge_grads);
    for (std::size_t l = 0; l < g.params.weights.size(); ++l) {
      grads->gcn.weights[l] += g.params.weights[l];
    }
    const auto& edges = gcn_tape.laplacian.edges();
    for (std::size_t k = 0; k < soft_edge_ids.size(); ++k) {
      const std::size_t e = soft_edge_ids[k];
      const auto [i, j] = edges[e];
      const double s = soft_edge_scores[k];
      const double grad_raw = g.edge_weights[e] * s * (1.0 - s);
      grad_embeddings.row(i) += grad_raw * embeddings.row(j);
      grad_embeddings.row(j) += grad_raw * embeddings.row(i);
    }
  }
  if (aux && aux_pairs > 0.0) {
    const double coef = scale * cfg.aux_score_weight / aux_pairs;
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        if (structure.mask(i, j) == 0) continue;
        const double r = embeddings.row(i).dot(embeddings.row(j));
        const double target = scene.regions[static_cast<std::size_t>(i)].label ==
                                      scene.regions[static_cast<std::size_t>(j)].label
                                  ? 1.0
                                  : 0.0;
        const double grad_raw = coef * (sigmoid(r) - target);
        grad_embeddings.row(i) += grad_raw * embeddings.row(j);
        grad_embeddings.row(j) += grad_raw * embeddings.row(i);
      }
    }
  }
  if (need_embeddings) {
    (void)params.encoder.backward(enc_tape, grad_embeddings, grads->encoder);
  }
  return result;
}

double forward_loss(const Scene& scene, const Params& params, Mode mode, const ModelConfig& cfg) {
  const Structure s = build_structure(scene, params.encoder, mode, cfg);
  return evaluate_loss(scene, s, params, cfg).loss;
}

std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index c = 1; c < logits.cols(); ++c) {
      if (logits(i, c) > logits(i, best)) {
        best = c;
      }
    }
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

}  // namespace relgraph
