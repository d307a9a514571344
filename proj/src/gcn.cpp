#include "relgraph/gcn.hpp"

#include "relgraph/error.hpp"
#include "relgraph/init.hpp"

#include <cmath>
#include <string>

namespace relgraph {

Matrix combinatorial_laplacian(const Adjacency& graph) {
  Matrix lap = -graph.to_dense();
  for (Index i = 0; i < graph.size(); ++i) {
    lap(i, i) = static_cast<double>(graph.degree(i));
  }
  return lap;
}

Matrix normalized_laplacian(const Adjacency& graph) {
  const Index n = graph.size();
  Matrix lap = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const Index di = graph.degree(i);
    if (di == 0) {
      continue;
    }
    lap(i, i) = 1.0;
    for (Index j : graph.neighbors(i)) {
      lap(i, j) = -1.0 / std::sqrt(static_cast<double>(di) * static_cast<double>(graph.degree(j)));
    }
  }
  return lap;
}

LaplacianOperator::LaplacianOperator(const Adjacency& graph)
    : n_(graph.size()), edges_(graph.edges()), weights_(edges_.size(), 1.0) {
  build();
}

LaplacianOperator::LaplacianOperator(Index n, std::vector<std::pair<Index, Index>> edges,
                                     std::vector<double> weights)
    : n_(n), edges_(std::move(edges)), weights_(std::move(weights)) {
  if (edges_.size() != weights_.size()) {
    throw DimensionError("one weight per edge required");
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) {
      throw DimensionError("invalid edge in weighted graph");
    }
    if (!(weights_[e] > 0.0) || !std::isfinite(weights_[e])) {
      throw NumericError("edge weights must be positive and finite");
    }
  }
  build();
}

void LaplacianOperator::build() {
  degree_.assign(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    degree_[static_cast<std::size_t>(edges_[e].first)] += weights_[e];
    degree_[static_cast<std::size_t>(edges_[e].second)] += weights_[e];
  }
  inv_sqrt_degree_.resize(degree_.size());
  for (std::size_t i = 0; i < degree_.size(); ++i) {
    inv_sqrt_degree_[i] = degree_[i] > 0.0 ? 1.0 / std::sqrt(degree_[i]) : 0.0;
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(edges_.size() * 2 + static_cast<std::size_t>(n_));
  for (Index i = 0; i < n_; ++i) {
    if (degree_[static_cast<std::size_t>(i)] > 0.0) {
      triplets.emplace_back(i, i, 1.0);
    }
  }
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    const auto [i, j] = edges_[e];
    const double v = -weights_[e] * inv_sqrt_degree_[static_cast<std::size_t>(i)] *
                     inv_sqrt_degree_[static_cast<std::size_t>(j)];
    triplets.emplace_back(i, j, v);
    triplets.emplace_back(j, i, v);
  }
  matrix_.resize(n_, n_);
  matrix_.setFromTriplets(triplets.begin(), triplets.end());
  matrix_.makeCompressed();
}

std::vector<double> LaplacianOperator::weight_gradients(std::span<const double> grad_ij,
                                                        std::span<const double> grad_ji) const {
  // L̂(i,j) = −w_e s_i s_j with s_k = d_k^{-1/2}, d_k = Σ_{e ∋ k} w_e.
  const std::size_t m = edges_.size();
  std::vector<double> grad_s(static_cast<std::size_t>(n_), 0.0);
  std::vector<double> out(m, 0.0);
  for (std::size_t e = 0; e < m; ++e) {
    const auto [i, j] = edges_[e];
    const double g = grad_ij[e] + grad_ji[e];
    const double si = inv_sqrt_degree_[static_cast<std::size_t>(i)];
    const double sj = inv_sqrt_degree_[static_cast<std::size_t>(j)];
    out[e] = -g * si * sj;
    grad_s[static_cast<std::size_t>(i)] += -g * weights_[e] * sj;
    grad_s[static_cast<std::size_t>(j)] += -g * weights_[e] * si;
  }
  std::vector<double> grad_d(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t k = 0; k < grad_d.size(); ++k) {
    if (degree_[k] > 0.0) {
      grad_d[k] = -0.5 * grad_s[k] * inv_sqrt_degree_[k] / degree_[k];
    }
  }
  for (std::size_t e = 0; e < m; ++e) {
    out[e] += grad_d[static_cast<std::size_t>(edges_[e].first)] +
              grad_d[static_cast<std::size_t>(edges_[e].second)];
  }
  return out;
}

GcnParams GcnParams::init(Index dim, int layers, std::mt19937_64& rng, double slope) {
  GcnParams p;
  p.slope = slope;
  for (int l = 0; l < layers; ++l) {
    p.weights.push_back(glorot_uniform(dim, dim, rng));
  }
  p.validate();
  return p;
}

GcnParams GcnParams::zeros(Index dim, int layers, double slope) {
  GcnParams p;
  p.slope = slope;
  p.weights.assign(static_cast<std::size_t>(layers), Matrix::Zero(dim, dim));
  return p;
}

void GcnParams::validate() const {
  if (weights.empty()) {
    throw DimensionError("GCN needs at least one layer");
  }
  const Index d = dim();
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].rows() != d || weights[l].cols() != d) {
      throw DimensionError("GCN layer " + std::to_string(l + 1) + " weight must be " +
                           std::to_string(d) + "x" + std::to_string(d));
    }
  }
}

GcnOutput gcn_forward(const Matrix& features, const LaplacianOperator& laplacian,
                      const GcnParams& params) {
  params.validate();
  if (features.cols() != params.dim()) {
    throw DimensionError("feature dim " + std::to_string(features.cols()) +
                         " does not match GCN dim " + std::to_string(params.dim()));
  }
  if (features.rows() != laplacian.size()) {
    throw DimensionError("graph has " + std::to_string(laplacian.size()) + " nodes but " +
                         std::to_string(features.rows()) + " feature rows were given");
  }
  GcnOutput out;
  GcnTape& tape = out.tape;
  tape.laplacian = laplacian;
  tape.params = params;
  tape.hidden.push_back(features);
  for (int l = 0; l < params.layers(); ++l) {
    Matrix projected = tape.hidden.back() * params.weights[static_cast<std::size_t>(l)];
    Matrix pre = laplacian.apply(projected);
    Matrix act = pre.unaryExpr([s = params.slope](double v) { return leaky_relu(v, s); });
    if (!act.allFinite()) {
      throw NumericError("non-finite activation in GCN layer " + std::to_string(l + 1));
    }
    tape.projected.push_back(std::move(projected));
    tape.pre_activations.push_back(std::move(pre));
    tape.hidden.push_back(std::move(act));
  }
  out.features = features + tape.hidden.back();
  return out;
}

GcnOutput gcn_forward(const Matrix& features, const Adjacency& graph, const GcnParams& params) {
  return gcn_forward(features, LaplacianOperator(graph), params);
}

GcnGradients gcn_backward(const GcnTape& tape, const Matrix& grad_out, bool edge_weight_grads) {
  const auto layers = static_cast<std::size_t>(tape.params.layers());
  if (tape.hidden.size() != layers + 1 || tape.projected.size() != layers) {
    throw DimensionError("GCN tape is incomplete");
  }
  if (grad_out.rows() != tape.hidden.front().rows() || grad_out.cols() != tape.hidden.front().cols()) {
    throw DimensionError("output gradient shape does not match the forward pass");
  }
  const auto& edges = tape.laplacian.edges();
  std::vector<double> grad_ij(edge_weight_grads ? edges.size() : 0, 0.0);
  std::vector<double> grad_ji(grad_ij.size(), 0.0);

  GcnGradients grads;
  grads.params = tape.params.zeros_like();
  Matrix g = grad_out;  // d loss / d H^(L)
  for (std::size_t l = layers; l-- > 0;) {
    Matrix grad_pre = g.cwiseProduct(tape.pre_activations[l].unaryExpr(
        [s = tape.params.slope](double v) { return leaky_relu_grad(v, s); }));
    if (edge_weight_grads) {
      // d loss / d L̂(i,j) = <grad_pre row i, projected row j>.
      const Matrix& proj = tape.projected[l];
      for (std::size_t e = 0; e < edges.size(); ++e) {
        const auto [i, j] = edges[e];
        grad_ij[e] += grad_pre.row(i).dot(proj.row(j));
        grad_ji[e] += grad_pre.row(j).dot(proj.row(i));
      }
    }
    // L̂ is symmetric, so L̂ᵀ grad = L̂ grad.
    const Matrix grad_proj = tape.laplacian.apply(grad_pre);
    grads.params.weights[l].noalias() = tape.hidden[l].transpose() * grad_proj;
    g = grad_proj * tape.params.weights[l].transpose();
  }
  grads.features = grad_out + g;
  if (edge_weight_grads) {
    grads.edge_weights = tape.laplacian.weight_gradients(grad_ij, grad_ji);
  }
  return grads;
}

}  // namespace relgraph
