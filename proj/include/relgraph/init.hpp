#pragma once

#include "relgraph/types.hpp"

#include <cmath>
#include <random>

namespace relgraph {

/// Uniform in [−a, a] with a = sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(Index fan_in, Index fan_out, std::mt19937_64& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-a, a);
  Matrix m(fan_in, fan_out);
  for (Index i = 0; i < fan_in; ++i) {
    for (Index j = 0; j < fan_out; ++j) {
      m(i, j) = dist(rng);
    }
  }
  return m;
}

inline double leaky_relu(double v, double slope) noexcept { return v > 0.0 ? v : slope * v; }

/// Subgradient at 0 takes the negative-slope branch.
inline double leaky_relu_grad(double v, double slope) noexcept { return v > 0.0 ? 1.0 : slope; }

inline double sigmoid(double v) noexcept {
  if (v >= 0.0) {
    return 1.0 / (1.0 + std::exp(-v));
  }
  const double e = std::exp(v);
  return e / (1.0 + e);
}

inline constexpr double kDefaultLeakySlope = 0.01;

}  // namespace relgraph
