#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>

namespace relgraph {

/// Row-major so that one region (or one hidden feature row) is contiguous.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Binary 0/1 matrix produced by the overlap test.
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Relatedness scores in [0, 1]; masked entries are exactly 0.
using ScoreMatrix = Matrix;

using Index = std::ptrdiff_t;

inline constexpr const char* kLibraryVersion = "0.3.0";

}  // namespace relgraph
