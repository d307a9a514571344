#include "relgraph/adjacency.hpp"

#include "relgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace relgraph {

Adjacency Adjacency::from_edges(Index n, std::span<const std::pair<Index, Index>> edges) {
  Adjacency g(n);
  for (const auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw DimensionError("edge (" + std::to_string(i) + ", " + std::to_string(j) +
                           ") out of range for " + std::to_string(n) + " nodes");
    }
    if (i == j) {
      continue;
    }
    g.neighbors_[static_cast<std::size_t>(i)].push_back(j);
    g.neighbors_[static_cast<std::size_t>(j)].push_back(i);
  }
  for (auto& row : g.neighbors_) {
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
  }
  return g;
}

Adjacency Adjacency::from_dense(const Matrix& dense) {
  if (dense.rows() != dense.cols()) {
    throw DimensionError("adjacency must be square");
  }
  const Index n = dense.rows();
  Adjacency g(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if ((dense(i, j) != 0.0) != (dense(j, i) != 0.0)) {
        throw DimensionError("adjacency must be symmetric");
      }
      if (i != j && dense(i, j) != 0.0) {
        g.neighbors_[static_cast<std::size_t>(i)].push_back(j);
      }
    }
  }
  return g;
}

bool Adjacency::has_edge(Index i, Index j) const {
  const auto& row = neighbors_[static_cast<std::size_t>(i)];
  return std::binary_search(row.begin(), row.end(), j);
}

Index Adjacency::edge_count() const noexcept {
  Index total = 0;
  for (const auto& row : neighbors_) {
    total += static_cast<Index>(row.size());
  }
  return total / 2;
}

std::vector<std::pair<Index, Index>> Adjacency::edges() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(edge_count()));
  for (Index i = 0; i < size(); ++i) {
    for (Index j : neighbors(i)) {
      if (i < j) {
        out.emplace_back(i, j);
      }
    }
  }
  return out;
}

Matrix Adjacency::to_dense() const {
  Matrix m = Matrix::Zero(size(), size());
  for (Index i = 0; i < size(); ++i) {
    for (Index j : neighbors(i)) {
      m(i, j) = 1.0;
    }
  }
  return m;
}

void GraphConfig::validate() const {
  if (k < 1) {
    throw ConfigError("graph config: K must be >= 1");
  }
  if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0)) {
    throw ConfigError("graph config: overlap threshold must lie in (0, 1]");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("graph config: lambda must be positive");
  }
}

MaskMatrix overlap_mask(std::span<const Box> boxes, double tau) {
  const auto n = static_cast<Index>(boxes.size());
  MaskMatrix mask = MaskMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) {
      const std::uint8_t keep = iou(boxes[static_cast<std::size_t>(i)], boxes[static_cast<std::size_t>(j)]) > tau ? 0 : 1;
      mask(i, j) = keep;
      mask(j, i) = keep;
    }
  }
  return mask;
}

std::vector<std::vector<Index>> topk_rows(const ScoreMatrix& scores, int k) {
  if (scores.rows() != scores.cols()) {
    throw DimensionError("score matrix must be square");
  }
  if (k < 1) {
    throw ConfigError("top-K requires K >= 1");
  }
  const Index n = scores.rows();
  std::vector<std::vector<Index>> rows(static_cast<std::size_t>(n));
  std::vector<Index> candidates;
  candidates.reserve(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    candidates.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i && scores(i, j) > 0.0) {
        candidates.push_back(j);
      }
    }
    const auto better = [&](Index a, Index b) {
      const double sa = scores(i, a);
      const double sb = scores(i, b);
      if (sa != sb) {
        return sa > sb;
      }
      return std::pair{std::min(i, a), std::max(i, a)} < std::pair{std::min(i, b), std::max(i, b)};
    };
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(k), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(take),
                      candidates.end(), better);
    rows[static_cast<std::size_t>(i)].assign(candidates.begin(),
                                             candidates.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return rows;
}

Adjacency topk_select(const ScoreMatrix& scores, int k) {
  const auto rows = topk_rows(scores, k);
  std::vector<std::pair<Index, Index>> edges;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (Index j : rows[i]) {
      edges.emplace_back(static_cast<Index>(i), j);
    }
  }
  return Adjacency::from_edges(scores.rows(), edges);
}

Adjacency fuse_graphs(const Adjacency& a, const Adjacency& b) {
  if (a.size() != b.size()) {
    throw DimensionError("cannot fuse graphs of sizes " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  auto edges = a.edges();
  const auto more = b.edges();
  edges.insert(edges.end(), more.begin(), more.end());
  return Adjacency::from_edges(a.size(), edges);
}

Adjacency intersect_graphs(const Adjacency& a, const Adjacency& b) {
  if (a.size() != b.size()) {
    throw DimensionError("cannot intersect graphs of different sizes");
  }
  std::vector<std::pair<Index, Index>> edges;
  for (const auto& [i, j] : a.edges()) {
    if (b.has_edge(i, j)) {
      edges.emplace_back(i, j);
    }
  }
  return Adjacency::from_edges(a.size(), edges);
}

}  // namespace relgraph
