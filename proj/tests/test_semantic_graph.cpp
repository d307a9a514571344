#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "relgraph/adjacency.hpp"
#include "relgraph/error.hpp"
#include "relgraph/init.hpp"
#include "relgraph/semantic_graph.hpp"

#include <cmath>
#include <random>

using namespace relgraph;

namespace {

SemanticEncoder identity_encoder(int dim) {
  SemanticEncoder e;
  e.layers().push_back(DenseLayer{Matrix::Identity(dim, dim), Matrix::Zero(1, dim)});
  return e;
}

MaskMatrix ones_mask(Index n) {
  MaskMatrix m = MaskMatrix::Ones(n, n);
  m.diagonal().setZero();
  return m;
}

void check_structure(const Adjacency& a) {
  const Matrix d = a.to_dense();
  CHECK(d == d.transpose());
  CHECK(d.diagonal().isZero());
}

}  // namespace

TEST_CASE("overlap mask worked values") {
  SUBCASE("disjoint boxes") {
    const std::vector<Box> b{{0, 0, 10, 10}, {100, 100, 10, 10}};
    const MaskMatrix m = overlap_mask(b, 0.5);
    CHECK(m(0, 0) == 0);
    CHECK(m(1, 1) == 0);
    CHECK(m(0, 1) == 1);
    CHECK(m(1, 0) == 1);
  }
  SUBCASE("duplicates are fully suppressed") {
    const std::vector<Box> b(3, Box{5, 5, 4, 4});
    CHECK(overlap_mask(b, 0.5).isZero());
  }
  SUBCASE("IoU of one third passes") {
    const std::vector<Box> b{{0, 0, 10, 10}, {5, 0, 10, 10}};
    CHECK(overlap_mask(b, 0.5)(0, 1) == 1);
    CHECK(overlap_mask(b, 0.3)(0, 1) == 0);
  }
}

TEST_CASE("overlap mask matches the brute-force oracle") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    std::vector<Box> boxes;
    for (int i = 0; i < 30; ++i) boxes.push_back(oracle::random_box(rng, 80));
    const MaskMatrix m = overlap_mask(boxes, 0.3);
    const auto ref = oracle::mask(boxes, 0.3);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j < 30; ++j) CHECK((m(i, j) == 1) == ref[i][j]);
  }
}

TEST_CASE("semantic score worked values") {
  SUBCASE("parallel unit features") {
    Matrix f(2, 3);
    f << 1, 0, 0, 1, 0, 0;
    const ScoreMatrix s = semantic_scores(f, identity_encoder(3), ones_mask(2));
    CHECK(std::abs(s(0, 1) - 0.7310585786300049) < 1e-12);
    CHECK(s(0, 1) == s(1, 0));
    CHECK(s(0, 0) == 0.0);
  }
  SUBCASE("orthogonal features") {
    Matrix f(2, 3);
    f << 1, 0, 0, 0, 1, 0;
    CHECK(semantic_scores(f, identity_encoder(3), ones_mask(2))(0, 1) == 0.5);
  }
  SUBCASE("full mask") {
    std::mt19937_64 rng(1);
    const Matrix f = Matrix::Random(6, 4);
    const SemanticEncoder enc = SemanticEncoder::init_default(4, rng);
    CHECK(semantic_scores(f, enc, MaskMatrix::Zero(6, 6)).isZero());
  }
}

TEST_CASE("semantic scores match the loop oracle") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    const Index n = 12;
    const Matrix f = Matrix::Random(n, 6);
    const SemanticEncoder enc = SemanticEncoder::init_default(6, rng);
    std::vector<Box> boxes;
    for (Index i = 0; i < n; ++i) boxes.push_back(oracle::random_box(rng, 60));
    const ScoreMatrix s = semantic_scores(f, enc, overlap_mask(boxes, 0.5));
    const Matrix ref = oracle::semantic(f, enc, oracle::mask(boxes, 0.5));
    CHECK((s - ref).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(s == s.transpose());
  }
}

TEST_CASE("default encoder shape and init") {
  std::mt19937_64 rng(2);
  const SemanticEncoder enc = SemanticEncoder::init_default(16, rng);
  REQUIRE(enc.layers().size() == 2);
  CHECK(enc.input_dim() == 16);
  CHECK(enc.output_dim() == 8);
  CHECK(enc.layers()[0].weight.rows() == 16);
  CHECK(enc.layers()[0].weight.cols() == 16);
  CHECK(enc.layers()[0].bias.isZero());
  const double limit = std::sqrt(6.0 / 32.0);
  CHECK(enc.layers()[0].weight.cwiseAbs().maxCoeff() <= limit);
  std::mt19937_64 rng1(1);
  CHECK(SemanticEncoder::init_default(1, rng1).output_dim() == 1);
  CHECK_THROWS_AS((void)enc.forward(Matrix::Zero(3, 5)), DimensionError);
}

TEST_CASE("top-K worked example on a 5x5 matrix") {
  Matrix s(5, 5);
  s << 0, .9, .8, .7, .6,
       .9, 0, .5, .4, .3,
       .8, .5, 0, .25, .2,
       .7, .4, .25, 0, .1,
       .6, .3, .2, .1, 0;
  const auto rows = topk_rows(s, 2);
  for (const auto& r : rows) CHECK(r.size() == 2);
  CHECK(rows[0] == std::vector<Index>{1, 2});
  CHECK(rows[3] == std::vector<Index>{0, 1});
  CHECK(rows == oracle::topk_rows(s, 2));
  const Adjacency a = topk_select(s, 2);
  check_structure(a);
  for (Index i = 0; i < 5; ++i) {
    CHECK(a.degree(i) >= 2);
    CHECK(a.degree(i) <= 4);
  }
  CHECK(oracle::grid(a) == oracle::symmetrize(oracle::topk_rows(s, 2)));
}

TEST_CASE("top-K brute-force enumeration over random 5x5 matrices") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.01, 1.0);
  for (int t = 0; t < 500; ++t) {
    Matrix s(5, 5);
    for (int i = 0; i < 5; ++i) {
      s(i, i) = 0;
      for (int j = i + 1; j < 5; ++j) s(i, j) = s(j, i) = u(rng);
    }
    const int k = 1 + t % 4;
    CHECK(topk_rows(s, k) == oracle::topk_rows(s, k));
    const Adjacency a = topk_select(s, k);
    for (Index i = 0; i < 5; ++i) {
      CHECK(a.degree(i) >= k);
      CHECK(a.degree(i) <= 4);
    }
  }
}

TEST_CASE("top-K edge cases") {
  const Index n = 6;
  Matrix s = Matrix::Constant(n, n, 0.3);
  s.diagonal().setZero();
  SUBCASE("K >= N-1 selects the complete graph") {
    CHECK(topk_select(s, 5).edge_count() == 15);
    CHECK(topk_select(s, 100).edge_count() == 15);
  }
  SUBCASE("all-zero scores") {
    CHECK(topk_select(Matrix::Zero(n, n), 3).edge_count() == 0);
  }
  SUBCASE("ties go to the smaller index pair") {
    const auto rows = topk_rows(s, 2);
    CHECK(rows[0] == std::vector<Index>{1, 2});
    CHECK(rows[3] == std::vector<Index>{0, 1});
    CHECK(rows[5] == std::vector<Index>{0, 1});
  }
  SUBCASE("negative scores are never selected") {
    Matrix neg = -s;
    CHECK(topk_select(neg, 3).edge_count() == 0);
  }
  SUBCASE("K must be positive") {
    GraphConfig cfg;
    cfg.k = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
  }
}

TEST_CASE("row cardinality is min(K, positive entries)") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const Index n = 20;
    Matrix s = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (u(rng) < 0.4) s(i, j) = s(j, i) = u(rng) + 1e-3;
    const int k = 1 + t % 7;
    const auto rows = topk_rows(s, k);
    for (Index i = 0; i < n; ++i) {
      const Index positive = (s.row(i).array() > 0).count();
      CHECK(static_cast<Index>(rows[i].size()) == std::min<Index>(k, positive));
      for (Index j : rows[i]) CHECK(s(i, j) > 0);
    }
  }
}

TEST_CASE("sigmoid does not change the selection") {
  std::mt19937_64 rng(29);
  for (int t = 0; t < 100; ++t) {
    const Index n = 24;
    const Matrix f = Matrix::Random(n, 8);
    const SemanticEncoder enc = SemanticEncoder::init_default(8, rng);
    std::vector<Box> boxes;
    for (Index i = 0; i < n; ++i) boxes.push_back(oracle::random_box(rng, 60));
    const auto m = oracle::mask(boxes, 0.5);
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const Matrix raw = oracle::semantic(f, enc, m, false, neg_inf);
    const auto ref = oracle::symmetrize(
        oracle::topk_rows(raw, 5, [](double v) { return std::isfinite(v); }));
    GraphConfig cfg;
    cfg.k = 5;
    CHECK(oracle::grid(build_semantic_graph(f, boxes, enc, cfg)) == ref);
  }
}

TEST_CASE("semantic graph is equivariant under region permutation") {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 30; ++t) {
    const Index n = 20;
    const Matrix f = Matrix::Random(n, 6);
    const SemanticEncoder enc = SemanticEncoder::init_default(6, rng);
    std::vector<Box> boxes;
    for (Index i = 0; i < n; ++i) boxes.push_back(oracle::random_box(rng, 60));
    GraphConfig cfg;
    cfg.k = 4;
    const Adjacency a = build_semantic_graph(f, boxes, enc, cfg);
    const auto perm = oracle::random_permutation(rng, n);
    Matrix fp(n, 6);
    std::vector<Box> bp(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
      fp.row(i) = f.row(perm[i]);
      bp[i] = boxes[perm[i]];
    }
    const Adjacency b = build_semantic_graph(fp, bp, enc, cfg);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) CHECK(b.has_edge(i, j) == a.has_edge(perm[i], perm[j]));
  }
}

TEST_CASE("no edge where the mask is zero") {
  std::mt19937_64 rng(37);
  for (int t = 0; t < 50; ++t) {
    const Index n = 30;
    const Matrix f = Matrix::Random(n, 4);
    const SemanticEncoder enc = SemanticEncoder::init_default(4, rng);
    std::vector<Box> boxes;
    for (Index i = 0; i < n; ++i) boxes.push_back(oracle::random_box(rng, 40));
    GraphConfig cfg;
    cfg.k = 8;
    const Adjacency a = build_semantic_graph(f, boxes, enc, cfg);
    check_structure(a);
    const MaskMatrix m = overlap_mask(boxes, cfg.overlap_threshold);
    for (auto [i, j] : a.edges()) CHECK(m(i, j) == 1);
  }
}

TEST_CASE("fusion") {
  const std::vector<std::pair<Index, Index>> e01{{0, 1}}, e12{{1, 2}};
  const Adjacency a = Adjacency::from_edges(3, e01);
  const Adjacency b = Adjacency::from_edges(3, e12);
  const Adjacency u = fuse_graphs(a, b);
  CHECK(u.edges() == std::vector<std::pair<Index, Index>>{{0, 1}, {1, 2}});
  CHECK(fuse_graphs(Adjacency(3), b) == b);
  CHECK(fuse_graphs(a, a) == a);
  CHECK(intersect_graphs(u, a) == a);
  CHECK_THROWS_AS((void)fuse_graphs(a, Adjacency(4)), DimensionError);
}

TEST_CASE("adjacency construction") {
  const std::vector<std::pair<Index, Index>> e{{2, 0}, {0, 2}, {1, 1}, {3, 1}};
  const Adjacency a = Adjacency::from_edges(4, e);
  CHECK(a.edge_count() == 2);
  CHECK(a.has_edge(0, 2));
  CHECK(a.has_edge(2, 0));
  CHECK_FALSE(a.has_edge(1, 1));
  CHECK(Adjacency::from_dense(a.to_dense()) == a);
  Matrix asym = Matrix::Zero(3, 3);
  asym(0, 1) = 1;
  CHECK_THROWS_AS((void)Adjacency::from_dense(asym), DimensionError);
}

TEST_CASE("encoder backward matches finite differences") {
  std::mt19937_64 rng(41);
  const SemanticEncoder enc = SemanticEncoder::init_default(5, rng);
  const Matrix x = Matrix::Random(7, 5);
  const Matrix g = Matrix::Random(7, enc.output_dim());
  EncoderTape tape;
  (void)enc.forward(x, &tape);
  SemanticEncoder grads = enc.zeros_like();
  const Matrix gx = enc.backward(tape, g, grads);
  const double h = 1e-6;
  const auto loss = [&](const SemanticEncoder& e, const Matrix& in) {
    return e.forward(in).cwiseProduct(g).sum();
  };
  for (std::size_t l = 0; l < enc.layers().size(); ++l) {
    for (Index k = 0; k < enc.layers()[l].weight.size(); ++k) {
      SemanticEncoder p = enc;
      p.layers()[l].weight.data()[k] += h;
      const double up = loss(p, x);
      p.layers()[l].weight.data()[k] -= 2 * h;
      const double down = loss(p, x);
      CHECK(grads.layers()[l].weight.data()[k] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
    }
  }
  for (Index k = 0; k < x.size(); ++k) {
    Matrix p = x;
    p.data()[k] += h;
    const double up = loss(enc, p);
    p.data()[k] -= 2 * h;
    const double down = loss(enc, p);
    CHECK(gx.data()[k] == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
  }
}

TEST_CASE("activation helpers") {
  CHECK(leaky_relu(2.0, 0.01) == 2.0);
  CHECK(leaky_relu(-2.0, 0.01) == -0.02);
  CHECK(leaky_relu(0.0, 0.01) == 0.0);
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(-800.0) >= 0.0);
  CHECK(sigmoid(800.0) == 1.0);
  CHECK(std::isfinite(sigmoid(-800.0)));
}
