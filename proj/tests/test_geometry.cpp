#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "relgraph/geometry.hpp"

#include <cmath>
#include <random>

using namespace relgraph;

namespace {

constexpr int kCases = 2000;
constexpr double kExact = 1e-12;

}  // namespace

TEST_CASE("iou worked values") {
  const Box a{0, 0, 10, 10};
  CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(kExact));
  CHECK(iou(a, Box{100, 100, 10, 10}) == 0.0);
  CHECK(std::abs(iou(a, Box{5, 0, 10, 10}) - 1.0 / 3.0) < kExact);
  // Touching edges share no area.
  CHECK(iou(a, Box{10, 0, 10, 10}) == 0.0);
}

TEST_CASE("center distance worked values") {
  CHECK(center_distance(Box{2, 3, 1, 1}, Box{2, 3, 5, 5}) == 0.0);
  CHECK(std::abs(center_distance(Box{0, 0, 1, 1}, Box{3, 4, 1, 1}) - 5.0) < kExact);
  CHECK(std::abs(center_distance(Box{1, 1, 1, 1}, Box{4, 5, 1, 1}) - 5.0) < kExact);
}

TEST_CASE("shape similarity worked values") {
  CHECK(shape_similarity(Box{0, 0, 4, 6}, Box{50, 9, 4, 6}) == 1.0);
  CHECK(std::abs(shape_similarity(Box{0, 0, 10, 10}, Box{0, 0, 20, 20}) - 0.25) < kExact);
  CHECK(std::abs(shape_similarity(Box{0, 0, 2, 8}, Box{0, 0, 8, 2}) - 4.0 / 28.0) < kExact);
}

TEST_CASE("distance weight worked values") {
  CHECK(distance_weight(0.0, kDefaultLambda) == 1.0);
  CHECK(std::abs(distance_weight(1000.0, 5e-4) - std::exp(-0.5)) < kExact);
  CHECK(std::abs(distance_weight(2000.0, 5e-4) - std::exp(-1.0)) < kExact);
  CHECK(std::abs(distance_weight(1000.0, 5e-4) - 0.6065306597126334) < kExact);
  CHECK(std::abs(distance_weight(2000.0, 5e-4) - 0.36787944117144233) < kExact);
}

TEST_CASE("box validity") {
  CHECK(Box{0, 0, 1, 1}.valid());
  CHECK_FALSE(Box{0, 0, 0, 1}.valid());
  CHECK_FALSE(Box{0, 0, 1, -1}.valid());
  CHECK_FALSE(Box{NAN, 0, 1, 1}.valid());
  CHECK_FALSE(Box{0, INFINITY, 1, 1}.valid());
}

TEST_CASE("iou matches the corner-form oracle and its properties") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < kCases; ++t) {
    const Box a = oracle::random_box(rng, 60.0);
    const Box b = oracle::random_box(rng, 60.0);
    const double v = iou(a, b);
    CHECK(std::abs(v - oracle::iou(a, b)) < kExact);
    CHECK(v == iou(b, a));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    CHECK(std::abs(iou(a, a) - 1.0) < kExact);
    const bool disjoint = a.right() <= b.left() || b.right() <= a.left() ||
                          a.bottom() <= b.top() || b.bottom() <= a.top();
    CHECK((v == 0.0) == disjoint);
  }
}

TEST_CASE("center distance is symmetric and translation invariant") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> shift(-500, 500);
  for (int t = 0; t < kCases; ++t) {
    const Box a = oracle::random_box(rng);
    const Box b = oracle::random_box(rng);
    CHECK(center_distance(a, b) == center_distance(b, a));
    const double dx = shift(rng), dy = shift(rng);
    const Box a2{a.x + dx, a.y + dy, a.w, a.h};
    const Box b2{b.x + dx, b.y + dy, b.w, b.h};
    CHECK(center_distance(a2, b2) == doctest::Approx(center_distance(a, b)).epsilon(1e-9));
  }
}

TEST_CASE("shape similarity properties") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  std::uniform_real_distribution<double> shift(-1000, 1000);
  for (int t = 0; t < kCases; ++t) {
    const Box a = oracle::random_box(rng);
    const Box b = oracle::random_box(rng);
    const double s = shape_similarity(a, b);
    CHECK(std::abs(s - oracle::shape(a, b)) < kExact);
    CHECK(s == shape_similarity(b, a));
    CHECK(s > 0.0);
    CHECK(s <= 1.0);
    CHECK((s == 1.0) == (a.w == b.w && a.h == b.h));
    CHECK(shape_similarity(a, Box{b.x, b.y, a.w, a.h}) == 1.0);

    const double c = scale(rng);
    const Box ac{a.x, a.y, a.w * c, a.h * c};
    const Box bc{b.x, b.y, b.w * c, b.h * c};
    CHECK(std::abs(shape_similarity(ac, bc) - s) < kExact);

    const Box at{a.x + shift(rng), a.y + shift(rng), a.w, a.h};
    const Box bt{b.x + shift(rng), b.y + shift(rng), b.w, b.h};
    CHECK(shape_similarity(at, bt) == s);
  }
}

TEST_CASE("distance weight is monotone, bounded and multiplicative") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> dist(0.0, 5000.0);
  std::uniform_real_distribution<double> lam(1e-5, 1e-2);
  for (int t = 0; t < kCases; ++t) {
    const double l = lam(rng);
    double d1 = dist(rng), d2 = dist(rng);
    if (d1 > d2) std::swap(d1, d2);
    const double w1 = distance_weight(d1, l);
    const double w2 = distance_weight(d2, l);
    CHECK(w1 >= w2);
    CHECK(w2 > 0.0);
    CHECK(w1 <= 1.0);
    CHECK(std::abs(w1 * w2 - distance_weight(d1 + d2, l)) < kExact);
    // Continuity: a tiny step in d moves the weight by at most about λ·step.
    CHECK(std::abs(distance_weight(d1 + 1e-6, l) - w1) <= l * 1e-6 + 1e-15);
  }
}
