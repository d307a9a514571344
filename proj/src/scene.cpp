#include "relgraph/scene.hpp"

#include "relgraph/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace relgraph {

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) {
    throw ConfigError("scene config: " + message);
  }
}

}  // namespace

void SceneConfig::validate() const {
  require(num_classes >= 1, "num_classes must be >= 1");
  require(clusters_per_class >= 1, "clusters_per_class must be >= 1");
  require(regions_per_cluster >= 1, "regions_per_cluster must be >= 1");
  require(feature_dim >= 1, "feature_dim must be >= 1");
  require(std::isfinite(image_width) && std::isfinite(image_height) && image_width > 0 &&
              image_height > 0,
          "image size must be positive");
  require(size_min > 0.0 && size_min <= size_max, "size range must satisfy 0 < min <= max");
  require(size_max < std::min(image_width, image_height), "size range must fit inside the image");
  require(cluster_spread >= 0.0 && std::isfinite(cluster_spread), "cluster_spread must be >= 0");
  require(shape_jitter >= 0.0 && std::isfinite(shape_jitter), "shape_jitter must be >= 0");
  require(appearance_drift >= 0.0 && std::isfinite(appearance_drift),
          "appearance_drift must be >= 0");
  require(feature_noise >= 0.0 && std::isfinite(feature_noise), "feature_noise must be >= 0");
  require(ambiguity_fraction >= 0.0 && ambiguity_fraction <= 1.0,
          "ambiguity_fraction must lie in [0, 1]");
  require(ambiguity_fraction == 0.0 || num_classes >= 2,
          "ambiguous regions need at least two classes");
  require(max_regions >= 1, "max_regions must be >= 1");
  require(static_cast<long long>(num_classes) * clusters_per_class * regions_per_cluster <=
              max_regions,
          "total region count " + std::to_string(static_cast<long long>(num_classes) *
                                                 clusters_per_class * regions_per_cluster) +
              " exceeds max_regions " + std::to_string(max_regions));
}

std::vector<Box> Scene::boxes() const {
  std::vector<Box> out;
  out.reserve(regions.size());
  for (const auto& r : regions) {
    out.push_back(r.box);
  }
  return out;
}

Scene Scene::head(Index n) const {
  n = std::clamp<Index>(n, 0, size());
  Scene out;
  out.cfg = cfg;
  out.seed = seed;
  out.regions.assign(regions.begin(), regions.begin() + n);
  out.features = features.topRows(n);
  return out;
}

Matrix class_prototypes(int num_classes, int dim, std::uint64_t seed, double max_dot) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix protos(num_classes, dim);
  constexpr int kMaxAttempts = 100000;
  int accepted = 0;
  for (int attempt = 0; accepted < num_classes; ++attempt) {
    if (attempt >= kMaxAttempts) {
      throw ConfigError("could not draw " + std::to_string(num_classes) +
                        " separable prototypes in dimension " + std::to_string(dim));
    }
    Vector v(dim);
    for (int d = 0; d < dim; ++d) {
      v[d] = normal(rng);
    }
    const double norm = v.norm();
    if (norm < 1e-12) {
      continue;
    }
    v /= norm;
    bool ok = true;
    for (int c = 0; c < accepted && ok; ++c) {
      ok = protos.row(c).dot(v) < max_dot;
    }
    if (ok) {
      protos.row(accepted++) = v.transpose();
    }
  }
  return protos;
}

Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed) {
  cfg.validate();

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const int n = cfg.total_regions();
  const int dim = cfg.feature_dim;

  Scene scene;
  scene.cfg = cfg;
  scene.seed = seed;
  scene.regions.resize(static_cast<std::size_t>(n));
  scene.features.resize(n, dim);

  const Matrix protos = class_prototypes(cfg.num_classes, dim, cfg.prototype_seed);

  // Per-class prototype extents.
  std::vector<double> proto_w(cfg.num_classes);
  std::vector<double> proto_h(cfg.num_classes);
  for (int c = 0; c < cfg.num_classes; ++c) {
    proto_w[c] = cfg.size_min + (cfg.size_max - cfg.size_min) * unit(rng);
    proto_h[c] = cfg.size_min + (cfg.size_max - cfg.size_min) * unit(rng);
  }

  // Scene-specific class appearance.
  Matrix scene_protos = protos;
  if (cfg.appearance_drift > 0.0) {
    const double scale = cfg.appearance_drift / std::sqrt(static_cast<double>(dim));
    for (int c = 0; c < cfg.num_classes; ++c) {
      for (int d = 0; d < dim; ++d) {
        scene_protos(c, d) += scale * normal(rng);
      }
      scene_protos.row(c).normalize();
    }
  }

  const auto clamp_center = [](double v, double extent, double limit) {
    return std::clamp(v, 0.5 * extent, limit - 0.5 * extent);
  };
  const double margin_x = std::min(0.5 * cfg.image_width, 0.5 * cfg.size_max + 2.0 * cfg.cluster_spread);
  const double margin_y = std::min(0.5 * cfg.image_height, 0.5 * cfg.size_max + 2.0 * cfg.cluster_spread);

  int idx = 0;
  for (int c = 0; c < cfg.num_classes; ++c) {
    for (int k = 0; k < cfg.clusters_per_class; ++k) {
      const double cx = margin_x + (cfg.image_width - 2.0 * margin_x) * unit(rng);
      const double cy = margin_y + (cfg.image_height - 2.0 * margin_y) * unit(rng);
      for (int r = 0; r < cfg.regions_per_cluster; ++r, ++idx) {
        Region& region = scene.regions[static_cast<std::size_t>(idx)];
        region.label = c;
        double w = proto_w[c];
        double h = proto_h[c];
        if (cfg.shape_jitter > 0.0) {
          w = std::clamp(w * std::exp(cfg.shape_jitter * normal(rng)), cfg.size_min, cfg.size_max);
          h = std::clamp(h * std::exp(cfg.shape_jitter * normal(rng)), cfg.size_min, cfg.size_max);
        }
        double x = cx;
        double y = cy;
        if (cfg.cluster_spread > 0.0) {
          x += cfg.cluster_spread * normal(rng);
          y += cfg.cluster_spread * normal(rng);
        }
        region.box = Box{clamp_center(x, w, cfg.image_width), clamp_center(y, h, cfg.image_height), w, h};
        scene.features.row(idx) = scene_protos.row(c);
      }
    }
  }

  // Ambiguous subset: exact count, chosen by a seeded shuffle.
  const int n_ambiguous = static_cast<int>(std::lround(cfg.ambiguity_fraction * n));
  if (n_ambiguous > 0) {
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> other(0, cfg.num_classes - 2);
    for (int a = 0; a < n_ambiguous; ++a) {
      const int i = order[static_cast<std::size_t>(a)];
      Region& region = scene.regions[static_cast<std::size_t>(i)];
      int blend = other(rng);
      if (blend >= region.label) {
        ++blend;
      }
      region.ambiguous = true;
      region.blend_label = blend;
      scene.features.row(i) = 0.5 * scene_protos.row(region.label) + 0.5 * protos.row(blend);
    }
  }

  if (cfg.feature_noise > 0.0) {
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < dim; ++d) {
        scene.features(i, d) += cfg.feature_noise * normal(rng);
      }
    }
  }
  return scene;
}

}  // namespace relgraph
