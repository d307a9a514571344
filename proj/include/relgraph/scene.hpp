#pragma once

#include "relgraph/geometry.hpp"
#include "relgraph/types.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace relgraph {

/// Parameters of the synthetic multi-small-object scene generator.
struct SceneConfig {
  int num_classes = 4;
  int clusters_per_class = 3;
  int regions_per_cluster = 8;
  double image_width = 1024.0;
  double image_height = 1024.0;
  /// Standard deviation of region centers around their cluster center, pixels.
  double cluster_spread = 24.0;
  /// Range for w and h of the per-class prototype shape, pixels.
  double size_min = 8.0;
  double size_max = 32.0;
  /// Log-scale std of per-region w, h around the class prototype shape.
  double shape_jitter = 0.1;
  int feature_dim = 16;
  double feature_noise = 0.1;
  /// Per-scene class appearance: each scene uses normalize(p_c + drift · z_c), z_c ~ N(0, I/D),
  /// as the prototype of class c. Ambiguous regions blend it toward the other class's
  /// dataset-level prototype. 0 disables.
  double appearance_drift = 0.0;
  double ambiguity_fraction = 0.0;
  int max_regions = 4096;
  /// Seeds the class prototype vectors, which are shared by every scene of a dataset.
  std::uint64_t prototype_seed = 0;

  [[nodiscard]] int total_regions() const noexcept {
    return num_classes * clusters_per_class * regions_per_cluster;
  }

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;

  friend bool operator==(const SceneConfig&, const SceneConfig&) = default;
};

struct Region {
  Box box;
  int label = 0;
  /// Hard-to-detect region: feature blended half-way toward another class prototype.
  bool ambiguous = false;
  /// Class the feature was blended toward, or −1.
  int blend_label = -1;

  friend bool operator==(const Region&, const Region&) = default;
};

/// One synthetic image: boxes, labels and an N × D feature matrix.
struct Scene {
  SceneConfig cfg;
  std::uint64_t seed = 0;
  std::vector<Region> regions;
  Matrix features;

  [[nodiscard]] Index size() const noexcept { return static_cast<Index>(regions.size()); }
  [[nodiscard]] int num_classes() const noexcept { return cfg.num_classes; }
  [[nodiscard]] int feature_dim() const noexcept { return static_cast<int>(features.cols()); }
  [[nodiscard]] std::vector<Box> boxes() const;

  /// Keeps the first n regions; used to build small instances for gradient checks.
  [[nodiscard]] Scene head(Index n) const;

  friend bool operator==(const Scene& a, const Scene& b) {
    return a.cfg == b.cfg && a.seed == b.seed && a.regions == b.regions &&
           a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           a.features == b.features;
  }
};

/// Deterministic in (cfg, seed). Regions are emitted class by class, cluster by cluster.
[[nodiscard]] Scene generate_scene(const SceneConfig& cfg, std::uint64_t seed);

/// Random unit vectors with pairwise dot products below max_dot (rejection sampled).
[[nodiscard]] Matrix class_prototypes(int num_classes, int dim, std::uint64_t seed,
                                      double max_dot = 0.3);

inline constexpr int kSceneSchemaVersion = 1;

void save_scene(const Scene& scene, const std::filesystem::path& path);
[[nodiscard]] Scene load_scene(const std::filesystem::path& path);

/// Serialized form exactly as save_scene writes it.
[[nodiscard]] std::string serialize_scene(const Scene& scene);
[[nodiscard]] Scene parse_scene(const std::string& text);

/// Loads every scene_*.jsonl file in dir, ordered by scene seed.
[[nodiscard]] std::vector<Scene> load_scene_dir(const std::filesystem::path& dir);

}  // namespace relgraph
