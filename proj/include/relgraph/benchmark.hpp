#pragma once

#include "relgraph/model.hpp"
#include "relgraph/scene.hpp"
#include "relgraph/train.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace relgraph {

/// Synthetic ablation setup: per seed, a fresh train/eval scene set plus paired training runs.
struct BenchmarkConfig {
  SceneConfig scene;
  int train_scenes = 200;
  int eval_scenes = 50;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  ModelConfig model;
  TrainConfig train;
};

/// The standard desk-scale benchmark: 4 classes, 3 clusters per class, 8 regions per cluster,
/// 30% ambiguous regions, 200 training and 50 held-out scenes, five paired seeds.
[[nodiscard]] BenchmarkConfig standard_benchmark();

/// count scenes with seeds derive_seed(base, stream, i).
[[nodiscard]] std::vector<Scene> make_scenes(const SceneConfig& cfg, std::uint64_t base,
                                             std::uint64_t stream, int count);

/// Training and held-out scene sets for one benchmark seed; disjoint seed streams.
struct SceneSplit {
  std::vector<Scene> train;
  std::vector<Scene> eval;
};
[[nodiscard]] SceneSplit make_split(const BenchmarkConfig& cfg, std::uint64_t seed);

struct RunResult {
  Mode mode = Mode::kBaseline;
  std::uint64_t seed = 0;
  int k = 0;
  Metrics metrics;
  double final_loss = 0.0;
  std::vector<CurvePoint> curve;
};

/// Trains one arm and evaluates it on the held-out scenes.
[[nodiscard]] RunResult run_single(std::span<const Scene> train_scenes,
                                   std::span<const Scene> eval_scenes, Mode mode,
                                   std::uint64_t seed, const ModelConfig& model,
                                   const TrainConfig& train);

/// Worker count from RELGRAPH_THREADS, else hardware concurrency; at least 1.
[[nodiscard]] unsigned thread_budget();

/// Runs job(i) for i in [0, count) on up to `threads` workers. The first exception is rethrown
/// after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

/// All four arms for every seed, in (seed, mode) order. With external splits, split(seed) is
/// used instead of generating scenes.
using SplitProvider = std::function<SceneSplit(std::uint64_t seed)>;
[[nodiscard]] std::vector<RunResult> run_ablation(const BenchmarkConfig& cfg,
                                                  const SplitProvider& split = {},
                                                  unsigned threads = 1);

inline constexpr std::array<Mode, 4> kAllModes = {Mode::kBaseline, Mode::kSemanticOnly,
                                                  Mode::kSpatialOnly, Mode::kFull};

}  // namespace relgraph
