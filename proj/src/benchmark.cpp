#include "relgraph/benchmark.hpp"

#include "relgraph/error.hpp"
#include "relgraph/seeds.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

namespace relgraph {

namespace {

constexpr std::uint64_t kTrainStream = 101;
constexpr std::uint64_t kEvalStream = 202;

}  // namespace

BenchmarkConfig standard_benchmark() {
  BenchmarkConfig cfg;
  cfg.scene.num_classes = 4;
  cfg.scene.clusters_per_class = 3;
  cfg.scene.regions_per_cluster = 8;
  cfg.scene.ambiguity_fraction = 0.3;
  cfg.scene.feature_dim = 16;
  cfg.scene.feature_noise = 0.1;
  cfg.scene.appearance_drift = 1.0;
  cfg.scene.cluster_spread = 24.0;
  cfg.train_scenes = 200;
  cfg.eval_scenes = 50;
  cfg.seeds = {1, 2, 3, 4, 5};
  cfg.model.graph.k = 16;
  cfg.train.iterations = 300;
  cfg.train.batch_size = 8;
  cfg.train.lr = 0.1;
  return cfg;
}

std::vector<Scene> make_scenes(const SceneConfig& cfg, std::uint64_t base, std::uint64_t stream,
                               int count) {
  std::vector<Scene> scenes;
  scenes.reserve(static_cast<std::size_t>(std::max(count, 0)));
  for (int i = 0; i < count; ++i) {
    scenes.push_back(generate_scene(cfg, derive_seed(base, stream, static_cast<std::uint64_t>(i))));
  }
  return scenes;
}

SceneSplit make_split(const BenchmarkConfig& cfg, std::uint64_t seed) {
  return {make_scenes(cfg.scene, seed, kTrainStream, cfg.train_scenes),
          make_scenes(cfg.scene, seed, kEvalStream, cfg.eval_scenes)};
}

RunResult run_single(std::span<const Scene> train_scenes, std::span<const Scene> eval_scenes,
                     Mode mode, std::uint64_t seed, const ModelConfig& model,
                     const TrainConfig& train) {
  TrainConfig cfg = train;
  cfg.mode = mode;
  cfg.seed = seed;
  TrainResult trained = relgraph::train(train_scenes, {}, model, cfg);
  RunResult r;
  r.mode = mode;
  r.seed = seed;
  r.k = model.graph.k;
  r.metrics = evaluate(eval_scenes, trained.params, mode, model);
  r.final_loss = trained.final_loss;
  r.curve = std::move(trained.curve);
  return r;
}

unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RELGRAPH_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) {
        return static_cast<unsigned>(v);
      }
    } catch (const std::exception&) {
    }
  }
  return hw;
}

void parallel_for(std::size_t count, unsigned threads,
                  const std::function<void(std::size_t)>& job) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      job(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            job(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) {
              failure = std::current_exception();
            }
          }
        }
      });
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

std::vector<RunResult> run_ablation(const BenchmarkConfig& cfg, const SplitProvider& split,
                                    unsigned threads) {
  if (cfg.seeds.empty()) {
    throw ConfigError("ablation needs at least one seed");
  }
  std::vector<SceneSplit> splits;
  splits.reserve(cfg.seeds.size());
  for (std::uint64_t seed : cfg.seeds) {
    splits.push_back(split ? split(seed) : make_split(cfg, seed));
  }
  std::vector<RunResult> results(cfg.seeds.size() * kAllModes.size());
  parallel_for(results.size(), threads, [&](std::size_t job) {
    const std::size_t s = job / kAllModes.size();
    const Mode mode = kAllModes[job % kAllModes.size()];
    results[job] = run_single(splits[s].train, splits[s].eval, mode, cfg.seeds[s], cfg.model, cfg.train);
  });
  return results;
}

}  // namespace relgraph
