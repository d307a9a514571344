#pragma once

#include "relgraph/model.hpp"
#include "relgraph/scene.hpp"
#include "relgraph/sgd.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace relgraph {

struct TrainConfig {
  /// Learning rate at the reference batch of 16 scenes; scaled linearly by batch / 16.
  double base_lr = 0.02;
  int reference_batch = 16;
  /// Overrides the scaled rate when set.
  std::optional<double> lr;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  /// Fractions of the run at which the rate is multiplied by decay_factor.
  std::vector<double> milestones = {2.0 / 3.0, 8.0 / 9.0};
  double decay_factor = 0.1;
  int iterations = 300;
  int batch_size = 16;
  std::uint64_t seed = 0;
  Mode mode = Mode::kFull;
  /// Keep GCN weights fixed (and zero them when zero_gcn is set).
  bool freeze_gcn = false;
  bool zero_gcn = false;
  /// Loss/metric samples recorded every log_every iterations (0: ten samples per run).
  int log_every = 0;

  void validate() const;
  [[nodiscard]] double initial_lr() const;
  /// Rate at a given iteration after milestone decays.
  [[nodiscard]] double lr_at(int iter) const;
  [[nodiscard]] int log_interval() const;
};

struct Metrics {
  double accuracy = 0.0;
  double ambiguous_accuracy = 0.0;
  std::vector<double> per_class_accuracy;
  /// Mean over scenes of the training objective (cross-entropy plus any auxiliary term).
  double mean_loss = 0.0;
  std::size_t regions = 0;
  std::size_t ambiguous_regions = 0;
};

/// Accuracy over every region of every scene; ambiguous accuracy is 0 when none exist.
/// Throws ConfigError on an empty scene list.
[[nodiscard]] Metrics evaluate(std::span<const Scene> scenes, const Params& params, Mode mode,
                               const ModelConfig& cfg);

struct CurvePoint {
  int iter = 0;
  double loss = 0.0;
  std::optional<Metrics> eval;
};

struct TrainResult {
  Params params;
  std::vector<CurvePoint> curve;
  double final_loss = 0.0;
};

/// Called after every recorded curve point, in order.
using CurveCallback = std::function<void(const CurvePoint&)>;

/// Sequential momentum-SGD training. Batches are whole scenes drawn by a seeded per-epoch
/// shuffle; gradients are averaged over regions, then scenes. Throws NumericError on
/// divergence.
[[nodiscard]] TrainResult train(std::span<const Scene> train_scenes,
                                std::span<const Scene> eval_scenes, const ModelConfig& model_cfg,
                                const TrainConfig& cfg, const CurveCallback& on_point = {});

/// Same, starting from given parameters.
[[nodiscard]] TrainResult train_from(Params init, std::span<const Scene> train_scenes,
                                     std::span<const Scene> eval_scenes,
                                     const ModelConfig& model_cfg, const TrainConfig& cfg,
                                     const CurveCallback& on_point = {});

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::string worst_tensor;
  Index worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coordinates = 0;
  double tolerance = 0.0;
  bool passed = false;
};

/// Central differences of the loss over every parameter coordinate, with the graph structure
/// held fixed; relative error |a − b| / max(|a|, |b|, 1e−8).
[[nodiscard]] GradCheckReport finite_diff_check(const Scene& scene, const Params& params, Mode mode,
                                                const ModelConfig& cfg, double h = 1e-5,
                                                double tol = 1e-5);

[[nodiscard]] double relative_error(double analytic, double numeric) noexcept;

}  // namespace relgraph
