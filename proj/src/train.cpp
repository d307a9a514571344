#include "relgraph/train.hpp"

#include "relgraph/error.hpp"
#include "relgraph/seeds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace relgraph {

void TrainConfig::validate() const {
  if (!(initial_lr() > 0.0) || !std::isfinite(initial_lr())) {
    throw ConfigError("train config: learning rate must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw ConfigError("train config: momentum must lie in [0, 1)");
  }
  if (!(weight_decay >= 0.0)) {
    throw ConfigError("train config: weight decay must be >= 0");
  }
  for (std::size_t m = 0; m < milestones.size(); ++m) {
    if (!(milestones[m] > 0.0 && milestones[m] < 1.0) ||
        (m > 0 && !(milestones[m] > milestones[m - 1]))) {
      throw ConfigError("train config: milestones must be strictly increasing in (0, 1)");
    }
  }
  if (iterations < 0 || batch_size < 1 || reference_batch < 1) {
    throw ConfigError("train config: iterations >= 0 and batch sizes >= 1 required");
  }
  if (zero_gcn && !freeze_gcn) {
    throw ConfigError("train config: zero_gcn requires freeze_gcn");
  }
}

double TrainConfig::initial_lr() const {
  return lr ? *lr : base_lr * static_cast<double>(batch_size) / static_cast<double>(reference_batch);
}

double TrainConfig::lr_at(int iter) const {
  double rate = initial_lr();
  for (double frac : milestones) {
    if (iter >= static_cast<int>(std::lround(frac * iterations))) {
      rate *= decay_factor;
    }
  }
  return rate;
}

int TrainConfig::log_interval() const {
  if (log_every > 0) return log_every;
  return std::max(1, iterations / 10);
}

double relative_error(double analytic, double numeric) noexcept {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

Metrics evaluate(std::span<const Scene> scenes, const Params& params, Mode mode,
                 const ModelConfig& cfg) {
  if (scenes.empty()) {
    throw ConfigError("evaluate: empty scene list");
  }
  const int classes = params.num_classes();
  std::vector<std::size_t> class_total(static_cast<std::size_t>(classes), 0);
  std::vector<std::size_t> class_hit(static_cast<std::size_t>(classes), 0);
  std::size_t hits = 0;
  std::size_t amb_hits = 0;
  Metrics m;
  double loss_sum = 0.0;
  for (const Scene& scene : scenes) {
    const Structure s = build_structure(scene, params.encoder, mode, cfg);
    const LossResult r = evaluate_loss(scene, s, params, cfg);
    loss_sum += r.loss;
    const auto pred = predict(r.logits);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      const Region& region = scene.regions[i];
      const bool ok = pred[i] == region.label;
      ++m.regions;
      hits += ok;
      ++class_total[static_cast<std::size_t>(region.label)];
      class_hit[static_cast<std::size_t>(region.label)] += ok;
      if (region.ambiguous) {
        ++m.ambiguous_regions;
        amb_hits += ok;
      }
    }
  }
  const auto ratio = [](std::size_t a, std::size_t b) {
    return b == 0 ? 0.0 : static_cast<double>(a) / static_cast<double>(b);
  };
  m.accuracy = ratio(hits, m.regions);
  m.ambiguous_accuracy = ratio(amb_hits, m.ambiguous_regions);
  for (int c = 0; c < classes; ++c) {
    m.per_class_accuracy.push_back(ratio(class_hit[static_cast<std::size_t>(c)],
                                         class_total[static_cast<std::size_t>(c)]));
  }
  m.mean_loss = loss_sum / static_cast<double>(scenes.size());
  return m;
}

TrainResult train(std::span<const Scene> train_scenes, std::span<const Scene> eval_scenes,
                  const ModelConfig& model_cfg, const TrainConfig& cfg,
                  const CurveCallback& on_point) {
  if (train_scenes.empty()) {
    throw ConfigError("train: no training scenes");
  }
  Params init = Params::init(train_scenes.front().feature_dim(),
                             train_scenes.front().num_classes(), model_cfg, cfg.seed);
  return train_from(std::move(init), train_scenes, eval_scenes, model_cfg, cfg, on_point);
}

TrainResult train_from(Params init, std::span<const Scene> train_scenes,
                       std::span<const Scene> eval_scenes, const ModelConfig& model_cfg,
                       const TrainConfig& cfg, const CurveCallback& on_point) {
  cfg.validate();
  model_cfg.validate();
  if (train_scenes.empty()) {
    throw ConfigError("train: no training scenes");
  }
  TrainResult result;
  result.params = std::move(init);
  Params& params = result.params;
  if (cfg.zero_gcn) {
    for (auto& w : params.gcn.weights) {
      w.setZero();
    }
  }

  TrainableGroups groups;
  groups.head = true;
  groups.gcn = !cfg.freeze_gcn && cfg.mode != Mode::kBaseline;
  groups.encoder = model_cfg.encoder_trainable() && uses_semantic(cfg.mode);

  // Structures depend on the encoder only; cache them while it is frozen.
  std::vector<std::optional<Structure>> cache(train_scenes.size());
  const auto structure_for = [&](std::size_t idx) -> Structure {
    if (groups.encoder) {
      return build_structure(train_scenes[idx], params.encoder, cfg.mode, model_cfg);
    }
    if (!cache[idx]) {
      cache[idx] = build_structure(train_scenes[idx], params.encoder, cfg.mode, model_cfg);
    }
    return *cache[idx];
  };

  SgdMomentum optimizer(params);
  std::mt19937_64 order_rng(derive_seed(cfg.seed, 17));
  std::vector<std::size_t> order(train_scenes.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::size_t cursor = order.size();

  const int interval = cfg.log_interval();
  const auto record = [&](int iter, double loss) {
    CurvePoint pt;
    pt.iter = iter;
    pt.loss = loss;
    if (!eval_scenes.empty()) {
      pt.eval = evaluate(eval_scenes, params, cfg.mode, model_cfg);
    }
    result.curve.push_back(pt);
    if (on_point) {
      on_point(result.curve.back());
    }
  };

  Params grads = params.zeros_like();
  const auto batch = static_cast<std::size_t>(cfg.batch_size);
  double last_loss = 0.0;
  for (int iter = 0; iter < cfg.iterations; ++iter) {
    grads.for_each([](const std::string&, Matrix& t) { t.setZero(); });
    double loss = 0.0;
    for (std::size_t b = 0; b < batch; ++b) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), order_rng);
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      const Structure s = structure_for(idx);
      loss += evaluate_loss(train_scenes[idx], s, params, model_cfg, &grads,
                            1.0 / static_cast<double>(batch))
                  .loss;
    }
    loss /= static_cast<double>(batch);
    if (!std::isfinite(loss)) {
      throw NumericError("training diverged at iteration " + std::to_string(iter));
    }
    last_loss = loss;
    if (iter % interval == 0) {
      record(iter, loss);
    }
    SgdHyperparams hp{cfg.lr_at(iter), cfg.momentum, cfg.weight_decay};
    optimizer.step(params, grads, hp, groups);
  }

  // Final sample: loss of the trained parameters on one pass over the training set.
  double final_loss = 0.0;
  for (std::size_t idx = 0; idx < train_scenes.size(); ++idx) {
    final_loss += evaluate_loss(train_scenes[idx], structure_for(idx), params, model_cfg).loss;
  }
  final_loss /= static_cast<double>(train_scenes.size());
  if (!std::isfinite(final_loss)) {
    throw NumericError("training produced a non-finite loss");
  }
  (void)last_loss;
  result.final_loss = final_loss;
  record(cfg.iterations, final_loss);
  return result;
}

GradCheckReport finite_diff_check(const Scene& scene, const Params& params, Mode mode,
                                  const ModelConfig& cfg, double h, double tol) {
  const Structure structure = build_structure(scene, params.encoder, mode, cfg);
  Params analytic = params.zeros_like();
  (void)evaluate_loss(scene, structure, params, cfg, &analytic);

  std::vector<std::pair<std::string, const Matrix*>> grads;
  analytic.for_each([&](const std::string& name, const Matrix& t) { grads.emplace_back(name, &t); });

  GradCheckReport report;
  report.tolerance = tol;
  Params probe = params;
  std::size_t tensor = 0;
  probe.for_each([&](const std::string& name, Matrix& t) {
    const Matrix& g = *grads[tensor++].second;
    for (Index k = 0; k < t.size(); ++k) {
      double& x = t.data()[k];
      const double saved = x;
      x = saved + h;
      const double up = evaluate_loss(scene, structure, probe, cfg).loss;
      x = saved - h;
      const double down = evaluate_loss(scene, structure, probe, cfg).loss;
      x = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double a = g.data()[k];
      const double err = relative_error(a, numeric);
      ++report.coordinates;
      if (err > report.max_relative_error || report.worst_index < 0) {
        report.max_relative_error = std::max(report.max_relative_error, err);
        if (err >= report.max_relative_error) {
          report.worst_tensor = name;
          report.worst_index = k;
          report.worst_analytic = a;
          report.worst_numeric = numeric;
        }
      }
    }
  });
  report.passed = report.max_relative_error < tol;
  return report;
}

}  // namespace relgraph
