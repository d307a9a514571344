#include "relgraph/cli.hpp"

#include "relgraph/benchmark.hpp"
#include "relgraph/checkpoint.hpp"
#include "relgraph/dot_export.hpp"
#include "relgraph/error.hpp"
#include "relgraph/report.hpp"
#include "relgraph/spatial_graph.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

namespace relgraph {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

// ---------------------------------------------------------------------------
// Option bundles shared by several subcommands.

struct SceneOptions {
  std::string preset = "none";
  SceneConfig cfg;
};

struct ModelOptions {
  std::string preset = "none";
  ModelConfig model;
  TrainConfig train;
  double lr = 0.0;  // 0: scaled default
};

void add_preset_option(CLI::App* cmd, std::string& preset) {
  cmd->add_option("--preset", preset, "Parameter preset: none | standard")
      ->check(CLI::IsMember({"none", "standard"}));
}

void add_scene_options(CLI::App* cmd, SceneOptions& o) {
  cmd->add_option("--classes", o.cfg.num_classes, "Number of classes");
  cmd->add_option("--clusters", o.cfg.clusters_per_class, "Clusters per class");
  cmd->add_option("--regions", o.cfg.regions_per_cluster, "Regions per cluster");
  cmd->add_option("--image-width", o.cfg.image_width, "Image width, pixels");
  cmd->add_option("--image-height", o.cfg.image_height, "Image height, pixels");
  cmd->add_option("--spread", o.cfg.cluster_spread, "Cluster spread (std), pixels");
  cmd->add_option("--size-min", o.cfg.size_min, "Smallest box extent, pixels");
  cmd->add_option("--size-max", o.cfg.size_max, "Largest box extent, pixels");
  cmd->add_option("--shape-jitter", o.cfg.shape_jitter, "Log-scale jitter of box extents");
  cmd->add_option("--dim", o.cfg.feature_dim, "Feature dimension D");
  cmd->add_option("--noise", o.cfg.feature_noise, "Feature noise std");
  cmd->add_option("--drift", o.cfg.appearance_drift, "Per-scene class appearance drift");
  cmd->add_option("--ambiguity", o.cfg.ambiguity_fraction, "Fraction of ambiguous regions");
  cmd->add_option("--max-regions", o.cfg.max_regions, "Upper bound on regions per scene");
  cmd->add_option("--prototype-seed", o.cfg.prototype_seed, "Seed of the class prototypes");
}

void add_model_options(CLI::App* cmd, ModelOptions& o, bool with_train) {
  cmd->add_option("--k", o.model.graph.k, "Top-K edges per row");
  cmd->add_option("--lambda", o.model.graph.lambda, "Spatial distance scale");
  cmd->add_option("--tau", o.model.graph.overlap_threshold, "IoU suppression threshold");
  cmd->add_option("--layers", o.model.gcn_layers, "GCN layers L");
  cmd->add_option("--slope", o.model.slope, "LeakyReLU negative slope");
  cmd->add_flag("--soft-edges", o.model.soft_edges,
                "Extension: weight semantic-only edges by their score");
  cmd->add_option("--aux-weight", o.model.aux_score_weight,
                  "Weight of the auxiliary semantic relatedness loss");
  if (!with_train) {
    return;
  }
  cmd->add_option("--iters", o.train.iterations, "Training iterations");
  cmd->add_option("--batch", o.train.batch_size, "Scenes per batch");
  cmd->add_option("--lr", o.lr, "Learning rate (default: 0.02 scaled by batch/16)");
  cmd->add_option("--momentum", o.train.momentum, "SGD momentum");
  cmd->add_option("--weight-decay", o.train.weight_decay, "Weight decay");
  cmd->add_option("--log-every", o.train.log_every, "Curve sample interval (0: auto)");
}

/// Applies a preset, then re-applies every option the user actually passed.
void resolve_scene(CLI::App* cmd, SceneOptions& o) {
  if (o.preset != "standard") {
    return;
  }
  SceneOptions user = o;
  o.cfg = standard_benchmark().scene;
  const auto keep = [&](const char* flag, auto member) {
    if (cmd->count(flag) > 0) {
      o.cfg.*member = user.cfg.*member;
    }
  };
  keep("--classes", &SceneConfig::num_classes);
  keep("--clusters", &SceneConfig::clusters_per_class);
  keep("--regions", &SceneConfig::regions_per_cluster);
  keep("--image-width", &SceneConfig::image_width);
  keep("--image-height", &SceneConfig::image_height);
  keep("--spread", &SceneConfig::cluster_spread);
  keep("--size-min", &SceneConfig::size_min);
  keep("--size-max", &SceneConfig::size_max);
  keep("--shape-jitter", &SceneConfig::shape_jitter);
  keep("--dim", &SceneConfig::feature_dim);
  keep("--noise", &SceneConfig::feature_noise);
  keep("--drift", &SceneConfig::appearance_drift);
  keep("--ambiguity", &SceneConfig::ambiguity_fraction);
  keep("--max-regions", &SceneConfig::max_regions);
  keep("--prototype-seed", &SceneConfig::prototype_seed);
}

void resolve_model(CLI::App* cmd, ModelOptions& o) {
  if (o.preset == "standard") {
    const BenchmarkConfig std_cfg = standard_benchmark();
    ModelOptions user = o;
    o.model = std_cfg.model;
    o.train = std_cfg.train;
    const auto has = [&](const char* flag) { return cmd->count(flag) > 0; };
    if (has("--k")) o.model.graph.k = user.model.graph.k;
    if (has("--lambda")) o.model.graph.lambda = user.model.graph.lambda;
    if (has("--tau")) o.model.graph.overlap_threshold = user.model.graph.overlap_threshold;
    if (has("--layers")) o.model.gcn_layers = user.model.gcn_layers;
    if (has("--slope")) o.model.slope = user.model.slope;
    if (has("--soft-edges")) o.model.soft_edges = user.model.soft_edges;
    if (has("--aux-weight")) o.model.aux_score_weight = user.model.aux_score_weight;
    if (has("--iters")) o.train.iterations = user.train.iterations;
    if (has("--batch")) o.train.batch_size = user.train.batch_size;
    if (has("--momentum")) o.train.momentum = user.train.momentum;
    if (has("--weight-decay")) o.train.weight_decay = user.train.weight_decay;
    if (has("--log-every")) o.train.log_every = user.train.log_every;
  }
  if (o.lr > 0.0) {
    o.train.lr = o.lr;
  }
  o.model.validate();
}

// ---------------------------------------------------------------------------
// Serialization of resolved configuration for manifests and summaries.

ordered_json scene_config_json(const SceneConfig& c) {
  ordered_json j;
  j["num_classes"] = c.num_classes;
  j["clusters_per_class"] = c.clusters_per_class;
  j["regions_per_cluster"] = c.regions_per_cluster;
  j["image_size"] = {c.image_width, c.image_height};
  j["cluster_spread"] = c.cluster_spread;
  j["size_range"] = {c.size_min, c.size_max};
  j["shape_jitter"] = c.shape_jitter;
  j["feature_dim"] = c.feature_dim;
  j["feature_noise"] = c.feature_noise;
  j["appearance_drift"] = c.appearance_drift;
  j["ambiguity_fraction"] = c.ambiguity_fraction;
  j["max_regions"] = c.max_regions;
  j["prototype_seed"] = c.prototype_seed;
  return j;
}

ordered_json model_config_json(const ModelConfig& m) {
  ordered_json j;
  j["k"] = m.graph.k;
  j["lambda"] = m.graph.lambda;
  j["overlap_threshold"] = m.graph.overlap_threshold;
  j["gcn_layers"] = m.gcn_layers;
  j["slope"] = m.slope;
  j["soft_edges"] = m.soft_edges;
  j["aux_score_weight"] = m.aux_score_weight;
  return j;
}

ordered_json train_config_json(const TrainConfig& t) {
  ordered_json j;
  j["lr"] = t.initial_lr();
  j["base_lr"] = t.base_lr;
  j["reference_batch"] = t.reference_batch;
  j["momentum"] = t.momentum;
  j["weight_decay"] = t.weight_decay;
  j["milestones"] = t.milestones;
  j["decay_factor"] = t.decay_factor;
  j["iterations"] = t.iterations;
  j["batch_size"] = t.batch_size;
  j["seed"] = t.seed;
  j["mode"] = std::string(mode_name(t.mode));
  j["freeze_gcn"] = t.freeze_gcn;
  j["zero_gcn"] = t.zero_gcn;
  j["log_every"] = t.log_interval();
  return j;
}

ordered_json metrics_json(const Metrics& m) {
  ordered_json j;
  j["acc_overall"] = m.accuracy;
  j["acc_ambiguous"] = m.ambiguous_accuracy;
  j["acc_per_class"] = m.per_class_accuracy;
  j["mean_loss"] = m.mean_loss;
  j["regions"] = m.regions;
  j["ambiguous_regions"] = m.ambiguous_regions;
  return j;
}

// ---------------------------------------------------------------------------
// File helpers.

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << text;
  if (!out.flush()) {
    throw IoError("failed writing " + path.string());
  }
}

void ensure_writable_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
  const fs::path probe = dir / ".relgraph_write_probe";
  {
    std::ofstream out(probe, std::ios::trunc);
    if (!out || !(out << "ok") || !out.flush()) {
      throw IoError("output directory is not writable: " + dir.string());
    }
  }
  fs::remove(probe, ec);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

/// Written before any output; finish() adds the wall-clock time.
class Manifest {
 public:
  Manifest(fs::path path, std::string command, const std::vector<std::string>& args)
      : path_(std::move(path)), start_(std::chrono::steady_clock::now()) {
    doc_["tool"] = "relgraph";
    doc_["version"] = kLibraryVersion;
    doc_["command"] = std::move(command);
    doc_["args"] = args;
    doc_["started_at"] = utc_now();
  }

  ordered_json& operator[](const char* key) { return doc_[key]; }

  void write() const { write_text(path_, doc_.dump(2) + "\n"); }

  void finish() {
    doc_["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write();
  }

 private:
  fs::path path_;
  ordered_json doc_;
  std::chrono::steady_clock::time_point start_;
};

std::vector<std::uint64_t> parse_u64_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("not an unsigned integer list: '" + text + "'");
    }
  }
  if (out.empty()) {
    throw ConfigError("empty list: '" + text + "'");
  }
  return out;
}

std::vector<Scene> load_scenes_checked(const std::string& dir) {
  auto scenes = load_scene_dir(dir);
  if (scenes.empty()) {
    throw IoError("no scene_*.jsonl files in " + dir);
  }
  return scenes;
}

int report_grad_check(const GradCheckReport& r) {
  std::cerr << "grad-check: " << r.coordinates << " coordinates, max relative error "
            << r.max_relative_error << " (tol " << r.tolerance << ")";
  if (!r.passed) {
    std::cerr << ", worst " << r.worst_tensor << "[" << r.worst_index
              << "] analytic=" << r.worst_analytic << " numeric=" << r.worst_numeric;
  }
  std::cerr << (r.passed ? " -> ok\n" : " -> FAILED\n");
  return r.passed ? kExitOk : kExitNumeric;
}

// ---------------------------------------------------------------------------
// Subcommands.

struct GenerateArgs {
  SceneOptions scene;
  int count = 10;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(CLI::App* cmd, GenerateArgs& a, const std::vector<std::string>& argv) {
  resolve_scene(cmd, a.scene);
  a.scene.cfg.validate();
  if (a.count < 1) {
    throw ConfigError("--scenes must be >= 1");
  }
  const fs::path dir(a.out);
  ensure_writable_dir(dir);

  std::vector<fs::path> written;
  const auto cleanup = [&] {
    std::error_code ec;
    for (const auto& p : written) fs::remove(p, ec);
  };

  Manifest manifest(dir / "manifest.json", "generate", argv);
  manifest["scene_config"] = scene_config_json(a.scene.cfg);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < a.count; ++i) seeds.push_back(a.seed + static_cast<std::uint64_t>(i));
  manifest["seeds"] = seeds;
  std::vector<std::string> outputs;
  for (auto s : seeds) outputs.push_back((dir / ("scene_" + std::to_string(s) + ".jsonl")).string());
  manifest["outputs"] = outputs;
  try {
    manifest.write();
    written.push_back(dir / "manifest.json");
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const Scene scene = generate_scene(a.scene.cfg, seeds[i]);
      const fs::path path = outputs[i];
      const fs::path tmp = path.string() + ".tmp";
      written.push_back(tmp);
      save_scene(scene, tmp);
      fs::rename(tmp, path);
      written.back() = path;
    }
    manifest.finish();
  } catch (...) {
    cleanup();
    throw;
  }
  std::cout << "wrote " << seeds.size() << " scenes to " << dir.string() << "\n";
  return kExitOk;
}

struct TrainArgs {
  ModelOptions opts;
  std::string train_dir;
  std::string eval_dir;
  std::string mode = "full";
  std::string out;
  std::uint64_t seed = 0;
  bool grad_check = false;
};

int cmd_train(CLI::App* cmd, TrainArgs& a, const std::vector<std::string>& argv) {
  resolve_model(cmd, a.opts);
  TrainConfig& tc = a.opts.train;
  tc.mode = parse_mode(a.mode);
  tc.seed = a.seed;
  tc.validate();

  const fs::path dir(a.out);
  ensure_writable_dir(dir);
  Manifest manifest(dir / "manifest.json", "train", argv);
  manifest["model_config"] = model_config_json(a.opts.model);
  manifest["train_config"] = train_config_json(tc);
  manifest["seeds"] = {tc.seed};
  manifest["inputs"] = {{"train_dir", a.train_dir}, {"eval_dir", a.eval_dir}};
  manifest["outputs"] = {(dir / "checkpoint.json").string(), (dir / "metrics.csv").string(),
                         (dir / "summary.json").string()};
  manifest.write();

  const auto train_scenes = load_scenes_checked(a.train_dir);
  std::vector<Scene> eval_scenes;
  if (!a.eval_dir.empty()) {
    eval_scenes = load_scenes_checked(a.eval_dir);
  }
  const int classes = train_scenes.front().num_classes();
  Params init = Params::init(train_scenes.front().feature_dim(), classes, a.opts.model, tc.seed);

  if (a.grad_check) {
    const Scene small = train_scenes.front().head(16);
    const int rc = report_grad_check(finite_diff_check(small, init, tc.mode, a.opts.model));
    if (rc != kExitOk) {
      return rc;
    }
  }

  std::ofstream csv(dir / "metrics.csv", std::ios::binary | std::ios::trunc);
  if (!csv) {
    throw IoError("cannot open metrics.csv for writing");
  }
  csv << metrics_csv_header(classes) << "\n";
  const std::string mode_str(mode_name(tc.mode));
  const std::string seed_str = std::to_string(tc.seed);
  TrainResult result = train_from(std::move(init), train_scenes, eval_scenes, a.opts.model, tc,
                                  [&](const CurvePoint& pt) {
                                    csv << metrics_csv_row(mode_str, seed_str, pt.iter, pt.loss,
                                                           pt.eval, classes)
                                        << "\n";
                                    csv.flush();
                                  });
  if (!csv) {
    throw IoError("failed writing metrics.csv");
  }

  save_checkpoint(Checkpoint{a.opts.model, tc.mode, result.params}, dir / "checkpoint.json");
  const Metrics final_metrics = evaluate(eval_scenes.empty() ? train_scenes : eval_scenes,
                                         result.params, tc.mode, a.opts.model);
  ordered_json summary;
  summary["mode"] = mode_str;
  summary["seed"] = tc.seed;
  summary["final_train_loss"] = result.final_loss;
  summary["evaluated_on"] = eval_scenes.empty() ? "train" : "eval";
  summary["metrics"] = metrics_json(final_metrics);
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  manifest.finish();
  std::cout << mode_str << ": acc " << final_metrics.accuracy << ", ambiguous "
            << final_metrics.ambiguous_accuracy << "\n";
  return kExitOk;
}

struct EvalArgs {
  std::string scenes;
  std::string checkpoint;
  std::string mode;
  std::string out;
};

int cmd_eval(EvalArgs& a, const std::vector<std::string>& argv) {
  std::optional<Manifest> manifest;
  if (!a.out.empty()) {
    ensure_writable_dir(a.out);
    manifest.emplace(fs::path(a.out) / "manifest.json", "eval", argv);
    (*manifest)["inputs"] = {{"scenes", a.scenes}, {"checkpoint", a.checkpoint}};
    (*manifest)["outputs"] = {(fs::path(a.out) / "eval.json").string()};
    manifest->write();
  }
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  const Mode mode = a.mode.empty() ? ckpt.mode : parse_mode(a.mode);
  const auto scenes = load_scenes_checked(a.scenes);
  const Metrics m = evaluate(scenes, ckpt.params, mode, ckpt.model);
  ordered_json j;
  j["mode"] = std::string(mode_name(mode));
  j["scenes"] = scenes.size();
  j["metrics"] = metrics_json(m);
  std::cout << j.dump(2) << "\n";
  if (manifest) {
    write_text(fs::path(a.out) / "eval.json", j.dump(2) + "\n");
    manifest->finish();
  }
  return kExitOk;
}

struct AblateArgs {
  ModelOptions opts;
  SceneOptions scene;
  std::string train_dir;
  std::string eval_dir;
  bool synthetic = false;
  int train_scenes = 200;
  int eval_scenes = 50;
  std::string seeds = "1,2,3,4,5";
  std::string out;
};

/// Either the given scene directories (same data for every seed) or freshly generated splits.
SplitProvider split_provider(bool synthetic, const BenchmarkConfig& bench, const std::string& train_dir,
                             const std::string& eval_dir) {
  if (synthetic) {
    return [bench](std::uint64_t seed) { return make_split(bench, seed); };
  }
  if (train_dir.empty() || eval_dir.empty()) {
    throw ConfigError("either --synthetic or both --train-dir and --eval-dir are required");
  }
  auto shared = std::make_shared<SceneSplit>(
      SceneSplit{load_scenes_checked(train_dir), load_scenes_checked(eval_dir)});
  return [shared](std::uint64_t) { return *shared; };
}

int cmd_ablate(CLI::App* cmd, AblateArgs& a, const std::vector<std::string>& argv) {
  resolve_model(cmd, a.opts);
  resolve_scene(cmd, a.scene);
  BenchmarkConfig bench;
  bench.scene = a.scene.cfg;
  bench.train_scenes = a.train_scenes;
  bench.eval_scenes = a.eval_scenes;
  bench.seeds = parse_u64_list(a.seeds);
  bench.model = a.opts.model;
  bench.train = a.opts.train;
  bench.train.validate();
  if (a.synthetic) {
    bench.scene.validate();
  }

  const fs::path dir(a.out);
  ensure_writable_dir(dir);
  Manifest manifest(dir / "manifest.json", "ablate", argv);
  manifest["model_config"] = model_config_json(bench.model);
  manifest["train_config"] = train_config_json(bench.train);
  if (a.synthetic) {
    manifest["scene_config"] = scene_config_json(bench.scene);
    manifest["train_scenes"] = bench.train_scenes;
    manifest["eval_scenes"] = bench.eval_scenes;
  } else {
    manifest["inputs"] = {{"train_dir", a.train_dir}, {"eval_dir", a.eval_dir}};
  }
  manifest["seeds"] = bench.seeds;
  manifest["outputs"] = {(dir / "ablation.csv").string(), (dir / "summary.json").string()};
  manifest.write();

  const auto results =
      run_ablation(bench, split_provider(a.synthetic, bench, a.train_dir, a.eval_dir), thread_budget());
  const int classes = static_cast<int>(results.front().metrics.per_class_accuracy.size());

  std::ostringstream csv;
  csv << metrics_csv_header(classes) << "\n";
  // Data rows mode-major, then one mean row per mode.
  ordered_json summary;
  summary["seeds"] = bench.seeds;
  for (Mode mode : kAllModes) {
    for (const auto& r : results) {
      if (r.mode == mode) {
        csv << metrics_csv_row(mode_name(mode), std::to_string(r.seed), bench.train.iterations,
                               r.final_loss, r.metrics, classes)
            << "\n";
      }
    }
  }
  for (Mode mode : kAllModes) {
    Metrics mean;
    mean.per_class_accuracy.assign(static_cast<std::size_t>(classes), 0.0);
    double loss = 0.0;
    double count = 0.0;
    std::vector<double> amb;
    for (const auto& r : results) {
      if (r.mode != mode) continue;
      mean.accuracy += r.metrics.accuracy;
      mean.ambiguous_accuracy += r.metrics.ambiguous_accuracy;
      for (int c = 0; c < classes; ++c) {
        mean.per_class_accuracy[static_cast<std::size_t>(c)] +=
            r.metrics.per_class_accuracy[static_cast<std::size_t>(c)];
      }
      loss += r.final_loss;
      count += 1.0;
      amb.push_back(r.metrics.ambiguous_accuracy);
    }
    mean.accuracy /= count;
    mean.ambiguous_accuracy /= count;
    for (auto& v : mean.per_class_accuracy) v /= count;
    loss /= count;
    csv << metrics_csv_row(mode_name(mode), "mean", bench.train.iterations, loss, mean, classes)
        << "\n";
    auto& entry = summary["modes"][std::string(mode_name(mode))];
    entry["mean_acc_overall"] = mean.accuracy;
    entry["mean_acc_ambiguous"] = mean.ambiguous_accuracy;
    entry["acc_ambiguous_per_seed"] = amb;
    entry["mean_final_loss"] = loss;
  }
  write_text(dir / "ablation.csv", csv.str());
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  manifest.finish();
  std::cout << csv.str();
  return kExitOk;
}

struct SweepArgs {
  AblateArgs base;
  std::string ks = "16,32,64,96";
};

int cmd_sweep_k(CLI::App* cmd, SweepArgs& a, const std::vector<std::string>& argv) {
  AblateArgs& b = a.base;
  resolve_model(cmd, b.opts);
  resolve_scene(cmd, b.scene);
  BenchmarkConfig bench;
  bench.scene = b.scene.cfg;
  bench.train_scenes = b.train_scenes;
  bench.eval_scenes = b.eval_scenes;
  bench.model = b.opts.model;
  bench.train = b.opts.train;
  bench.train.validate();
  const auto seeds = parse_u64_list(b.seeds);
  const auto ks = parse_u64_list(a.ks);

  const fs::path dir(b.out);
  ensure_writable_dir(dir);
  Manifest manifest(dir / "manifest.json", "sweep-k", argv);
  manifest["model_config"] = model_config_json(bench.model);
  manifest["train_config"] = train_config_json(bench.train);
  if (b.synthetic) {
    manifest["scene_config"] = scene_config_json(bench.scene);
  } else {
    manifest["inputs"] = {{"train_dir", b.train_dir}, {"eval_dir", b.eval_dir}};
  }
  manifest["seeds"] = seeds;
  manifest["ks"] = ks;
  manifest["outputs"] = {(dir / "sweep_k.csv").string()};
  manifest.write();

  const SplitProvider provider = split_provider(b.synthetic, bench, b.train_dir, b.eval_dir);
  std::vector<SceneSplit> splits;
  for (auto seed : seeds) splits.push_back(provider(seed));

  std::ofstream csv(dir / "sweep_k.csv", std::ios::binary | std::ios::trunc);
  if (!csv) {
    throw IoError("cannot open sweep_k.csv for writing");
  }
  const int classes = splits.front().train.empty() ? 0 : splits.front().train.front().num_classes();
  csv << metrics_csv_header(classes, true) << "\n";
  csv.flush();

  int rc = kExitOk;
  for (auto k : ks) {
    ModelConfig model = bench.model;
    model.graph.k = static_cast<int>(std::min<std::uint64_t>(k, 1u << 30));
    try {
      if (k == 0) {
        throw ConfigError("K must be >= 1");
      }
      std::vector<RunResult> rows(seeds.size());
      parallel_for(seeds.size(), thread_budget(), [&](std::size_t s) {
        rows[s] = run_single(splits[s].train, splits[s].eval, Mode::kFull, seeds[s], model, bench.train);
      });
      for (const auto& r : rows) {
        csv << metrics_csv_row("full", std::to_string(r.seed), bench.train.iterations, r.final_loss,
                               r.metrics, classes, model.graph.k)
            << "\n";
      }
      csv.flush();
      std::cout << "K=" << k << " done\n";
    } catch (const NumericError& e) {
      std::cerr << "K=" << k << " failed: " << e.what() << "\n";
      rc = std::max(rc, kExitNumeric);
    } catch (const Error& e) {
      std::cerr << "K=" << k << " failed: " << e.what() << "\n";
      rc = kExitIoOrConfig;
    }
  }
  manifest.finish();
  return rc;
}

struct ExportArgs {
  ModelOptions opts;
  std::string scene;
  std::string checkpoint;
  bool untrained = false;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_export_graph(CLI::App* cmd, ExportArgs& a, const std::vector<std::string>& argv) {
  if (a.checkpoint.empty() == !a.untrained) {
    throw ConfigError("export-graph needs exactly one of --checkpoint or --untrained");
  }
  const fs::path out(a.out);
  if (out.has_parent_path()) {
    ensure_writable_dir(out.parent_path());
  }
  Manifest manifest(fs::path(out.string() + ".manifest.json"), "export-graph", argv);
  manifest["inputs"] = {{"scene", a.scene}, {"checkpoint", a.checkpoint}};
  manifest["seeds"] = {a.seed};
  manifest["outputs"] = {out.string()};

  const Scene scene = load_scene(a.scene);
  ModelConfig model;
  SemanticEncoder encoder;
  if (a.untrained) {
    resolve_model(cmd, a.opts);
    model = a.opts.model;
    encoder = Params::init(scene.feature_dim(), scene.num_classes(), model, a.seed).encoder;
  } else {
    const Checkpoint ckpt = load_checkpoint(a.checkpoint);
    model = ckpt.model;
    if (cmd->count("--k") > 0) model.graph.k = a.opts.model.graph.k;
    encoder = ckpt.params.encoder;
  }
  manifest["model_config"] = model_config_json(model);
  manifest.write();

  const Structure s = build_structure(scene, encoder, Mode::kFull, model);
  write_text(out, export_dot(scene, s.semantic, s.spatial));
  manifest.finish();
  std::cout << "wrote " << s.fused.edge_count() << " edges to " << out.string() << "\n";
  return kExitOk;
}

int dispatch(const std::vector<std::string>& args);

int cmd_replay(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) {
    throw IoError("cannot open " + manifest_path);
  }
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const ordered_json::parse_error& e) {
    throw MalformedRecordError(std::string("manifest: ") + e.what());
  }
  if (!j.contains("args") || !j["args"].is_array()) {
    throw MalformedRecordError("manifest: missing args");
  }
  return dispatch(j["args"].get<std::vector<std::string>>());
}

int dispatch(const std::vector<std::string>& args) {
  CLI::App app{"relgraph: relationship graph reasoning for small-object context"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kLibraryVersion);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write synthetic scene files");
  add_preset_option(generate, gen.scene.preset);
  add_scene_options(generate, gen.scene);
  generate->add_option("--scenes", gen.count, "Number of scenes");
  generate->add_option("--seed", gen.seed, "First scene seed (scene i uses seed + i)");
  generate->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "Train one ablation arm");
  add_preset_option(train_cmd, tr.opts.preset);
  add_model_options(train_cmd, tr.opts, true);
  train_cmd->add_option("--train-dir", tr.train_dir, "Directory of training scenes")->required();
  train_cmd->add_option("--eval-dir", tr.eval_dir, "Directory of held-out scenes");
  train_cmd->add_option("--mode", tr.mode, "baseline | sem | spa | full");
  train_cmd->add_option("--seed", tr.seed, "Initialization and batch-order seed");
  train_cmd->add_option("--out", tr.out, "Output directory")->required();
  train_cmd->add_flag("--freeze-gcn", tr.opts.train.freeze_gcn, "Do not update GCN weights");
  train_cmd->add_flag("--zero-gcn", tr.opts.train.zero_gcn, "Zero GCN weights (needs --freeze-gcn)");
  train_cmd->add_flag("--grad-check", tr.grad_check, "Finite-difference check before training");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  eval_cmd->add_option("--scenes", ev.scenes, "Directory of scenes")->required();
  eval_cmd->add_option("--checkpoint", ev.checkpoint, "Checkpoint file")->required();
  eval_cmd->add_option("--mode", ev.mode, "Override the checkpoint's mode");
  eval_cmd->add_option("--out", ev.out, "Optional output directory");

  AblateArgs ab;
  auto* ablate = app.add_subcommand("ablate", "Four-arm ablation over paired seeds");
  add_model_options(ablate, ab.opts, true);
  add_scene_options(ablate, ab.scene);
  add_preset_option(ablate, ab.opts.preset);
  ablate->add_option("--train-dir", ab.train_dir, "Directory of training scenes");
  ablate->add_option("--eval-dir", ab.eval_dir, "Directory of held-out scenes");
  ablate->add_flag("--synthetic", ab.synthetic, "Generate a fresh split per seed");
  ablate->add_option("--train-scenes", ab.train_scenes, "Synthetic training scenes per seed");
  ablate->add_option("--eval-scenes", ab.eval_scenes, "Synthetic held-out scenes per seed");
  ablate->add_option("--seeds", ab.seeds, "Comma-separated seeds");
  ablate->add_option("--out", ab.out, "Output directory")->required();

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep-k", "Full-mode runs over a list of K values");
  add_model_options(sweep, sw.base.opts, true);
  add_scene_options(sweep, sw.base.scene);
  add_preset_option(sweep, sw.base.opts.preset);
  sweep->add_option("--ks", sw.ks, "Comma-separated K values");
  sweep->add_option("--train-dir", sw.base.train_dir, "Directory of training scenes");
  sweep->add_option("--eval-dir", sw.base.eval_dir, "Directory of held-out scenes");
  sweep->add_flag("--synthetic", sw.base.synthetic, "Generate a fresh split per seed");
  sweep->add_option("--train-scenes", sw.base.train_scenes, "Synthetic training scenes per seed");
  sweep->add_option("--eval-scenes", sw.base.eval_scenes, "Synthetic held-out scenes per seed");
  sweep->add_option("--seeds", sw.base.seeds, "Comma-separated seeds")->default_str("1");
  sw.base.seeds = "1";
  sweep->add_option("--out", sw.base.out, "Output directory")->required();

  ExportArgs ex;
  auto* export_cmd = app.add_subcommand("export-graph", "Write the fused graph of a scene as DOT");
  add_preset_option(export_cmd, ex.opts.preset);
  add_model_options(export_cmd, ex.opts, false);
  export_cmd->add_option("--scene", ex.scene, "Scene file")->required();
  export_cmd->add_option("--checkpoint", ex.checkpoint, "Checkpoint providing the encoder");
  export_cmd->add_flag("--untrained", ex.untrained, "Use a freshly initialized encoder");
  export_cmd->add_option("--seed", ex.seed, "Encoder seed with --untrained");
  export_cmd->add_option("--out", ex.out, "Output .dot file")->required();

  std::string manifest_path;
  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.json")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitIoOrConfig;
  }

  try {
    if (*generate) return cmd_generate(generate, gen, args);
    if (*train_cmd) return cmd_train(train_cmd, tr, args);
    if (*eval_cmd) return cmd_eval(ev, args);
    if (*ablate) {
      ab.scene.preset = ab.opts.preset;
      return cmd_ablate(ablate, ab, args);
    }
    if (*sweep) {
      sw.base.scene.preset = sw.base.opts.preset;
      return cmd_sweep_k(sweep, sw, args);
    }
    if (*export_cmd) return cmd_export_graph(export_cmd, ex, args);
    if (*replay) return cmd_replay(manifest_path);
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoOrConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIoOrConfig;
  }
  return kExitIoOrConfig;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  return dispatch(args);
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) {
    args.emplace_back(argv[i]);
  }
  return run_cli(args);
}

}  // namespace relgraph
