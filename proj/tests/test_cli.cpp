#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dot_grammar.hpp"
#include "relgraph/cli.hpp"
#include "relgraph/model.hpp"
#include "relgraph/scene.hpp"

#include "json.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace relgraph;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const char* env = std::getenv("RELGRAPH_TEST_TMP");
  const fs::path root = env ? fs::path(env) : fs::temp_directory_path() / "relgraph_cli_test";
  const fs::path p = root / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> csv_lines(const fs::path& p) {
  std::vector<std::string> out;
  std::istringstream in(slurp(p));
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

int run(std::vector<std::string> args) { return run_cli(args); }

// Small, fast scenes: 3 classes × 2 clusters × 4 regions, D = 6.
std::vector<std::string> small_scene_flags() {
  return {"--classes", "3", "--clusters", "2", "--regions", "4", "--dim", "6", "--ambiguity", "0.25",
          "--drift", "0.5", "--noise", "0.2", "--image-width", "400", "--image-height", "400"};
}

std::vector<std::string> concat(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

void make_scenes(const fs::path& dir, int count, int seed) {
  REQUIRE(run(concat({"generate", "--scenes", std::to_string(count), "--seed", std::to_string(seed),
                      "--out", dir.string()},
                     small_scene_flags())) == kExitOk);
}

std::vector<std::string> train_flags() {
  return {"--k", "4", "--iters", "40", "--batch", "4", "--lr", "0.1"};
}

}  // namespace

TEST_CASE("generate writes N scenes and a manifest, deterministically") {
  const fs::path a = workdir("gen_a"), b = workdir("gen_b");
  make_scenes(a, 10, 7);
  make_scenes(b, 10, 7);
  int files = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename().string();
    if (name == "manifest.json") continue;
    ++files;
    CHECK(slurp(e.path()) == slurp(b / name));
  }
  CHECK(files == 10);
  for (int s = 7; s < 17; ++s) CHECK(fs::exists(a / ("scene_" + std::to_string(s) + ".jsonl")));
  const auto m = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(m["command"] == "generate");
  CHECK(m["version"] == std::string(kLibraryVersion));
  CHECK(m["scene_config"]["num_classes"] == 3);
  CHECK(m["seeds"].size() == 10);
  CHECK(m.contains("wall_clock_seconds"));
  CHECK(m.contains("started_at"));
}

TEST_CASE("generate failure leaves no partial files") {
  SUBCASE("directory cannot be created") {
    CHECK(run({"generate", "--scenes", "2", "--out", "/proc/relgraph_nope"}) == kExitIoOrConfig);
  }
  SUBCASE("failure midway through") {
    const fs::path dir = workdir("gen_partial");
    // A non-empty directory where scene_5.jsonl should go makes that write fail after
    // scenes 3 and 4 have been written.
    fs::create_directories(dir / "scene_5.jsonl" / "blocker");
    CHECK(run(concat({"generate", "--scenes", "4", "--seed", "3", "--out", dir.string()},
                     small_scene_flags())) == kExitIoOrConfig);
    std::vector<std::string> left;
    for (const auto& e : fs::directory_iterator(dir)) left.push_back(e.path().filename().string());
    CHECK(left == std::vector<std::string>{"scene_5.jsonl"});
  }
  SUBCASE("invalid configuration") {
    const fs::path dir = workdir("gen_badcfg");
    CHECK(run({"generate", "--out", dir.string(), "--size-min", "40", "--size-max", "10"}) ==
          kExitIoOrConfig);
    CHECK(fs::is_empty(dir));
  }
}

TEST_CASE("argument errors") {
  CHECK(run({}) == kExitIoOrConfig);
  CHECK(run({"bogus"}) == kExitIoOrConfig);
  CHECK(run({"train", "--mode", "full"}) == kExitIoOrConfig);
  const fs::path out = workdir("bad_mode");
  const fs::path scenes = workdir("bad_mode_scenes");
  make_scenes(scenes, 2, 1);
  CHECK(run({"train", "--train-dir", scenes.string(), "--mode", "both", "--out", out.string()}) ==
        kExitIoOrConfig);
  CHECK(run({"train", "--train-dir", (scenes / "missing").string(), "--out", out.string()}) ==
        kExitIoOrConfig);
  CHECK(run({"generate", "--scenes", "abc", "--out", out.string()}) == kExitIoOrConfig);
  CHECK(run({"--version"}) == kExitOk);
}

TEST_CASE("train, eval and the residual identity") {
  const fs::path tr = workdir("train_scenes"), ev = workdir("eval_scenes");
  make_scenes(tr, 8, 100);
  make_scenes(ev, 3, 900);
  const fs::path full = workdir("train_full"), base = workdir("train_base"), zero = workdir("train_zero");
  CHECK(run(concat({"train", "--train-dir", tr.string(), "--eval-dir", ev.string(), "--mode", "full",
                    "--grad-check", "--out", full.string()},
                   train_flags())) == kExitOk);
  for (const char* f : {"manifest.json", "checkpoint.json", "metrics.csv", "summary.json"})
    CHECK(fs::exists(full / f));

  const auto rows = csv_lines(full / "metrics.csv");
  REQUIRE(rows.size() >= 3);
  CHECK(rows[0] == "mode,seed,iter,loss,acc_overall,acc_ambiguous,acc_class_0,acc_class_1,acc_class_2");
  CHECK(rows[1].rfind("full,0,0,", 0) == 0);

  // Train, then evaluate on the training scenes: above chance.
  const fs::path eval_out = workdir("eval_out");
  CHECK(run({"eval", "--scenes", tr.string(), "--checkpoint", (full / "checkpoint.json").string(),
             "--out", eval_out.string()}) == kExitOk);
  const auto e = nlohmann::json::parse(slurp(eval_out / "eval.json"));
  CHECK(e["metrics"]["acc_overall"].get<double>() > 1.0 / 3.0);

  CHECK(run(concat({"train", "--train-dir", tr.string(), "--eval-dir", ev.string(), "--mode",
                    "baseline", "--out", base.string()},
                   train_flags())) == kExitOk);
  CHECK(run(concat({"train", "--train-dir", tr.string(), "--eval-dir", ev.string(), "--mode", "full",
                    "--freeze-gcn", "--zero-gcn", "--out", zero.string()},
                   train_flags())) == kExitOk);
  const auto sb = nlohmann::json::parse(slurp(base / "summary.json"));
  const auto sz = nlohmann::json::parse(slurp(zero / "summary.json"));
  CHECK(sb["metrics"] == sz["metrics"]);
  CHECK(sb["final_train_loss"] == sz["final_train_loss"]);
  const auto lb = csv_lines(base / "metrics.csv"), lz = csv_lines(zero / "metrics.csv");
  REQUIRE(lb.size() == lz.size());
  for (std::size_t i = 1; i < lb.size(); ++i)
    CHECK(lb[i].substr(lb[i].find(',')) == lz[i].substr(lz[i].find(',')));

  CHECK(run({"train", "--train-dir", tr.string(), "--zero-gcn", "--out", zero.string()}) ==
        kExitIoOrConfig);
}

TEST_CASE("divergence exits with the numeric code") {
  const fs::path tr = workdir("diverge_scenes"), out = workdir("diverge");
  make_scenes(tr, 4, 1);
  CHECK(run({"train", "--train-dir", tr.string(), "--k", "4", "--iters", "50", "--batch", "2", "--lr",
             "1e12", "--momentum", "0.99", "--out", out.string()}) == kExitNumeric);
}

TEST_CASE("ablate smoke run with one seed") {
  const fs::path tr = workdir("abl_train"), ev = workdir("abl_eval"), out = workdir("abl_out");
  make_scenes(tr, 6, 10);
  make_scenes(ev, 3, 20);
  CHECK(run(concat({"ablate", "--train-dir", tr.string(), "--eval-dir", ev.string(), "--seeds", "5",
                    "--out", out.string()},
                   train_flags())) == kExitOk);
  const auto rows = csv_lines(out / "ablation.csv");
  REQUIRE(rows.size() == 1 + 4 + 4);
  int data = 0, means = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string mode, seed;
    std::getline(in, mode, ',');
    std::getline(in, seed, ',');
    if (seed == "mean") ++means;
    else {
      CHECK(seed == "5");
      ++data;
    }
  }
  CHECK(data == 4);
  CHECK(means == 4);
  const auto summary = nlohmann::json::parse(slurp(out / "summary.json"));
  CHECK(summary["modes"].size() == 4);
}

TEST_CASE("sweep-k") {
  const fs::path tr = workdir("sweep_train"), ev = workdir("sweep_eval");
  make_scenes(tr, 4, 30);
  make_scenes(ev, 2, 40);
  const std::vector<std::string> base{"sweep-k", "--train-dir", tr.string(), "--eval-dir", ev.string(),
                                      "--iters", "10", "--batch", "2"};
  SUBCASE("default list gives four rows, K beyond N still runs") {
    const fs::path out = workdir("sweep_default");
    CHECK(run(concat(base, {"--out", out.string()})) == kExitOk);
    const auto rows = csv_lines(out / "sweep_k.csv");
    REQUIRE(rows.size() == 5);
    CHECK(rows[1].rfind("16,full,", 0) == 0);
    CHECK(rows[4].rfind("96,full,", 0) == 0);
  }
  SUBCASE("rows for earlier K survive a later failure") {
    const fs::path out = workdir("sweep_fail");
    CHECK(run(concat(base, {"--ks", "8,16,0", "--out", out.string()})) == kExitIoOrConfig);
    const auto rows = csv_lines(out / "sweep_k.csv");
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].rfind("8,full,", 0) == 0);
    CHECK(rows[2].rfind("16,full,", 0) == 0);
  }
}

TEST_CASE("export-graph emits valid DOT matching the fused graph") {
  const fs::path dir = workdir("export");
  make_scenes(dir, 1, 55);
  const fs::path scene_path = dir / "scene_55.jsonl";
  const fs::path out = dir / "graph.dot";
  CHECK(run({"export-graph", "--scene", scene_path.string(), "--untrained", "--seed", "3", "--k", "4",
             "--out", out.string()}) == kExitOk);
  const auto g = dot::parse(slurp(out));

  const Scene scene = load_scene(scene_path);
  ModelConfig model;
  model.graph.k = 4;
  const Params p = Params::init(scene.feature_dim(), scene.num_classes(), model, 3);
  const Structure s = build_structure(scene, p.encoder, Mode::kFull, model);
  CHECK(static_cast<Index>(g.nodes.size()) == scene.size());
  CHECK(static_cast<Index>(g.edges.size()) == s.fused.to_dense().sum() / 2);
  for (std::size_t e = 0; e < g.edges.size(); ++e) {
    const Index i = std::stol(g.edges[e].first.substr(1));
    const Index j = std::stol(g.edges[e].second.substr(1));
    CHECK(s.fused.has_edge(i, j));
    const bool both = s.semantic.has_edge(i, j) && s.spatial.has_edge(i, j);
    CHECK(g.edge_attrs[e].at("style") == (both ? "solid" : "dashed"));
  }
  for (Index i = 0; i < scene.size(); ++i) {
    const auto& attrs = g.node_attrs.at("n" + std::to_string(i));
    CHECK(attrs.at("class") == std::to_string(scene.regions[i].label));
    CHECK(attrs.count("fillcolor") == 1);
  }
  CHECK(fs::exists(fs::path(out.string() + ".manifest.json")));

  SUBCASE("graph without edges") {
    const fs::path lone = workdir("export_lone");
    REQUIRE(run({"generate", "--classes", "1", "--clusters", "1", "--regions", "1", "--out", lone.string()}) ==
            kExitOk);
    CHECK(run({"export-graph", "--scene", (lone / "scene_0.jsonl").string(), "--untrained", "--out",
               (lone / "g.dot").string()}) == kExitOk);
    const auto lg = dot::parse(slurp(lone / "g.dot"));
    CHECK(lg.nodes.size() == 1);
    CHECK(lg.edges.empty());
  }
  SUBCASE("inputs are required") {
    CHECK(run({"export-graph", "--scene", scene_path.string(), "--out", out.string()}) == kExitIoOrConfig);
    CHECK(run({"export-graph", "--scene", (dir / "none.jsonl").string(), "--untrained", "--out",
               out.string()}) == kExitIoOrConfig);
  }
}

TEST_CASE("DOT grammar checker rejects malformed input") {
  CHECK_THROWS((void)dot::parse("graph { a -- }"));
  CHECK_THROWS((void)dot::parse("digraph { a -> b }"));
  CHECK_THROWS((void)dot::parse("graph { a [color=red }"));
  CHECK_THROWS((void)dot::parse("graph { \"open }"));
  CHECK_NOTHROW((void)dot::parse("graph g { node [shape=box]; a -- b -- c [w=1.5]; d }"));
}

TEST_CASE("replay reproduces outputs byte for byte") {
  const fs::path tr = workdir("replay_scenes"), out = workdir("replay_train");
  make_scenes(tr, 4, 60);
  CHECK(run(concat({"train", "--train-dir", tr.string(), "--out", out.string()}, train_flags())) == kExitOk);
  const std::string ckpt = slurp(out / "checkpoint.json");
  const std::string metrics = slurp(out / "metrics.csv");
  const std::string scene = slurp(tr / "scene_61.jsonl");
  fs::remove(out / "checkpoint.json");
  fs::remove(out / "metrics.csv");
  fs::remove(tr / "scene_61.jsonl");
  CHECK(run({"replay", (tr / "manifest.json").string()}) == kExitOk);
  CHECK(run({"replay", (out / "manifest.json").string()}) == kExitOk);
  CHECK(slurp(out / "checkpoint.json") == ckpt);
  CHECK(slurp(out / "metrics.csv") == metrics);
  CHECK(slurp(tr / "scene_61.jsonl") == scene);
  CHECK(run({"replay", (tr / "nothing.json").string()}) == kExitIoOrConfig);
}
