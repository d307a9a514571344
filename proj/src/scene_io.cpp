#include "relgraph/error.hpp"
#include "relgraph/scene.hpp"

#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace relgraph {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json config_to_json(const SceneConfig& cfg) {
  ordered_json j;
  j["num_classes"] = cfg.num_classes;
  j["clusters_per_class"] = cfg.clusters_per_class;
  j["regions_per_cluster"] = cfg.regions_per_cluster;
  j["image_size"] = {cfg.image_width, cfg.image_height};
  j["cluster_spread"] = cfg.cluster_spread;
  j["size_range"] = {cfg.size_min, cfg.size_max};
  j["shape_jitter"] = cfg.shape_jitter;
  j["feature_dim"] = cfg.feature_dim;
  j["feature_noise"] = cfg.feature_noise;
  j["appearance_drift"] = cfg.appearance_drift;
  j["ambiguity_fraction"] = cfg.ambiguity_fraction;
  j["max_regions"] = cfg.max_regions;
  j["prototype_seed"] = cfg.prototype_seed;
  return j;
}

SceneConfig config_from_json(const ordered_json& j) {
  SceneConfig cfg;
  cfg.num_classes = j.at("num_classes").get<int>();
  cfg.clusters_per_class = j.at("clusters_per_class").get<int>();
  cfg.regions_per_cluster = j.at("regions_per_cluster").get<int>();
  cfg.image_width = j.at("image_size").at(0).get<double>();
  cfg.image_height = j.at("image_size").at(1).get<double>();
  cfg.cluster_spread = j.at("cluster_spread").get<double>();
  cfg.size_min = j.at("size_range").at(0).get<double>();
  cfg.size_max = j.at("size_range").at(1).get<double>();
  cfg.shape_jitter = j.at("shape_jitter").get<double>();
  cfg.feature_dim = j.at("feature_dim").get<int>();
  cfg.feature_noise = j.at("feature_noise").get<double>();
  cfg.appearance_drift = j.at("appearance_drift").get<double>();
  cfg.ambiguity_fraction = j.at("ambiguity_fraction").get<double>();
  cfg.max_regions = j.at("max_regions").get<int>();
  cfg.prototype_seed = j.at("prototype_seed").get<std::uint64_t>();
  return cfg;
}

}  // namespace

std::string serialize_scene(const Scene& scene) {
  std::string out;
  ordered_json header;
  header["schema_version"] = kSceneSchemaVersion;
  header["cfg"] = config_to_json(scene.cfg);
  header["seed"] = scene.seed;
  header["num_regions"] = scene.regions.size();
  out += header.dump();
  out += '\n';
  for (Index i = 0; i < scene.size(); ++i) {
    const Region& r = scene.regions[static_cast<std::size_t>(i)];
    ordered_json rec;
    rec["x"] = r.box.x;
    rec["y"] = r.box.y;
    rec["w"] = r.box.w;
    rec["h"] = r.box.h;
    rec["label"] = r.label;
    rec["ambiguous"] = r.ambiguous;
    rec["blend_label"] = r.blend_label;
    auto& feat = rec["feat"] = ordered_json::array();
    for (Index d = 0; d < scene.features.cols(); ++d) {
      feat.push_back(scene.features(i, d));
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

Scene parse_scene(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw MalformedRecordError("scene: missing header record");
  }

  ordered_json header;
  try {
    header = ordered_json::parse(line);
  } catch (const ordered_json::parse_error& e) {
    throw MalformedRecordError(std::string("scene: header is not valid JSON: ") + e.what());
  }
  if (!header.is_object() || !header.contains("schema_version")) {
    throw MalformedRecordError("scene: header lacks schema_version");
  }
  if (!header["schema_version"].is_number_integer() ||
      header["schema_version"].get<long long>() != kSceneSchemaVersion) {
    throw VersionMismatchError("scene: unsupported schema_version " +
                               header["schema_version"].dump() + " (expected " +
                               std::to_string(kSceneSchemaVersion) + ")");
  }

  Scene scene;
  std::size_t expected = 0;
  try {
    scene.cfg = config_from_json(header.at("cfg"));
    scene.seed = header.at("seed").get<std::uint64_t>();
    expected = header.at("num_regions").get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecordError(std::string("scene: bad header: ") + e.what());
  }

  const Index dim = scene.cfg.feature_dim;
  scene.regions.reserve(expected);
  scene.features.resize(static_cast<Index>(expected), dim);
  std::size_t line_no = 1;
  while (scene.regions.size() < expected && std::getline(in, line)) {
    ++line_no;
    try {
      const auto rec = ordered_json::parse(line);
      Region r;
      r.box = Box{rec.at("x").get<double>(), rec.at("y").get<double>(), rec.at("w").get<double>(),
                  rec.at("h").get<double>()};
      r.label = rec.at("label").get<int>();
      r.ambiguous = rec.value("ambiguous", false);
      r.blend_label = rec.value("blend_label", -1);
      const auto& feat = rec.at("feat");
      if (!feat.is_array() || static_cast<Index>(feat.size()) != dim) {
        throw MalformedRecordError("scene: line " + std::to_string(line_no) +
                                   ": feature length does not match feature_dim");
      }
      if (!r.box.valid() || r.label < 0 || r.label >= scene.cfg.num_classes) {
        throw MalformedRecordError("scene: line " + std::to_string(line_no) +
                                   ": invalid box or label");
      }
      const auto row = static_cast<Index>(scene.regions.size());
      for (Index d = 0; d < dim; ++d) {
        scene.features(row, d) = feat[static_cast<std::size_t>(d)].get<double>();
      }
      scene.regions.push_back(r);
    } catch (const nlohmann::json::exception& e) {
      throw MalformedRecordError("scene: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (scene.regions.size() != expected) {
    throw MalformedRecordError("scene: truncated, expected " + std::to_string(expected) +
                               " regions, found " + std::to_string(scene.regions.size()));
  }
  return scene;
}

void save_scene(const Scene& scene, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << serialize_scene(scene);
  out.flush();
  if (!out) {
    throw IoError("failed writing " + path.string());
  }
}

Scene load_scene(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("failed reading " + path.string());
  }
  return parse_scene(buf.str());
}

std::vector<Scene> load_scene_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec)) {
    throw IoError("not a directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.starts_with("scene_") && name.ends_with(".jsonl")) {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Scene> scenes;
  scenes.reserve(files.size());
  for (const auto& f : files) {
    scenes.push_back(load_scene(f));
  }
  // scene_10 sorts before scene_7 by name; order by seed instead.
  std::stable_sort(scenes.begin(), scenes.end(),
                   [](const Scene& a, const Scene& b) { return a.seed < b.seed; });
  return scenes;
}

}  // namespace relgraph
