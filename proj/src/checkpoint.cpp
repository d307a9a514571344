#include "relgraph/checkpoint.hpp"

#include "relgraph/error.hpp"

#include "json.hpp"

#include <fstream>
#include <map>
#include <sstream>

namespace relgraph {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kFormatTag = "relgraph-checkpoint";

ordered_json tensor_to_json(const std::string& name, const Matrix& t) {
  ordered_json j;
  j["name"] = name;
  j["rows"] = t.rows();
  j["cols"] = t.cols();
  auto& data = j["data"] = ordered_json::array();
  for (Index k = 0; k < t.size(); ++k) {
    data.push_back(t.data()[k]);
  }
  return j;
}

Matrix tensor_from_json(const ordered_json& j) {
  const auto rows = j.at("rows").get<Index>();
  const auto cols = j.at("cols").get<Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || !data.is_array() || static_cast<Index>(data.size()) != rows * cols) {
    throw MalformedRecordError("checkpoint: tensor '" + j.value("name", std::string("?")) +
                               "' has inconsistent shape");
  }
  Matrix t(rows, cols);
  for (Index k = 0; k < t.size(); ++k) {
    t.data()[k] = data[static_cast<std::size_t>(k)].get<double>();
  }
  return t;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  ordered_json j;
  j["format"] = kFormatTag;
  j["version"] = kCheckpointVersion;
  j["mode"] = std::string(mode_name(ckpt.mode));
  auto& m = j["model"];
  m["k"] = ckpt.model.graph.k;
  m["overlap_threshold"] = ckpt.model.graph.overlap_threshold;
  m["lambda"] = ckpt.model.graph.lambda;
  m["gcn_layers"] = ckpt.model.gcn_layers;
  m["slope"] = ckpt.model.slope;
  m["soft_edges"] = ckpt.model.soft_edges;
  m["aux_score_weight"] = ckpt.model.aux_score_weight;
  m["encoder_slope"] = ckpt.params.encoder.slope();
  m["gcn_slope"] = ckpt.params.gcn.slope;
  auto& tensors = j["tensors"] = ordered_json::array();
  ckpt.params.for_each(
      [&](const std::string& name, const Matrix& t) { tensors.push_back(tensor_to_json(name, t)); });
  return j.dump() + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::parse_error& e) {
    throw MalformedRecordError(std::string("checkpoint: not valid JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kFormatTag) {
    throw MalformedRecordError("checkpoint: missing format tag");
  }
  if (!j.contains("version") || !j["version"].is_number_integer() ||
      j["version"].get<int>() != kCheckpointVersion) {
    throw VersionMismatchError("checkpoint: unsupported version");
  }
  Checkpoint ckpt;
  try {
    ckpt.mode = parse_mode(j.at("mode").get<std::string>());
    const auto& m = j.at("model");
    ckpt.model.graph.k = m.at("k").get<int>();
    ckpt.model.graph.overlap_threshold = m.at("overlap_threshold").get<double>();
    ckpt.model.graph.lambda = m.at("lambda").get<double>();
    ckpt.model.gcn_layers = m.at("gcn_layers").get<int>();
    ckpt.model.slope = m.at("slope").get<double>();
    ckpt.model.soft_edges = m.at("soft_edges").get<bool>();
    ckpt.model.aux_score_weight = m.at("aux_score_weight").get<double>();

    std::map<std::string, Matrix> tensors;
    for (const auto& t : j.at("tensors")) {
      tensors.emplace(t.at("name").get<std::string>(), tensor_from_json(t));
    }
    const auto take = [&](const std::string& name) {
      auto it = tensors.find(name);
      if (it == tensors.end()) {
        throw MalformedRecordError("checkpoint: missing tensor '" + name + "'");
      }
      Matrix out = std::move(it->second);
      tensors.erase(it);
      return out;
    };

    Params& p = ckpt.params;
    p.encoder.set_slope(m.at("encoder_slope").get<double>());
    for (std::size_t l = 0;; ++l) {
      const std::string prefix = "encoder." + std::to_string(l);
      if (!tensors.contains(prefix + ".weight")) break;
      p.encoder.layers().push_back({take(prefix + ".weight"), take(prefix + ".bias")});
    }
    p.gcn.slope = m.at("gcn_slope").get<double>();
    for (int l = 1; l <= ckpt.model.gcn_layers; ++l) {
      p.gcn.weights.push_back(take("gcn." + std::to_string(l) + ".weight"));
    }
    p.head.weight = take("head.weight");
    p.head.bias = take("head.bias");
    if (!tensors.empty()) {
      throw MalformedRecordError("checkpoint: unexpected tensor '" + tensors.begin()->first + "'");
    }
    p.encoder.validate();
    p.gcn.validate();
    if (p.head.bias.rows() != 1 || p.head.bias.cols() != p.head.weight.cols() ||
        p.gcn.dim() != p.head.weight.rows() || p.encoder.input_dim() != p.head.weight.rows()) {
      throw MalformedRecordError("checkpoint: tensor shapes do not chain");
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedRecordError(std::string("checkpoint: ") + e.what());
  } catch (const DimensionError& e) {
    throw MalformedRecordError(std::string("checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  out << serialize_checkpoint(ckpt);
  if (!out.flush()) {
    throw IoError("failed writing " + path.string());
  }
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_checkpoint(buf.str());
}

}  // namespace relgraph
