#pragma once

#include "relgraph/model.hpp"

#include <filesystem>
#include <string>

namespace relgraph {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig model;
  Mode mode = Mode::kFull;
  Params params;
};

/// JSON blob: format tag, version, model config, and one {name, rows, cols, data} entry per
/// tensor. Doubles are written in shortest round-trip form, so load(save(x)) is exact.
[[nodiscard]] std::string serialize_checkpoint(const Checkpoint& ckpt);
[[nodiscard]] Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
[[nodiscard]] Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace relgraph
