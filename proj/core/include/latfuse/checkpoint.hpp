#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "latfuse/optimizer.hpp"

namespace latfuse {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume or evaluate a training run.
struct Checkpoint {
  FusionModel model;
  TrainConfig config;
  TrainState state;
  TrainHistory history;
};

/// Structured-text (JSON) checkpoint. Numbers are stored as shortest
/// round-trip decimal strings, so save/load is exact.
std::string checkpoint_to_json(const Checkpoint& ckpt);

/// Throws FormatError on malformed input, a version mismatch, or a config
/// hash that does not match the stored config.
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

nlohmann::ordered_json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::ordered_json& j);

/// FNV-1a 64 of the compact config JSON, as 16 hex digits.
std::string config_hash(const TrainConfig& cfg);

}  // namespace latfuse
