#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace latfuse::cli {

/// Provenance record written next to every output file.
struct RunManifest {
  std::string command;
  /// Arguments that reproduce the run, with the seed made explicit.
  std::vector<std::string> replay_args;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::uint64_t seed = 0;
  bool seed_from_entropy = false;
  std::vector<std::filesystem::path> artifacts;
  std::chrono::system_clock::time_point started;
  std::chrono::system_clock::time_point finished;

  nlohmann::ordered_json to_json() const;
  static RunManifest from_json(const nlohmann::ordered_json& j);
};

/// `<output>.manifest.json`
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

void write_manifest(const std::filesystem::path& output, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& path);

/// ISO 8601 UTC with milliseconds.
std::string format_timestamp(std::chrono::system_clock::time_point t);

std::string tool_version();

}  // namespace latfuse::cli
