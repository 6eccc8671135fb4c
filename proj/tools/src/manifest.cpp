#include "latfuse_cli/manifest.hpp"

#include <cstdio>
#include <ctime>

#include "latfuse/errors.hpp"
#include "latfuse/io.hpp"

#ifndef LATFUSE_VERSION
#define LATFUSE_VERSION "unknown"
#endif

namespace latfuse::cli {

using Json = nlohmann::ordered_json;

std::string tool_version() { return LATFUSE_VERSION; }

std::string format_timestamp(std::chrono::system_clock::time_point t) {
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(t.time_since_epoch()).count();
  const std::time_t secs = static_cast<std::time_t>(ms / 1000);
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof(out), "%s.%03dZ", buf, static_cast<int>(ms % 1000));
  return out;
}

Json RunManifest::to_json() const {
  Json art = Json::array();
  for (const auto& p : artifacts) art.push_back(p.string());
  return Json{{"format", "latfuse-manifest"},
              {"version", 1},
              {"tool_version", tool_version()},
              {"command", command},
              {"replay_args", replay_args},
              {"seed", seed},
              {"seed_from_entropy", seed_from_entropy},
              {"config", config},
              {"artifacts", std::move(art)},
              {"started", format_timestamp(started)},
              {"finished", format_timestamp(finished)}};
}

RunManifest RunManifest::from_json(const Json& j) {
  if (j.value("format", "") != "latfuse-manifest" || j.value("version", 0) != 1) {
    throw FormatError("not a latfuse manifest");
  }
  RunManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.replay_args = j.at("replay_args").get<std::vector<std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.seed_from_entropy = j.at("seed_from_entropy").get<bool>();
    m.config = j.at("config");
    for (const auto& a : j.at("artifacts")) m.artifacts.emplace_back(a.get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("corrupt manifest: ") + e.what());
  }
  return m;
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const std::filesystem::path& output, const RunManifest& m) {
  write_file_atomic(manifest_path_for(output), m.to_json().dump(1) + "\n");
}

RunManifest read_manifest(const std::filesystem::path& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  return RunManifest::from_json(j);
}

}  // namespace latfuse::cli
