#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <json.hpp>

namespace bdctm {

std::string_view software_version();

/// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Inputs and outputs of one fit. Re-running with the recorded inputs
/// reproduces the draws file byte for byte.
struct RunManifest {
  std::string version;
  std::string config_sha256;  ///< of the effective config.json written next to it
  std::string data_sha256;
  std::string data_path;  ///< absolute
  std::uint64_t seed = 0;
  double fit_seconds = 0.0;
  std::map<std::string, std::string> outputs;  ///< role -> file name in the run directory
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

void write_manifest(const std::filesystem::path& path, const RunManifest& m);
/// Throws StaleArtifactError on unreadable manifests or a version mismatch.
RunManifest read_manifest(const std::filesystem::path& path);

}  // namespace bdctm
