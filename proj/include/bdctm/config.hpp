#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bdctm/model.hpp"
#include "bdctm/sampler.hpp"
#include "bdctm/simstudy.hpp"

namespace bdctm {

/// Model and sampler settings of a fit. Every ConfigError names the JSON
/// pointer of the offending entry, e.g. "/terms/1/dimension".
struct FitConfig {
  ModelSpec model;
  NutsConfig sampler;
};

FitConfig parse_fit_config(const nlohmann::json& doc);
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);

/// Reads and parses a JSON file; syntax errors become ConfigError.
nlohmann::json load_json(const std::filesystem::path& path);

nlohmann::json to_json(const ModelSpec& spec);
nlohmann::json to_json(const NutsConfig& config);

}  // namespace bdctm
