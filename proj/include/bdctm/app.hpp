#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <optional>
#include <vector>

#include "bdctm/config.hpp"
#include "bdctm/dataset.hpp"
#include "bdctm/diagnostics.hpp"
#include "bdctm/manifest.hpp"
#include "bdctm/model.hpp"

namespace bdctm {

namespace fs = std::filesystem;

/// Command-line overrides of the sampler section.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<int> threads;
};

/// Writes draws.csv, summary.json, config.json and manifest.json into `out`.
RunManifest fit_command(const fs::path& config, const fs::path& data, const fs::path& out,
                        const Overrides& overrides = {});

/// A fit restored from its run directory.
struct LoadedFit {
  fs::path dir;
  RunManifest manifest;
  FitConfig config;
  Dataset train;
  Model model;
  Matrix beta;  ///< internal scale, S x P
};

/// Verifies version and hashes; throws StaleArtifactError on mismatch.
LoadedFit load_fit(const fs::path& manifest);

/// Posterior-mean CDF and PMF per row and y: predictions.csv (row, y, cdf, pmf).
/// An empty `ys` evaluates the whole ordinal scale, or 0..max training count.
void predict_command(const fs::path& manifest, const fs::path& data, std::vector<int> ys, const fs::path& out);

/// scores.json. With folds > 0 the fit's config is cross-validated on the
/// training data; otherwise `data` (default: training data) is scored.
ScoreReport score_command(const fs::path& manifest, const std::optional<fs::path>& data, int folds,
                          const fs::path& out, const Overrides& overrides = {});

/// rootogram.csv (r, obs, exp; count models) and residuals.csv (row, y, residual).
void diagnose_command(const fs::path& manifest, const std::optional<fs::path>& data, const fs::path& out,
                      const Overrides& overrides = {});

/// results.csv of the simulation study.
std::vector<ResultRow> simulate_command(const fs::path& config, const fs::path& out,
                                        const Overrides& overrides = {});

/// 2 config/stale artifact, 3 data, 4 sampler, 1 anything else.
int exit_code(const std::exception& e);

/// Posterior summary of a draw matrix with named columns.
nlohmann::json summarize(const Matrix& draws, const std::vector<std::string>& names);

}  // namespace bdctm
