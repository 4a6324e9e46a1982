#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "bdctm/dataset.hpp"
#include "bdctm/model.hpp"
#include "bdctm/nuts.hpp"
#include "bdctm/sampler.hpp"

namespace bdctm {

struct Rootogram {
  std::vector<int> r;
  std::vector<double> obs;
  std::vector<double> exp;
  std::vector<double> sqrt_obs;
  std::vector<double> sqrt_exp;
};

/// From predictive PMFs (n x (R_max + 1), column r = P(Y = r)) and counts.
Rootogram rootogram(const Matrix& pmf, const std::vector<int>& y);
/// Posterior-mean PMFs of a count model. Ordinal models raise ConfigError.
Rootogram rootogram(const Model& model, const Predictor& pred, const Dataset& data, int r_max);

/// r_i = Phi^-1(u_i), u_i ~ U(lower_i, upper_i); intervals narrower than
/// 1e-12 are widened to that width.
Vector quantile_residuals(const Vector& lower_cdf, const Vector& upper_cdf, Rng& rng);
/// Using posterior-mean CDFs F(y_i - 1) and F(y_i).
Vector quantile_residuals(const Model& model, const Predictor& pred, const Dataset& data, Rng& rng);

struct ScoreTotals {
  double logarithmic = 0.0;
  double brier = 0.0;
  double spherical = 0.0;
  std::size_t n = 0;

  ScoreTotals& operator+=(const ScoreTotals& o);
};

/// Scores of one forecast p over the support indices 0..K-1 with the
/// outcome at index `y`.
ScoreTotals score_one(const Vector& p, int y);

struct Waic {
  double waic = 0.0;
  double lppd = 0.0;
  double p_waic = 0.0;
};

/// From an S x n matrix of per-observation log-PMFs.
Waic waic(const Matrix& log_pmf);

struct ScoreReport {
  ScoreTotals total;
  std::vector<ScoreTotals> folds;
  std::optional<Waic> waic;
  std::vector<std::size_t> flagged_rows;  ///< rows scored with unseen levels
  int support_cap = 0;                    ///< counts: last support point scored
};

/// Sums over rows of a predictive PMF matrix (n x K) with outcome indices.
ScoreReport scores(const Matrix& pmf, const std::vector<int>& y);

/// Count responses: smallest K >= max(y) + 10 whose largest row tail mass
/// 1 - sum_{k<=K} p_k falls below 1e-8.
inline constexpr double kTailMass = 1e-8;

/// Predictive PMF matrix of a model over its support for the given rows.
/// Counts use the tail-mass cap; ordinal models use categories 1..c+1.
Matrix predictive_pmf(const Model& model, const Predictor& pred, const CovariateRows& cov,
                      int min_cap, bool plugin = false, int* cap = nullptr);

/// Scores held-out data with draw-averaged (default) or plug-in PMFs.
ScoreReport score_model(const Model& model, const Predictor& pred, const Dataset& data,
                        bool plugin = false, bool allow_unknown_levels = false);

/// Deterministic fold labels 0..k-1, balanced, shuffled by `seed`.
std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed);

/// k-fold cross-validation; folds are fitted concurrently.
ScoreReport kfold_cv(const ModelSpec& spec, const Dataset& data, int k, const NutsConfig& config,
                     std::uint64_t seed, bool plugin = false);

}  // namespace bdctm
