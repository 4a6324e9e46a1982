#pragma once

#include <cstdint>
#include <vector>

#include "bdctm/likelihood.hpp"
#include "bdctm/model.hpp"
#include "bdctm/nuts.hpp"
#include "bdctm/penalty.hpp"

namespace bdctm {

struct NutsConfig {
  int iterations = 2000;
  int burnin = 1000;  ///< discarded iterations (>= warmup)
  int warmup = 1000;  ///< adaptation iterations
  double target_accept = 0.8;
  int max_treedepth = 10;
  std::uint64_t seed = 1;
  int chains = 1;
  int threads = 0;  ///< 0: one per chain, capped by the hardware
  bool store_log_pmf = true;
};

/// Throws ConfigError for inconsistent settings.
void validate(const NutsConfig& config);

/// SplitMix64 stream derivation: independent seeds from one master seed.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t stream);

/// Draw from IG(a + rank/2, b + quad/2), quad = beta_j^T K_j beta_j.
double gibbs_tau2(double quad, int rank, double a, double b, Rng& rng);

/// Unnormalized log weights of the omega grid for one tensor block.
std::vector<double> omega_log_weights(const Vector& beta_j, const Matrix& ka, const Matrix& kb,
                                      double tau2, const AnisotropyGrid& grid);
/// Categorical draw over the grid; returns the grid index.
int gibbs_omega(const Vector& beta_j, const Matrix& ka, const Matrix& kb, double tau2,
                const AnisotropyGrid& grid, Rng& rng);

/// Retained draws of one chain. beta is on the internal (sampling) scale.
struct ChainDraws {
  Matrix beta;     ///< S x P
  Matrix tau2;     ///< S x T
  Matrix omega;    ///< S x W (grid values)
  Matrix log_pmf;  ///< S x n, empty unless stored
  std::vector<NutsStats> stats;  ///< every iteration, warm-up included
  int divergences = 0;           ///< among retained iterations
  double step_size = 0.0;
  Vector inv_mass;
};

struct PosteriorDraws {
  std::vector<ChainDraws> chains;

  std::size_t draws() const;
  int divergences() const;
  /// Chains stacked in order.
  Matrix beta() const;
  Matrix tau2() const;
  Matrix omega() const;
  Matrix log_pmf() const;
};

/// One NUTS-within-Gibbs chain: NUTS on beta, then every tau2, then every
/// omega. Deterministic in `seed`.
ChainDraws run_chain(const Model& model, const ModelDesign& design, const NutsConfig& config,
                     std::uint64_t seed);

/// Runs config.chains chains concurrently with seeds split from config.seed.
PosteriorDraws run_chains(const Model& model, const ModelDesign& design, const NutsConfig& config);

}  // namespace bdctm
