#pragma once
// No-U-Turn sampler with multinomial trajectory sampling, the generalized
// U-turn criterion, dual-averaging step size adaptation and windowed
// diagonal mass adaptation.

#include <cstdint>
#include <functional>
#include <random>

#include "bdctm/linalg.hpp"

namespace bdctm {

using Rng = std::mt19937_64;

/// Log density with gradient. May return -inf; `grad` is only read when the
/// value is finite.
using LogDensity = std::function<double(const Vector& q, Vector& grad)>;

/// Position with cached log density and gradient.
struct HmcState {
  Vector q;
  double logp = 0.0;
  Vector grad;
};

struct PhasePoint {
  Vector q;
  Vector p;
  Vector grad;
  double logp = 0.0;
};

struct NutsStats {
  double step_size = 0.0;
  int tree_depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double accept_stat = 0.0;
  double energy = 0.0;
  double log_density = 0.0;
};

double hamiltonian(const PhasePoint& z, const Vector& inv_mass);

/// One leapfrog step of size eps (negative eps integrates backwards).
void leapfrog(PhasePoint& z, const LogDensity& f, const Vector& inv_mass, double eps);

/// Hamiltonian error that declares a trajectory divergent.
inline constexpr double kMaxDeltaH = 1000.0;

/// One NUTS transition from `state`, which is replaced by the draw.
NutsStats nuts_transition(HmcState& state, const LogDensity& f, const Vector& inv_mass, double eps,
                          int max_depth, Rng& rng);

/// Doubles or halves eps until the one-step acceptance probability crosses
/// 1/2 at `state`. Throws SamplerError if eps leaves [1e-300, 1e7].
double init_step_size(const HmcState& state, const LogDensity& f, const Vector& inv_mass,
                      double eps, Rng& rng);

/// Nesterov dual averaging of log step size.
class DualAveraging {
 public:
  explicit DualAveraging(double delta = 0.8, double gamma = 0.05, double t0 = 10.0,
                         double kappa = 0.75);

  /// Reset the iterates and set mu = log(10 eps).
  void restart(double eps);
  /// Feed one acceptance statistic; returns the next step size. No-op after
  /// freeze().
  double update(double accept_stat);
  /// Averaged step size exp(x_bar).
  double averaged() const;
  /// Stop adapting; returns the averaged step size.
  double freeze();
  bool frozen() const { return frozen_; }
  double current() const { return eps_; }

 private:
  double delta_, gamma_, t0_, kappa_;
  double mu_ = 0.0, s_bar_ = 0.0, x_bar_ = 0.0, eps_ = 1.0;
  int counter_ = 0;
  bool frozen_ = false;
};

/// Warm-up windows: initial fast buffer, doubling slow windows for the
/// mass matrix, terminal fast buffer. Compressed to 15% / 75% / 10% when the
/// warm-up is shorter than init + base + term.
class WindowSchedule {
 public:
  WindowSchedule(int warmup, int init_buffer = 75, int term_buffer = 50, int base_window = 50);

  int warmup() const { return warmup_; }
  int init_buffer() const { return init_; }
  int term_buffer() const { return term_; }

  /// Whether iteration `it` (0-based) contributes a mass-matrix sample.
  bool in_window(int it) const;
  /// Ends of the slow windows (0-based iteration indices, inclusive).
  const std::vector<int>& window_ends() const { return ends_; }
  bool end_of_window(int it) const;

 private:
  int warmup_, init_, term_;
  std::vector<int> ends_;
};

/// Diagonal inverse mass: 0.95 * sample variance + 0.05. Coordinates with
/// zero variance keep their previous value.
Vector regularized_inv_mass(const Vector& variance, const Vector& previous);

/// Running mean/variance (Welford).
class VarianceEstimator {
 public:
  explicit VarianceEstimator(int dim = 0);
  void add(const Vector& x);
  void restart();
  int count() const { return n_; }
  Vector variance() const;  ///< sample variance (n - 1)

 private:
  int n_ = 0;
  Vector mean_, m2_;
};

/// NUTS with the full warm-up logic. Adaptation happens on iterations
/// 0..warmup-1; afterwards the step size and mass are frozen.
class AdaptiveNuts {
 public:
  AdaptiveNuts(int dim, int warmup, double target_accept = 0.8, int max_depth = 10);

  /// Heuristic initial step size at the starting point.
  void initialize(const HmcState& state, const LogDensity& f, Rng& rng);
  NutsStats step(HmcState& state, const LogDensity& f, Rng& rng);

  double step_size() const { return eps_; }
  const Vector& inv_mass() const { return inv_mass_; }
  int iteration() const { return it_; }

 private:
  int warmup_;
  int max_depth_;
  double eps_ = 1.0;
  Vector inv_mass_;
  DualAveraging da_;
  WindowSchedule windows_;
  VarianceEstimator var_;
  int it_ = 0;
};

}  // namespace bdctm
