#pragma once

#include <string>

#include "bdctm/linalg.hpp"

namespace bdctm {

/// Log-link count GLM fit. `X` carries its own intercept column.
struct GlmFit {
  Vector coef;
  Matrix cov;  ///< inverse Fisher information
  double loglik = 0.0;
  int iterations = 0;
};

struct NegBinFit : GlmFit {
  double theta = 0.0;          ///< size parameter, V = mu + mu^2 / theta
  bool poisson_limit = false;  ///< theta ran off towards infinity
};

double poisson_log_pmf(double y, double mu);
double negbin_log_pmf(double y, double mu, double theta);

/// Poisson MLE by IRLS. Throws ConvergenceError after max_iter iterations.
GlmFit fit_poisson(const Matrix& X, const Vector& y, int max_iter = 200, double tol = 1e-10);

/// Negative binomial MLE: IRLS for the coefficients alternated with Newton
/// steps on log(theta).
NegBinFit fit_negbin(const Matrix& X, const Vector& y, int max_iter = 200, double tol = 1e-10);

/// theta above this is reported as the Poisson limit.
inline constexpr double kThetaPoissonLimit = 1e6;

}  // namespace bdctm
