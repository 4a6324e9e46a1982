#pragma once

#include <vector>

#include "bdctm/linalg.hpp"
#include "bdctm/model.hpp"
#include "bdctm/refdist.hpp"

namespace bdctm {

/// log P(Y = y_i) from the linear predictors of the current (u) and lagged
/// (l) design rows. Sentinel sides fix the CDF at 0 or 1 and ignore the
/// predictor. Returns -inf for an empty or negative cell.
double log_pmf_obs(const ReferenceDistribution& dist, Side upper_side, double u, Side lower_side,
                   double l);

/// Log-likelihood and log-posterior of one design. Holds scratch buffers,
/// so each chain owns its own instance; the model and design are shared
/// read-only and must outlive it.
class LogPosterior {
 public:
  LogPosterior(const Model& model, const ModelDesign& design);

  const Model& model() const { return *model_; }
  const ModelDesign& design() const { return *design_; }

  /// Sum of per-observation log-PMFs; -inf if any is -inf or the monotone
  /// map overflows. When `grad` is given and the value is finite it
  /// receives d loglik / d beta.
  double loglik(const Vector& beta, Vector* grad = nullptr);

  /// loglik - 1/2 beta^T K(tau2, omega) beta with matching gradient.
  double operator()(const Vector& beta, const std::vector<double>& tau2,
                    const std::vector<int>& omega, Vector* grad = nullptr);

  /// Per-observation log-PMFs of the last evaluation.
  const Vector& log_pmf() const { return log_pmf_; }

 private:
  const Model* model_;
  const ModelDesign* design_;
  Vector eta_u_, eta_l_, w_u_, w_l_, grad_gamma_, log_pmf_;
};

/// Stateless conveniences (allocate per call).
double loglik(const Vector& beta, const Model& model, const ModelDesign& design);
Vector grad_loglik(const Vector& beta, const Model& model, const ModelDesign& design);

}  // namespace bdctm
