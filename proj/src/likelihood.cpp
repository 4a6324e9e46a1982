#include "bdctm/likelihood.hpp"

#include <cmath>
#include <limits>

#include "bdctm/error.hpp"
#include "bdctm/kernels.hpp"

namespace bdctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double upper_arg(Side side, double u) {
  switch (side) {
    case Side::Regular:
      return u;
    case Side::UpperSentinel:
      return kInf;
    case Side::LowerSentinel:
      return -kInf;
  }
  return u;
}

double lower_arg(Side side, double l) {
  switch (side) {
    case Side::Regular:
      return l;
    case Side::UpperSentinel:
      return kInf;
    case Side::LowerSentinel:
      return -kInf;
  }
  return l;
}

}  // namespace

double log_pmf_obs(const ReferenceDistribution& dist, Side upper_side, double u, Side lower_side,
                   double l) {
  return dist.log_cdf_difference(upper_arg(upper_side, u), lower_arg(lower_side, l));
}

LogPosterior::LogPosterior(const Model& model, const ModelDesign& design)
    : model_(&model), design_(&design) {
  const auto n = static_cast<Eigen::Index>(design.n);
  if (design.upper.cols() != model.dimension() || design.lower.cols() != model.dimension()) {
    throw DimensionError("log posterior: design width does not match the model");
  }
  eta_u_.resize(n);
  eta_l_.resize(n);
  w_u_.resize(n);
  w_l_.resize(n);
  log_pmf_.resize(n);
  grad_gamma_.resize(model.dimension());
}

double LogPosterior::loglik(const Vector& beta, Vector* grad) {
  const auto& d = *design_;
  const auto& F = model_->reference();
  const std::size_t n = d.n;
  const std::size_t p = static_cast<std::size_t>(model_->dimension());
  const auto gamma = model_->gamma(beta);
  if (!gamma) {
    log_pmf_.setConstant(-kInf);
    return -kInf;
  }
  const auto& k = kernels::active();
  if (n > 0) {
    k.gemv(d.upper.data(), n, p, p, gamma->data(), eta_u_.data());
    k.gemv(d.lower.data(), n, p, p, gamma->data(), eta_l_.data());
  }

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double u = upper_arg(d.upper_side[i], eta_u_[i]);
    const double l = lower_arg(d.lower_side[i], eta_l_[i]);
    const double lp = F.log_cdf_difference(u, l);
    log_pmf_[i] = lp;
    total += lp;
    if (grad && std::isfinite(lp)) {
      w_u_[i] = std::isfinite(u) ? std::exp(F.log_pdf(u) - lp) : 0.0;
      w_l_[i] = std::isfinite(l) ? -std::exp(F.log_pdf(l) - lp) : 0.0;
    }
  }
  if (!std::isfinite(total)) return -kInf;
  if (grad) {
    grad_gamma_.setZero();
    if (n > 0) {
      k.gemv_t_acc(d.upper.data(), n, p, p, w_u_.data(), grad_gamma_.data());
      k.gemv_t_acc(d.lower.data(), n, p, p, w_l_.data(), grad_gamma_.data());
    }
    *grad = model_->pullback(beta, grad_gamma_);
  }
  return total;
}

double LogPosterior::operator()(const Vector& beta, const std::vector<double>& tau2,
                                const std::vector<int>& omega, Vector* grad) {
  const double ll = loglik(beta, grad);
  if (!std::isfinite(ll)) return -kInf;
  return ll + model_->prior_term(beta, tau2, omega, grad);
}

double loglik(const Vector& beta, const Model& model, const ModelDesign& design) {
  LogPosterior lp(model, design);
  return lp.loglik(beta);
}

Vector grad_loglik(const Vector& beta, const Model& model, const ModelDesign& design) {
  LogPosterior lp(model, design);
  Vector g;
  if (!std::isfinite(lp.loglik(beta, &g))) {
    throw DomainError("grad_loglik: log-likelihood is not finite at this state");
  }
  return g;
}

}  // namespace bdctm
