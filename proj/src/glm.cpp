#include "bdctm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "bdctm/error.hpp"

namespace bdctm {

namespace {

// Hard cap on log(theta); beyond it the NB is numerically Poisson.
constexpr double kMaxLogTheta = 20.0;

void check_inputs(const Matrix& X, const Vector& y) {
  if (X.rows() != y.size()) throw DimensionError("glm: X and y lengths differ");
  if (X.rows() < X.cols()) throw DimensionError("glm: fewer observations than coefficients");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!(y[i] >= 0.0) || y[i] != std::floor(y[i])) throw DataError("glm: responses must be counts");
  }
}

Vector irls_step(const Matrix& X, const Vector& y, const Vector& eta, const Vector& weight_factor,
                 Matrix* info) {
  // weight_factor w_i: working weight mu_i * w_i.
  const Vector mu = eta.array().exp();
  const Vector w = mu.cwiseProduct(weight_factor);
  const Vector z = eta.array() + (y - mu).array() / mu.array();
  const Matrix xtw = X.transpose() * w.asDiagonal();
  const Matrix A = xtw * X;
  Eigen::LDLT<Matrix> ldlt(A);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    throw ConvergenceError("glm: singular information matrix (collinear design?)");
  }
  if (info) *info = A;
  return ldlt.solve(xtw * z);
}

double poisson_ll(const Vector& y, const Vector& eta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += poisson_log_pmf(y[i], std::exp(eta[i]));
  return ll;
}

double negbin_ll(const Vector& y, const Vector& eta, double theta) {
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += negbin_log_pmf(y[i], std::exp(eta[i]), theta);
  return ll;
}

Vector start_coef(const Matrix& X, const Vector& y) {
  Vector b = Vector::Zero(X.cols());
  // Least squares on log(y + 0.5) is a robust start.
  const Vector ly = (y.array() + 0.5).log();
  b = X.colPivHouseholderQr().solve(ly);
  return b;
}

}  // namespace

double poisson_log_pmf(double y, double mu) {
  if (mu <= 0.0) return y == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return y * std::log(mu) - mu - std::lgamma(y + 1.0);
}

double negbin_log_pmf(double y, double mu, double theta) {
  const double tail = -std::lgamma(y + 1.0) - theta * std::log1p(mu / theta) + y * std::log(mu);
  if (y == std::floor(y) && y <= 10000.0) {
    // log Gamma(y + theta) - log Gamma(theta) - y log(theta + mu) as one
    // sum; the lgamma difference cancels badly for large theta.
    double s = 0.0;
    for (int k = 0; k < static_cast<int>(y); ++k) s += std::log1p((k - mu) / (theta + mu));
    return s + tail;
  }
  return std::lgamma(y + theta) - std::lgamma(theta) - y * std::log(theta + mu) + tail;
}

GlmFit fit_poisson(const Matrix& X, const Vector& y, int max_iter, double tol) {
  check_inputs(X, y);
  GlmFit fit;
  fit.coef = start_coef(X, y);
  Vector eta = X * fit.coef;
  double ll = poisson_ll(y, eta);
  const Vector ones = Vector::Ones(y.size());
  Matrix info;
  for (int it = 1; it <= max_iter; ++it) {
    fit.coef = irls_step(X, y, eta, ones, &info);
    eta = X * fit.coef;
    const double ll_new = poisson_ll(y, eta);
    fit.iterations = it;
    const bool done = std::fabs(ll_new - ll) < tol * (std::fabs(ll_new) + 0.1);
    ll = ll_new;
    if (done) {
      const Vector w = eta.array().exp();
      fit.cov = (X.transpose() * w.asDiagonal() * X).inverse();
      fit.loglik = ll;
      return fit;
    }
  }
  std::ostringstream msg;
  msg << "Poisson IRLS did not converge in " << max_iter << " iterations (loglik " << ll << ")";
  throw ConvergenceError(msg.str());
}

NegBinFit fit_negbin(const Matrix& X, const Vector& y, int max_iter, double tol) {
  check_inputs(X, y);
  NegBinFit fit;
  const GlmFit pois = fit_poisson(X, y, max_iter, tol);
  fit.coef = pois.coef;
  Vector eta = X * fit.coef;

  // Moment start for theta.
  double num = 0.0, den = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double mu = std::exp(eta[i]);
    num += mu * mu;
    den += (y[i] - mu) * (y[i] - mu) - mu;
  }
  double log_theta = den > 0.0 ? std::log(num / den) : kMaxLogTheta;
  log_theta = std::clamp(log_theta, -10.0, kMaxLogTheta);

  double ll = negbin_ll(y, eta, std::exp(log_theta));
  for (int it = 1; it <= max_iter; ++it) {
    const double theta = std::exp(log_theta);
    // Coefficients given theta.
    const Vector mu = eta.array().exp();
    const Vector factor = (1.0 + mu.array() / theta).inverse();
    fit.coef = irls_step(X, y, eta, factor, nullptr);
    eta = X * fit.coef;

    // Newton on log(theta) given mu, with step halving.
    double score = 0.0, hess = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double m = std::exp(eta[i]);
      score += boost::math::digamma(y[i] + theta) - boost::math::digamma(theta) + std::log(theta) + 1.0 -
               std::log(theta + m) - (y[i] + theta) / (theta + m);
      hess += boost::math::trigamma(y[i] + theta) - boost::math::trigamma(theta) + 1.0 / theta -
              2.0 / (theta + m) + (y[i] + theta) / ((theta + m) * (theta + m));
    }
    const double g = theta * score;
    const double h = theta * theta * hess + theta * score;
    double step = h < 0.0 ? -g / h : (g > 0.0 ? 1.0 : -1.0);
    step = std::clamp(step, -2.0, 2.0);
    const double base = negbin_ll(y, eta, theta);
    double cand = std::clamp(log_theta + step, -10.0, kMaxLogTheta);
    for (int half = 0; half < 30 && negbin_ll(y, eta, std::exp(cand)) < base; ++half) {
      step *= 0.5;
      cand = std::clamp(log_theta + step, -10.0, kMaxLogTheta);
    }
    const double dtheta = std::fabs(cand - log_theta);
    log_theta = cand;

    const double ll_new = negbin_ll(y, eta, std::exp(log_theta));
    fit.iterations = it;
    const bool at_cap = log_theta >= kMaxLogTheta;
    const bool done = std::fabs(ll_new - ll) < tol * (std::fabs(ll_new) + 0.1) && (dtheta < 1e-6 || at_cap);
    ll = ll_new;
    if (done) {
      fit.theta = std::exp(log_theta);
      fit.poisson_limit = fit.theta >= kThetaPoissonLimit;
      const Vector m = eta.array().exp();
      const Vector w = m.array() / (1.0 + m.array() / fit.theta);
      fit.cov = (X.transpose() * w.asDiagonal() * X).inverse();
      fit.loglik = ll;
      return fit;
    }
  }
  std::ostringstream msg;
  msg << "negative binomial fit did not converge in " << max_iter << " iterations (loglik " << ll
      << ", theta " << std::exp(log_theta) << ")";
  throw ConvergenceError(msg.str());
}

}  // namespace bdctm
