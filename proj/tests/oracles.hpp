#pragma once
// Independent reference implementations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "bdctm/linalg.hpp"

namespace oracle {

using bdctm::Matrix;
using bdctm::Vector;

// Textbook recursive definition, half-open intervals except the last.
inline double bspline(const std::vector<double>& t, int i, int p, double x) {
  if (p == 0) {
    const bool last = t[i + 1] == t.back() && t[i] < t[i + 1];
    return (t[i] <= x && (x < t[i + 1] || (last && x == t[i + 1]))) ? 1.0 : 0.0;
  }
  double v = 0.0;
  if (t[i + p] > t[i]) v += (x - t[i]) / (t[i + p] - t[i]) * bspline(t, i, p - 1, x);
  if (t[i + p + 1] > t[i + 1]) v += (t[i + p + 1] - x) / (t[i + p + 1] - t[i + 1]) * bspline(t, i + 1, p - 1, x);
  return v;
}

inline Vector bspline_row(const std::vector<double>& t, int p, double x) {
  const int d = static_cast<int>(t.size()) - p - 1;
  Vector out(d);
  for (int i = 0; i < d; ++i) out[i] = bspline(t, i, p, x);
  return out;
}

inline double normal_cdf(double z) { return 0.5 * boost::math::erfc(-z / std::numbers::sqrt2); }
inline double logistic_cdf(double z) { return 1.0 / (1.0 + std::exp(-z)); }
inline double mev_cdf(double z) { return 1.0 - std::exp(-std::exp(z)); }

// P(X <= x) for X ~ IG(shape, scale): Q(shape, scale / x).
inline double inv_gamma_cdf(double x, double shape, double scale) {
  return boost::math::gamma_q(shape, scale / x);
}

// One-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic(std::vector<double> x, const std::function<double(double)>& cdf) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

// Asymptotic KS critical value at level alpha (Smirnov limit).
inline double ks_critical(double n, double alpha) { return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(n); }

// Central differences of a scalar function.
inline Vector fd_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h = 1e-6) {
  Vector g(x.size());
  Vector xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    const double step = h * std::max(1.0, std::fabs(xi));
    xp[i] = xi + step;
    const double fp = f(xp);
    xp[i] = xi - step;
    const double fm = f(xp);
    xp[i] = xi;
    g[i] = (fp - fm) / (2.0 * step);
  }
  return g;
}

inline double relative_error(const Vector& a, const Vector& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

// Dense lower-triangular ones (x) I.
inline Matrix sigma(int d1, int d2) {
  Matrix s = Matrix::Zero(d1 * d2, d1 * d2);
  for (int k = 0; k < d1; ++k)
    for (int l = 0; l <= k; ++l)
      for (int j = 0; j < d2; ++j) s(k * d2 + j, l * d2 + j) = 1.0;
  return s;
}

// Posterior means of the three category probabilities of an intercept-only
// logistic ordinal model, flat prior on (theta1, log(theta2 - theta1)), by
// grid quadrature around the maximum likelihood point.
inline std::vector<double> ordinal3_posterior_mean(const std::vector<int>& counts, int grid = 600) {
  const double n = counts[0] + counts[1] + counts[2];
  auto logit = [](double p) { return std::log(p / (1.0 - p)); };
  const double c1 = logit(counts[0] / n);
  const double c2 = std::log(logit((counts[0] + counts[1]) / n) - c1);
  std::vector<double> lw, p1, p2;
  for (int i = 0; i < grid; ++i) {
    for (int j = 0; j < grid; ++j) {
      const double t1 = c1 - 1.5 + 3.0 * i / (grid - 1);
      const double t2 = t1 + std::exp(c2 - 1.5 + 3.0 * j / (grid - 1));
      const double f1 = logistic_cdf(t1), f2 = logistic_cdf(t2);
      lw.push_back(counts[0] * std::log(f1) + counts[1] * std::log(f2 - f1) + counts[2] * std::log1p(-f2));
      p1.push_back(f1);
      p2.push_back(f2);
    }
  }
  const double top = *std::max_element(lw.begin(), lw.end());
  double total = 0.0;
  std::vector<double> mean(3, 0.0);
  for (std::size_t g = 0; g < lw.size(); ++g) {
    const double w = std::exp(lw[g] - top);
    total += w;
    mean[0] += w * p1[g];
    mean[1] += w * (p2[g] - p1[g]);
    mean[2] += w * (1.0 - p2[g]);
  }
  for (auto& m : mean) m /= total;
  return mean;
}

// Batch-means Monte Carlo standard error of a chain average.
inline double batch_mcse(const Vector& x) {
  const auto batches = static_cast<Eigen::Index>(std::sqrt(static_cast<double>(x.size())));
  const auto len = x.size() / batches;
  Vector bm(batches);
  for (Eigen::Index b = 0; b < batches; ++b) bm[b] = x.segment(b * len, len).mean();
  return std::sqrt((bm.array() - bm.mean()).square().sum() / (batches - 1.0) / batches);
}

}  // namespace oracle
