#include <doctest.h>

#include <cmath>
#include <random>

#include <boost/math/distributions/negative_binomial.hpp>
#include <boost/math/distributions/poisson.hpp>

#include "bdctm/error.hpp"
#include "bdctm/glm.hpp"

using namespace bdctm;

namespace {

void simulate(std::size_t n, std::uint64_t seed, double size, Matrix& X, Vector& y) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  X.resize(static_cast<Eigen::Index>(n), 2);
  y.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = u(rng);
    X(i, 0) = 1.0;
    X(i, 1) = z;
    const double mu = std::exp(1.2 + 0.8 * z);
    double lambda = mu;
    if (size > 0) lambda = std::gamma_distribution<double>(size, mu / size)(rng);
    y[i] = std::poisson_distribution<int>(lambda)(rng);
  }
}

}  // namespace

TEST_CASE("log PMFs against Boost") {
  for (double mu : {0.3, 3.3, 25.0}) {
    for (int k : {0, 1, 4, 30}) {
      CHECK(poisson_log_pmf(k, mu) == doctest::Approx(std::log(boost::math::pdf(boost::math::poisson(mu), k))).epsilon(1e-12));
      const double theta = 3.0;
      const boost::math::negative_binomial nb(theta, theta / (theta + mu));
      CHECK(negbin_log_pmf(k, mu, theta) == doctest::Approx(std::log(boost::math::pdf(nb, k))).epsilon(1e-11));
    }
  }
  // Large size approaches the Poisson.
  CHECK(negbin_log_pmf(4, 3.0, 1e9) == doctest::Approx(poisson_log_pmf(4, 3.0)).epsilon(1e-7));
}

TEST_CASE("Poisson GLM recovers the coefficients") {
  Matrix X;
  Vector y;
  simulate(5000, 1, 0.0, X, y);
  const GlmFit f = fit_poisson(X, y);
  const double se0 = std::sqrt(f.cov(0, 0)), se1 = std::sqrt(f.cov(1, 1));
  CHECK(std::fabs(f.coef[0] - 1.2) < 3 * se0);
  CHECK(std::fabs(f.coef[1] - 0.8) < 3 * se1);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) ll += poisson_log_pmf(y[i], std::exp(X.row(i).dot(f.coef)));
  CHECK(f.loglik == doctest::Approx(ll).epsilon(1e-10));
}

TEST_CASE("intercept-only Poisson is log(mean)") {
  Matrix X = Matrix::Ones(6, 1);
  Vector y(6);
  y << 0, 3, 1, 4, 2, 5;
  const GlmFit f = fit_poisson(X, y);
  CHECK(f.coef[0] == doctest::Approx(std::log(2.5)).epsilon(1e-10));
}

TEST_CASE("negative binomial GLM") {
  Matrix X;
  Vector y;
  simulate(5000, 2, 3.0, X, y);
  const NegBinFit f = fit_negbin(X, y);
  CHECK(f.theta == doctest::Approx(3.0).epsilon(0.25));
  CHECK(std::fabs(f.coef[1] - 0.8) < 3 * std::sqrt(f.cov(1, 1)));
  CHECK_FALSE(f.poisson_limit);

  simulate(3000, 3, 0.0, X, y);
  const NegBinFit p = fit_negbin(X, y);
  CHECK(p.theta > 20.0);
  const GlmFit pois = fit_poisson(X, y);
  CHECK(p.loglik >= pois.loglik - 1e-6);
}

TEST_CASE("Poisson limit is flagged") {
  // Underdispersed data: the likelihood increases in theta without bound.
  Matrix X = Matrix::Ones(40, 1);
  Vector y(40);
  for (int i = 0; i < 40; ++i) y[i] = 2 + (i % 3);
  const NegBinFit f = fit_negbin(X, y);
  CHECK(f.poisson_limit);
  CHECK(f.theta >= kThetaPoissonLimit);
}

TEST_CASE("non-convergence raises") {
  Matrix X;
  Vector y;
  simulate(500, 4, 0.0, X, y);
  CHECK_THROWS_AS(fit_poisson(X, y, 1, 1e-300), ConvergenceError);
}
