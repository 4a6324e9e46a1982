#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "bdctm/error.hpp"
#include "bdctm/refdist.hpp"
#include "oracles.hpp"

using namespace bdctm;

namespace {
const ReferenceDistribution kAll[] = {kLogistic, kNormal, kMinExtremeValue};
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

TEST_CASE("cdf at reference points") {
  CHECK(kLogistic.cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kMinExtremeValue.cdf(0.0) == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(kNormal.cdf(1.959964) == doctest::Approx(oracle::normal_cdf(1.959964)).epsilon(1e-14));
  CHECK(kNormal.cdf(1.959964) == doctest::Approx(0.975).epsilon(1e-7));
}

TEST_CASE("cdf agrees with direct formulas") {
  for (double z = -8.0; z <= 8.0; z += 0.37) {
    CHECK(kLogistic.cdf(z) == doctest::Approx(oracle::logistic_cdf(z)).epsilon(1e-14));
    CHECK(kNormal.cdf(z) == doctest::Approx(oracle::normal_cdf(z)).epsilon(1e-13));
    CHECK(kMinExtremeValue.cdf(z) == doctest::Approx(oracle::mev_cdf(z)).epsilon(1e-13));
  }
}

TEST_CASE("densities at zero") {
  CHECK(kLogistic.pdf(0.0) == doctest::Approx(0.25));
  CHECK(kNormal.pdf(0.0) == doctest::Approx(1.0 / std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(kMinExtremeValue.pdf(0.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("pdf is the derivative of cdf") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-8.0, 8.0);
  const double h = 1e-5;
  for (const auto& d : kAll) {
    for (int i = 0; i < 1000; ++i) {
      const double z = u(rng);
      const double fd = (d.cdf(z + h) - d.cdf(z - h)) / (2 * h);
      CHECK(std::fabs(fd - d.pdf(z)) < 1e-6);
      if (d.pdf(z) > 1e-300) CHECK(d.log_pdf(z) == doctest::Approx(std::log(d.pdf(z))).epsilon(1e-12));
    }
  }
}

TEST_CASE("quantile inverts cdf") {
  CHECK(kLogistic.quantile(0.5) == doctest::Approx(0.0));
  CHECK(std::fabs(kMinExtremeValue.quantile(1.0 - std::exp(-1.0))) < 1e-15);
  CHECK(kNormal.quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  for (const auto& d : kAll) {
    for (double z = -8.0; z <= 8.0; z += 0.25) {
      // Near 1 the CDF itself carries too few digits to invert.
      if (d.cdf(z) > 1.0 - 1e-6) continue;
      CHECK(std::fabs(d.quantile(d.cdf(z)) - z) < 1e-8);
    }
    for (double z = -10.0; z <= 0.0; z += 0.5) CHECK(std::fabs(d.quantile(d.cdf(z)) - z) < 1e-9);
  }
}

TEST_CASE("cdf strictly increasing on a grid") {
  for (const auto& d : kAll) {
    double prev = -1.0;
    for (double z = -8.0; z <= 8.0; z += 0.01) {
      const double c = d.cdf(z);
      if (c < 1.0 - 1e-12) CHECK(c > prev);
      CHECK(c >= prev);
      prev = c;
    }
  }
}

TEST_CASE("log tails stay finite") {
  for (const auto& d : kAll) {
    CHECK(std::isfinite(d.log_cdf(-40.0)));
    CHECK(std::isfinite(d.log_ccdf(3.5)));
    CHECK(std::isfinite(d.log_pdf(-40.0)));
  }
  CHECK(kNormal.log_cdf(-40.0) == doctest::Approx(-804.608442013754).epsilon(1e-12));
  CHECK(kLogistic.log_cdf(-800.0) == doctest::Approx(-800.0));
  CHECK(kMinExtremeValue.log_ccdf(5.0) == doctest::Approx(-std::exp(5.0)));
}

TEST_CASE("log_cdf_difference") {
  for (const auto& d : kAll) {
    for (double l = -6.0; l < 6.0; l += 0.7) {
      for (double u = l + 0.01; u < 7.0; u += 1.3) {
        const double diff = d.cdf(u) - d.cdf(l);
        if (diff < 1e-4) continue;  // naive differencing cancels
        const double direct = std::log(diff);
        CHECK(d.log_cdf_difference(u, l) == doctest::Approx(direct).epsilon(1e-9));
      }
    }
    CHECK(d.log_cdf_difference(kInf, -kInf) == 0.0);
    CHECK(d.log_cdf_difference(1.0, -kInf) == doctest::Approx(d.log_cdf(1.0)));
    CHECK(d.log_cdf_difference(kInf, 1.0) == doctest::Approx(d.log_ccdf(1.0)));
    CHECK(d.log_cdf_difference(1.0, 1.0) == -kInf);
    CHECK(d.log_cdf_difference(0.0, 2.0) == -kInf);
  }
  // Deep upper tail: naive differencing cancels to zero.
  const double v = kLogistic.log_cdf_difference(41.0, 40.0);
  CHECK(std::isfinite(v));
  CHECK(v == doctest::Approx(std::log(std::exp(-40.0) - std::exp(-41.0))).epsilon(1e-10));
}

TEST_CASE("domain errors") {
  for (const auto& d : kAll) {
    CHECK_THROWS_AS(d.cdf(kInf), DomainError);
    CHECK_THROWS_AS(d.pdf(std::nan("")), DomainError);
    CHECK_THROWS_AS(d.quantile(0.0), DomainError);
    CHECK_THROWS_AS(d.quantile(1.0), DomainError);
  }
}

TEST_CASE("config names") {
  CHECK(ReferenceDistribution::from_name("logit") == kLogistic);
  CHECK(ReferenceDistribution::from_name("probit") == kNormal);
  CHECK(ReferenceDistribution::from_name("cloglog") == kMinExtremeValue);
  CHECK(kNormal.name() == "probit");
  CHECK_THROWS_AS(ReferenceDistribution::from_name("cauchit"), ConfigError);
}
