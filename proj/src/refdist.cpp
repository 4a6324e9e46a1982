#include "bdctm/refdist.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "bdctm/error.hpp"

namespace bdctm {

namespace math {

double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double log1m_exp(double x) {
  if (x > 0.0) return std::numeric_limits<double>::quiet_NaN();
  // Maechler's switch point keeps both branches accurate.
  return x > -std::numbers::ln2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a > b ? a + std::log1p(std::exp(b - a)) : b + std::log1p(std::exp(a - b));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_log_cdf(double z) {
  if (z > 0.0) return std::log1p(-0.5 * std::erfc(z / std::numbers::sqrt2));
  if (z > -37.0) return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
  // Mills-ratio asymptotic series; erfc underflows below about -37.5.
  const double z2 = 1.0 / (z * z);
  const double series = 1.0 - z2 * (1.0 - 3.0 * z2 * (1.0 - 5.0 * z2 * (1.0 - 7.0 * z2)));
  return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) +
         std::log(series);
}

// Wichura (1988), algorithm AS 241 (PPND16).
double normal_quantile(double p) {
  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    const double num =
        (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r +
              6.7265770927008700853e+4) * r + 4.5921953931549871457e+4) * r +
            1.3731693765509461125e+4) * r + 1.9715909503065514427e+3) * r +
          1.3314166789178437745e+2) * r + 3.3871328727963666080e+0);
    const double den =
        (((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r +
              3.9307895800092710610e+4) * r + 2.1213794301586595867e+4) * r +
            5.3941960214247511077e+3) * r + 6.8718700749205790830e+2) * r +
          4.2313330701600911252e+1) * r + 1.0);
    return q * num / den;
  }
  double r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double x;
  if (r <= 5.0) {
    r -= 1.6;
    x = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
              2.41780725177450611770e-1) * r + 1.27045825245236838258e+0) * r +
            3.64784832476320460504e+0) * r + 5.76949722146069140550e+0) * r +
          4.63033784615654529590e+0) * r + 1.42343711074968357734e+0) /
        (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
              1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
            6.89767334985100004550e-1) * r + 1.67638483018380384940e+0) * r +
          2.05319162663775882187e+0) * r + 1.0);
  } else {
    r -= 5.0;
    x = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
              1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
            2.96560571828504891230e-1) * r + 1.78482653991729133580e+0) * r +
          5.46378491116411436990e+0) * r + 6.65790464350110377720e+0) /
        (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
              1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
            1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
          5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -x : x;
}

}  // namespace math

namespace {

void require_finite(double z) {
  if (!std::isfinite(z)) throw DomainError("reference distribution: argument must be finite");
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

ReferenceDistribution ReferenceDistribution::from_name(std::string_view name) {
  if (name == "logit") return kLogistic;
  if (name == "probit") return kNormal;
  if (name == "cloglog") return kMinExtremeValue;
  throw ConfigError("unknown reference distribution '" + std::string(name) +
                    "' (expected logit, probit or cloglog)");
}

std::string_view ReferenceDistribution::name() const {
  switch (kind_) {
    case Kind::StandardLogistic:
      return "logit";
    case Kind::StandardNormal:
      return "probit";
    case Kind::MinimumExtremeValue:
      return "cloglog";
  }
  return "logit";
}

double ReferenceDistribution::cdf(double z) const {
  require_finite(z);
  switch (kind_) {
    case Kind::StandardLogistic:
      if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
      {
        const double e = std::exp(z);
        return e / (1.0 + e);
      }
    case Kind::StandardNormal:
      return math::normal_cdf(z);
    case Kind::MinimumExtremeValue:
      return -std::expm1(-std::exp(z));
  }
  return 0.0;
}

double ReferenceDistribution::pdf(double z) const {
  require_finite(z);
  switch (kind_) {
    case Kind::StandardLogistic: {
      const double e = std::exp(-std::fabs(z));
      const double d = 1.0 + e;
      return e / (d * d);
    }
    case Kind::StandardNormal:
      return std::exp(-0.5 * z * z - kHalfLog2Pi);
    case Kind::MinimumExtremeValue:
      return std::exp(z - std::exp(z));
  }
  return 0.0;
}

double ReferenceDistribution::log_pdf(double z) const {
  require_finite(z);
  switch (kind_) {
    case Kind::StandardLogistic: {
      const double a = std::fabs(z);
      return -a - 2.0 * std::log1p(std::exp(-a));
    }
    case Kind::StandardNormal:
      return -0.5 * z * z - kHalfLog2Pi;
    case Kind::MinimumExtremeValue:
      return z - std::exp(z);
  }
  return 0.0;
}

double ReferenceDistribution::log_cdf(double z) const {
  require_finite(z);
  switch (kind_) {
    case Kind::StandardLogistic:
      return -math::log1p_exp(-z);
    case Kind::StandardNormal:
      return math::normal_log_cdf(z);
    case Kind::MinimumExtremeValue: {
      const double e = std::exp(z);
      if (e < 1e-10) return z - 0.5 * e;
      return std::log(-std::expm1(-e));
    }
  }
  return 0.0;
}

double ReferenceDistribution::log_ccdf(double z) const {
  require_finite(z);
  switch (kind_) {
    case Kind::StandardLogistic:
      return -math::log1p_exp(z);
    case Kind::StandardNormal:
      return math::normal_log_cdf(-z);
    case Kind::MinimumExtremeValue:
      return -std::exp(z);
  }
  return 0.0;
}

double ReferenceDistribution::quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile: probability must lie in (0,1)");
  switch (kind_) {
    case Kind::StandardLogistic:
      return std::log(p) - std::log1p(-p);
    case Kind::StandardNormal:
      return math::normal_quantile(p);
    case Kind::MinimumExtremeValue:
      return std::log(-std::log1p(-p));
  }
  return 0.0;
}

double ReferenceDistribution::log_cdf_difference(double u, double l) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (std::isnan(u) || std::isnan(l)) throw DomainError("log_cdf_difference: NaN argument");
  if (!(l < u)) return -inf;
  if (u == inf) return l == -inf ? 0.0 : log_ccdf(l);
  if (l == -inf) return log_cdf(u);
  // Upper-tail form once F(l) > 1/2, lower-tail form otherwise.
  const double lcl = log_ccdf(l);
  if (lcl < -std::numbers::ln2) {
    const double lcu = log_ccdf(u);
    return lcl + math::log1m_exp(std::min(lcu - lcl, 0.0));
  }
  const double lu = log_cdf(u);
  return lu + math::log1m_exp(std::min(log_cdf(l) - lu, 0.0));
}

}  // namespace bdctm
