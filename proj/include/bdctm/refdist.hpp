#pragma once

#include <string_view>

namespace bdctm {

/// Reference distribution F_Z linking the transformation function to the
/// conditional CDF: F(y|x) = F_Z(h(y|x)).
///
/// All members are pure. Non-finite arguments raise DomainError; the log
/// variants are computed directly so they stay finite deep in the tails.
class ReferenceDistribution {
 public:
  enum class Kind { StandardLogistic, StandardNormal, MinimumExtremeValue };

  constexpr ReferenceDistribution() = default;
  constexpr explicit ReferenceDistribution(Kind kind) : kind_(kind) {}

  /// Accepts the config names "logit", "probit" and "cloglog".
  static ReferenceDistribution from_name(std::string_view name);

  constexpr Kind kind() const { return kind_; }
  std::string_view name() const;

  double cdf(double z) const;
  double pdf(double z) const;
  double log_pdf(double z) const;
  /// log F_Z(z)
  double log_cdf(double z) const;
  /// log(1 - F_Z(z))
  double log_ccdf(double z) const;
  /// Inverse CDF on (0,1).
  double quantile(double p) const;

  /// log(F_Z(u) - F_Z(l)) for l < u. u = +inf and l = -inf are accepted as
  /// the fixed CDF values 1 and 0. Returns -inf when l >= u. Evaluated in
  /// the lower or upper tail form, whichever keeps both terms accurate.
  double log_cdf_difference(double u, double l) const;

  friend constexpr bool operator==(ReferenceDistribution, ReferenceDistribution) = default;

 private:
  Kind kind_ = Kind::StandardLogistic;
};

inline constexpr ReferenceDistribution kLogistic{ReferenceDistribution::Kind::StandardLogistic};
inline constexpr ReferenceDistribution kNormal{ReferenceDistribution::Kind::StandardNormal};
inline constexpr ReferenceDistribution kMinExtremeValue{
    ReferenceDistribution::Kind::MinimumExtremeValue};

namespace math {

/// log(1 + exp(x)) without overflow.
double log1p_exp(double x);
/// log(1 - exp(x)) for x <= 0.
double log1m_exp(double x);
/// log(exp(a) + exp(b)).
double log_sum_exp(double a, double b);

double normal_cdf(double z);
double normal_log_cdf(double z);
double normal_quantile(double p);

}  // namespace math

}  // namespace bdctm
