#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bdctm/basis.hpp"
#include "bdctm/dataset.hpp"
#include "bdctm/linalg.hpp"
#include "bdctm/monotone.hpp"
#include "bdctm/penalty.hpp"
#include "bdctm/refdist.hpp"

namespace bdctm {

enum class ResponseKind { Count, Ordinal };

struct TermSpec {
  enum class Kind {
    BaselineCount,           ///< a(t(y)), monotone, first-difference penalty
    BaselineOrdinal,         ///< e_c(r), monotone thresholds, flat prior
    Linear,                  ///< -x^T beta on standardized columns, flat prior
    Smooth,                  ///< -f(x), centered B-spline, RW2
    Random,                  ///< -b_g, iid group effects
    TensorSmooth,            ///< -f(x1, x2), centered tensor spline, anisotropic RW2
    CategorySpecificSmooth,  ///< e_c(r) (x) b(x), monotone, I_c (x) RW2
    HurdleZero               ///< +1(y=0) (beta0 - z^T beta), flat prior
  };

  Kind kind = Kind::Linear;
  std::vector<std::string> columns;
  int dimension = 8;   ///< D1: response basis or first covariate basis
  int dimension2 = 8;  ///< second covariate basis of a tensor smooth
  int degree = 3;
  ResponseTransform transform = ResponseTransform::Log1p;
  bool zero_indicator = false;  ///< multiply the whole term by 1(y=0)
  double a = 1.0;
  double b = 0.001;
  /// Diagonal precision jitter; defaults to 1e-6 for category-specific
  /// terms and 0 otherwise.
  std::optional<double> jitter;
  int omega_grid = 17;
};

TermSpec::Kind parse_term_kind(std::string_view name);
std::string_view term_kind_name(TermSpec::Kind kind);

struct ModelSpec {
  ResponseKind response = ResponseKind::Count;
  std::string response_column = "y";
  ReferenceDistribution reference = kLogistic;
  /// Ordinal: c + 1 categories, given either as labels or as a count.
  std::vector<std::string> levels;
  int categories = 0;
  std::vector<TermSpec> terms;

  int num_categories() const {
    return levels.empty() ? categories : static_cast<int>(levels.size());
  }
};

/// Where a term's response-direction factor comes from.
enum class YPart { None, Spline, Ordinal, ZeroIndicator };
/// Covariate-direction factor.
enum class XPart { Constant, Linear, Spline, Group, Tensor, HurdleLinear };
enum class PriorType { Flat, Single, Anisotropic };

/// One resolved partial transformation: bases fitted on the training data,
/// coefficient layout and prior.
struct DesignBlock {
  TermSpec::Kind kind = TermSpec::Kind::Linear;
  std::string label;
  int offset = 0;
  int size = 0;
  MonotoneMap map;
  double sign = 1.0;
  bool zero_indicator = false;

  YPart ypart = YPart::None;
  KnotVector yknots;
  ResponseTransform transform = ResponseTransform::Log1p;
  int categories = 0;  ///< c for ordinal factors

  XPart xpart = XPart::Constant;
  std::vector<std::string> columns;
  std::vector<KnotVector> xknots;
  Vector x_offsets;  ///< training column means of the covariate factor
  std::vector<double> means;
  std::vector<double> sds;
  std::vector<std::string> group_levels;
  int xdim = 1;

  PriorType prior = PriorType::Flat;
  Matrix K;   ///< unit-scale precision (Single)
  Matrix KA;  ///< K1 (x) I (Anisotropic)
  Matrix KB;  ///< I (x) K2 (Anisotropic)
  int rank = 0;
  AnisotropyGrid grid;
  double a = 1.0;
  double b = 0.001;
  double jitter = 0.0;
  int tau_index = -1;
  int omega_index = -1;

  std::vector<std::string> names;
  Vector report_scale;  ///< reported = internal * report_scale
};

/// Smoothing variances and anisotropy grid indices; beta lives separately.
struct ModelState {
  Vector beta;
  std::vector<double> tau2;
  std::vector<int> omega;
};

/// Side of an observation's probability cell whose CDF is fixed.
enum class Side : std::uint8_t { Regular, LowerSentinel, UpperSentinel };

/// Per-block covariate factors for a set of rows.
struct CovariateRows {
  std::size_t n = 0;
  std::vector<RowMatrix> x;             ///< one n x xdim matrix per block
  std::vector<std::uint8_t> unknown;    ///< row had an unseen group level
  std::vector<std::string> warnings;
};

/// Current (upper) and lagged (lower) design rows of all observations.
struct ModelDesign {
  std::size_t n = 0;
  RowMatrix upper;
  RowMatrix lower;
  std::vector<Side> upper_side;
  std::vector<Side> lower_side;
  std::vector<int> y;
  std::vector<std::uint8_t> unknown;
  std::vector<std::string> warnings;
};

class Model {
 public:
  /// Resolves every term against the training data. Throws ConfigError on
  /// invalid specs and DataError on unusable data.
  static Model build(const ModelSpec& spec, const Dataset& train);

  /// Columns the spec reads; the response is included on request.
  static Schema schema(const ModelSpec& spec, bool with_response = true);

  const ModelSpec& spec() const { return spec_; }
  const ReferenceDistribution& reference() const { return spec_.reference; }
  const std::vector<DesignBlock>& blocks() const { return blocks_; }
  int dimension() const { return dimension_; }
  int num_tau2() const { return num_tau2_; }
  int num_omega() const { return num_omega_; }
  /// c + 1 for ordinal responses, 0 for counts.
  int num_categories() const { return categories_; }
  /// Smallest representable count (0, or 1 under the log transform).
  int support_minimum() const { return support_min_; }
  /// Largest training count; the response basis extrapolates beyond it.
  int max_training_count() const { return max_count_; }

  std::vector<std::string> coefficient_names() const;
  std::vector<std::string> tau2_names() const;
  std::vector<std::string> omega_names() const;
  Vector report_scale() const;

  CovariateRows covariates(const Dataset& data, bool allow_unknown_levels = false) const;

  /// Design row at response value y (count) or category y (ordinal).
  /// Sentinel sides leave `out` zero.
  Side fill_row(const CovariateRows& cov, std::size_t row, int y, double* out,
                bool* extrapolated = nullptr) const;
  /// All rows at one response value.
  RowMatrix rows_at(const CovariateRows& cov, int y, Side* side = nullptr) const;

  /// Upper/lower design for observed responses in `data`.
  ModelDesign design(const Dataset& data, bool allow_unknown_levels = false) const;

  /// Full gamma; nullopt when a monotone block overflows.
  std::optional<Vector> gamma(const Vector& beta) const;
  /// d/dbeta from d/dgamma, block by block.
  Vector pullback(const Vector& beta, const Vector& grad_gamma) const;

  std::vector<Vector> unpack(const Vector& beta) const;
  Vector pack(const std::vector<Vector>& blocks) const;

  /// Dense block-diagonal K(tau2, omega) including jitter.
  Matrix precision(const ModelState& state) const;
  /// -1/2 beta^T K beta; adds -K beta to *grad when given.
  double prior_term(const Vector& beta, const std::vector<double>& tau2,
                    const std::vector<int>& omega, Vector* grad = nullptr) const;
  /// beta_j^T K_j beta_j at unit scale (tensor blocks at grid point `omega_index`).
  double block_quadratic(const DesignBlock& block, const Vector& beta, int omega_index) const;

  ModelState initial_state() const;

  /// Sentinel side of response value y (count) or category y (ordinal).
  Side side_of(int y) const;

 private:
  ModelSpec spec_;
  std::vector<DesignBlock> blocks_;
  int dimension_ = 0;
  int num_tau2_ = 0;
  int num_omega_ = 0;
  int categories_ = 0;
  int support_min_ = 0;
  int max_count_ = 0;
};

/// Posterior predictive over retained draws (internal beta scale).
class Predictor {
 public:
  Predictor(const Model& model, const Matrix& beta_draws);

  std::size_t draws() const { return static_cast<std::size_t>(gamma_.rows()); }

  /// n x S matrix of F(floor(y) | x_i) per draw.
  Matrix cdf_draws(const CovariateRows& cov, double y) const;
  /// n x S matrix of log P(Y = floor(y) | x_i) per draw.
  Matrix log_pmf_draws(const CovariateRows& cov, double y) const;

  /// Posterior-mean CDF and PMF per row.
  Vector cdf(const CovariateRows& cov, double y) const;
  Vector pmf(const CovariateRows& cov, double y) const;

  /// n x S matrix of log P(Y = y_i | x_i) per draw at the observed
  /// responses of a design.
  Matrix log_pmf_observed(const ModelDesign& design) const;

  /// Plug-in variants at the posterior-mean gamma.
  Vector cdf_plugin(const CovariateRows& cov, double y) const;
  Vector pmf_plugin(const CovariateRows& cov, double y) const;

 private:
  const Model* model_;
  Matrix gamma_;  ///< S x P
  Vector gamma_mean_;
};

}  // namespace bdctm
