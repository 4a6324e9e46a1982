#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bdctm/linalg.hpp"

namespace bdctm {

/// Clamped (open) knot vector: degree+1 copies of each boundary knot and
/// equidistant interior knots, so that D = #knots - degree - 1.
struct KnotVector {
  int degree = 3;
  std::vector<double> knots;
  double lower = 0.0;
  double upper = 1.0;

  int dimension() const { return static_cast<int>(knots.size()) - degree - 1; }
};

/// Equidistant clamped knots over [min(values), max(values)].
KnotVector make_knots(std::span<const double> values, int dimension, int degree = 3);
/// Equidistant clamped knots over an explicit domain.
KnotVector make_knots(double lower, double upper, int dimension, int degree = 3);

/// What eval_bspline does with values outside [lower, upper].
enum class OutOfDomain {
  Clamp,             ///< evaluate at the nearest boundary
  LinearExtrapolate  ///< first-order Taylor continuation from the boundary
};

/// Cox-de Boor evaluation of all D basis functions at `value`.
/// Sets *outside (when given) if the value lay outside the knot domain.
Vector eval_bspline(const KnotVector& knots, double value,
                    OutOfDomain mode = OutOfDomain::Clamp, bool* outside = nullptr);

/// First derivative of all D basis functions at a value inside the domain
/// (the upper boundary uses the left limit).
Vector eval_bspline_derivative(const KnotVector& knots, double value);

struct OrdinalRow {
  Vector values;           ///< unit vector e_c(r), or zeros for r = c+1
  bool reference = false;  ///< r is the reference category c+1
};

/// Unit-vector basis of length c for category r in 1..c+1.
OrdinalRow eval_ordinal(int category, int c);

/// Indicator vector of length G for group label g in 1..G.
Vector eval_group(int group, int num_groups);

/// Kronecker product a (x) b with index (d1-1)*D2 + d2.
Vector tensor_row(const Vector& a, const Vector& b);

/// Monotone transformation applied to a count before the response basis.
enum class ResponseTransform { Identity, Log, Log1p };

ResponseTransform parse_transform(std::string_view name);
std::string_view transform_name(ResponseTransform t);
double apply_transform(ResponseTransform t, double y);
/// Smallest count the transformed basis can represent (1 for Log, else 0).
int support_minimum(ResponseTransform t);

struct BasisSpec {
  enum class Kind { BSpline, OrdinalIndicator, Linear, GroupIndicator, Constant };
  Kind kind = Kind::Constant;
  int dimension = 1;
  ResponseTransform transform = ResponseTransform::Identity;
  bool centered = false;
};

/// A basis evaluated on a set of rows. `offsets` holds the column means
/// removed by center() (all zero when uncentered).
struct EvaluatedBasis {
  RowMatrix values;
  Vector offsets;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

/// Subtract training column means; the means are kept in `offsets`.
EvaluatedBasis center(EvaluatedBasis basis);

/// Apply stored training offsets to rows evaluated elsewhere.
void apply_offsets(RowMatrix& rows, const Vector& offsets);

}  // namespace bdctm
