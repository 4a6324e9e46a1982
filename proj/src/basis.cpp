#include "bdctm/basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bdctm/error.hpp"

namespace bdctm {

namespace {

// Index k of the knot span [t_k, t_{k+1}) holding x for the degree-q basis
// on `t`. At the right end the last non-degenerate span is used, which gives
// the left limit and keeps the partition of unity at x == upper.
int find_span(const std::vector<double>& t, int q, double x) {
  const int n = static_cast<int>(t.size()) - q - 2;  // last function index
  auto it = std::upper_bound(t.begin(), t.end(), x);
  int k = static_cast<int>(it - t.begin()) - 1;
  k = std::clamp(k, q, n);
  while (k > q && !(t[k] < t[k + 1])) --k;
  return k;
}

// All degree-q basis functions on `t` at x (NURBS Book A2.2). Returns a
// vector of length t.size() - q - 1.
Vector basis_funs(const std::vector<double>& t, int q, double x) {
  const int count = static_cast<int>(t.size()) - q - 1;
  Vector out = Vector::Zero(count);
  const int k = find_span(t, q, x);
  std::vector<double> n(q + 1, 0.0), left(q + 1, 0.0), right(q + 1, 0.0);
  n[0] = 1.0;
  for (int j = 1; j <= q; ++j) {
    left[j] = x - t[k + 1 - j];
    right[j] = t[k + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double denom = right[r + 1] + left[j - r];
      const double temp = denom != 0.0 ? n[r] / denom : 0.0;
      n[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    n[j] = saved;
  }
  for (int j = 0; j <= q; ++j) {
    const int idx = k - q + j;
    if (idx >= 0 && idx < count) out[idx] = n[j];
  }
  return out;
}

}  // namespace

KnotVector make_knots(double lower, double upper, int dimension, int degree) {
  if (degree < 0) throw DimensionError("make_knots: degree must be nonnegative");
  if (dimension < degree + 1) {
    throw DimensionError("make_knots: dimension " + std::to_string(dimension) +
                         " is smaller than degree + 1 = " + std::to_string(degree + 1));
  }
  if (!std::isfinite(lower) || !std::isfinite(upper)) {
    throw DomainError("make_knots: non-finite domain");
  }
  if (!(lower < upper)) throw DomainError("make_knots: degenerate domain (min == max)");

  KnotVector kv;
  kv.degree = degree;
  kv.lower = lower;
  kv.upper = upper;
  const int interior = dimension - degree - 1;
  kv.knots.reserve(static_cast<std::size_t>(dimension + degree + 1));
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(lower);
  const double h = (upper - lower) / (interior + 1);
  for (int i = 1; i <= interior; ++i) kv.knots.push_back(lower + i * h);
  for (int i = 0; i <= degree; ++i) kv.knots.push_back(upper);
  return kv;
}

KnotVector make_knots(std::span<const double> values, int dimension, int degree) {
  if (values.empty()) throw DomainError("make_knots: no values");
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  return make_knots(*lo, *hi, dimension, degree);
}

Vector eval_bspline_derivative(const KnotVector& kv, double value) {
  const int p = kv.degree;
  const int dim = kv.dimension();
  Vector d = Vector::Zero(dim);
  if (p == 0) return d;
  const double x = std::clamp(value, kv.lower, kv.upper);
  const Vector lower_deg = basis_funs(kv.knots, p - 1, x);  // dim + 1 entries
  const auto& t = kv.knots;
  for (int i = 0; i < dim; ++i) {
    const double a = t[i + p] - t[i];
    const double b = t[i + p + 1] - t[i + 1];
    double v = 0.0;
    if (a > 0.0) v += p / a * lower_deg[i];
    if (b > 0.0) v -= p / b * lower_deg[i + 1];
    d[i] = v;
  }
  return d;
}

Vector eval_bspline(const KnotVector& kv, double value, OutOfDomain mode, bool* outside) {
  if (!std::isfinite(value)) throw DomainError("eval_bspline: non-finite value");
  const bool out = value < kv.lower || value > kv.upper;
  if (outside != nullptr) *outside = out;
  if (!out) return basis_funs(kv.knots, kv.degree, value);

  const double edge = value < kv.lower ? kv.lower : kv.upper;
  Vector row = basis_funs(kv.knots, kv.degree, edge);
  if (mode == OutOfDomain::LinearExtrapolate) {
    row += (value - edge) * eval_bspline_derivative(kv, edge);
  }
  return row;
}

OrdinalRow eval_ordinal(int category, int c) {
  if (c < 1) throw DimensionError("eval_ordinal: need at least one threshold");
  if (category < 1 || category > c + 1) {
    throw IndexError("eval_ordinal: category " + std::to_string(category) +
                     " outside 1.." + std::to_string(c + 1));
  }
  OrdinalRow row{Vector::Zero(c), category == c + 1};
  if (!row.reference) row.values[category - 1] = 1.0;
  return row;
}

Vector eval_group(int group, int num_groups) {
  if (group < 1 || group > num_groups) {
    throw UnknownLevelError("eval_group: group " + std::to_string(group) + " outside 1.." +
                            std::to_string(num_groups));
  }
  Vector v = Vector::Zero(num_groups);
  v[group - 1] = 1.0;
  return v;
}

Vector tensor_row(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i) out.segment(i * b.size(), b.size()) = a[i] * b;
  return out;
}

ResponseTransform parse_transform(std::string_view name) {
  if (name == "identity") return ResponseTransform::Identity;
  if (name == "log") return ResponseTransform::Log;
  if (name == "log1p") return ResponseTransform::Log1p;
  throw ConfigError("unknown response transform '" + std::string(name) + "'");
}

std::string_view transform_name(ResponseTransform t) {
  switch (t) {
    case ResponseTransform::Identity:
      return "identity";
    case ResponseTransform::Log:
      return "log";
    case ResponseTransform::Log1p:
      return "log1p";
  }
  return "identity";
}

double apply_transform(ResponseTransform t, double y) {
  switch (t) {
    case ResponseTransform::Identity:
      return y;
    case ResponseTransform::Log:
      if (!(y > 0.0)) throw DataError("log response transform needs positive counts");
      return std::log(y);
    case ResponseTransform::Log1p:
      return std::log1p(y);
  }
  return y;
}

int support_minimum(ResponseTransform t) { return t == ResponseTransform::Log ? 1 : 0; }

EvaluatedBasis center(EvaluatedBasis basis) {
  if (basis.rows() == 0) {
    basis.offsets = Vector::Zero(basis.cols());
    return basis;
  }
  const Vector means = basis.values.colwise().mean().transpose();
  apply_offsets(basis.values, means);
  basis.offsets = means;
  return basis;
}

void apply_offsets(RowMatrix& rows, const Vector& offsets) {
  rows.rowwise() -= offsets.transpose();
}

}  // namespace bdctm
