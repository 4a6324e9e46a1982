#include "bdctm/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "bdctm/error.hpp"

namespace bdctm {

namespace {

using Kind = TermSpec::Kind;

struct KindName {
  Kind kind;
  std::string_view name;
};

constexpr KindName kKindNames[] = {
    {Kind::BaselineCount, "baseline_count"},
    {Kind::BaselineOrdinal, "baseline_ordinal"},
    {Kind::Linear, "linear"},
    {Kind::Smooth, "smooth"},
    {Kind::Random, "random"},
    {Kind::TensorSmooth, "tensor_smooth"},
    {Kind::CategorySpecificSmooth, "category_specific_smooth"},
    {Kind::HurdleZero, "hurdle_zero"},
};

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string term_where(std::size_t index, Kind kind) {
  return "terms[" + std::to_string(index) + "] (" + std::string(term_kind_name(kind)) + ")";
}

void require_columns(const TermSpec& t, std::size_t index, std::size_t lo, std::size_t hi) {
  const auto n = t.columns.size();
  if (n < lo || n > hi) {
    std::string want = lo == hi ? std::to_string(lo) : std::to_string(lo) + ".." + std::to_string(hi);
    if (hi == std::numeric_limits<std::size_t>::max()) want = "at least " + std::to_string(lo);
    throw ConfigError(term_where(index, t.kind) + ": expected " + want + " column(s), got " +
                      std::to_string(n));
  }
}

std::vector<double> column_values(const Dataset& data, const std::string& name) {
  return data.column(name).values;
}

void standardize_stats(const std::vector<double>& v, const std::string& name, double& mean,
                       double& sd) {
  const double n = static_cast<double>(v.size());
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  if (!(sd > 0.0)) throw DataError("column '" + name + "' is constant in the training data");
}

/// Uncentered covariate factor of one block.
RowMatrix raw_covariates(const DesignBlock& blk, const Dataset& data, bool allow_unknown,
                         std::vector<std::uint8_t>& unknown, std::vector<std::string>& warnings) {
  const std::size_t n = data.rows();
  RowMatrix x = RowMatrix::Zero(static_cast<Eigen::Index>(n), blk.xdim);
  switch (blk.xpart) {
    case XPart::Constant:
      x.setOnes();
      break;
    case XPart::Linear:
    case XPart::HurdleLinear: {
      const int shift = blk.xpart == XPart::HurdleLinear ? 1 : 0;
      const double sgn = blk.xpart == XPart::HurdleLinear ? -1.0 : 1.0;
      if (shift) x.col(0).setOnes();
      for (std::size_t k = 0; k < blk.columns.size(); ++k) {
        const auto& col = data.column(blk.columns[k]);
        for (std::size_t i = 0; i < n; ++i) {
          x(i, k + shift) = sgn * (col.values[i] - blk.means[k]) / blk.sds[k];
        }
      }
      break;
    }
    case XPart::Spline: {
      const auto& col = data.column(blk.columns[0]);
      std::size_t clamped = 0;
      for (std::size_t i = 0; i < n; ++i) {
        bool outside = false;
        x.row(i) = eval_bspline(blk.xknots[0], col.values[i], OutOfDomain::Clamp, &outside);
        clamped += outside;
      }
      if (clamped) {
        warnings.push_back(blk.label + ": " + std::to_string(clamped) +
                           " value(s) outside the training range clamped to the boundary");
      }
      break;
    }
    case XPart::Tensor: {
      const auto& c1 = data.column(blk.columns[0]);
      const auto& c2 = data.column(blk.columns[1]);
      std::size_t clamped = 0;
      for (std::size_t i = 0; i < n; ++i) {
        bool o1 = false, o2 = false;
        const Vector a = eval_bspline(blk.xknots[0], c1.values[i], OutOfDomain::Clamp, &o1);
        const Vector b = eval_bspline(blk.xknots[1], c2.values[i], OutOfDomain::Clamp, &o2);
        x.row(i) = tensor_row(a, b);
        clamped += (o1 || o2);
      }
      if (clamped) {
        warnings.push_back(blk.label + ": " + std::to_string(clamped) +
                           " row(s) outside the training range clamped to the boundary");
      }
      break;
    }
    case XPart::Group: {
      const auto& col = data.column(blk.columns[0]);
      std::map<std::string, int> index;
      for (std::size_t k = 0; k < blk.group_levels.size(); ++k) {
        index[blk.group_levels[k]] = static_cast<int>(k) + 1;
      }
      std::size_t unseen = 0;
      for (std::size_t i = 0; i < n; ++i) {
        const int code = col.code(i);
        const std::string label =
            code >= 1 && code <= static_cast<int>(col.levels.size()) ? col.levels[code - 1]
                                                                     : std::to_string(code);
        auto it = index.find(label);
        if (it == index.end()) {
          if (!allow_unknown) {
            throw UnknownLevelError("row " + std::to_string(i + 1) + ", column '" + blk.columns[0] +
                                    "': level '" + label + "' not seen in training");
          }
          unknown[i] = 1;
          ++unseen;
          continue;  // effect set to 0
        }
        x.row(i) = eval_group(it->second, static_cast<int>(blk.group_levels.size()));
      }
      if (unseen) {
        warnings.push_back(blk.label + ": " + std::to_string(unseen) +
                           " row(s) with unseen levels scored with a zero effect");
      }
      break;
    }
  }
  return x;
}

}  // namespace

TermSpec::Kind parse_term_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (kn.name == name) return kn.kind;
  }
  throw ConfigError("unknown term kind '" + std::string(name) + "'");
}

std::string_view term_kind_name(TermSpec::Kind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "linear";
}

Schema Model::schema(const ModelSpec& spec, bool with_response) {
  Schema schema;
  auto add = [&](const std::string& name, ColumnKind kind) {
    for (const auto& cs : schema) {
      if (cs.name == name) {
        if (cs.kind != kind) {
          throw ConfigError("column '" + name + "' is used both as " +
                            std::string(column_kind_name(cs.kind)) + " and " +
                            std::string(column_kind_name(kind)));
        }
        return;
      }
    }
    schema.push_back({name, kind, {}, 0});
  };
  if (with_response) {
    if (spec.response == ResponseKind::Count) {
      add(spec.response_column, ColumnKind::Count);
    } else {
      schema.push_back({spec.response_column, ColumnKind::Ordinal, spec.levels, spec.categories});
    }
  }
  for (const auto& t : spec.terms) {
    const ColumnKind kind = t.kind == Kind::Random ? ColumnKind::Group : ColumnKind::Continuous;
    for (const auto& c : t.columns) add(c, kind);
  }
  return schema;
}

Model Model::build(const ModelSpec& spec, const Dataset& train) {
  Model m;
  m.spec_ = spec;
  if (train.rows() == 0) throw DataError("training data has no rows");

  const bool ordinal = spec.response == ResponseKind::Ordinal;
  int baselines = 0, hurdles = 0;
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    const auto& t = spec.terms[j];
    if (t.kind == Kind::BaselineCount) {
      if (ordinal) throw ConfigError(term_where(j, t.kind) + ": requires a count response");
      ++baselines;
    }
    if (t.kind == Kind::BaselineOrdinal) {
      if (!ordinal) throw ConfigError(term_where(j, t.kind) + ": requires an ordinal response");
      ++baselines;
    }
    if (t.kind == Kind::HurdleZero) {
      if (ordinal) throw ConfigError(term_where(j, t.kind) + ": requires a count response");
      ++hurdles;
    }
    if (t.zero_indicator && ordinal) {
      throw ConfigError(term_where(j, t.kind) + ": zero_indicator requires a count response");
    }
    if (t.kind == Kind::CategorySpecificSmooth && !ordinal) {
      throw ConfigError(term_where(j, t.kind) + ": requires an ordinal response");
    }
  }
  if (baselines != 1) {
    throw ConfigError("terms: exactly one baseline term is required, found " +
                      std::to_string(baselines));
  }
  if (hurdles > 1) throw ConfigError("terms: at most one hurdle_zero term is allowed");

  const auto& ycol = train.column(spec.response_column);
  if (ordinal) {
    m.categories_ = spec.num_categories();
    if (m.categories_ < 2) throw ConfigError("response: an ordinal response needs at least 2 categories");
  } else {
    for (const auto& t : spec.terms) {
      if (t.kind == Kind::BaselineCount) m.support_min_ = bdctm::support_minimum(t.transform);
    }
    double ymax = 0.0;
    for (std::size_t i = 0; i < train.rows(); ++i) {
      const double y = ycol.values[i];
      if (y < m.support_min_) {
        throw DataError("row " + std::to_string(i + 1) + ", column '" + spec.response_column +
                        "': count " + format_double(y) + " below the support minimum " +
                        std::to_string(m.support_min_) + " of the response transform");
      }
      ymax = std::max(ymax, y);
    }
    m.max_count_ = static_cast<int>(ymax);
  }
  const int c = m.categories_ - 1;

  int offset = 0;
  for (std::size_t j = 0; j < spec.terms.size(); ++j) {
    const auto& t = spec.terms[j];
    DesignBlock blk;
    blk.kind = t.kind;
    blk.columns = t.columns;
    blk.zero_indicator = t.zero_indicator;
    blk.a = t.a;
    blk.b = t.b;
    if (!(t.a > 0.0 && t.b > 0.0)) {
      throw ConfigError(term_where(j, t.kind) + ": hyperparameters a and b must be positive");
    }
    blk.jitter = t.jitter.value_or(t.kind == Kind::CategorySpecificSmooth ? 1e-6 : 0.0);
    if (blk.jitter < 0.0) throw ConfigError(term_where(j, t.kind) + ": jitter must be nonnegative");
    const std::string prefix = t.zero_indicator ? "zero:" : "";

    switch (t.kind) {
      case Kind::BaselineCount: {
        require_columns(t, j, 0, 0);
        if (t.dimension < std::max(t.degree + 1, 3)) {
          throw ConfigError(term_where(j, t.kind) + ": dimension must be at least " +
                            std::to_string(std::max(t.degree + 1, 3)));
        }
        blk.label = prefix + "h_y";
        blk.ypart = YPart::Spline;
        blk.transform = t.transform;
        const double lo = apply_transform(t.transform, m.support_min_);
        const double hi = apply_transform(t.transform, std::max(m.max_count_, m.support_min_ + 1));
        blk.yknots = make_knots(lo, hi, t.dimension, t.degree);
        blk.map = {t.dimension, 1, true};
        blk.prior = PriorType::Single;
        blk.K = monotone_first_diff(t.dimension);
        for (int d = 1; d <= t.dimension; ++d) blk.names.push_back(blk.label + "[" + std::to_string(d) + "]");
        break;
      }
      case Kind::BaselineOrdinal:
        require_columns(t, j, 0, 0);
        blk.label = "theta";
        blk.ypart = YPart::Ordinal;
        blk.categories = c;
        blk.map = {c, 1, true};
        for (int r = 1; r <= c; ++r) blk.names.push_back("theta[" + std::to_string(r) + "]");
        break;
      case Kind::Linear: {
        require_columns(t, j, 1, std::numeric_limits<std::size_t>::max());
        blk.label = prefix + "linear(" + join(t.columns, ":") + ")";
        blk.xpart = XPart::Linear;
        blk.sign = -1.0;
        blk.xdim = static_cast<int>(t.columns.size());
        for (const auto& col : t.columns) {
          double mean, sd;
          standardize_stats(column_values(train, col), col, mean, sd);
          blk.means.push_back(mean);
          blk.sds.push_back(sd);
          blk.names.push_back(prefix + col);
        }
        break;
      }
      case Kind::Smooth: {
        require_columns(t, j, 1, 1);
        if (t.dimension < std::max(t.degree + 1, 3)) {
          throw ConfigError(term_where(j, t.kind) + ": dimension must be at least " +
                            std::to_string(std::max(t.degree + 1, 3)));
        }
        blk.label = prefix + "s(" + t.columns[0] + ")";
        blk.xpart = XPart::Spline;
        blk.sign = -1.0;
        blk.xdim = t.dimension;
        blk.xknots.push_back(make_knots(column_values(train, t.columns[0]), t.dimension, t.degree));
        blk.prior = PriorType::Single;
        blk.K = rw2_penalty(t.dimension);
        for (int d = 1; d <= t.dimension; ++d) blk.names.push_back(blk.label + "[" + std::to_string(d) + "]");
        break;
      }
      case Kind::Random: {
        require_columns(t, j, 1, 1);
        blk.label = prefix + "re(" + t.columns[0] + ")";
        blk.xpart = XPart::Group;
        blk.sign = -1.0;
        const auto& col = train.column(t.columns[0]);
        // Only levels present in the training rows get a coefficient.
        std::vector<bool> seen(col.levels.size(), false);
        for (std::size_t i = 0; i < train.rows(); ++i) seen[col.code(i) - 1] = true;
        for (std::size_t k = 0; k < col.levels.size(); ++k) {
          if (seen[k]) blk.group_levels.push_back(col.levels[k]);
        }
        blk.xdim = static_cast<int>(blk.group_levels.size());
        blk.prior = PriorType::Single;
        blk.K = identity_penalty(blk.xdim);
        for (const auto& l : blk.group_levels) blk.names.push_back(blk.label + "[" + l + "]");
        break;
      }
      case Kind::TensorSmooth: {
        require_columns(t, j, 2, 2);
        const int need = std::max(t.degree + 1, 3);
        if (t.dimension < need || t.dimension2 < need) {
          throw ConfigError(term_where(j, t.kind) + ": dimensions must be at least " + std::to_string(need));
        }
        blk.label = prefix + "te(" + t.columns[0] + ":" + t.columns[1] + ")";
        blk.xpart = XPart::Tensor;
        blk.sign = -1.0;
        blk.xdim = t.dimension * t.dimension2;
        blk.xknots.push_back(make_knots(column_values(train, t.columns[0]), t.dimension, t.degree));
        blk.xknots.push_back(make_knots(column_values(train, t.columns[1]), t.dimension2, t.degree));
        const Matrix k1 = rw2_penalty(t.dimension);
        const Matrix k2 = rw2_penalty(t.dimension2);
        blk.KA = kron(k1, Matrix::Identity(t.dimension2, t.dimension2));
        blk.KB = kron(Matrix::Identity(t.dimension, t.dimension), k2);
        blk.prior = PriorType::Anisotropic;
        blk.grid = build_anisotropy_grid(k1, k2, t.omega_grid);
        for (int a = 1; a <= t.dimension; ++a) {
          for (int b = 1; b <= t.dimension2; ++b) {
            blk.names.push_back(blk.label + "[" + std::to_string(a) + ":" + std::to_string(b) + "]");
          }
        }
        break;
      }
      case Kind::CategorySpecificSmooth: {
        require_columns(t, j, 1, 1);
        if (t.dimension < std::max(t.degree + 1, 3)) {
          throw ConfigError(term_where(j, t.kind) + ": dimension must be at least " +
                            std::to_string(std::max(t.degree + 1, 3)));
        }
        blk.label = "cs(" + t.columns[0] + ")";
        blk.ypart = YPart::Ordinal;
        blk.categories = c;
        // Uncentered: the positive weights of a partition of unity keep the
        // thresholds increasing in the category at every x.
        blk.xpart = XPart::Spline;
        blk.xdim = t.dimension;
        blk.xknots.push_back(make_knots(column_values(train, t.columns[0]), t.dimension, t.degree));
        blk.map = {c, t.dimension, true};
        blk.prior = PriorType::Single;
        blk.K = kron(Matrix::Identity(c, c), rw2_penalty(t.dimension));
        for (int r = 1; r <= c; ++r) {
          for (int d = 1; d <= t.dimension; ++d) {
            blk.names.push_back(blk.label + "[" + std::to_string(r) + ":" + std::to_string(d) + "]");
          }
        }
        break;
      }
      case Kind::HurdleZero: {
        blk.label = "zero";
        blk.ypart = YPart::ZeroIndicator;
        blk.xpart = XPart::HurdleLinear;
        blk.xdim = 1 + static_cast<int>(t.columns.size());
        blk.names.push_back("zero(intercept)");
        for (const auto& col : t.columns) {
          double mean, sd;
          standardize_stats(column_values(train, col), col, mean, sd);
          blk.means.push_back(mean);
          blk.sds.push_back(sd);
          blk.names.push_back("zero(" + col + ")");
        }
        break;
      }
    }

    const int ydim = blk.ypart == YPart::Spline    ? t.dimension
                     : blk.ypart == YPart::Ordinal ? c
                                                   : 1;
    blk.size = ydim * blk.xdim;
    if (!(blk.map.monotone && (blk.kind == Kind::BaselineCount || blk.kind == Kind::BaselineOrdinal ||
                               blk.kind == Kind::CategorySpecificSmooth))) {
      blk.map = {1, blk.size, false};
    }
    blk.offset = offset;
    offset += blk.size;

    if (blk.prior == PriorType::Single) {
      blk.rank = bdctm::rank(blk.K);
      blk.tau_index = m.num_tau2_++;
    } else if (blk.prior == PriorType::Anisotropic) {
      blk.rank = blk.grid.rank.front();
      blk.tau_index = m.num_tau2_++;
      blk.omega_index = m.num_omega_++;
    }

    blk.report_scale = Vector::Ones(blk.size);
    if (blk.xpart == XPart::Linear) {
      for (int k = 0; k < blk.xdim; ++k) blk.report_scale[k] = 1.0 / blk.sds[k];
    } else if (blk.xpart == XPart::HurdleLinear) {
      for (int k = 1; k < blk.xdim; ++k) blk.report_scale[k] = 1.0 / blk.sds[k - 1];
    }

    blk.x_offsets = Vector::Zero(blk.xdim);
    if (blk.xpart == XPart::Spline || blk.xpart == XPart::Tensor) {
      if (blk.kind != Kind::CategorySpecificSmooth) {
        std::vector<std::uint8_t> unknown(train.rows(), 0);
        std::vector<std::string> warnings;
        EvaluatedBasis eb{raw_covariates(blk, train, false, unknown, warnings), Vector::Zero(blk.xdim)};
        blk.x_offsets = center(std::move(eb)).offsets;
      }
    }
    m.blocks_.push_back(std::move(blk));
  }
  m.dimension_ = offset;
  return m;
}

std::vector<std::string> Model::coefficient_names() const {
  std::vector<std::string> out;
  for (const auto& b : blocks_) out.insert(out.end(), b.names.begin(), b.names.end());
  return out;
}

std::vector<std::string> Model::tau2_names() const {
  std::vector<std::string> out(num_tau2_);
  for (const auto& b : blocks_) {
    if (b.tau_index >= 0) out[b.tau_index] = "tau2:" + b.label;
  }
  return out;
}

std::vector<std::string> Model::omega_names() const {
  std::vector<std::string> out(num_omega_);
  for (const auto& b : blocks_) {
    if (b.omega_index >= 0) out[b.omega_index] = "omega:" + b.label;
  }
  return out;
}

Vector Model::report_scale() const {
  Vector s(dimension_);
  for (const auto& b : blocks_) s.segment(b.offset, b.size) = b.report_scale;
  return s;
}

CovariateRows Model::covariates(const Dataset& data, bool allow_unknown_levels) const {
  CovariateRows cov;
  cov.n = data.rows();
  cov.unknown.assign(cov.n, 0);
  for (const auto& b : blocks_) {
    RowMatrix x = raw_covariates(b, data, allow_unknown_levels, cov.unknown, cov.warnings);
    if (b.x_offsets.size() && !b.x_offsets.isZero(0.0)) {
      for (std::size_t i = 0; i < cov.n; ++i) x.row(i) -= b.x_offsets.transpose();
    }
    cov.x.push_back(std::move(x));
  }
  return cov;
}

Side Model::fill_row(const CovariateRows& cov, std::size_t row, int y, double* out,
                     bool* extrapolated) const {
  std::fill(out, out + dimension_, 0.0);
  if (extrapolated) *extrapolated = false;
  const Side side = side_of(y);
  if (side != Side::Regular) return side;

  for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
    const auto& b = blocks_[bi];
    if (b.zero_indicator && y != 0) continue;
    Vector ypart;
    switch (b.ypart) {
      case YPart::None:
        ypart = Vector::Ones(1);
        break;
      case YPart::Spline: {
        bool outside = false;
        ypart = eval_bspline(b.yknots, apply_transform(b.transform, y), OutOfDomain::LinearExtrapolate,
                             &outside);
        if (extrapolated && outside) *extrapolated = true;
        break;
      }
      case YPart::Ordinal:
        ypart = eval_ordinal(y, b.categories).values;
        break;
      case YPart::ZeroIndicator:
        ypart = Vector::Constant(1, y == 0 ? 1.0 : 0.0);
        break;
    }
    const auto x = cov.x[bi].row(static_cast<Eigen::Index>(row));
    double* dst = out + b.offset;
    for (Eigen::Index a = 0; a < ypart.size(); ++a) {
      const double ya = b.sign * ypart[a];
      if (ya == 0.0) continue;
      for (int d = 0; d < b.xdim; ++d) dst[a * b.xdim + d] = ya * x[d];
    }
  }
  return Side::Regular;
}

RowMatrix Model::rows_at(const CovariateRows& cov, int y, Side* side) const {
  RowMatrix out(static_cast<Eigen::Index>(cov.n), dimension_);
  for (std::size_t i = 0; i < cov.n; ++i) fill_row(cov, i, y, out.row(i).data());
  if (side) *side = side_of(y);
  return out;
}

Side Model::side_of(int y) const {
  if (spec_.response == ResponseKind::Ordinal) {
    if (y < 1) return Side::LowerSentinel;
    if (y == categories_) return Side::UpperSentinel;
    if (y > categories_) {
      throw IndexError("category " + std::to_string(y) + " outside 1.." + std::to_string(categories_));
    }
    return Side::Regular;
  }
  return y < support_min_ ? Side::LowerSentinel : Side::Regular;
}

ModelDesign Model::design(const Dataset& data, bool allow_unknown_levels) const {
  ModelDesign d;
  d.n = data.rows();
  const auto& ycol = data.column(spec_.response_column);
  const CovariateRows cov = covariates(data, allow_unknown_levels);
  d.unknown = cov.unknown;
  d.warnings = cov.warnings;
  d.upper = RowMatrix::Zero(static_cast<Eigen::Index>(d.n), dimension_);
  d.lower = RowMatrix::Zero(static_cast<Eigen::Index>(d.n), dimension_);
  d.upper_side.resize(d.n);
  d.lower_side.resize(d.n);
  d.y.resize(d.n);
  std::size_t extrapolated = 0;
  for (std::size_t i = 0; i < d.n; ++i) {
    const double yv = ycol.values[i];
    const int y = static_cast<int>(yv);
    if (spec_.response == ResponseKind::Count) {
      if (yv < support_min_ || yv != std::floor(yv)) {
        throw DataError("row " + std::to_string(i + 1) + ", column '" + spec_.response_column +
                        "': invalid count " + format_double(yv));
      }
    } else if (y < 1 || y > categories_) {
      throw DataError("row " + std::to_string(i + 1) + ", column '" + spec_.response_column +
                      "': category " + std::to_string(y) + " outside 1.." + std::to_string(categories_));
    }
    d.y[i] = y;
    bool ex_u = false, ex_l = false;
    d.upper_side[i] = fill_row(cov, i, y, d.upper.row(i).data(), &ex_u);
    d.lower_side[i] = fill_row(cov, i, y - 1, d.lower.row(i).data(), &ex_l);
    extrapolated += (ex_u || ex_l);
  }
  if (extrapolated) {
    d.warnings.push_back("response: " + std::to_string(extrapolated) +
                         " row(s) beyond the training range use the linearly extended response basis");
  }
  return d;
}

std::optional<Vector> Model::gamma(const Vector& beta) const {
  if (beta.size() != dimension_) throw DimensionError("gamma: coefficient vector has wrong length");
  Vector g(dimension_);
  for (const auto& b : blocks_) {
    auto gb = gamma_from_beta(beta.segment(b.offset, b.size), b.map);
    if (!gb) return std::nullopt;
    g.segment(b.offset, b.size) = *gb;
  }
  return g;
}

Vector Model::pullback(const Vector& beta, const Vector& grad_gamma) const {
  Vector out(dimension_);
  for (const auto& b : blocks_) {
    out.segment(b.offset, b.size) =
        bdctm::pullback(beta.segment(b.offset, b.size), b.map, grad_gamma.segment(b.offset, b.size));
  }
  return out;
}

std::vector<Vector> Model::unpack(const Vector& beta) const {
  if (beta.size() != dimension_) throw DimensionError("unpack: coefficient vector has wrong length");
  std::vector<Vector> out;
  for (const auto& b : blocks_) out.emplace_back(beta.segment(b.offset, b.size));
  return out;
}

Vector Model::pack(const std::vector<Vector>& parts) const {
  if (parts.size() != blocks_.size()) throw DimensionError("pack: wrong number of blocks");
  Vector out(dimension_);
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].size() != blocks_[i].size) throw DimensionError("pack: block size mismatch");
    out.segment(blocks_[i].offset, blocks_[i].size) = parts[i];
  }
  return out;
}

namespace {

void check_hyper(const DesignBlock& b, const std::vector<double>& tau2, const std::vector<int>& omega) {
  if (b.tau_index >= 0) {
    if (b.tau_index >= static_cast<int>(tau2.size())) throw DimensionError("state: missing tau2");
    if (!(tau2[b.tau_index] > 0.0)) throw DomainError("state: tau2 must be positive");
  }
  if (b.omega_index >= 0) {
    if (b.omega_index >= static_cast<int>(omega.size())) throw DimensionError("state: missing omega");
    const int k = omega[b.omega_index];
    if (k < 0 || k >= b.grid.size()) throw DomainError("state: omega index off the grid");
  }
}

}  // namespace

Matrix Model::precision(const ModelState& state) const {
  Matrix K = Matrix::Zero(dimension_, dimension_);
  for (const auto& b : blocks_) {
    check_hyper(b, state.tau2, state.omega);
    auto blk = K.block(b.offset, b.offset, b.size, b.size);
    if (b.prior == PriorType::Single) {
      blk = b.K / state.tau2[b.tau_index];
    } else if (b.prior == PriorType::Anisotropic) {
      const double w = b.grid.omega[state.omega[b.omega_index]];
      blk = (w * b.KA + (1.0 - w) * b.KB) / state.tau2[b.tau_index];
    }
    if (b.jitter > 0.0) blk.diagonal().array() += b.jitter;
  }
  return K;
}

double Model::block_quadratic(const DesignBlock& b, const Vector& beta, int omega_index) const {
  const auto v = beta.segment(b.offset, b.size);
  if (b.prior == PriorType::Single) return v.dot(b.K * v);
  if (b.prior == PriorType::Anisotropic) {
    const double w = b.grid.omega[omega_index];
    return w * v.dot(b.KA * v) + (1.0 - w) * v.dot(b.KB * v);
  }
  return 0.0;
}

double Model::prior_term(const Vector& beta, const std::vector<double>& tau2,
                         const std::vector<int>& omega, Vector* grad) const {
  double value = 0.0;
  for (const auto& b : blocks_) {
    if (b.prior == PriorType::Flat && b.jitter == 0.0) continue;
    check_hyper(b, tau2, omega);
    const auto v = beta.segment(b.offset, b.size);
    Vector kv = Vector::Zero(b.size);
    if (b.prior == PriorType::Single) {
      kv = b.K * v / tau2[b.tau_index];
    } else if (b.prior == PriorType::Anisotropic) {
      const double w = b.grid.omega[omega[b.omega_index]];
      kv = (w * (b.KA * v) + (1.0 - w) * (b.KB * v)) / tau2[b.tau_index];
    }
    if (b.jitter > 0.0) kv += b.jitter * v;
    value -= 0.5 * v.dot(kv);
    if (grad) grad->segment(b.offset, b.size) -= kv;
  }
  return value;
}

ModelState Model::initial_state() const {
  ModelState s;
  s.beta = Vector::Zero(dimension_);
  s.tau2.assign(num_tau2_, 1.0);
  s.omega.assign(num_omega_, 0);
  for (const auto& b : blocks_) {
    if (b.omega_index >= 0) s.omega[b.omega_index] = b.grid.size() / 2;
  }
  return s;
}

Predictor::Predictor(const Model& model, const Matrix& beta_draws) : model_(&model) {
  if (beta_draws.cols() != model.dimension()) {
    throw DimensionError("predictor: draws have " + std::to_string(beta_draws.cols()) +
                         " columns, model has " + std::to_string(model.dimension()));
  }
  if (beta_draws.rows() == 0) throw DimensionError("predictor: no draws");
  gamma_.resize(beta_draws.rows(), beta_draws.cols());
  for (Eigen::Index s = 0; s < beta_draws.rows(); ++s) {
    auto g = model.gamma(beta_draws.row(s).transpose());
    if (!g) throw DomainError("predictor: draw " + std::to_string(s) + " overflows the monotone map");
    gamma_.row(s) = g->transpose();
  }
  gamma_mean_ = gamma_.colwise().mean().transpose();
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Matrix cdf_of(const Model& m, const CovariateRows& cov, int y, const Matrix& gamma) {
  Side side;
  const RowMatrix rows = m.rows_at(cov, y, &side);
  const auto n = static_cast<Eigen::Index>(cov.n);
  if (side == Side::LowerSentinel) return Matrix::Zero(n, gamma.rows());
  if (side == Side::UpperSentinel) return Matrix::Ones(n, gamma.rows());
  Matrix eta = rows * gamma.transpose();
  const auto& F = m.reference();
  for (Eigen::Index j = 0; j < eta.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) eta(i, j) = F.cdf(eta(i, j));
  }
  return eta;
}

Matrix log_pmf_of(const Model& m, const CovariateRows& cov, int y, const Matrix& gamma) {
  const auto n = static_cast<Eigen::Index>(cov.n);
  Side su, sl;
  const RowMatrix up = m.rows_at(cov, y, &su);
  if (su == Side::LowerSentinel) return Matrix::Constant(n, gamma.rows(), -kInf);
  const RowMatrix lo = m.rows_at(cov, y - 1, &sl);
  Matrix eu = su == Side::Regular ? Matrix(up * gamma.transpose()) : Matrix::Constant(n, gamma.rows(), kInf);
  const Matrix el = sl == Side::Regular ? Matrix(lo * gamma.transpose())
                                        : Matrix::Constant(n, gamma.rows(), -kInf);
  const auto& F = m.reference();
  for (Eigen::Index j = 0; j < eu.cols(); ++j) {
    for (Eigen::Index i = 0; i < n; ++i) eu(i, j) = F.log_cdf_difference(eu(i, j), el(i, j));
  }
  return eu;
}

int floor_int(double y) {
  if (!std::isfinite(y)) throw DomainError("predict: response value must be finite");
  return static_cast<int>(std::floor(y));
}

}  // namespace

Matrix Predictor::cdf_draws(const CovariateRows& cov, double y) const {
  return cdf_of(*model_, cov, floor_int(y), gamma_);
}

Matrix Predictor::log_pmf_draws(const CovariateRows& cov, double y) const {
  return log_pmf_of(*model_, cov, floor_int(y), gamma_);
}

Vector Predictor::cdf(const CovariateRows& cov, double y) const {
  return cdf_draws(cov, y).rowwise().mean();
}

Vector Predictor::pmf(const CovariateRows& cov, double y) const {
  return log_pmf_draws(cov, y).array().exp().rowwise().mean();
}

Matrix Predictor::log_pmf_observed(const ModelDesign& design) const {
  const auto n = static_cast<Eigen::Index>(design.n);
  const Matrix eu = design.upper * gamma_.transpose();
  const Matrix el = design.lower * gamma_.transpose();
  const auto& F = model_->reference();
  Matrix out(n, gamma_.rows());
  for (Eigen::Index s = 0; s < out.cols(); ++s) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double u = design.upper_side[i] == Side::Regular         ? eu(i, s)
                       : design.upper_side[i] == Side::UpperSentinel ? kInf
                                                                     : -kInf;
      const double l = design.lower_side[i] == Side::Regular ? el(i, s) : -kInf;
      out(i, s) = F.log_cdf_difference(u, l);
    }
  }
  return out;
}

Vector Predictor::cdf_plugin(const CovariateRows& cov, double y) const {
  return cdf_of(*model_, cov, floor_int(y), gamma_mean_.transpose());
}

Vector Predictor::pmf_plugin(const CovariateRows& cov, double y) const {
  return log_pmf_of(*model_, cov, floor_int(y), gamma_mean_.transpose()).array().exp();
}

}  // namespace bdctm
