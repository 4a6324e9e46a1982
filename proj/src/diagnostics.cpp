#include "bdctm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numeric>
#include <thread>

#include "bdctm/error.hpp"
#include "bdctm/refdist.hpp"

namespace bdctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxSupport = 100000;

std::vector<int> response_codes(const Model& model, const Dataset& data) {
  const auto& col = data.column(model.spec().response_column);
  std::vector<int> y(data.rows());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = col.code(i);
  return y;
}

}  // namespace

Rootogram rootogram(const Matrix& pmf, const std::vector<int>& y) {
  if (static_cast<std::size_t>(pmf.rows()) != y.size()) {
    throw DimensionError("rootogram: PMF rows do not match the data");
  }
  Rootogram out;
  const auto R = pmf.cols();
  for (Eigen::Index r = 0; r < R; ++r) {
    out.r.push_back(static_cast<int>(r));
    double o = 0.0;
    for (int v : y) o += (v == r);
    const double e = pmf.col(r).sum();
    out.obs.push_back(o);
    out.exp.push_back(e);
    out.sqrt_obs.push_back(std::sqrt(o));
    out.sqrt_exp.push_back(std::sqrt(std::max(e, 0.0)));
  }
  return out;
}

Rootogram rootogram(const Model& model, const Predictor& pred, const Dataset& data, int r_max) {
  if (model.spec().response != ResponseKind::Count) {
    throw ConfigError("rootograms are only defined for count models");
  }
  if (r_max < 0) throw DomainError("rootogram: r_max must be nonnegative");
  const auto cov = model.covariates(data, true);
  Matrix pmf(static_cast<Eigen::Index>(data.rows()), r_max + 1);
  for (int r = 0; r <= r_max; ++r) pmf.col(r) = pred.pmf(cov, r);
  return rootogram(pmf, response_codes(model, data));
}

Vector quantile_residuals(const Vector& lower_cdf, const Vector& upper_cdf, Rng& rng) {
  if (lower_cdf.size() != upper_cdf.size()) throw DimensionError("quantile_residuals: size mismatch");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double kMinWidth = 1e-12;
  constexpr double kEdge = 1e-16;
  Vector r(lower_cdf.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    double lo = std::clamp(lower_cdf[i], 0.0, 1.0);
    double hi = std::clamp(upper_cdf[i], 0.0, 1.0);
    if (hi - lo < kMinWidth) {
      hi = std::min(1.0, lo + kMinWidth);
      lo = hi - kMinWidth;
    }
    const double u = std::clamp(lo + (hi - lo) * unif(rng), kEdge, 1.0 - 1e-16);
    r[i] = math::normal_quantile(u);
  }
  return r;
}

Vector quantile_residuals(const Model& model, const Predictor& pred, const Dataset& data, Rng& rng) {
  const auto cov = model.covariates(data, true);
  const auto y = response_codes(model, data);
  Vector lo(static_cast<Eigen::Index>(y.size())), hi(static_cast<Eigen::Index>(y.size()));
  // Rows share one evaluation per distinct response value.
  std::vector<int> values(y);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  for (int v : values) {
    const Vector fu = pred.cdf(cov, v);
    const Vector fl = pred.cdf(cov, v - 1);
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] != v) continue;
      hi[i] = fu[i];
      lo[i] = fl[i];
    }
  }
  return quantile_residuals(lo, hi, rng);
}

ScoreTotals& ScoreTotals::operator+=(const ScoreTotals& o) {
  logarithmic += o.logarithmic;
  brier += o.brier;
  spherical += o.spherical;
  n += o.n;
  return *this;
}

ScoreTotals score_one(const Vector& p, int y) {
  if (y < 0 || y >= p.size()) throw IndexError("score: outcome outside the forecast support");
  ScoreTotals s;
  s.n = 1;
  const double py = p[y];
  s.logarithmic = py > 0.0 ? std::log(py) : -kInf;
  double brier = 0.0;
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double d = (k == y ? 1.0 : 0.0) - p[k];
    brier += d * d;
  }
  s.brier = -brier;
  const double norm = p.norm();
  s.spherical = norm > 0.0 ? py / norm : 0.0;
  return s;
}

Waic waic(const Matrix& log_pmf) {
  const auto S = log_pmf.rows();
  if (S < 2) throw DimensionError("waic: need at least 2 draws");
  Waic w;
  for (Eigen::Index i = 0; i < log_pmf.cols(); ++i) {
    const auto col = log_pmf.col(i);
    const double m = col.maxCoeff();
    double lse;
    if (m == -kInf) {
      lse = -kInf;
    } else {
      lse = m + std::log((col.array() - m).exp().sum());
    }
    w.lppd += lse - std::log(static_cast<double>(S));
    const double mean = col.mean();
    w.p_waic += (col.array() - mean).square().sum() / (S - 1.0);
  }
  w.waic = -2.0 * (w.lppd - w.p_waic);
  return w;
}

ScoreReport scores(const Matrix& pmf, const std::vector<int>& y) {
  if (static_cast<std::size_t>(pmf.rows()) != y.size()) throw DimensionError("scores: size mismatch");
  ScoreReport rep;
  for (std::size_t i = 0; i < y.size(); ++i) {
    rep.total += score_one(pmf.row(static_cast<Eigen::Index>(i)).transpose(), y[i]);
  }
  return rep;
}

Matrix predictive_pmf(const Model& model, const Predictor& pred, const CovariateRows& cov,
                      int min_cap, bool plugin, int* cap) {
  const auto n = static_cast<Eigen::Index>(cov.n);
  auto pmf_at = [&](int y) { return plugin ? pred.pmf_plugin(cov, y) : pred.pmf(cov, y); };
  if (model.spec().response == ResponseKind::Ordinal) {
    const int K = model.num_categories();
    Matrix out(n, K);
    for (int r = 1; r <= K; ++r) out.col(r - 1) = pmf_at(r);
    if (cap) *cap = K;
    return out;
  }
  std::vector<Vector> cols;
  Vector mass = Vector::Zero(n);
  int k = 0;
  for (;; ++k) {
    if (k > kMaxSupport) throw DomainError("predictive support did not reach the tail-mass cap");
    cols.push_back(pmf_at(k));
    mass += cols.back();
    if (k >= min_cap && (n == 0 || (1.0 - mass.array()).maxCoeff() < kTailMass)) break;
  }
  if (cap) *cap = k;
  Matrix out(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = cols[j];
  return out;
}

ScoreReport score_model(const Model& model, const Predictor& pred, const Dataset& data, bool plugin,
                        bool allow_unknown_levels) {
  const auto cov = model.covariates(data, allow_unknown_levels);
  auto y = response_codes(model, data);
  int min_cap = 0;
  if (model.spec().response == ResponseKind::Count) {
    for (int v : y) min_cap = std::max(min_cap, v + 10);
  }
  int cap = 0;
  const Matrix pmf = predictive_pmf(model, pred, cov, min_cap, plugin, &cap);
  if (model.spec().response == ResponseKind::Ordinal) {
    for (auto& v : y) v -= 1;
  }
  ScoreReport rep = scores(pmf, y);
  rep.support_cap = cap;
  for (std::size_t i = 0; i < cov.n; ++i) {
    if (cov.unknown[i]) rep.flagged_rows.push_back(i);
  }
  return rep;
}

std::vector<int> fold_assignment(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("cross-validation needs k >= 2");
  if (n < static_cast<std::size_t>(k)) throw ConfigError("cross-validation needs n >= k");
  std::vector<int> folds(n);
  for (std::size_t i = 0; i < n; ++i) folds[i] = static_cast<int>(i % k);
  Rng rng(seed);
  // Fisher-Yates with an explicit draw so the result does not depend on
  // the standard library's shuffle.
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
    std::swap(folds[i], folds[j]);
  }
  return folds;
}

ScoreReport kfold_cv(const ModelSpec& spec, const Dataset& data, int k, const NutsConfig& config,
                     std::uint64_t seed, bool plugin) {
  validate(config);
  const auto folds = fold_assignment(data.rows(), k, seed);
  std::vector<ScoreReport> results(k);
  std::vector<std::exception_ptr> errors(k);

  auto run_fold = [&](int f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < folds.size(); ++i) (folds[i] == f ? test : train).push_back(i);
    const Dataset tr = data.subset(train);
    const Dataset te = data.subset(test);
    const Model model = Model::build(spec, tr);
    const ModelDesign design = model.design(tr);
    NutsConfig cfg = config;
    cfg.seed = split_seed(seed, 1000 + f);
    cfg.threads = 1;
    cfg.store_log_pmf = false;
    const PosteriorDraws draws = run_chains(model, design, cfg);
    const Predictor pred(model, draws.beta());
    ScoreReport rep = score_model(model, pred, te, plugin, true);
    for (auto& r : rep.flagged_rows) r = test[r];
    results[f] = std::move(rep);
  };

  int threads = config.threads > 0 ? config.threads
                                   : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, k);
  auto work = [&](int w) {
    for (int f = w; f < k; f += threads) {
      try {
        run_fold(f);
      } catch (...) {
        errors[f] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  ScoreReport out;
  for (int f = 0; f < k; ++f) {
    out.total += results[f].total;
    out.folds.push_back(results[f].total);
    out.flagged_rows.insert(out.flagged_rows.end(), results[f].flagged_rows.begin(),
                            results[f].flagged_rows.end());
    out.support_cap = std::max(out.support_cap, results[f].support_cap);
  }
  std::sort(out.flagged_rows.begin(), out.flagged_rows.end());
  return out;
}

}  // namespace bdctm
