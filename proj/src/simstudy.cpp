#include "bdctm/simstudy.hpp"

#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <ostream>
#include <thread>

#include "bdctm/dataset.hpp"
#include "bdctm/error.hpp"
#include "bdctm/glm.hpp"
#include "bdctm/likelihood.hpp"
#include "bdctm/model.hpp"

namespace bdctm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxSearch = 1000000;

struct NamedDgp {
  DgpKind kind;
  std::string_view name;
};
constexpr NamedDgp kDgpNames[] = {
    {DgpKind::Poisson, "poisson"},
    {DgpKind::NegBin, "negbin"},
    {DgpKind::TrafoLogit, "trafo_logit"},
    {DgpKind::TrafoProbit, "trafo_probit"},
    {DgpKind::TrafoCloglog, "trafo_cloglog"},
};

struct NamedModel {
  StudyModel model;
  std::string_view name;
};
constexpr NamedModel kModelNames[] = {
    {StudyModel::Bmlo, "bmlo"}, {StudyModel::Bmpr, "bmpr"}, {StudyModel::Bmcll, "bmcll"},
    {StudyModel::Mp, "mp"},     {StudyModel::Mnb, "mnb"},   {StudyModel::Oracle, "oracle"},
};

bool is_trafo(DgpKind k) {
  return k == DgpKind::TrafoLogit || k == DgpKind::TrafoProbit || k == DgpKind::TrafoCloglog;
}

double trafo_h(const DgpSpec& d, int y, double z) {
  const Vector a = eval_bspline(d.knots, std::log1p(static_cast<double>(y)), OutOfDomain::LinearExtrapolate);
  return a.dot(d.gamma) - d.slope * z;
}

Dataset make_dataset(const std::vector<double>& z, const std::vector<int>& y) {
  Dataset data;
  Column yc{"y", ColumnKind::Count, std::vector<double>(y.begin(), y.end()), {}};
  Column zc{"z", ColumnKind::Continuous, z, {}};
  data.add(std::move(yc));
  data.add(std::move(zc));
  return data;
}

Matrix glm_design(const std::vector<double>& z) {
  Matrix X(static_cast<Eigen::Index>(z.size()), 2);
  for (std::size_t i = 0; i < z.size(); ++i) {
    X(i, 0) = 1.0;
    X(i, 1) = z[i];
  }
  return X;
}

}  // namespace

std::string_view dgp_name(DgpKind kind) {
  for (const auto& d : kDgpNames) {
    if (d.kind == kind) return d.name;
  }
  return "poisson";
}

DgpKind parse_dgp(std::string_view name) {
  for (const auto& d : kDgpNames) {
    if (d.name == name) return d.kind;
  }
  throw ConfigError("unknown DGP '" + std::string(name) + "'");
}

std::string_view study_model_name(StudyModel m) {
  for (const auto& d : kModelNames) {
    if (d.model == m) return d.name;
  }
  return "mp";
}

StudyModel parse_study_model(std::string_view name) {
  for (const auto& d : kModelNames) {
    if (d.name == name) return d.model;
  }
  throw ConfigError("unknown study model '" + std::string(name) + "'");
}

DgpSpec make_dgp(DgpKind kind) {
  DgpSpec d;
  d.kind = kind;
  if (is_trafo(kind)) {
    d.reference = kind == DgpKind::TrafoLogit    ? kLogistic
                  : kind == DgpKind::TrafoProbit ? kNormal
                                                 : kMinExtremeValue;
    d.knots = make_knots(0.0, std::log(kTrafoUpper), static_cast<int>(kTrafoGamma.size()), 3);
    d.gamma = Eigen::Map<const Vector>(kTrafoGamma.data(), static_cast<Eigen::Index>(kTrafoGamma.size()));
  }
  return d;
}

std::vector<double> gen_covariate(std::size_t n, Rng& rng) {
  if (n < 1) throw DomainError("gen_covariate: n must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> z(n);
  for (auto& v : z) v = unif(rng);
  return z;
}

double dgp_mean(const DgpSpec& d, double z) { return std::exp(d.intercept + d.slope * z); }

double dgp_cdf(const DgpSpec& d, int y, double z) {
  if (y < 0) return 0.0;
  switch (d.kind) {
    case DgpKind::Poisson:
    case DgpKind::NegBin: {
      double s = 0.0;
      for (int k = 0; k <= y; ++k) s += std::exp(dgp_log_pmf(d, k, z));
      return std::min(s, 1.0);
    }
    default:
      return d.reference.cdf(trafo_h(d, y, z));
  }
}

double dgp_log_pmf(const DgpSpec& d, int y, double z) {
  if (y < 0) return -kInf;
  switch (d.kind) {
    case DgpKind::Poisson:
      return poisson_log_pmf(y, dgp_mean(d, z));
    case DgpKind::NegBin:
      return negbin_log_pmf(y, dgp_mean(d, z), d.size);
    default: {
      const double l = y == 0 ? -kInf : trafo_h(d, y - 1, z);
      return d.reference.log_cdf_difference(trafo_h(d, y, z), l);
    }
  }
}

std::vector<int> gen_response(const DgpSpec& d, const std::vector<double>& z, Rng& rng) {
  std::vector<int> y(z.size());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    switch (d.kind) {
      case DgpKind::Poisson: {
        std::poisson_distribution<int> pois(dgp_mean(d, z[i]));
        y[i] = pois(rng);
        break;
      }
      case DgpKind::NegBin: {
        std::gamma_distribution<double> gam(d.size, dgp_mean(d, z[i]) / d.size);
        const double lambda = gam(rng);
        std::poisson_distribution<int> pois(lambda);
        y[i] = pois(rng);
        break;
      }
      default: {
        const double u = unif(rng);
        int k = 0;
        while (d.reference.cdf(trafo_h(d, k, z[i])) < u) {
          if (++k > kMaxSearch) {
            throw ConfigError("DGP CDF did not reach 1 - 1e-12 within y <= 1e6");
          }
        }
        y[i] = k;
      }
    }
  }
  return y;
}

double oracle_loglik(const DgpSpec& d, const std::vector<double>& z, const std::vector<int>& y) {
  double ll = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) ll += dgp_log_pmf(d, y[i], z[i]);
  return ll;
}

CellResult fit_and_score(StudyModel m, const std::vector<double>& z_train, const std::vector<int>& y_train,
                         const std::vector<double>& z_test, const std::vector<int>& y_test,
                         const NutsConfig& sampler, int baseline_dimension) {
  CellResult res;
  if (m == StudyModel::Mp || m == StudyModel::Mnb) {
    const Matrix X = glm_design(z_train);
    const Vector yv = Eigen::Map<const Eigen::VectorXi>(y_train.data(), static_cast<Eigen::Index>(y_train.size()))
                          .cast<double>();
    if (m == StudyModel::Mp) {
      const GlmFit fit = fit_poisson(X, yv);
      for (std::size_t i = 0; i < z_test.size(); ++i) {
        res.oos_loglik += poisson_log_pmf(y_test[i], std::exp(fit.coef[0] + fit.coef[1] * z_test[i]));
      }
    } else {
      const NegBinFit fit = fit_negbin(X, yv);
      for (std::size_t i = 0; i < z_test.size(); ++i) {
        res.oos_loglik +=
            negbin_log_pmf(y_test[i], std::exp(fit.coef[0] + fit.coef[1] * z_test[i]), fit.theta);
      }
    }
    return res;
  }
  if (m == StudyModel::Oracle) throw ConfigError("fit_and_score: the oracle is not fitted");

  ModelSpec spec;
  spec.response = ResponseKind::Count;
  spec.response_column = "y";
  spec.reference = m == StudyModel::Bmlo ? kLogistic : m == StudyModel::Bmpr ? kNormal : kMinExtremeValue;
  TermSpec base;
  base.kind = TermSpec::Kind::BaselineCount;
  base.dimension = baseline_dimension;
  TermSpec shift;
  shift.kind = TermSpec::Kind::Linear;
  shift.columns = {"z"};
  spec.terms = {base, shift};

  const Dataset train = make_dataset(z_train, y_train);
  const Dataset test = make_dataset(z_test, y_test);
  const Model model = Model::build(spec, train);
  const ModelDesign design = model.design(train);
  NutsConfig cfg = sampler;
  cfg.store_log_pmf = false;
  const PosteriorDraws draws = run_chains(model, design, cfg);
  res.divergences = draws.divergences();

  const Predictor pred(model, draws.beta());
  const Matrix lp = pred.log_pmf_observed(model.design(test));
  const double log_s = std::log(static_cast<double>(lp.cols()));
  for (Eigen::Index i = 0; i < lp.rows(); ++i) {
    const double mx = lp.row(i).maxCoeff();
    if (mx == -kInf) {
      res.oos_loglik = -kInf;
      break;
    }
    res.oos_loglik += mx + std::log((lp.row(i).array() - mx).exp().sum()) - log_s;
  }
  return res;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
  if (cfg.replications < 1) throw ConfigError("replications must be positive");
  if (cfg.n_train < 2 || cfg.n_test < 1) throw ConfigError("n_train must be >= 2 and n_test >= 1");
  validate(cfg.sampler);

  const std::size_t nd = cfg.dgps.size(), nm = cfg.models.size();
  const std::size_t cells = static_cast<std::size_t>(cfg.replications) * nd;
  std::vector<ResultRow> rows(cells * nm);

  auto run_cell = [&](std::size_t cell) {
    const int rep = static_cast<int>(cell / nd);
    const std::size_t di = cell % nd;
    const DgpSpec dgp = make_dgp(cfg.dgps[di]);
    const std::uint64_t cell_seed =
        split_seed(split_seed(cfg.seed, static_cast<std::uint64_t>(rep)), static_cast<std::uint64_t>(cfg.dgps[di]));
    Rng data_rng(cell_seed);
    const auto z_train = gen_covariate(cfg.n_train, data_rng);
    const auto y_train = gen_response(dgp, z_train, data_rng);
    const auto z_test = gen_covariate(cfg.n_test, data_rng);
    const auto y_test = gen_response(dgp, z_test, data_rng);
    const double oracle = oracle_loglik(dgp, z_test, y_test);

    for (std::size_t mi = 0; mi < nm; ++mi) {
      ResultRow& row = rows[cell * nm + mi];
      row.replication = rep + 1;
      row.dgp = std::string(dgp_name(cfg.dgps[di]));
      row.model = std::string(study_model_name(cfg.models[mi]));
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (cfg.models[mi] == StudyModel::Oracle) {
          row.centered_oos_loglik = 0.0;
        } else {
          NutsConfig sc = cfg.sampler;
          sc.seed = split_seed(cell_seed, 100 + static_cast<std::uint64_t>(cfg.models[mi]));
          sc.threads = 1;
          const CellResult r = fit_and_score(cfg.models[mi], z_train, y_train, z_test, y_test, sc,
                                             cfg.baseline_dimension);
          row.centered_oos_loglik = r.oos_loglik - oracle;
          row.divergences = r.divergences;
        }
      } catch (const std::exception& e) {
        row.centered_oos_loglik = std::numeric_limits<double>::quiet_NaN();
        row.error = e.what();
      }
      row.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
  };

  int threads = cfg.threads > 0 ? cfg.threads
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = static_cast<int>(std::min<std::size_t>(threads, cells));
  auto work = [&](int w) {
    for (std::size_t c = w; c < cells; c += threads) run_cell(c);
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows) {
  out << "replication,dgp,model,centered_oos_loglik,runtime_s,divergences\n";
  for (const auto& r : rows) {
    out << r.replication << ',' << csv_escape(r.dgp) << ',' << csv_escape(r.model) << ','
        << (std::isnan(r.centered_oos_loglik) ? std::string("NA") : format_double(r.centered_oos_loglik))
        << ',' << format_double(r.runtime_s) << ',' << r.divergences << '\n';
  }
}

}  // namespace bdctm
