// Acceptance suite: one PASS/FAIL line per criterion.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "../fixtures.hpp"
#include "../oracles.hpp"
#include "bdctm/app.hpp"
#include "bdctm/diagnostics.hpp"
#include "bdctm/likelihood.hpp"
#include "bdctm/nuts.hpp"
#include "bdctm/sampler.hpp"
#include "bdctm/simstudy.hpp"

using namespace bdctm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Dataset count_frame(const std::vector<double>& z, const std::vector<int>& y) {
  Dataset d;
  d.add(fixture::counts("y", y));
  d.add(fixture::continuous("z", z));
  return d;
}

NutsConfig sampler(int iterations, int burnin, std::uint64_t seed) {
  NutsConfig c;
  c.iterations = iterations;
  c.burnin = burnin;
  c.warmup = burnin;
  c.seed = seed;
  return c;
}

Outcome gradient() {
  struct Arch {
    const char* name;
    ModelSpec spec;
    Dataset data;
  };
  std::vector<Arch> archs = {
      {"shift count", fixture::shift_count(kNormal), fixture::count_data(100, 1)},
      {"hurdle count", fixture::hurdle_count(), fixture::count_data(100, 2)},
      {"proportional ordinal", fixture::proportional_ordinal(4), fixture::ordinal_data(100, 3, 4)},
      {"non-proportional ordinal", fixture::nonproportional_ordinal(3), fixture::ordinal_data(100, 4)}};
  std::mt19937_64 rng(101);
  std::normal_distribution<double> nrm(0.0, 0.3);
  double worst = 0.0;
  bool ok = true;
  for (const auto& a : archs) {
    const Model m = Model::build(a.spec, a.data);
    const ModelDesign d = m.design(a.data);
    int states = 0, tries = 0;
    while (states < 50 && tries < 1000) {
      ++tries;
      Vector b(m.dimension());
      for (auto& v : b) v = nrm(rng);
      if (!std::isfinite(loglik(b, m, d))) continue;
      ++states;
      const Vector fd = oracle::fd_gradient([&](const Vector& x) { return loglik(x, m, d); }, b);
      worst = std::max(worst, oracle::relative_error(grad_loglik(b, m, d), fd));
    }
    if (states < 50) ok = false;
  }
  return {ok && worst < 1e-6, "max relative error " + fmt("%.2e", worst) + " over 4 x 50 states"};
}

Outcome monotone_normalized() {
  // Count model: every per-draw CDF over 0..max is nondecreasing and in [0,1].
  Rng rng(202);
  const DgpSpec dgp = make_dgp(DgpKind::NegBin);
  const auto z = gen_covariate(300, rng);
  const auto y = gen_response(dgp, z, rng);
  const Dataset data = count_frame(z, y);
  const Model m = Model::build(fixture::shift_count(kLogistic, 8), data);
  const PosteriorDraws p = run_chains(m, m.design(data), sampler(1200, 1000, 7));
  const Predictor pred(m, p.beta());
  const CovariateRows cov = m.covariates(data);
  int violations = 0;
  Matrix prev = Matrix::Zero(static_cast<Eigen::Index>(cov.n), static_cast<Eigen::Index>(pred.draws()));
  for (int v = 0; v <= m.max_training_count(); ++v) {
    const Matrix F = pred.cdf_draws(cov, v);
    violations += static_cast<int>((F.array() < prev.array()).count());
    violations += static_cast<int>((F.array() < 0.0 || F.array() > 1.0 || F.array().isNaN()).count());
    prev = F;
  }

  // Ordinal model: per-draw PMFs sum to one.
  const Dataset od = fixture::ordinal_data(200, 203, 4);
  const Model om = Model::build(fixture::nonproportional_ordinal(4), od);
  const PosteriorDraws op = run_chains(om, om.design(od), sampler(1200, 1000, 8));
  const Predictor opred(om, op.beta());
  const CovariateRows ocov = om.covariates(od);
  Matrix total = Matrix::Zero(static_cast<Eigen::Index>(ocov.n), static_cast<Eigen::Index>(opred.draws()));
  for (int k = 1; k <= om.num_categories(); ++k) total += opred.log_pmf_draws(ocov, k).array().exp().matrix();
  const double dev = (total.array() - 1.0).abs().maxCoeff();
  const bool ok = violations == 0 && dev <= 1e-12 && pred.draws() == 200 && opred.draws() == 200;
  return {ok, std::to_string(violations) + " CDF violations over 200 draws; max |sum pmf - 1| " + fmt("%.2e", dev)};
}

Outcome calibration() {
  const LogDensity f = [](const Vector& q, Vector& g) {
    g = -q;
    return -0.5 * q.squaredNorm();
  };
  Rng rng(303);
  AdaptiveNuts nuts(2, 1000);
  HmcState s{Vector::Constant(2, 0.5), 0.0, Vector()};
  s.logp = f(s.q, s.grad);
  nuts.initialize(s, f, rng);
  for (int i = 0; i < 1000; ++i) nuts.step(s, f, rng);
  const int n = 5000;
  Matrix draws(n, 2);
  for (int i = 0; i < n; ++i) {
    nuts.step(s, f, rng);
    draws.row(i) = s.q.transpose();
  }
  const Vector mean = draws.colwise().mean();
  const Vector var = (draws.rowwise() - mean.transpose()).array().square().colwise().sum() / (n - 1.0);
  const double mean_err = mean.cwiseAbs().maxCoeff();
  const double var_err = (var.array() - 1.0).abs().maxCoeff();

  // tau2 full conditional against the inverse-gamma CDF.
  const double quad = 3.7, a = 1.0, b = 0.001;
  const int rank = 6;
  std::vector<double> t(10000);
  for (auto& v : t) v = gibbs_tau2(quad, rank, a, b, rng);
  const double ks = oracle::ks_statistic(t, [&](double x) { return oracle::inv_gamma_cdf(x, a + rank / 2.0, b + quad / 2.0); });
  const bool ok = mean_err <= 0.05 && var_err <= 0.1 && ks < 0.02;
  return {ok, "max |mean| " + fmt("%.4f", mean_err) + ", max |var - 1| " + fmt("%.4f", var_err) + ", KS " + fmt("%.4f", ks)};
}

Outcome saturated() {
  std::mt19937_64 rng(404);
  const std::vector<double> probs = {0.2, 0.5, 0.3};
  std::discrete_distribution<int> cat(probs.begin(), probs.end());
  std::vector<int> y(300);
  std::vector<double> freq(3, 0.0);
  for (auto& v : y) {
    v = cat(rng) + 1;
    freq[static_cast<std::size_t>(v - 1)] += 1.0 / 300.0;
  }
  Dataset d;
  d.add(fixture::ordinal("y", y, 3));
  ModelSpec spec;
  spec.response = ResponseKind::Ordinal;
  spec.categories = 3;
  spec.terms = {fixture::term(TermSpec::Kind::BaselineOrdinal)};
  const Model m = Model::build(spec, d);
  const PosteriorDraws p = run_chains(m, m.design(d), sampler(2000, 1000, 9));
  const Predictor pred(m, p.beta());
  const CovariateRows cov = m.covariates(d.subset(std::vector<std::size_t>{0}));
  std::vector<int> n(3, 0);
  for (int v : y) ++n[static_cast<std::size_t>(v - 1)];
  const std::vector<double> exact = oracle::ordinal3_posterior_mean(n);
  bool ok = true;
  std::string detail;
  for (int k = 1; k <= 3; ++k) {
    const Vector pk = pred.log_pmf_draws(cov, k).row(0).array().exp();
    const double f = freq[static_cast<std::size_t>(k - 1)];
    const double mean = pk.mean();
    // Monte Carlo error of the simulated frequency itself.
    const double mcse = std::sqrt(f * (1.0 - f) / 300.0);
    const double gap = std::fabs(mean - f);
    ok = ok && gap <= 2.0 * mcse;
    detail += (k > 1 ? "; " : "") + std::string("p") + std::to_string(k) + " " + fmt("%.4f", mean) + " vs " +
              fmt("%.4f", f) + " (gap " + fmt("%.4f", gap) + ", 2 MCSE " + fmt("%.4f", 2.0 * mcse) +
              ", chain MCSE " + fmt("%.4f", oracle::batch_mcse(pk)) + ", exact posterior mean " +
              fmt("%.4f", exact[static_cast<std::size_t>(k - 1)]) + ")";
  }
  return {ok, detail};
}

Outcome simulation(const fs::path& out) {
  ExperimentConfig c;
  c.sampler = sampler(2000, 1000, 1);
  const auto rows = run_experiment(c);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream f(out / "results.csv");
    write_results_csv(f, rows);
  }
  auto value = [&](int rep, const std::string& dgp, const std::string& model) {
    for (const auto& r : rows) {
      if (r.replication == rep && r.dgp == dgp && r.model == model) return r.centered_oos_loglik;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  int a = 0, c_ok = 0;
  std::map<std::string, int> b;
  const std::vector<std::pair<std::string, std::string>> matching = {
      {"trafo_logit", "bmlo"}, {"trafo_probit", "bmpr"}, {"trafo_cloglog", "bmcll"}};
  for (int rep = 1; rep <= c.replications; ++rep) {
    if (value(rep, "negbin", "bmlo") > value(rep, "negbin", "mp")) ++a;
    for (const auto& [dgp, model] : matching) {
      const double v = value(rep, dgp, model);
      if (v > value(rep, dgp, "mp") && v > value(rep, dgp, "mnb")) ++b[dgp];
    }
    if (std::fabs(value(rep, "poisson", "mp")) <= 5.0) ++c_ok;
  }
  int failed_cells = 0;
  for (const auto& r : rows) failed_cells += !r.error.empty();
  bool ok = a >= 8 && c_ok >= 8;
  std::string detail = "(a) " + std::to_string(a) + "/10";
  for (const auto& [dgp, model] : matching) {
    ok = ok && b[dgp] >= 8;
    detail += ", (b) " + dgp + " " + std::to_string(b[dgp]) + "/10";
  }
  detail += ", (c) " + std::to_string(c_ok) + "/10";
  if (failed_cells) detail += ", " + std::to_string(failed_cells) + " failed cells";
  return {ok, detail};
}

Outcome residuals() {
  Rng rng(606);
  const DgpSpec dgp = make_dgp(DgpKind::TrafoLogit);
  const auto z = gen_covariate(1000, rng);
  const auto y = gen_response(dgp, z, rng);
  const Dataset data = count_frame(z, y);
  const Model m = Model::build(fixture::shift_count(kLogistic, 8), data);
  const PosteriorDraws p = run_chains(m, m.design(data), sampler(2000, 1000, 11));
  const Predictor pred(m, p.beta());
  Rng rr(607);
  const Vector r = quantile_residuals(m, pred, data, rr);
  const double ks = oracle::ks_statistic(std::vector<double>(r.data(), r.data() + r.size()), oracle::normal_cdf);
  const double crit = oracle::ks_critical(1000, 0.01);
  return {ks < crit, "KS " + fmt("%.4f", ks) + " vs critical " + fmt("%.4f", crit)};
}

Outcome scoring() {
  const ScoreTotals u = score_one(Vector::Constant(3, 1.0 / 3.0), 0);
  const ScoreTotals p = score_one(Vector::Unit(3, 1), 1);
  const double err = std::max({std::fabs(u.brier + 2.0 / 3.0), std::fabs(u.logarithmic - std::log(1.0 / 3.0)),
                               std::fabs(u.spherical - 1.0 / std::sqrt(3.0))});
  const bool perfect = p.brier == 0.0 && p.logarithmic == 0.0 && p.spherical == 1.0;
  return {err <= 2e-16 && perfect, "uniform max error " + fmt("%.1e", err) + ", perfect triple " + (perfect ? "exact" : "wrong")};
}

Outcome waic_cache() {
  const Dataset data = fixture::count_data(200, 808);
  const Model m = Model::build(fixture::hurdle_count(), data);
  const ModelDesign d = m.design(data);
  NutsConfig c = sampler(1000, 500, 12);
  c.chains = 2;
  const PosteriorDraws p = run_chains(m, d, c);
  const Waic cached = waic(p.log_pmf());
  const Waic again = waic(Predictor(m, p.beta()).log_pmf_observed(d).transpose());
  const double diff = std::fabs(cached.waic - again.waic);
  return {diff <= 1e-10, "WAIC " + fmt("%.6f", cached.waic) + ", |cached - recomputed| " + fmt("%.2e", diff)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "bdctm_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const Dataset d = fixture::count_data(150, 909);
  {
    std::ofstream f(dir / "train.csv");
    f << "y,z\n";
    for (std::size_t i = 0; i < d.rows(); ++i) {
      f << d.column("y").values[i] << ',' << format_double(d.column("z").values[i]) << '\n';
    }
  }
  std::ofstream(dir / "config.json") << R"({
  "response": {"kind": "count", "column": "y"},
  "terms": [{"kind": "baseline_count", "dimension": 6}, {"kind": "linear", "columns": ["z"]}],
  "sampler": {"iterations": 600, "burnin": 300, "seed": 13, "chains": 2}
})";
  auto run = [&](const std::string& out) {
    const std::string cmd = std::string(BDCTM_CLI_PATH) + " fit --config " + (dir / "config.json").string() +
                            " --data " + (dir / "train.csv").string() + " --out " + (dir / out).string() +
                            " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) && WEXITSTATUS(status) == 0;
  };
  const bool ran = run("a") && run("b");
  const std::string a = slurp(dir / "a" / "draws.csv");
  const bool same = ran && !a.empty() && a == slurp(dir / "b" / "draws.csv");
  fs::remove_all(dir);
  return {same, ran ? (same ? "draw files identical" : "draw files differ") : "fit failed"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance suite"};
  bool strict = false;
  std::set<int> only;
  std::string out;
  app.add_flag("--strict", strict, "Exit nonzero when a criterion fails");
  app.add_option("--only", only, "Run only these criteria")->check(CLI::Range(1, 9));
  app.add_option("--out", out, "Directory for the simulation results table");
  CLI11_PARSE(app, argc, argv);

  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "gradient correctness", 60, gradient},
      {2, "monotonicity and normalization", 300, monotone_normalized},
      {3, "sampler calibration", 120, calibration},
      {4, "saturated-model oracle", 120, saturated},
      {5, "scaled simulation study", 3600, [&] { return simulation(out); }},
      {6, "quantile-residual calibration", 300, residuals},
      {7, "scoring-rule unit values", 10, scoring},
      {8, "WAIC cache consistency", 300, waic_cache},
      {9, "fit determinism", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s; %.1fs)\n", c.id, c.name, o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  return strict && failures ? 1 : 0;
}
