#include "bdctm/app.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include "bdctm/error.hpp"
#include "bdctm/sampler.hpp"

namespace bdctm {

using nlohmann::json;

namespace {

void apply(NutsConfig& c, const Overrides& o) {
  if (o.seed) c.seed = *o.seed;
  if (o.chains) c.chains = *o.chains;
  if (o.threads) c.threads = *o.threads;
  validate(c);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write '" + p.string() + "'");
  return out;
}

void write_text(const fs::path& p, const std::string& text) { open_out(p) << text; }

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw StaleArtifactError("missing artifact '" + p.string() + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Type-7 quantile of sorted values.
double quantile_sorted(const std::vector<double>& v, double p) {
  const double h = (static_cast<double>(v.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(h);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Matrix reported_beta(const Model& model, const Matrix& beta) {
  return beta * model.report_scale().asDiagonal();
}

std::vector<std::string> draw_header(const Model& model) {
  std::vector<std::string> h = model.coefficient_names();
  for (auto& s : model.tau2_names()) h.push_back(s);
  for (auto& s : model.omega_names()) h.push_back(s);
  return h;
}

}  // namespace

json summarize(const Matrix& draws, const std::vector<std::string>& names) {
  json out = json::array();
  const auto s = static_cast<double>(draws.rows());
  for (Eigen::Index j = 0; j < draws.cols(); ++j) {
    std::vector<double> v(draws.col(j).data(), draws.col(j).data() + draws.rows());
    const double mean = draws.col(j).mean();
    const double sd = draws.rows() > 1 ? std::sqrt((draws.col(j).array() - mean).square().sum() / (s - 1.0)) : 0.0;
    std::sort(v.begin(), v.end());
    out.push_back({{"name", names[static_cast<std::size_t>(j)]},
                   {"mean", mean},
                   {"sd", sd},
                   {"q2.5", quantile_sorted(v, 0.025)},
                   {"q97.5", quantile_sorted(v, 0.975)}});
  }
  return out;
}

RunManifest fit_command(const fs::path& config_path, const fs::path& data_path, const fs::path& out,
                        const Overrides& overrides) {
  const auto t0 = std::chrono::steady_clock::now();
  FitConfig cfg = parse_fit_config(load_json(config_path));
  apply(cfg.sampler, overrides);
  const Dataset data = ingest_csv(data_path, Model::schema(cfg.model));
  const Model model = Model::build(cfg.model, data);
  const ModelDesign design = model.design(data);
  const PosteriorDraws draws = run_chains(model, design, cfg.sampler);

  fs::create_directories(out);
  json effective = to_json(cfg.model);
  effective["sampler"] = to_json(cfg.sampler);
  const std::string config_text = effective.dump(2) + "\n";
  write_text(out / "config.json", config_text);

  const Matrix beta = reported_beta(model, draws.beta());
  const Matrix tau2 = draws.tau2();
  const Matrix omega = draws.omega();
  const std::vector<std::string> header = draw_header(model);
  {
    auto f = open_out(out / "draws.csv");
    f << "chain,draw";
    for (const auto& h : header) f << ',' << csv_escape(h);
    f << '\n';
    Eigen::Index row = 0;
    for (std::size_t c = 0; c < draws.chains.size(); ++c) {
      const auto s = draws.chains[c].beta.rows();
      for (Eigen::Index i = 0; i < s; ++i, ++row) {
        f << c + 1 << ',' << i + 1;
        for (Eigen::Index j = 0; j < beta.cols(); ++j) f << ',' << format_double(beta(row, j));
        for (Eigen::Index j = 0; j < tau2.cols(); ++j) f << ',' << format_double(tau2(row, j));
        for (Eigen::Index j = 0; j < omega.cols(); ++j) f << ',' << format_double(omega(row, j));
        f << '\n';
      }
    }
  }

  Matrix all(beta.rows(), beta.cols() + tau2.cols() + omega.cols());
  all << beta, tau2, omega;
  json summary;
  summary["draws"] = draws.draws();
  summary["chains"] = draws.chains.size();
  summary["divergences"] = draws.divergences();
  summary["parameters"] = summarize(all, header);
  json chains = json::array();
  for (const auto& c : draws.chains) chains.push_back({{"step_size", c.step_size}, {"divergences", c.divergences}});
  summary["chain_stats"] = chains;
  if (cfg.sampler.store_log_pmf) {
    const Waic w = waic(draws.log_pmf());
    summary["waic"] = {{"waic", w.waic}, {"lppd", w.lppd}, {"p_waic", w.p_waic}};
  } else {
    summary["waic"] = nullptr;
  }
  json warnings = json::array();
  for (const auto& w : design.warnings) warnings.push_back(w);
  summary["warnings"] = warnings;
  write_text(out / "summary.json", summary.dump(2) + "\n");

  RunManifest m;
  m.version = std::string(software_version());
  m.config_sha256 = sha256_hex(config_text);
  m.data_sha256 = sha256_file(data_path);
  m.data_path = fs::absolute(data_path).lexically_normal().string();
  m.seed = cfg.sampler.seed;
  m.outputs = {{"config", "config.json"}, {"draws", "draws.csv"}, {"summary", "summary.json"}};
  m.fit_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(out / "manifest.json", m);
  return m;
}

LoadedFit load_fit(const fs::path& manifest_path) {
  LoadedFit fit{manifest_path.parent_path(), read_manifest(manifest_path), {}, {}, {}, {}};
  auto output = [&](const std::string& role) {
    auto it = fit.manifest.outputs.find(role);
    if (it == fit.manifest.outputs.end()) throw StaleArtifactError("manifest lists no '" + role + "' output");
    return fit.dir / it->second;
  };
  const std::string config_text = read_text(output("config"));
  if (sha256_hex(config_text) != fit.manifest.config_sha256) {
    throw StaleArtifactError("config.json does not match the manifest hash");
  }
  try {
    fit.config = parse_fit_config(json::parse(config_text));
  } catch (const json::parse_error& e) {
    throw StaleArtifactError(std::string("config.json is not valid JSON: ") + e.what());
  }
  if (!fs::exists(fit.manifest.data_path) || sha256_file(fit.manifest.data_path) != fit.manifest.data_sha256) {
    throw StaleArtifactError("training data '" + fit.manifest.data_path + "' is missing or has changed");
  }
  fit.train = ingest_csv(fit.manifest.data_path, Model::schema(fit.config.model));
  fit.model = Model::build(fit.config.model, fit.train);

  std::ifstream in(output("draws"), std::ios::binary);
  if (!in) throw StaleArtifactError("missing draws file");
  const auto records = read_csv_records(in);
  const std::vector<std::string> header = draw_header(fit.model);
  const auto p = static_cast<std::size_t>(fit.model.dimension());
  if (records.empty() || records[0].size() != header.size() + 2) {
    throw StaleArtifactError("draws.csv header does not match the model");
  }
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (records[0][j + 2] != header[j]) throw StaleArtifactError("draws.csv column '" + records[0][j + 2] + "' unexpected");
  }
  const Vector scale = fit.model.report_scale();
  fit.beta.resize(static_cast<Eigen::Index>(records.size() - 1), static_cast<Eigen::Index>(p));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != header.size() + 2) throw StaleArtifactError("draws.csv row " + std::to_string(r) + " is short");
    for (std::size_t j = 0; j < p; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      fit.beta(static_cast<Eigen::Index>(r - 1), i) = std::stod(records[r][j + 2]) / scale[i];
    }
  }
  if (fit.beta.rows() == 0) throw StaleArtifactError("draws.csv holds no draws");
  return fit;
}

void predict_command(const fs::path& manifest, const fs::path& data, std::vector<int> ys, const fs::path& out) {
  const LoadedFit fit = load_fit(manifest);
  const Dataset nd = ingest_csv(data, Model::schema(fit.config.model, false));
  const CovariateRows cov = fit.model.covariates(nd, true);
  const Predictor pred(fit.model, fit.beta);
  if (ys.empty()) {
    const int lo = fit.model.num_categories() > 0 ? 1 : 0;
    const int hi = fit.model.num_categories() > 0 ? fit.model.num_categories() : fit.model.max_training_count();
    for (int y = lo; y <= hi; ++y) ys.push_back(y);
  }
  fs::create_directories(out);
  auto f = open_out(out / "predictions.csv");
  f << "row,y,cdf,pmf,unknown_level\n";
  std::vector<Vector> cdf, pmf;
  for (int y : ys) {
    if (fit.model.num_categories() > 0 && (y < 1 || y > fit.model.num_categories())) {
      throw DataError("category " + std::to_string(y) + " outside 1.." + std::to_string(fit.model.num_categories()));
    }
    cdf.push_back(pred.cdf(cov, y));
    pmf.push_back(pred.pmf(cov, y));
  }
  for (std::size_t i = 0; i < cov.n; ++i) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const auto ii = static_cast<Eigen::Index>(i);
      f << i + 1 << ',' << ys[k] << ',' << format_double(cdf[k][ii]) << ',' << format_double(pmf[k][ii]) << ','
        << int(cov.unknown[i]) << '\n';
    }
  }
}

namespace {

json totals_json(const ScoreTotals& t) {
  return json{{"logarithmic", t.logarithmic}, {"brier", t.brier}, {"spherical", t.spherical}, {"n", t.n}};
}

}  // namespace

ScoreReport score_command(const fs::path& manifest, const std::optional<fs::path>& data, int folds,
                          const fs::path& out, const Overrides& overrides) {
  const LoadedFit fit = load_fit(manifest);
  ScoreReport report;
  if (folds > 0) {
    NutsConfig cfg = fit.config.sampler;
    apply(cfg, overrides);
    report = kfold_cv(fit.config.model, fit.train, folds, cfg, cfg.seed);
  } else {
    const Dataset d = data ? ingest_csv(*data, Model::schema(fit.config.model)) : fit.train;
    report = score_model(fit.model, Predictor(fit.model, fit.beta), d, false, true);
  }
  json j = totals_json(report.total);
  json fj = json::array();
  for (const auto& f : report.folds) fj.push_back(totals_json(f));
  j["folds"] = fj;
  j["support_cap"] = report.support_cap;
  j["flagged_rows"] = report.flagged_rows;
  if (report.waic) j["waic"] = {{"waic", report.waic->waic}, {"lppd", report.waic->lppd}, {"p_waic", report.waic->p_waic}};
  fs::create_directories(out);
  write_text(out / "scores.json", j.dump(2) + "\n");
  return report;
}

void diagnose_command(const fs::path& manifest, const std::optional<fs::path>& data, const fs::path& out,
                      const Overrides& overrides) {
  const LoadedFit fit = load_fit(manifest);
  const Dataset d = data ? ingest_csv(*data, Model::schema(fit.config.model)) : fit.train;
  const Predictor pred(fit.model, fit.beta);
  fs::create_directories(out);
  const auto& ycol = d.column(fit.config.model.response_column).values;
  if (fit.model.num_categories() == 0) {
    const int ymax = static_cast<int>(*std::max_element(ycol.begin(), ycol.end()));
    const Rootogram rg = rootogram(fit.model, pred, d, std::max(ymax, fit.model.max_training_count()));
    auto f = open_out(out / "rootogram.csv");
    f << "r,obs,exp\n";
    for (std::size_t k = 0; k < rg.r.size(); ++k) {
      f << rg.r[k] << ',' << format_double(rg.obs[k]) << ',' << format_double(rg.exp[k]) << '\n';
    }
  }
  Rng rng(split_seed(overrides.seed.value_or(fit.manifest.seed), 0x5245534944ULL));
  const Vector res = quantile_residuals(fit.model, pred, d, rng);
  auto f = open_out(out / "residuals.csv");
  f << "row,y,residual\n";
  for (Eigen::Index i = 0; i < res.size(); ++i) {
    f << i + 1 << ',' << format_double(ycol[static_cast<std::size_t>(i)]) << ',' << format_double(res[i]) << '\n';
  }
}

std::vector<ResultRow> simulate_command(const fs::path& config, const fs::path& out, const Overrides& o) {
  ExperimentConfig cfg = parse_experiment_config(load_json(config));
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = *o.threads;
  if (o.chains) cfg.sampler.chains = *o.chains;
  const auto rows = run_experiment(cfg);
  fs::create_directories(out);
  auto f = open_out(out / "results.csv");
  write_results_csv(f, rows);
  return rows;
}

int exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const StaleArtifactError*>(&e)) return 2;
  if (dynamic_cast<const DataError*>(&e)) return 3;
  if (dynamic_cast<const SamplerError*>(&e)) return 4;
  return 1;
}

}  // namespace bdctm
