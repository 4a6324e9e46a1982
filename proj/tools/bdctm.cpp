#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bdctm/app.hpp"
#include "bdctm/error.hpp"

namespace {

std::vector<int> parse_ys(const std::string& text) {
  std::vector<int> ys;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw bdctm::ConfigError("--ys: '" + item + "' is not an integer");
    ys.push_back(v);
  }
  return ys;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian discrete conditional transformation models"};
  app.set_version_flag("--version", std::string(bdctm::software_version()));
  app.require_subcommand(1);

  std::string config, data, out = ".", manifest, ys;
  std::uint64_t seed = 0;
  int chains = 0, threads = 0, folds = 0;

  auto add_sampler_flags = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed (overrides the config)");
    cmd->add_option("--chains", chains, "Number of chains")->check(CLI::PositiveNumber);
    cmd->add_option("--threads", threads, "Worker threads (0: automatic)")->check(CLI::NonNegativeNumber);
  };

  auto* fit = app.add_subcommand("fit", "Fit a model and write draws, summary and manifest");
  fit->add_option("--config", config, "Model config (JSON)")->required();
  fit->add_option("--data", data, "Training data (CSV)")->required();
  fit->add_option("--out", out, "Output directory");
  add_sampler_flags(fit);

  auto* predict = app.add_subcommand("predict", "Posterior predictive CDF/PMF for new rows");
  predict->add_option("--manifest", manifest, "manifest.json of a fit")->required();
  predict->add_option("--data", data, "Rows to predict (CSV)")->required();
  predict->add_option("--ys", ys, "Comma-separated responses to evaluate");
  predict->add_option("--out", out, "Output directory");

  auto* score = app.add_subcommand("score", "Proper scoring rules, optionally by k-fold CV");
  score->add_option("--manifest", manifest, "manifest.json of a fit")->required();
  score->add_option("--data", data, "Held-out data (default: training data)");
  score->add_option("--folds", folds, "Cross-validation folds (0: score --data)")->check(CLI::NonNegativeNumber);
  score->add_option("--out", out, "Output directory");
  add_sampler_flags(score);

  auto* diagnose = app.add_subcommand("diagnose", "Rootogram and randomized quantile residuals");
  diagnose->add_option("--manifest", manifest, "manifest.json of a fit")->required();
  diagnose->add_option("--data", data, "Data (default: training data)");
  diagnose->add_option("--out", out, "Output directory");
  diagnose->add_option("--seed", seed, "Seed of the residual randomization");

  auto* simulate = app.add_subcommand("simulate", "Run the count-data simulation study");
  simulate->add_option("--config", config, "Experiment config (JSON)")->required();
  simulate->add_option("--out", out, "Output directory");
  add_sampler_flags(simulate);

  CLI11_PARSE(app, argc, argv);

  auto overrides = [&](CLI::App* cmd) {
    bdctm::Overrides o;
    if (cmd->count("--seed") > 0) o.seed = seed;
    if (cmd->get_option_no_throw("--chains") && cmd->count("--chains") > 0) o.chains = chains;
    if (cmd->get_option_no_throw("--threads") && cmd->count("--threads") > 0) o.threads = threads;
    return o;
  };
  auto optional_data = [&](CLI::App* cmd) -> std::optional<std::filesystem::path> {
    if (cmd->count("--data") > 0) return std::filesystem::path(data);
    return std::nullopt;
  };

  try {
    if (*fit) {
      const auto m = bdctm::fit_command(config, data, out, overrides(fit));
      std::cout << "wrote " << (std::filesystem::path(out) / "manifest.json").string() << " (" << m.fit_seconds
                << " s)\n";
    } else if (*predict) {
      bdctm::predict_command(manifest, data, parse_ys(ys), out);
    } else if (*score) {
      const auto r = bdctm::score_command(manifest, optional_data(score), folds, out, overrides(score));
      std::cout << "logarithmic " << r.total.logarithmic << "  brier " << r.total.brier << "  spherical "
                << r.total.spherical << "  (n = " << r.total.n << ")\n";
    } else if (*diagnose) {
      bdctm::diagnose_command(manifest, optional_data(diagnose), out, overrides(diagnose));
    } else if (*simulate) {
      const auto rows = bdctm::simulate_command(config, out, overrides(simulate));
      int failed = 0;
      for (const auto& r : rows) {
        if (!r.error.empty()) {
          ++failed;
          std::cerr << "replication " << r.replication << ' ' << r.dgp << ' ' << r.model << ": " << r.error << '\n';
        }
      }
      std::cout << rows.size() << " cells, " << failed << " failed\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bdctm::exit_code(e);
  }
  return EXIT_SUCCESS;
}
