#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "bdctm/basis.hpp"
#include "bdctm/nuts.hpp"
#include "bdctm/refdist.hpp"
#include "bdctm/sampler.hpp"

namespace bdctm {

enum class DgpKind { Poisson, NegBin, TrafoLogit, TrafoProbit, TrafoCloglog };

std::string_view dgp_name(DgpKind kind);
DgpKind parse_dgp(std::string_view name);

/// Fixed response-basis coefficients of the transformation DGPs on a clamped
/// cubic basis of log(y + 1) over [0, log 31]; strictly increasing.
inline constexpr std::array<double, 8> kTrafoGamma = {-1.2, -0.3, 0.0, 0.1, 0.3, 1.8, 3.0, 4.5};
inline constexpr double kTrafoUpper = 31.0;  ///< basis domain ends at log(31)

struct DgpSpec {
  DgpKind kind = DgpKind::Poisson;
  double intercept = 1.2;  ///< log mean at z = 0 (Poisson / NegBin)
  double slope = 0.8;      ///< log-mean slope, or trafo shift coefficient
  double size = 3.0;       ///< NegBin size: V = mu + mu^2 / size
  ReferenceDistribution reference = kLogistic;
  KnotVector knots;
  Vector gamma;
};

DgpSpec make_dgp(DgpKind kind);

/// n iid U[0,1] covariates.
std::vector<double> gen_covariate(std::size_t n, Rng& rng);
std::vector<int> gen_response(const DgpSpec& dgp, const std::vector<double>& z, Rng& rng);

double dgp_mean(const DgpSpec& dgp, double z);  ///< Poisson / NegBin only
double dgp_cdf(const DgpSpec& dgp, int y, double z);
double dgp_log_pmf(const DgpSpec& dgp, int y, double z);
double oracle_loglik(const DgpSpec& dgp, const std::vector<double>& z, const std::vector<int>& y);

/// Fitted model families of the study.
enum class StudyModel { Bmlo, Bmpr, Bmcll, Mp, Mnb, Oracle };
std::string_view study_model_name(StudyModel m);
StudyModel parse_study_model(std::string_view name);

struct ExperimentConfig {
  int replications = 10;
  int n_train = 250;
  int n_test = 750;
  std::uint64_t seed = 1;
  std::vector<DgpKind> dgps = {DgpKind::Poisson, DgpKind::NegBin, DgpKind::TrafoLogit,
                               DgpKind::TrafoProbit, DgpKind::TrafoCloglog};
  std::vector<StudyModel> models = {StudyModel::Bmlo, StudyModel::Bmpr, StudyModel::Bmcll,
                                    StudyModel::Mp, StudyModel::Mnb};
  int baseline_dimension = 8;
  NutsConfig sampler;
  int threads = 0;
};

struct ResultRow {
  int replication = 0;
  std::string dgp;
  std::string model;
  double centered_oos_loglik = 0.0;  ///< NaN when the cell failed
  double runtime_s = 0.0;
  int divergences = 0;
  std::string error;
};

/// Held-out log-likelihood of one fitted model family.
struct CellResult {
  double oos_loglik = 0.0;
  int divergences = 0;
};
CellResult fit_and_score(StudyModel model, const std::vector<double>& z_train,
                         const std::vector<int>& y_train, const std::vector<double>& z_test,
                         const std::vector<int>& y_test, const NutsConfig& sampler,
                         int baseline_dimension = 8);

/// Every replication x DGP x model cell; rows ordered by replication, DGP,
/// model. Failing cells are recorded, not fatal.
std::vector<ResultRow> run_experiment(const ExperimentConfig& config);

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows);

}  // namespace bdctm
