#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bdctm/config.hpp"
#include "bdctm/error.hpp"

using namespace bdctm;
using nlohmann::json;

namespace {

json base() {
  return json::parse(R"({
    "response": {"kind": "count", "column": "y", "reference": "probit"},
    "terms": [
      {"kind": "baseline_count", "dimension": 6, "transform": "log1p"},
      {"kind": "tensor_smooth", "columns": ["z", "w"], "dimension": 4, "dimension2": 5, "omega_grid": 9},
      {"kind": "category_specific_smooth", "columns": ["z"], "jitter": 0.001}
    ],
    "sampler": {"iterations": 300, "burnin": 100, "seed": 42, "chains": 2, "store_log_pmf": false}
  })");
}

std::string error_of(const json& doc) {
  try {
    parse_fit_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("fit config") {
  const FitConfig c = parse_fit_config(base());
  CHECK(c.model.response == ResponseKind::Count);
  CHECK(c.model.reference.name() == "probit");
  REQUIRE(c.model.terms.size() == 3);
  CHECK(c.model.terms[0].dimension == 6);
  CHECK(c.model.terms[1].kind == TermSpec::Kind::TensorSmooth);
  CHECK(c.model.terms[1].dimension2 == 5);
  CHECK(c.model.terms[1].omega_grid == 9);
  CHECK(*c.model.terms[2].jitter == 0.001);
  CHECK_FALSE(c.model.terms[0].jitter.has_value());
  CHECK(c.sampler.iterations == 300);
  CHECK(c.sampler.warmup == 100);
  CHECK(c.sampler.seed == 42);
  CHECK(c.sampler.chains == 2);
  CHECK_FALSE(c.sampler.store_log_pmf);
}

TEST_CASE("round trip through to_json") {
  const FitConfig c = parse_fit_config(base());
  json doc;
  doc["response"] = to_json(c.model)["response"];
  doc["terms"] = to_json(c.model)["terms"];
  doc["sampler"] = to_json(c.sampler);
  const FitConfig d = parse_fit_config(doc);
  CHECK(to_json(d.model) == to_json(c.model));
  CHECK(to_json(d.sampler) == to_json(c.sampler));
}

TEST_CASE("errors carry the offending path") {
  json d = base();
  d["terms"][1]["dimension"] = 0;
  CHECK(error_of(d).rfind("/terms/1/dimension:", 0) == 0);

  d = base();
  d["terms"][0]["colour"] = "red";
  CHECK(error_of(d).rfind("/terms/0/colour: unknown key", 0) == 0);

  d = base();
  d["response"]["reference"] = "cauchy";
  CHECK(error_of(d).rfind("/response/reference:", 0) == 0);

  d = base();
  d["sampler"]["target_accept"] = 1.5;
  CHECK(error_of(d).rfind("/sampler/target_accept:", 0) == 0);

  d = base();
  d["extra"] = 1;
  CHECK(error_of(d).rfind("/extra: unknown key", 0) == 0);

  d = base();
  d.erase("terms");
  CHECK(error_of(d).rfind("/terms:", 0) == 0);

  d = base();
  d["response"]["kind"] = "ordinal";
  CHECK(error_of(d).rfind("/response:", 0) == 0);

  d = base();
  d["sampler"]["burnin"] = 300;
  CHECK_FALSE(error_of(d).empty());

  d = base();
  d["terms"][0]["kind"] = "spline";
  CHECK(error_of(d).rfind("/terms/0/kind:", 0) == 0);
}

TEST_CASE("ordinal response") {
  json d = base();
  d["response"] = {{"kind", "ordinal"}, {"levels", {"low", "mid", "high"}}};
  d["terms"] = json::array({{{"kind", "baseline_ordinal"}}});
  const FitConfig c = parse_fit_config(d);
  CHECK(c.model.num_categories() == 3);
  d["response"]["categories"] = 4;
  d["response"].erase("levels");
  CHECK(parse_fit_config(d).model.num_categories() == 4);
}

TEST_CASE("experiment config") {
  const ExperimentConfig c = parse_experiment_config(json::parse(R"({
    "replications": 3, "n_train": 50, "n_test": 20, "seed": 9,
    "dgps": ["poisson", "trafo_probit"], "models": ["bmlo", "mp", "oracle"],
    "sampler": {"iterations": 200, "burnin": 100}, "threads": 2
  })"));
  CHECK(c.replications == 3);
  CHECK(c.dgps == std::vector<DgpKind>{DgpKind::Poisson, DgpKind::TrafoProbit});
  CHECK(c.models.back() == StudyModel::Oracle);
  CHECK(c.sampler.warmup == 100);
  CHECK(c.threads == 2);
  CHECK_THROWS_AS(parse_experiment_config(json::parse(R"({"dgps": ["zip"]})")), ConfigError);
  CHECK_THROWS_AS(parse_experiment_config(json::parse(R"({"reps": 2})")), ConfigError);
  const ExperimentConfig def = parse_experiment_config(json::object());
  CHECK(def.replications == 10);
}

TEST_CASE("load_json") {
  const auto dir = std::filesystem::temp_directory_path() / "bdctm_test_config";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.json") << "{\"response\": ";
  CHECK_THROWS_AS(load_json(dir / "bad.json"), ConfigError);
  CHECK_THROWS_AS(load_json(dir / "missing.json"), ConfigError);
  std::filesystem::remove_all(dir);
}
