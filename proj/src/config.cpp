#include "bdctm/config.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>

#include "bdctm/error.hpp"

namespace bdctm {

using nlohmann::json;

namespace {

std::string child(const std::string& path, const std::string& key) { return path + "/" + key; }
std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError((path.empty() ? std::string("/") : path) + ": " + what);
}

void require_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(child(path, key), "unknown key");
  }
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

long long get_int(const json& j, const std::string& path, long long lo) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  const long long v = j.get<long long>();
  if (v < lo) fail(path, "must be >= " + std::to_string(lo));
  return v;
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  fail(path, "expected a nonnegative integer");
}

double get_positive(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  const double v = j.get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) fail(path, "must be positive");
  return v;
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::vector<std::string> get_strings(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_string(j[i], child(path, i)));
  return out;
}

/// Runs `f`, re-raising library ConfigErrors with `path` attached.
template <class F>
auto at_path(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    fail(path, e.what());
  }
}

TermSpec parse_term(const json& j, const std::string& path) {
  require_object(j, path, {"kind", "columns", "dimension", "dimension2", "degree", "transform",
                           "zero_indicator", "a", "b", "jitter", "omega_grid"});
  if (!j.contains("kind")) fail(child(path, "kind"), "missing required key");
  TermSpec t;
  const std::string kind = get_string(j["kind"], child(path, "kind"));
  t.kind = at_path(child(path, "kind"), [&] { return parse_term_kind(kind); });
  if (j.contains("columns")) t.columns = get_strings(j["columns"], child(path, "columns"));
  if (j.contains("dimension")) t.dimension = static_cast<int>(get_int(j["dimension"], child(path, "dimension"), 1));
  if (j.contains("dimension2")) {
    t.dimension2 = static_cast<int>(get_int(j["dimension2"], child(path, "dimension2"), 1));
  }
  if (j.contains("degree")) t.degree = static_cast<int>(get_int(j["degree"], child(path, "degree"), 0));
  if (j.contains("transform")) {
    const std::string tr = get_string(j["transform"], child(path, "transform"));
    t.transform = at_path(child(path, "transform"), [&] { return parse_transform(tr); });
  }
  if (j.contains("zero_indicator")) t.zero_indicator = get_bool(j["zero_indicator"], child(path, "zero_indicator"));
  if (j.contains("a")) t.a = get_positive(j["a"], child(path, "a"));
  if (j.contains("b")) t.b = get_positive(j["b"], child(path, "b"));
  if (j.contains("jitter")) {
    const auto& v = j["jitter"];
    if (!v.is_number() || v.get<double>() < 0.0) fail(child(path, "jitter"), "expected a nonnegative number");
    t.jitter = v.get<double>();
  }
  if (j.contains("omega_grid")) {
    t.omega_grid = static_cast<int>(get_int(j["omega_grid"], child(path, "omega_grid"), 2));
  }
  return t;
}

ModelSpec parse_model(const json& doc) {
  ModelSpec spec;
  if (!doc.contains("response")) fail("/response", "missing required section");
  const json& r = doc["response"];
  require_object(r, "/response", {"kind", "column", "reference", "levels", "categories"});
  if (!r.contains("kind")) fail("/response/kind", "missing required key");
  const std::string kind = get_string(r["kind"], "/response/kind");
  if (kind == "count") {
    spec.response = ResponseKind::Count;
  } else if (kind == "ordinal") {
    spec.response = ResponseKind::Ordinal;
  } else {
    fail("/response/kind", "expected \"count\" or \"ordinal\", got \"" + kind + "\"");
  }
  if (r.contains("column")) spec.response_column = get_string(r["column"], "/response/column");
  if (r.contains("reference")) {
    const std::string ref = get_string(r["reference"], "/response/reference");
    spec.reference = at_path("/response/reference", [&] { return ReferenceDistribution::from_name(ref); });
  }
  if (r.contains("levels")) spec.levels = get_strings(r["levels"], "/response/levels");
  if (r.contains("categories")) spec.categories = static_cast<int>(get_int(r["categories"], "/response/categories", 2));
  if (spec.response == ResponseKind::Ordinal && spec.num_categories() < 2) {
    fail("/response", "ordinal responses need \"levels\" or \"categories\" (at least 2)");
  }
  if (spec.response == ResponseKind::Count && (!spec.levels.empty() || spec.categories != 0)) {
    fail("/response", "\"levels\"/\"categories\" apply to ordinal responses only");
  }

  if (!doc.contains("terms")) fail("/terms", "missing required section");
  const json& terms = doc["terms"];
  if (!terms.is_array() || terms.empty()) fail("/terms", "expected a non-empty array");
  for (std::size_t i = 0; i < terms.size(); ++i) spec.terms.push_back(parse_term(terms[i], child("/terms", i)));
  return spec;
}

NutsConfig parse_sampler(const json& s, const std::string& path) {
  NutsConfig c;
  require_object(s, path, {"iterations", "burnin", "warmup", "target_accept", "max_treedepth", "seed", "chains",
                           "threads", "store_log_pmf"});
  if (s.contains("iterations")) c.iterations = static_cast<int>(get_int(s["iterations"], child(path, "iterations"), 1));
  if (s.contains("burnin")) c.burnin = static_cast<int>(get_int(s["burnin"], child(path, "burnin"), 0));
  // Warm-up defaults to the burn-in length.
  c.warmup = s.contains("warmup") ? static_cast<int>(get_int(s["warmup"], child(path, "warmup"), 0)) : c.burnin;
  if (s.contains("target_accept")) {
    const auto& v = s["target_accept"];
    if (!v.is_number() || !(v.get<double>() > 0.0 && v.get<double>() < 1.0)) {
      fail(child(path, "target_accept"), "expected a number in (0,1)");
    }
    c.target_accept = v.get<double>();
  }
  if (s.contains("max_treedepth")) {
    c.max_treedepth = static_cast<int>(get_int(s["max_treedepth"], child(path, "max_treedepth"), 1));
  }
  if (s.contains("seed")) c.seed = get_seed(s["seed"], child(path, "seed"));
  if (s.contains("chains")) c.chains = static_cast<int>(get_int(s["chains"], child(path, "chains"), 1));
  if (s.contains("threads")) c.threads = static_cast<int>(get_int(s["threads"], child(path, "threads"), 0));
  if (s.contains("store_log_pmf")) c.store_log_pmf = get_bool(s["store_log_pmf"], child(path, "store_log_pmf"));
  at_path(path, [&] {
    validate(c);
    return 0;
  });
  return c;
}

}  // namespace

FitConfig parse_fit_config(const json& doc) {
  require_object(doc, "", {"response", "terms", "sampler"});
  FitConfig cfg;
  cfg.model = parse_model(doc);
  if (doc.contains("sampler")) cfg.sampler = parse_sampler(doc["sampler"], "/sampler");
  return cfg;
}

ExperimentConfig parse_experiment_config(const json& doc) {
  require_object(doc, "", {"replications", "n_train", "n_test", "seed", "dgps", "models", "baseline_dimension",
                           "sampler", "threads"});
  ExperimentConfig cfg;
  if (doc.contains("replications")) {
    cfg.replications = static_cast<int>(get_int(doc["replications"], "/replications", 1));
  }
  if (doc.contains("n_train")) cfg.n_train = static_cast<int>(get_int(doc["n_train"], "/n_train", 2));
  if (doc.contains("n_test")) cfg.n_test = static_cast<int>(get_int(doc["n_test"], "/n_test", 1));
  if (doc.contains("seed")) cfg.seed = get_seed(doc["seed"], "/seed");
  if (doc.contains("dgps")) {
    cfg.dgps.clear();
    const auto names = get_strings(doc["dgps"], "/dgps");
    for (std::size_t i = 0; i < names.size(); ++i) {
      cfg.dgps.push_back(at_path(child("/dgps", i), [&] { return parse_dgp(names[i]); }));
    }
    if (cfg.dgps.empty()) fail("/dgps", "expected at least one DGP");
  }
  if (doc.contains("models")) {
    cfg.models.clear();
    const auto names = get_strings(doc["models"], "/models");
    for (std::size_t i = 0; i < names.size(); ++i) {
      cfg.models.push_back(at_path(child("/models", i), [&] { return parse_study_model(names[i]); }));
    }
    if (cfg.models.empty()) fail("/models", "expected at least one model");
  }
  if (doc.contains("baseline_dimension")) {
    cfg.baseline_dimension = static_cast<int>(get_int(doc["baseline_dimension"], "/baseline_dimension", 4));
  }
  if (doc.contains("sampler")) cfg.sampler = parse_sampler(doc["sampler"], "/sampler");
  if (doc.contains("threads")) cfg.threads = static_cast<int>(get_int(doc["threads"], "/threads", 0));
  return cfg;
}

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
}

json to_json(const ModelSpec& spec) {
  json r;
  r["kind"] = spec.response == ResponseKind::Count ? "count" : "ordinal";
  r["column"] = spec.response_column;
  r["reference"] = std::string(spec.reference.name());
  if (!spec.levels.empty()) r["levels"] = spec.levels;
  if (spec.levels.empty() && spec.categories > 0) r["categories"] = spec.categories;
  json terms = json::array();
  for (const auto& t : spec.terms) {
    json j;
    j["kind"] = std::string(term_kind_name(t.kind));
    j["columns"] = t.columns;
    j["dimension"] = t.dimension;
    j["dimension2"] = t.dimension2;
    j["degree"] = t.degree;
    j["transform"] = std::string(transform_name(t.transform));
    j["zero_indicator"] = t.zero_indicator;
    j["a"] = t.a;
    j["b"] = t.b;
    if (t.jitter) j["jitter"] = *t.jitter;
    j["omega_grid"] = t.omega_grid;
    terms.push_back(std::move(j));
  }
  return json{{"response", r}, {"terms", terms}};
}

json to_json(const NutsConfig& c) {
  return json{{"iterations", c.iterations}, {"burnin", c.burnin},       {"warmup", c.warmup},
              {"target_accept", c.target_accept}, {"max_treedepth", c.max_treedepth}, {"seed", c.seed},
              {"chains", c.chains}, {"threads", c.threads}, {"store_log_pmf", c.store_log_pmf}};
}

}  // namespace bdctm
