#pragma once
// Small synthetic datasets and model specs shared by the tests.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "bdctm/dataset.hpp"
#include "bdctm/model.hpp"
#include "bdctm/refdist.hpp"

namespace fixture {

using namespace bdctm;

inline Column continuous(const std::string& name, std::vector<double> v) {
  return Column{name, ColumnKind::Continuous, std::move(v), {}};
}

inline Column counts(const std::string& name, const std::vector<int>& y) {
  return Column{name, ColumnKind::Count, std::vector<double>(y.begin(), y.end()), {}};
}

inline Column ordinal(const std::string& name, const std::vector<int>& y, int categories) {
  Column c{name, ColumnKind::Ordinal, std::vector<double>(y.begin(), y.end()), {}};
  for (int k = 1; k <= categories; ++k) c.levels.push_back(std::to_string(k));
  return c;
}

inline Column groups(const std::string& name, const std::vector<int>& g, int levels) {
  Column c{name, ColumnKind::Group, std::vector<double>(g.begin(), g.end()), {}};
  for (int k = 1; k <= levels; ++k) c.levels.push_back("g" + std::to_string(k));
  return c;
}

inline TermSpec term(TermSpec::Kind kind, std::vector<std::string> columns = {}, int dim = 8) {
  TermSpec t;
  t.kind = kind;
  t.columns = std::move(columns);
  t.dimension = dim;
  t.dimension2 = dim;
  return t;
}

/// Poisson counts with log mean 1.2 + 0.8 z, z ~ U[0,1]; also x2 ~ N(0,1)
/// and a 4-level group.
inline Dataset count_data(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> nrm;
  std::vector<double> z(n), x2(n);
  std::vector<int> y(n), g(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = u(rng);
    x2[i] = nrm(rng);
    g[i] = 1 + static_cast<int>(i % 4);
    std::poisson_distribution<int> p(std::exp(1.2 + 0.8 * z[i]));
    y[i] = p(rng);
  }
  Dataset d;
  d.add(counts("y", y));
  d.add(continuous("z", z));
  d.add(continuous("x2", x2));
  d.add(groups("g", g, 4));
  return d;
}

/// Three-category proportional-odds data with one covariate.
inline Dataset ordinal_data(std::size_t n, std::uint64_t seed, int categories = 3) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> z(n), w(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = u(rng);
    w[i] = u(rng);
    const double eta = 1.0 * (z[i] - 0.5);
    int r = categories;
    const double v = u(rng);
    for (int k = 1; k < categories; ++k) {
      const double theta = -1.0 + 2.0 * (k - 1) / std::max(1, categories - 2);
      if (v <= kLogistic.cdf(theta - eta)) {
        r = k;
        break;
      }
    }
    y[i] = r;
  }
  Dataset d;
  d.add(ordinal("y", y, categories));
  d.add(continuous("z", z));
  d.add(continuous("w", w));
  return d;
}

inline ModelSpec shift_count(ReferenceDistribution ref = kLogistic, int dim = 8) {
  ModelSpec s;
  s.response = ResponseKind::Count;
  s.reference = ref;
  s.terms = {term(TermSpec::Kind::BaselineCount, {}, dim), term(TermSpec::Kind::Linear, {"z"})};
  return s;
}

inline ModelSpec hurdle_count() {
  ModelSpec s = shift_count(kLogistic, 6);
  s.terms.push_back(term(TermSpec::Kind::HurdleZero, {"x2"}));
  return s;
}

inline ModelSpec proportional_ordinal(int categories = 3) {
  ModelSpec s;
  s.response = ResponseKind::Ordinal;
  s.categories = categories;
  s.terms = {term(TermSpec::Kind::BaselineOrdinal), term(TermSpec::Kind::Linear, {"z"})};
  return s;
}

inline ModelSpec nonproportional_ordinal(int categories = 3) {
  ModelSpec s;
  s.response = ResponseKind::Ordinal;
  s.categories = categories;
  s.terms = {term(TermSpec::Kind::BaselineOrdinal), term(TermSpec::Kind::CategorySpecificSmooth, {"z"}, 5),
             term(TermSpec::Kind::TensorSmooth, {"z", "w"}, 4)};
  return s;
}

}  // namespace fixture
