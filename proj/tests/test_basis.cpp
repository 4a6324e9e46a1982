#include <doctest.h>

#include <cmath>
#include <random>

#include "bdctm/basis.hpp"
#include "bdctm/error.hpp"
#include "oracles.hpp"

using namespace bdctm;

TEST_CASE("make_knots") {
  const std::vector<double> v = {0.0, 0.3, 1.0};
  const KnotVector k = make_knots(v, 8, 3);
  CHECK(k.knots.size() == 12);
  CHECK(k.dimension() == 8);
  CHECK(k.lower == 0.0);
  CHECK(k.upper == 1.0);
  CHECK_THROWS(make_knots(v, 3, 3));
  const std::vector<double> flat = {2.0, 2.0};
  CHECK_THROWS(make_knots(flat, 8, 3));

  std::vector<double> counts;
  for (int y = 0; y <= 40; ++y) counts.push_back(std::log(y + 1.0));
  const KnotVector kc = make_knots(counts, 8, 3);
  CHECK(kc.lower == 0.0);
  CHECK(kc.upper == doctest::Approx(std::log(41.0)).epsilon(1e-15));
}

TEST_CASE("eval_bspline matches the recursive definition") {
  const KnotVector k = make_knots(-1.0, 2.0, 9, 3);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 2.0);
  for (int i = 0; i < 200; ++i) {
    const double x = u(rng);
    const Vector b = eval_bspline(k, x);
    const Vector o = oracle::bspline_row(k.knots, 3, x);
    CHECK((b - o).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(std::fabs(b.sum() - 1.0) < 1e-12);
    CHECK(b.minCoeff() >= 0.0);
    CHECK((b.array() > 0.0).count() <= 4);
  }
  const Vector mid = eval_bspline(k, 0.5);
  CHECK((mid - oracle::bspline_row(k.knots, 3, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("boundaries") {
  const KnotVector k = make_knots(0.0, 1.0, 6, 3);
  Vector left = eval_bspline(k, 0.0);
  CHECK(left[0] == 1.0);
  CHECK(left.tail(5).cwiseAbs().maxCoeff() == 0.0);
  Vector right = eval_bspline(k, 1.0);
  CHECK(right[5] == doctest::Approx(1.0));

  bool outside = false;
  const Vector clamped = eval_bspline(k, 1.7, OutOfDomain::Clamp, &outside);
  CHECK(outside);
  CHECK((clamped - right).cwiseAbs().maxCoeff() < 1e-15);

  // Linear continuation: value + slope * distance, for every coefficient vector.
  const Vector ext = eval_bspline(k, 1.5, OutOfDomain::LinearExtrapolate);
  const Vector expected = right + 0.5 * eval_bspline_derivative(k, 1.0);
  CHECK((ext - expected).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(std::fabs(ext.sum() - 1.0) < 1e-12);
}

TEST_CASE("derivative matches finite differences") {
  const KnotVector k = make_knots(0.0, 3.0, 8, 3);
  for (double x = 0.05; x < 2.95; x += 0.13) {
    const double h = 1e-6;
    const Vector fd = (eval_bspline(k, x + h) - eval_bspline(k, x - h)) / (2 * h);
    CHECK((fd - eval_bspline_derivative(k, x)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("continuity") {
  const KnotVector k = make_knots(0.0, 1.0, 10, 3);
  for (double x = 0.0; x < 0.999; x += 0.01) {
    CHECK((eval_bspline(k, x) - eval_bspline(k, x + 1e-9)).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("ordinal and group rows") {
  OrdinalRow r = eval_ordinal(2, 3);
  CHECK(r.values == Vector::Unit(3, 1));
  CHECK_FALSE(r.reference);
  CHECK(eval_ordinal(1, 3).values == Vector::Unit(3, 0));
  r = eval_ordinal(4, 3);
  CHECK(r.reference);
  CHECK(r.values.isZero());
  CHECK_THROWS_AS(eval_ordinal(5, 3), IndexError);
  CHECK_THROWS_AS(eval_ordinal(0, 3), IndexError);

  CHECK(eval_group(3, 5) == Vector::Unit(5, 2));
  CHECK(eval_group(1, 1) == Vector::Ones(1));
  CHECK_THROWS(eval_group(6, 5));
}

TEST_CASE("tensor_row ordering") {
  Vector a(2), b(2);
  a << 1, 2;
  b << 3, 4;
  Vector expected(4);
  expected << 3, 4, 6, 8;
  CHECK(tensor_row(a, b) == expected);
  CHECK(tensor_row(a, Vector::Ones(1)) == a);

  const KnotVector k1 = make_knots(0.0, 1.0, 5, 3), k2 = make_knots(0.0, 1.0, 4, 2);
  const Vector ra = eval_bspline(k1, 0.3), rb = eval_bspline(k2, 0.8);
  const Vector t = tensor_row(ra, rb);
  CHECK(std::fabs(t.sum() - 1.0) < 1e-12);
  for (int d1 = 0; d1 < 5; ++d1)
    for (int d2 = 0; d2 < 4; ++d2) CHECK(t[d1 * 4 + d2] == ra[d1] * rb[d2]);
}

TEST_CASE("centering") {
  EvaluatedBasis e;
  e.values = RowMatrix(3, 2);
  e.values << 1, 5, 2, 5, 3, 5;
  const EvaluatedBasis c = center(e);
  CHECK(c.values(0, 0) == -1.0);
  CHECK(c.values(1, 0) == 0.0);
  CHECK(c.values(2, 0) == 1.0);
  CHECK(c.offsets[0] == 2.0);
  CHECK(c.offsets[1] == 5.0);
  CHECK(c.values.col(1).isZero());

  const EvaluatedBasis again = center(c);
  CHECK(again.values == c.values);
  CHECK(again.offsets.isZero());

  RowMatrix fresh(1, 2);
  fresh << 10, 10;
  apply_offsets(fresh, c.offsets);
  CHECK(fresh(0, 0) == 8.0);
  CHECK(fresh(0, 1) == 5.0);
}

TEST_CASE("response transforms") {
  CHECK(apply_transform(ResponseTransform::Log1p, 40.0) == doctest::Approx(std::log(41.0)));
  CHECK(apply_transform(ResponseTransform::Identity, 3.0) == 3.0);
  CHECK(support_minimum(ResponseTransform::Log) == 1);
  CHECK(support_minimum(ResponseTransform::Log1p) == 0);
  CHECK(parse_transform("log1p") == ResponseTransform::Log1p);
  CHECK(transform_name(ResponseTransform::Log) == "log");
}
