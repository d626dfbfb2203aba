#include <doctest.h>

#include <cmath>

#include "qla/chart.hpp"
#include "qla/errors.hpp"
#include "qla/estimators.hpp"
#include "qla/prior.hpp"
#include "support.hpp"

using namespace qla;
using namespace qla::test;

TEST_SUITE("qmle") {
  TEST_CASE("interior vertex and boundary maximum") {
    const QmleResult in = qmle(quadratic1(0.3, 0.5, -2, 2));
    CHECK(in.theta(0) == doctest::Approx(0.6).epsilon(1e-12));
    CHECK_FALSE(in.at_boundary);
    const QmleResult edge = qmle(quadratic1(0.3, 0.5, -0.5, 0.5));
    CHECK(edge.theta(0) == 0.5);
    CHECK(edge.at_boundary);
  }

  TEST_CASE("2-D concave quadratic") {
    Matrix k(2, 2);
    k << 2.0, 0.5, 0.5, 1.0;
    const Vector g = vec2(0.3, -0.2);
    FieldSample s(quadratic_field(vec2(0, 0), g, k), ParameterSpace(vec2(-2, -2), vec2(2, 2), vec2(0, 0)), 1.0);
    const Vector expected = k.ldlt().solve(g);
    CHECK((qmle(s).theta - expected).norm() <= 1e-10);
  }

  TEST_CASE("flat field: lexicographically smallest grid point wins") {
    const QmleResult r = qmle(quadratic1(0.0, 0.0, -1, 1));
    CHECK(r.theta(0) == -1.0);
    CHECK(r.at_boundary);
  }

  TEST_CASE("settings are validated") {
    OptimizerSettings bad;
    bad.starts = 0;
    CHECK_THROWS_AS(qmle(quadratic1(0.3, 0.5, -2, 2), bad), PreconditionError);
    bad = {};
    bad.step_shrink = 1.0;
    CHECK_THROWS_AS(bad.validate(1), PreconditionError);
  }
}

TEST_SUITE("qbe") {
  TEST_CASE("symmetric posterior: mean at theta*") {
    const ParameterSpace sp = box1(-2, 2);
    const QbeResult r = qbe(quadratic1(0.0, 50.0, -2, 2), Prior::uniform(sp));
    CHECK(std::abs(r.theta(0)) <= 1e-10);
  }

  TEST_CASE("peaked posterior against a 10^6-point midpoint rule") {
    // Delta_T = 0.3 and Gamma_T = 0.5 at b = 100, a = 0.1.
    const double g = 3.0, k = 50.0;
    const ParameterSpace sp = box1(-2, 2);
    const QbeResult r = qbe(quadratic1(g, k, -2, 2), Prior::uniform(sp));
    const int n = 1000000;
    const double w = 4.0 / n;
    const double peak = g * g / (2 * k);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
      const double th = -2.0 + (i + 0.5) * w;
      const double e = std::exp(g * th - 0.5 * k * th * th - peak);
      num += th * e;
      den += e;
    }
    CHECK(std::abs(r.theta(0) - num / den) <= 1e-6);
    CHECK(r.quad_error < 1e-6);
    CHECK_FALSE(r.warning);
  }

  TEST_CASE("flat field, linear prior: prior mean 1/6") {
    const ParameterSpace sp = box1(-1, 1);
    const QbeResult r = qbe(quadratic1(0.0, 0.0, -1, 1), Prior::linear(sp, 0.5));
    CHECK(r.theta(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-10));
  }

  TEST_CASE("strict mode turns quadrature warnings into errors") {
    const ParameterSpace sp = box1(-1, 1);
    auto kink = std::make_shared<FunctionField>(
        1, [](const Vector& t) { return -40.0 * std::abs(t(0) - 0.123); },
        [](const Vector& t) { return vec1(t(0) > 0.123 ? -40.0 : 40.0); },
        [](const Vector&) { return Matrix::Zero(1, 1); });
    QuadratureSettings qs;
    qs.nodes_per_dim = 33;
    qs.error_tol = 1e-15;
    const FieldSample s(kink, sp, 1.0);
    const QbeResult loose = qbe(s, Prior::uniform(sp), qs);
    CHECK(loose.warning);
    qs.strict = true;
    CHECK_THROWS_AS(qbe(s, Prior::uniform(sp), qs), QuadratureError);
  }
}

TEST_SUITE("localize") {
  TEST_CASE("examples") {
    const ParameterSpace sp = box1(-1, 1);
    CHECK(localize(vec1(0.0), sp, Matrix::Constant(1, 1, 0.1))(0) == 0.0);
    CHECK(localize(vec1(0.05), sp, Matrix::Constant(1, 1, 0.1))(0) == doctest::Approx(0.5));
    const ParameterSpace sp2(vec2(-1, -1), vec2(1, 1), vec2(0, 0));
    Matrix a = Matrix::Zero(2, 2);
    a.diagonal() << 0.1, 0.01;
    const Vector u = localize(vec2(0.1, 0.01), sp2, a);
    CHECK(u(0) == doctest::Approx(1.0));
    CHECK(u(1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(localize(vec1(0.1), sp, Matrix::Zero(1, 1)), LinearAlgebraError);
  }
}
