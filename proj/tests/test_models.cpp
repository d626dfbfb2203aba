#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qla/chart.hpp"
#include "qla/errors.hpp"
#include "qla/estimators.hpp"
#include "support.hpp"

using namespace qla;
using namespace qla::test;

namespace {

ModelSpec spec_of(ModelKind kind, double star, double horizon) {
  ModelSpec s;
  s.kind = kind;
  s.theta_star = vec1(star);
  s.horizon = horizon;
  return s;
}

}  // namespace

TEST_SUITE("ou-drift") {
  TEST_CASE("QMLE is the clamped quadratic vertex") {
    const ModelSpec spec = spec_of(ModelKind::ou_drift, 1.0, 100.0);
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RandomStream s(seed, {});
      const FieldSample sample = simulate_ou_field(spec, s);
      const auto& ou = dynamic_cast<const OuField&>(sample.field());
      const double vertex = std::clamp(-ou.s1() / ou.s2(), 0.1, 3.0);
      CHECK(std::abs(qmle(sample).theta(0) - vertex) <= 1e-10);
      CHECK(sample.value(vec1(1.0)) - sample.value(vec1(1.0)) == 0.0);
    }
  }

  TEST_CASE("analytic limits") {
    const AnalyticLimits lim = analytic_limits(spec_of(ModelKind::ou_drift, 1.0, 100.0));
    CHECK((*lim.gamma)(0, 0) == doctest::Approx(0.5));
    CHECK(*lim.chi0 == doctest::Approx(0.25));
    CHECK(std::sqrt((*lim.avar)(0, 0)) == doctest::Approx(std::sqrt(2.0)));
    const Matrix g = *lim.gamma;
    CHECK(lim.law.y_limit(vec1(1.5), g) == doctest::Approx(-0.0625));
  }

  TEST_CASE("long-run average of X^2 matches the stationary moment 1/(2 theta*)") {
    const ModelSpec spec = spec_of(ModelKind::ou_drift, 1.0, 10000.0);
    RandomStream s(2024, {});
    const auto sample = simulate_ou_field(spec, s);
    const auto& ou = dynamic_cast<const OuField&>(sample.field());
    // Var of the time average of X^2 is about 1/(2 theta*^3 T) = 5e-5.
    CHECK(std::abs(ou.s2() / 10000.0 - 0.5) < 3.0 * std::sqrt(5e-5) + 1e-3);
  }

  TEST_CASE("Y_T at theta* + 0.5 approaches -(theta - theta*)^2/(4 theta*)") {
    const ModelSpec spec = spec_of(ModelKind::ou_drift, 1.0, 400.0);
    std::vector<double> ys;
    for (std::uint64_t k = 0; k < 200; ++k) {
      RandomStream s(5, {k});
      const LocalChart c(simulate_ou_field(spec, s), Matrix::Constant(1, 1, 0.05));
      ys.push_back(y_field(c, vec1(1.5)));
    }
    double m = 0, v = 0;
    for (double y : ys) m += y;
    m /= ys.size();
    for (double y : ys) v += (y - m) * (y - m);
    const double se = std::sqrt(v / (ys.size() - 1) / ys.size());
    CHECK(std::abs(m + 0.0625) <= 3.0 * se + 1e-3);
  }

  TEST_CASE("preconditions") {
    CHECK_THROWS_AS(validate(spec_of(ModelKind::ou_drift, -1.0, 100.0)), ModelError);
    CHECK_THROWS(validate(spec_of(ModelKind::ou_drift, 1.0, 5.0)));
    ModelSpec odd = spec_of(ModelKind::ou_drift, 1.0, 100.005);
    CHECK_THROWS(validate(odd));
  }

  TEST_CASE("path dump header") {
    RandomStream s(1, {});
    std::ostringstream os;
    write_path_csv(simulate_ou_field(spec_of(ModelKind::ou_drift, 1.0, 10.0), s), os);
    CHECK(os.str().rfind("t,x\n", 0) == 0);
  }
}

TEST_SUITE("vol-contrast") {
  TEST_CASE("analytic limits and Y") {
    const AnalyticLimits lim = analytic_limits(spec_of(ModelKind::vol_contrast, 0.0, 400.0));
    CHECK((*lim.gamma)(0, 0) == 2.0);
    CHECK((*lim.avar)(0, 0) == 0.5);
    const Matrix g = *lim.gamma;
    CHECK(lim.law.y_limit(vec1(0.0), g) == 0.0);
    const double h = 1e-4;
    const double y2 = (lim.law.y_limit(vec1(h), g) - 2 * lim.law.y_limit(vec1(0), g) + lim.law.y_limit(vec1(-h), g)) / (h * h);
    CHECK(y2 == doctest::Approx(-2.0).epsilon(1e-6));
    // chi0 from an independent 10^5-point grid.
    double chi = INFINITY;
    for (int k = 0; k <= 100000; ++k) {
      const double th = -1.5 + 3.0 * k / 100000.0;
      if (std::abs(th) < 1e-9) continue;
      const double y = -(0.5 * (std::exp(-2.0 * th) - 1.0) + th);
      chi = std::min(chi, -y / (th * th));
    }
    CHECK(*lim.chi0 == doctest::Approx(chi).epsilon(1e-6));
    for (int k = 0; k <= 10000; ++k) {
      const double th = -1.5 + 3.0 * k / 10000.0;
      CHECK(lim.law.y_limit(vec1(th), g) <= -*lim.chi0 * th * th + 1e-12);
    }
  }

  TEST_CASE("normalized squared increments have mean 1 and variance 2") {
    RandomStream s(8, {});
    ModelSpec spec = spec_of(ModelKind::vol_contrast, 0.3, 1e6);
    spec.mesh = 0.001;
    const auto sample = simulate_vol_field(spec, s);
    const auto& vf = dynamic_cast<const VolField&>(sample.field());
    double m = 0, m2 = 0;
    for (double d : vf.increments()) {
      const double z = d * d / (std::exp(0.6) * 0.001);
      m += z;
      m2 += z * z;
    }
    m /= 1e6;
    m2 /= 1e6;
    CHECK(std::abs(m - 1.0) < 3.0 * std::sqrt(2.0 / 1e6));
    CHECK(std::abs(m2 - m * m - 2.0) < 0.05);
  }

  TEST_CASE("degenerate increments put the QMLE at theta*") {
    const ModelSpec spec = spec_of(ModelKind::vol_contrast, 0.0, 100.0);
    const auto sample = vol_field_from_increments(spec, std::vector<double>(100, std::sqrt(spec.mesh)));
    CHECK(std::abs(qmle(sample).theta(0)) <= 1e-12);
  }

  TEST_CASE("preconditions and dump header") {
    CHECK_THROWS(validate(spec_of(ModelKind::vol_contrast, 0.0, 20.0)));
    RandomStream s(1, {});
    std::ostringstream os;
    write_path_csv(simulate_vol_field(spec_of(ModelKind::vol_contrast, 0.0, 60.0), s), os);
    CHECK(os.str().rfind("i,dx\n", 0) == 0);
  }
}

TEST_SUITE("synthetic-laq") {
  TEST_CASE("kappa = 0 is an exact quadratic") {
    ModelSpec spec = spec_of(ModelKind::synthetic_laq, 0.0, 1e4);
    spec.kappa = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      RandomStream s(seed, {});
      const FieldSample sample = synth_laq_field(spec, s);
      const auto& sf = dynamic_cast<const SyntheticLaqField&>(sample.field());
      const Matrix g = *sample.limit_gamma();
      const LocalChart c(sample, Matrix::Constant(1, 1, 0.01));
      for (double u : {-3.0, -0.5, 0.7, 2.0}) CHECK(std::abs(laq_remainder(c, vec1(u), g)) <= 1e-12);
      const double uhat = c.to_u(qmle(sample).theta)(0);
      CHECK(std::abs(uhat - delta(c)(0) / g(0, 0)) <= 1e-8);
      CHECK(std::sqrt(sf.gamma_omega()) * uhat == doctest::Approx(sf.zeta()).epsilon(1e-8));
    }
  }

  TEST_CASE("kappa = 0.5, b = 1e4 shifts Delta by 5 kappa b^(-1/4)") {
    ModelSpec spec = spec_of(ModelKind::synthetic_laq, 0.0, 1e4);
    RandomStream s(3, {});
    const FieldSample sample = synth_laq_field(spec, s);
    const auto& sf = dynamic_cast<const SyntheticLaqField&>(sample.field());
    const LocalChart c(sample, Matrix::Constant(1, 1, 0.01));
    CHECK(delta(c)(0) - std::sqrt(sf.gamma_omega()) * sf.zeta() == doctest::Approx(0.25).epsilon(1e-12));
  }

  TEST_CASE("conditional limits and preconditions") {
    ModelSpec spec = spec_of(ModelKind::synthetic_laq, 0.0, 1e4);
    spec.kappa = 0.0;
    const AnalyticLimits lim = analytic_limits(spec);
    CHECK(lim.law.mode() == LimitMode::random_gamma);
    const Matrix g = Matrix::Constant(1, 1, 1.7);
    CHECK(lim.law.y_limit(vec1(0.4), g) == doctest::Approx(-0.5 * 1.7 * 0.16));
    CHECK(lim.law.chi0(g) == doctest::Approx(0.85));
    spec.gamma_exp = 0.5;
    CHECK_THROWS_AS(validate(spec), ModelError);
  }
}
