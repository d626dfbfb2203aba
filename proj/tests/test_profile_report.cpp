#include <doctest.h>

#include <cmath>
#include <random>

#include "qla/errors.hpp"
#include "qla/profile.hpp"
#include "qla/report.hpp"

using namespace qla;

TEST_SUITE("condition profile") {
  TEST_CASE("default profile and derived orders") {
    const ConditionProfile p = ConditionProfile::defaults();
    CHECK(p.rho1() == doctest::Approx(0.125));
    CHECK(p.beta() == doctest::Approx(0.25));
    CHECK(p.M1() == doctest::Approx(2.0 / 0.875));
    CHECK(p.M2() == doctest::Approx(5.0));
    CHECK(p.M3() == doctest::Approx(16.0));
    CHECK(p.M4() == doctest::Approx(3.2));
    CHECK(p.pld_rho() == doctest::Approx(0.5));
    CHECK(p.epsilon1() == doctest::Approx(0.45));
    CHECK(p.epsilon2() == doctest::Approx(0.3));
  }

  TEST_CASE("each inequality is enforced") {
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.5, 0.05, 0.1, 0.5, 2), PreconditionError);   // beta1 < 1/2
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.3, 0.05, 0.3, 0.5, 2), PreconditionError);   // rho1 < alpha/(1-alpha)
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.3, 0.05, 0.1, 0.4, 2), PreconditionError);   // 2 alpha < rho2
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.3, -0.1, 0.1, 0.5, 2), PreconditionError);   // beta2 >= 0
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.3, 0.05, 0.1, 1.2, 2), PreconditionError);   // 1 - 2 beta2 - rho2 > 0
    CHECK_THROWS_AS(ConditionProfile(0.2, 0.3, 0.05, 0.1, 0.5, -1), PreconditionError);  // L > 0
    CHECK(s1_violations(0.2, 0.3, 0.05, 0.1, 0.5, 2).empty());
  }

  TEST_CASE("rho1 finder completes [S1] whenever the [U2] inequalities hold") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int tried = 0;
    while (tried < 2000) {
      const double alpha = 0.499 * u(rng) + 1e-4;
      const double rho2 = 2 * alpha + (1 - 2 * alpha) * u(rng);
      const double beta2 = (1 - rho2) / 2 * u(rng);
      const double beta1 = 0.5 * u(rng) + 1e-6;
      if (!(rho2 > 2 * alpha && 1 - 2 * beta2 - rho2 > 0 && beta1 < 0.5)) continue;
      ++tried;
      const double r1 = find_rho1(alpha, beta1, beta2, rho2);
      CAPTURE(alpha);
      CAPTURE(beta1);
      CAPTURE(beta2);
      CAPTURE(rho2);
      CHECK(s1_violations(alpha, beta1, beta2, r1, rho2, 2.0).empty());
    }
    CHECK_THROWS_AS(find_rho1(0.3, 0.3, 0.05, 0.5), PreconditionError);
  }

  TEST_CASE("mode names") {
    CHECK(parse_condition_mode("T") == ConditionMode::T);
    CHECK_THROWS_AS(parse_condition_mode("X"), PreconditionError);
  }
}

TEST_SUITE("report") {
  ProbeReport sample_report() {
    ProbeReport r;
    r.name = "demo";
    r.grid = {{100, 0.5, 0.01, 1000, {{"p90", 0.9}}}, {400, 0.25, 0.005, 1000, {}}};
    r.verdict = Verdict::pass;
    r.rule = "decreasing";
    r.config_hash = "abc";
    r.seed = 9;
    r.metrics["slope"] = -INFINITY;
    r.notes = {"n"};
    return r;
  }

  TEST_CASE("json round trip, including non-finite metrics") {
    const ProbeReport r = sample_report();
    const ProbeReport back = ProbeReport::from_json(nlohmann::json::parse(r.to_json().dump()));
    CHECK(back.name == r.name);
    CHECK(back.grid.size() == 2);
    CHECK(back.grid[0].extras.at("p90") == 0.9);
    CHECK(back.verdict == Verdict::pass);
    CHECK(std::isinf(back.metrics.at("slope")));
    CHECK(back.seed == 9);
    const auto j = r.to_json();
    for (const char* key : {"name", "config_hash", "seed", "grid", "verdict", "rule"}) CHECK(j.contains(key));
  }

  TEST_CASE("csv table") {
    CHECK(sample_report().to_csv() == "T_or_r,estimate,stderr,reps\n100,0.5,0.01,1000\n400,0.25,0.0050000000000000001,1000\n");
  }

  TEST_CASE("verdict helpers") {
    std::vector<double> dec{3, 2, 1}, flat{3, 3, 1}, up{1, 2};
    CHECK(strictly_decreasing(dec));
    CHECK_FALSE(strictly_decreasing(flat));
    CHECK(nonincreasing(flat));
    CHECK_FALSE(nonincreasing(up));
    std::vector<double> bounded{1.0, 1.1, 1.15, 1.0}, growing{1.0, 1.3};
    CHECK(bounded_by_running_median(bounded, 1.2));
    CHECK_FALSE(bounded_by_running_median(growing, 1.2));
    std::vector<double> tiny{1e-15, 3e-15};
    CHECK(bounded_by_running_median(tiny, 1.2, 1e-12));
    std::vector<double> x{1, 2, 4}, y{1, 0.25, 0.0625};
    CHECK(loglog_slope(x, y) == doctest::Approx(-2.0));
    CHECK(median({3, 1, 2}) == 2.0);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK(worst(Verdict::pass, Verdict::inconclusive) == Verdict::inconclusive);
    CHECK(worst(Verdict::fail, Verdict::inconclusive) == Verdict::fail);
    const MeanStat m = mean_stat(std::vector<double>{1, 2, 3, 4});
    CHECK(m.mean == 2.5);
    CHECK(m.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0 / 4.0)));
  }

  TEST_CASE("median standard error tracks the normal-theory value") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd;
    std::vector<double> v(20000);
    for (auto& x : v) x = nd(rng);
    // sd(median) = sqrt(pi/2) / sqrt(n) for N(0,1).
    CHECK(median_stderr(v) == doctest::Approx(std::sqrt(M_PI / 2 / 20000.0)).epsilon(0.1));
  }
}
