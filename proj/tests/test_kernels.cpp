#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "qla/kernels/kernels.hpp"

using namespace qla::kernels;

namespace {

std::vector<double> data(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 3.0);
  std::vector<double> v(n);
  for (auto& x : v) x = nd(rng);
  return v;
}

double abs_sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// Restores the dispatch target after a test case switches it.
struct IsaGuard {
  Isa saved = active_isa();
  ~IsaGuard() { set_active_isa(saved); }
};

}  // namespace

TEST_CASE("scalar kernels match naive loops") {
  const auto x = data(257, 1);
  const auto y = data(257, 2);
  double s = 0, ss = 0, d = 0, ic = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += x[i];
    ss += x[i] * x[i];
    d += x[i] * y[i];
    if (i + 1 < x.size()) ic += x[i] * (x[i + 1] - x[i]);
  }
  CHECK(scalar::sum(x) == doctest::Approx(s).epsilon(1e-14));
  CHECK(scalar::sum_squares(x) == doctest::Approx(ss).epsilon(1e-14));
  CHECK(scalar::dot(x, y) == doctest::Approx(d).epsilon(1e-14));
  CHECK(scalar::increment_cross(x) == doctest::Approx(ic).epsilon(1e-14));
}

TEST_CASE("empty and single-element inputs") {
  std::vector<double> none, one{2.5};
  CHECK(sum(none) == 0.0);
  CHECK(sum_squares(one) == 6.25);
  CHECK(increment_cross(one) == 0.0);
  CHECK(increment_cross(none) == 0.0);
}

TEST_CASE("dot rejects mismatched lengths") {
  std::vector<double> a(3, 1.0), b(4, 1.0);
  CHECK_THROWS_AS(dot(a, b), std::invalid_argument);
}

TEST_CASE("SIMD variants agree with the scalar reference") {
  if (!isa_available(Isa::avx2) && !isa_available(Isa::neon)) {
    MESSAGE("no SIMD variant on this host; scalar only");
    return;
  }
  const Isa simd = isa_available(Isa::avx2) ? Isa::avx2 : Isa::neon;
  for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 31u, 33u, 64u, 1000u, 10001u}) {
    CAPTURE(n);
    const auto x = data(n, 10 + n);
    const auto y = data(n, 20 + n);
    const double tol = 1e-13 * (1.0 + abs_sum(x) * 10.0);
    IsaGuard guard;
    REQUIRE(set_active_isa(Isa::scalar));
    const double s0 = sum(x), q0 = sum_squares(x), d0 = dot(x, y), c0 = increment_cross(x);
    REQUIRE(set_active_isa(simd));
    CHECK(std::abs(sum(x) - s0) <= tol);
    CHECK(std::abs(sum_squares(x) - q0) <= tol * 10.0);
    CHECK(std::abs(dot(x, y) - d0) <= tol * 10.0);
    CHECK(std::abs(increment_cross(x) - c0) <= tol * 10.0);
  }
}

TEST_CASE("dispatch refuses unavailable targets") {
  IsaGuard guard;
  CHECK(set_active_isa(Isa::scalar));
  CHECK(active_isa() == Isa::scalar);
#if defined(__x86_64__)
  CHECK_FALSE(set_active_isa(Isa::neon));
  CHECK(active_isa() == Isa::scalar);
#endif
  CHECK(isa_name(Isa::avx2) == "avx2");
}
