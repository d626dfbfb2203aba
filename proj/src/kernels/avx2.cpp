#include <immintrin.h>

#include "qla/kernels/kernels.hpp"

namespace qla::kernels::avx2 {
namespace {

// Two independent 4-lane accumulators hide the FMA latency.
inline double horizontal_sum(__m256d a, __m256d b) {
  const __m256d s = _mm256_add_pd(a, b);
  const __m128d lo = _mm256_castpd256_pd128(s);
  const __m128d hi = _mm256_extractf128_pd(s, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

}  // namespace

double sum(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(p + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(p + i + 4));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i];
  return horizontal_sum(acc0, acc1) + tail;
}

double sum_squares(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d a = _mm256_loadu_pd(p + i);
    const __m256d b = _mm256_loadu_pd(p + i + 4);
    acc0 = _mm256_fmadd_pd(a, a, acc0);
    acc1 = _mm256_fmadd_pd(b, b, acc1);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i] * p[i];
  return horizontal_sum(acc0, acc1) + tail;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t n = a.size();
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i), _mm256_loadu_pd(pb + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(pa + i + 4), _mm256_loadu_pd(pb + i + 4), acc1);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += pa[i] * pb[i];
  return horizontal_sum(acc0, acc1) + tail;
}

double increment_cross(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double* p = x.data();
  const std::size_t m = x.size() - 1;  // number of increments
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= m; i += 8) {
    const __m256d x0 = _mm256_loadu_pd(p + i);
    const __m256d x1 = _mm256_loadu_pd(p + i + 4);
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 1), x0);
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(p + i + 5), x1);
    acc0 = _mm256_fmadd_pd(x0, d0, acc0);
    acc1 = _mm256_fmadd_pd(x1, d1, acc1);
  }
  double tail = 0.0;
  for (; i < m; ++i) tail += p[i] * (p[i + 1] - p[i]);
  return horizontal_sum(acc0, acc1) + tail;
}

}  // namespace qla::kernels::avx2
