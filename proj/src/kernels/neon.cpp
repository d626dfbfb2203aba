#include <arm_neon.h>

#include "qla/kernels/kernels.hpp"

namespace qla::kernels::neon {

double sum(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vaddq_f64(acc0, vld1q_f64(p + i));
    acc1 = vaddq_f64(acc1, vld1q_f64(p + i + 2));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i];
  return vaddvq_f64(vaddq_f64(acc0, acc1)) + tail;
}

double sum_squares(std::span<const double> x) {
  const double* p = x.data();
  const std::size_t n = x.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t a = vld1q_f64(p + i);
    const float64x2_t b = vld1q_f64(p + i + 2);
    acc0 = vfmaq_f64(acc0, a, a);
    acc1 = vfmaq_f64(acc1, b, b);
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += p[i] * p[i];
  return vaddvq_f64(vaddq_f64(acc0, acc1)) + tail;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const double* pa = a.data();
  const double* pb = b.data();
  const std::size_t n = a.size();
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(pa + i), vld1q_f64(pb + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(pa + i + 2), vld1q_f64(pb + i + 2));
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += pa[i] * pb[i];
  return vaddvq_f64(vaddq_f64(acc0, acc1)) + tail;
}

double increment_cross(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double* p = x.data();
  const std::size_t m = x.size() - 1;
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const float64x2_t x0 = vld1q_f64(p + i);
    const float64x2_t x1 = vld1q_f64(p + i + 2);
    acc0 = vfmaq_f64(acc0, x0, vsubq_f64(vld1q_f64(p + i + 1), x0));
    acc1 = vfmaq_f64(acc1, x1, vsubq_f64(vld1q_f64(p + i + 3), x1));
  }
  double tail = 0.0;
  for (; i < m; ++i) tail += p[i] * (p[i + 1] - p[i]);
  return vaddvq_f64(vaddq_f64(acc0, acc1)) + tail;
}

}  // namespace qla::kernels::neon
