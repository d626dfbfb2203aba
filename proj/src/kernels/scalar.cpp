#include "qla/kernels/kernels.hpp"

namespace qla::kernels::scalar {

double sum(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v;
  return acc;
}

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double increment_cross(std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) acc += x[i] * (x[i + 1] - x[i]);
  return acc;
}

}  // namespace qla::kernels::scalar
