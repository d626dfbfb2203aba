// Shared fixtures: small closed-form fields and finite-difference oracles.
#pragma once

#include <cmath>
#include <memory>

#include "qla/field.hpp"
#include "qla/models.hpp"
#include "qla/parameter_space.hpp"

namespace qla::test {

inline Vector vec1(double x) { return Vector::Constant(1, x); }

inline Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

inline ParameterSpace box1(double lo, double hi, double star = 0.0) { return {vec1(lo), vec1(hi), vec1(star)}; }

/// H(theta) = g (theta - c) - k/2 (theta - c)^2 on a 1-D box.
inline FieldSample quadratic1(double g, double k, double lo, double hi, double star = 0.0, double index = 1.0) {
  return FieldSample(quadratic_field(vec1(star), vec1(g), Matrix::Constant(1, 1, k)), box1(lo, hi, star), index);
}

inline double central_difference(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

/// Max relative discrepancy between the analytic gradient/Hessian and central
/// differences of value/gradient at theta.
inline double fd_gradient_error(const Field& f, const Vector& theta) {
  double worst = 0.0;
  const Vector g = f.gradient(theta);
  for (int i = 0; i < f.dim(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta(i)));
    Vector tp = theta, tm = theta;
    tp(i) += h;
    tm(i) -= h;
    const double fd = (f.value(tp) - f.value(tm)) / (2.0 * h);
    worst = std::max(worst, std::abs(fd - g(i)) / std::max(1.0, std::abs(g(i))));
  }
  return worst;
}

inline double fd_hessian_error(const Field& f, const Vector& theta) {
  double worst = 0.0;
  const Matrix H = f.hessian(theta);
  for (int j = 0; j < f.dim(); ++j) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta(j)));
    Vector tp = theta, tm = theta;
    tp(j) += h;
    tm(j) -= h;
    const Vector fd = (f.gradient(tp) - f.gradient(tm)) / (2.0 * h);
    for (int i = 0; i < f.dim(); ++i)
      worst = std::max(worst, std::abs(fd(i) - H(i, j)) / std::max(1.0, std::abs(H(i, j))));
  }
  return worst;
}

}  // namespace qla::test
