#pragma once

#include "qla/field.hpp"

namespace qla {

/// Localized view of a field sample at theta* under the scaling a_T:
/// theta = theta* + a_T u.
class LocalChart {
 public:
  /// Throws LinearAlgebraError when `a` is singular or not square of the field's dimension.
  LocalChart(FieldSample sample, Matrix a);

  const FieldSample& sample() const noexcept { return sample_; }
  const ParameterSpace& space() const noexcept { return sample_.space(); }
  const Matrix& a() const noexcept { return a_; }
  /// b_T = 1 / lambda_min(a^T a).
  double b() const noexcept { return b_; }
  const Vector& theta_star() const noexcept { return sample_.space().theta_star(); }
  /// H_T(theta*), cached.
  double value_at_star() const noexcept { return h_star_; }

  Vector to_theta(const Vector& u) const { return theta_star() + a_ * u; }
  /// u = a^{-1}(theta - theta*).
  Vector to_u(const Vector& theta) const;

 private:
  FieldSample sample_;
  Matrix a_;
  Eigen::FullPivLU<Matrix> a_lu_;
  double b_;
  double h_star_;
};

/// Delta_T = a_T^T grad H_T(theta*).
Vector delta(const LocalChart& chart);

/// Gamma_T(theta) = -a_T^T Hess H_T(theta) a_T; theta must lie in closure(Theta).
Matrix gamma_at(const LocalChart& chart, const Vector& theta);

/// Y_T(theta) = b_T^{-1} (H_T(theta) - H_T(theta*)).
double y_field(const LocalChart& chart, const Vector& theta);

/// True iff theta* + a_T u lies strictly inside Theta.
bool u_domain_contains(const LocalChart& chart, const Vector& u);

/// log Z_T(u) = H_T(theta* + a_T u) - H_T(theta*), for u in U_T.
double log_z_field(const LocalChart& chart, const Vector& u);

/// Z_T(u) = exp(H_T(theta* + a_T u) - H_T(theta*)), for u in U_T.
double z_field(const LocalChart& chart, const Vector& u);

/// r_T(u) = log Z_T(u) - (Delta_T[u] - 1/2 gamma[u, u]) on U_T, and exactly 1 outside.
double laq_remainder(const LocalChart& chart, const Vector& u, const Matrix& gamma);

/// r_T(u) through its integral form
///   -int_0^1 (1 - s) {Gamma_T(theta* + s a_T u) - gamma}[u, u] ds
/// with a Gauss-Legendre rule of `quad_nodes` nodes on [0, 1].
double laq_remainder_integral(const LocalChart& chart, const Vector& u, const Matrix& gamma, int quad_nodes);

/// Z(u) = exp(Delta[u] - 1/2 Gamma[u, u]) for the limit pair.
double limit_z(const Vector& delta, const Matrix& gamma, const Vector& u);

}  // namespace qla
