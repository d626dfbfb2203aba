#include "qla/chart.hpp"

#include <cmath>

#include "qla/errors.hpp"
#include "qla/quadrature.hpp"

namespace qla {

LocalChart::LocalChart(FieldSample sample, Matrix a) : sample_(std::move(sample)), a_(std::move(a)) {
  const int p = sample_.dim();
  if (a_.rows() != p || a_.cols() != p) throw LinearAlgebraError("local chart: a_T must be square of the field dimension");
  a_lu_.compute(a_);
  if (!a_lu_.isInvertible()) throw LinearAlgebraError("local chart: a_T is singular");
  const EigenRange gram = symmetric_eigen_range(a_.transpose() * a_);
  if (!(gram.min > 0.0)) throw LinearAlgebraError("local chart: a_T^T a_T is not positive-definite");
  b_ = 1.0 / gram.min;
  h_star_ = sample_.value(theta_star());
  if (!std::isfinite(h_star_))
    throw EvaluationError("non-finite field value at theta* = " + format_vector(theta_star()));
}

Vector LocalChart::to_u(const Vector& theta) const { return a_lu_.solve(theta - theta_star()); }

Vector delta(const LocalChart& chart) {
  const Vector g = chart.sample().gradient(chart.theta_star());
  if (!g.allFinite()) throw EvaluationError("non-finite gradient at theta* = " + format_vector(chart.theta_star()));
  return chart.a().transpose() * g;
}

Matrix gamma_at(const LocalChart& chart, const Vector& theta) {
  if (!chart.space().in_closure(theta))
    throw DomainError("gamma_at: theta " + format_vector(theta) + " is outside the closure of Theta");
  const Matrix& a = chart.a();
  const Matrix g = -(a.transpose() * chart.sample().hessian(theta) * a);
  return 0.5 * (g + g.transpose());
}

double y_field(const LocalChart& chart, const Vector& theta) {
  if (!chart.space().in_closure(theta))
    throw DomainError("y_field: theta " + format_vector(theta) + " is outside the closure of Theta");
  return (chart.sample().value(theta) - chart.value_at_star()) / chart.b();
}

bool u_domain_contains(const LocalChart& chart, const Vector& u) {
  if (u.size() != chart.sample().dim()) return false;
  return chart.space().contains(chart.to_theta(u));
}

double log_z_field(const LocalChart& chart, const Vector& u) {
  if (!u_domain_contains(chart, u)) throw DomainError("z_field: u " + format_vector(u) + " is outside U_T");
  return chart.sample().value(chart.to_theta(u)) - chart.value_at_star();
}

double z_field(const LocalChart& chart, const Vector& u) { return std::exp(log_z_field(chart, u)); }

double laq_remainder(const LocalChart& chart, const Vector& u, const Matrix& gamma) {
  if (!u_domain_contains(chart, u)) return 1.0;
  return log_z_field(chart, u) - (delta(chart).dot(u) - 0.5 * quadratic_form(gamma, u));
}

double laq_remainder_integral(const LocalChart& chart, const Vector& u, const Matrix& gamma, int quad_nodes) {
  if (quad_nodes < 8) throw PreconditionError("laq_remainder_integral: quad_nodes must be >= 8");
  // Theta is convex and theta* interior, so the segment is inside iff its far end is.
  if (!u_domain_contains(chart, u))
    throw DomainError("laq_remainder_integral: segment to u " + format_vector(u) + " leaves Theta");
  const GaussRule rule = gauss_legendre_on(quad_nodes, 0.0, 1.0);
  const Vector step = chart.a() * u;
  double acc = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
    const double s = rule.nodes[k];
    const Matrix diff = gamma_at(chart, chart.theta_star() + s * step) - gamma;
    acc += rule.weights[k] * (1.0 - s) * quadratic_form(diff, u);
  }
  return -acc;
}

double limit_z(const Vector& delta, const Matrix& gamma, const Vector& u) {
  if (!is_positive_definite(gamma)) throw PreconditionError("limit_z: Gamma must be positive-definite");
  return std::exp(delta.dot(u) - 0.5 * quadratic_form(gamma, u));
}

}  // namespace qla
