#include "qla/limit_law.hpp"

#include <cmath>

#include "qla/errors.hpp"

namespace qla {

LimitLaw LimitLaw::deterministic(Matrix gamma) {
  if (!is_positive_definite(gamma)) throw PreconditionError("limit law: Gamma must be symmetric positive-definite");
  LimitLaw law(LimitMode::deterministic_gamma, static_cast<int>(gamma.rows()));
  law.fixed_gamma_ = std::move(gamma);
  return law;
}

LimitLaw LimitLaw::random(int dim, GammaSampler sampler) {
  if (!sampler) throw PreconditionError("limit law: random mode needs a Gamma sampler");
  LimitLaw law(LimitMode::random_gamma, dim);
  law.sampler_ = std::move(sampler);
  return law;
}

LimitLaw& LimitLaw::with_y_limit(YLimit y, Chi0 chi0) {
  y_limit_ = std::move(y);
  chi0_ = std::move(chi0);
  return *this;
}

Matrix LimitLaw::sample_gamma(RandomStream& stream) const {
  if (fixed_gamma_) return *fixed_gamma_;
  Matrix g = sampler_(stream);
  if (!is_positive_definite(g)) throw EvaluationError("limit law: sampled Gamma is not positive-definite");
  return g;
}

Vector LimitLaw::sample_delta(const Matrix& gamma, RandomStream& stream) const {
  Vector zeta(dim_);
  for (int i = 0; i < dim_; ++i) zeta(i) = stream.normal();
  return symmetric_sqrt(gamma) * zeta;
}

LimitDraw LimitLaw::sample(RandomStream& stream) const {
  LimitDraw d;
  d.gamma = sample_gamma(stream);
  d.delta = sample_delta(d.gamma, stream);
  d.u_hat = d.gamma.ldlt().solve(d.delta);
  return d;
}

double LimitLaw::y_limit(const Vector& theta, const Matrix& gamma) const {
  if (!y_limit_) throw PreconditionError("limit law: no limit field Y attached");
  return y_limit_(theta, gamma);
}

double LimitLaw::chi0(const Matrix& gamma) const {
  if (!chi0_) throw PreconditionError("limit law: no chi0 attached");
  return chi0_(gamma);
}

double LimitLaw::z(const Vector& delta, const Matrix& gamma, const Vector& u) {
  if (!is_positive_definite(gamma)) throw PreconditionError("limit_z: Gamma must be positive-definite");
  return std::exp(delta.dot(u) - 0.5 * quadratic_form(gamma, u));
}

}  // namespace qla
