#include "qla/models.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <ostream>

#include "qla/errors.hpp"
#include "qla/kernels/kernels.hpp"

namespace qla {
namespace {

Vector scalar_vec(double v) { return Vector::Constant(1, v); }
Matrix scalar_mat(double v) { return Matrix::Constant(1, 1, v); }

bool is_integer(double x) { return std::abs(x - std::round(x)) <= 1e-9 * std::max(1.0, std::abs(x)); }

std::size_t step_count(const ModelSpec& spec) {
  return static_cast<std::size_t>(std::llround(spec.horizon / spec.mesh));
}

// chi0 = inf over the closed box of -Y(theta) / |theta - theta*|^2, on an evenly
// spaced grid that skips a 1e-6 ball around theta*.
double grid_chi0(const ParameterSpace& space, const std::function<double(double)>& y, int points) {
  const double lo = space.lower()(0);
  const double hi = space.upper()(0);
  const double ts = space.theta_star()(0);
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double th = lo + (hi - lo) * i / (points - 1);
    const double d = th - ts;
    if (std::abs(d) <= 1e-6) continue;
    best = std::min(best, -y(th) / (d * d));
  }
  return best;
}

}  // namespace

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::ou_drift:
      return "ou-drift";
    case ModelKind::vol_contrast:
      return "vol-contrast";
    case ModelKind::synthetic_laq:
      return "synthetic-laq";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "ou-drift") return ModelKind::ou_drift;
  if (name == "vol-contrast") return ModelKind::vol_contrast;
  if (name == "synthetic-laq") return ModelKind::synthetic_laq;
  throw ModelError(fmt::format("unknown model kind '{}'", name));
}

ParameterSpace default_space(const ModelSpec& spec) {
  if (spec.theta_star.size() != 1) throw ModelError("bundled models are one-dimensional");
  double lo = 0.0;
  double hi = 0.0;
  switch (spec.kind) {
    case ModelKind::ou_drift:
      lo = 0.1, hi = 3.0;
      break;
    case ModelKind::vol_contrast:
      lo = -1.5, hi = 1.5;
      break;
    case ModelKind::synthetic_laq:
      lo = -2.0, hi = 2.0;
      break;
  }
  Vector lower = spec.lower.value_or(scalar_vec(lo));
  Vector upper = spec.upper.value_or(scalar_vec(hi));
  return ParameterSpace(std::move(lower), std::move(upper), spec.theta_star);
}

void validate(const ModelSpec& spec) {
  if (spec.theta_star.size() != 1) throw ModelError("bundled models are one-dimensional");
  const double ts = spec.theta_star(0);
  switch (spec.kind) {
    case ModelKind::ou_drift:
      if (!(ts > 0.0)) throw ModelError("ou-drift needs theta* > 0 for ergodicity");
      if (!(spec.mesh > 0.0)) throw PreconditionError("ou-drift: mesh must be positive");
      if (!(spec.horizon >= 10.0)) throw PreconditionError("ou-drift: horizon T must be >= 10");
      if (!(spec.mesh <= 0.05)) throw PreconditionError("ou-drift: mesh must be <= 0.05");
      if (!is_integer(spec.horizon / spec.mesh))
        throw PreconditionError("ou-drift: horizon / mesh must be an integer number of steps");
      break;
    case ModelKind::vol_contrast:
      if (!(spec.mesh > 0.0)) throw PreconditionError("vol-contrast: observation step h must be positive");
      if (!(spec.horizon >= 50.0) || !is_integer(spec.horizon))
        throw PreconditionError("vol-contrast: sample count n must be an integer >= 50");
      break;
    case ModelKind::synthetic_laq:
      if (!(spec.gamma_exp < 0.5)) throw ModelError("synthetic-laq: gamma must be < 1/2");
      if (!(spec.kappa >= 0.0)) throw PreconditionError("synthetic-laq: kappa must be >= 0");
      if (!(spec.horizon >= 1.0)) throw PreconditionError("synthetic-laq: b must be >= 1");
      if (!(spec.c_gamma >= 0.0)) throw PreconditionError("synthetic-laq: c_gamma must be >= 0");
      break;
  }
  (void)default_space(spec);  // theta* must be interior
}

// ---------------------------------------------------------------- ou-drift

OuField::OuField(std::shared_ptr<const std::vector<double>> path, double mesh) : path_(std::move(path)), mesh_(mesh) {
  const std::span<const double> x(*path_);
  s1_ = kernels::increment_cross(x);
  s2_ = mesh_ * kernels::sum_squares(x.first(x.size() - 1));
}

double OuField::value(const Vector& theta) const {
  const double t = theta(0);
  return -t * s1_ - 0.5 * t * t * s2_;
}

Vector OuField::gradient(const Vector& theta) const { return scalar_vec(-s1_ - theta(0) * s2_); }

Matrix OuField::hessian(const Vector&) const { return scalar_mat(-s2_); }

FieldSample simulate_ou_field(const ModelSpec& spec, RandomStream& stream) {
  validate(spec);
  if (spec.kind != ModelKind::ou_drift) throw ModelError("simulate_ou_field: spec is not ou-drift");
  const double ts = spec.theta_star(0);
  const std::size_t n = step_count(spec);
  const double decay = std::exp(-ts * spec.mesh);
  const double sd = std::sqrt(-std::expm1(-2.0 * ts * spec.mesh) / (2.0 * ts));
  auto path = std::make_shared<std::vector<double>>(n + 1);
  auto& x = *path;
  x[0] = stream.normal() / std::sqrt(2.0 * ts);
  for (std::size_t i = 0; i < n; ++i) x[i + 1] = decay * x[i] + sd * stream.normal();
  auto field = std::make_shared<OuField>(std::move(path), spec.mesh);
  return FieldSample(std::move(field), default_space(spec), spec.horizon);
}

// ------------------------------------------------------------ vol-contrast

VolField::VolField(std::shared_ptr<const std::vector<double>> increments, double step)
    : increments_(std::move(increments)), h_(step) {
  n_ = static_cast<double>(increments_->size());
  q_ = kernels::sum_squares(*increments_);
}

double VolField::value(const Vector& theta) const {
  const double t = theta(0);
  return -(q_ * std::exp(-2.0 * t) / (2.0 * h_) + n_ * t);
}

Vector VolField::gradient(const Vector& theta) const { return scalar_vec(q_ * std::exp(-2.0 * theta(0)) / h_ - n_); }

Matrix VolField::hessian(const Vector& theta) const { return scalar_mat(-2.0 * q_ * std::exp(-2.0 * theta(0)) / h_); }

FieldSample simulate_vol_field(const ModelSpec& spec, RandomStream& stream) {
  validate(spec);
  if (spec.kind != ModelKind::vol_contrast) throw ModelError("simulate_vol_field: spec is not vol-contrast");
  const std::size_t n = static_cast<std::size_t>(std::llround(spec.horizon));
  const double scale = std::exp(spec.theta_star(0)) * std::sqrt(spec.mesh);
  std::vector<double> dx(n);
  for (auto& v : dx) v = scale * stream.normal();
  return vol_field_from_increments(spec, std::move(dx));
}

FieldSample vol_field_from_increments(const ModelSpec& spec, std::vector<double> increments) {
  if (spec.kind != ModelKind::vol_contrast) throw ModelError("vol_field_from_increments: spec is not vol-contrast");
  ModelSpec s = spec.with_horizon(static_cast<double>(increments.size()));
  validate(s);
  auto field = std::make_shared<VolField>(std::make_shared<const std::vector<double>>(std::move(increments)), s.mesh);
  return FieldSample(std::move(field), default_space(s), s.horizon);
}

// ----------------------------------------------------------- synthetic-laq

SyntheticLaqField::SyntheticLaqField(double theta_star, double b, double gamma_omega, double zeta, double kappa,
                                     double gamma_exp)
    : theta_star_(theta_star),
      b_(b),
      gamma_omega_(gamma_omega),
      zeta_(zeta),
      kappa_(kappa),
      gamma_exp_(gamma_exp),
      linear_(std::sqrt(b * gamma_omega) * zeta),
      amplitude_(kappa * std::pow(b, gamma_exp)) {}

double SyntheticLaqField::value(const Vector& theta) const {
  const double v = theta(0) - theta_star_;
  return linear_ * v - 0.5 * b_ * gamma_omega_ * v * v + amplitude_ * std::sin(5.0 * v);
}

Vector SyntheticLaqField::gradient(const Vector& theta) const {
  const double v = theta(0) - theta_star_;
  return scalar_vec(linear_ - b_ * gamma_omega_ * v + 5.0 * amplitude_ * std::cos(5.0 * v));
}

Matrix SyntheticLaqField::hessian(const Vector& theta) const {
  const double v = theta(0) - theta_star_;
  return scalar_mat(-b_ * gamma_omega_ - 25.0 * amplitude_ * std::sin(5.0 * v));
}

FieldSample synth_laq_field(const ModelSpec& spec, RandomStream& stream) {
  validate(spec);
  if (spec.kind != ModelKind::synthetic_laq) throw ModelError("synth_laq_field: spec is not synthetic-laq");
  const double eta = stream.normal();
  const double zeta = stream.normal();
  const double gamma_omega = std::exp(spec.c_gamma * eta);
  auto field = std::make_shared<SyntheticLaqField>(spec.theta_star(0), spec.horizon, gamma_omega, zeta, spec.kappa,
                                                   spec.gamma_exp);
  return FieldSample(std::move(field), default_space(spec), spec.horizon, scalar_mat(gamma_omega));
}

FieldSample simulate(const ModelSpec& spec, RandomStream& stream) {
  switch (spec.kind) {
    case ModelKind::ou_drift:
      return simulate_ou_field(spec, stream);
    case ModelKind::vol_contrast:
      return simulate_vol_field(spec, stream);
    case ModelKind::synthetic_laq:
      return synth_laq_field(spec, stream);
  }
  throw ModelError("unknown model kind");
}

// ---------------------------------------------------------- analytic limits

AnalyticLimits analytic_limits(const ModelSpec& spec) {
  validate(spec);
  const double ts = spec.theta_star(0);
  const ParameterSpace space = default_space(spec);
  switch (spec.kind) {
    case ModelKind::ou_drift: {
      // E[X^2] = 1/(2 theta*) under the stationary law.
      const double gamma = 1.0 / (2.0 * ts);
      const double chi0 = 1.0 / (4.0 * ts);
      LimitLaw law = LimitLaw::deterministic(scalar_mat(gamma));
      law.with_y_limit([ts](const Vector& th, const Matrix&) { return -(th(0) - ts) * (th(0) - ts) / (4.0 * ts); },
                       [chi0](const Matrix&) { return chi0; });
      return {std::move(law), scalar_mat(gamma), chi0, scalar_mat(1.0 / gamma)};
    }
    case ModelKind::vol_contrast: {
      auto y = [ts](double th) { return -(0.5 * std::expm1(2.0 * (ts - th)) + (th - ts)); };
      const double chi0 = grid_chi0(space, y, 100001);
      LimitLaw law = LimitLaw::deterministic(scalar_mat(2.0));
      law.with_y_limit([y](const Vector& th, const Matrix&) { return y(th(0)); },
                       [chi0](const Matrix&) { return chi0; });
      return {std::move(law), scalar_mat(2.0), chi0, scalar_mat(0.5)};
    }
    case ModelKind::synthetic_laq: {
      const double c = spec.c_gamma;
      LimitLaw law = LimitLaw::random(1, [c](RandomStream& s) { return scalar_mat(std::exp(c * s.normal())); });
      law.with_y_limit([ts](const Vector& th, const Matrix& g) { return -0.5 * g(0, 0) * (th(0) - ts) * (th(0) - ts); },
                       [](const Matrix& g) { return 0.5 * g(0, 0); });
      return {std::move(law), std::nullopt, std::nullopt, std::nullopt};
    }
  }
  throw ModelError("unknown model kind");
}

void write_path_csv(const FieldSample& sample, std::ostream& out) {
  if (const auto* ou = dynamic_cast<const OuField*>(&sample.field())) {
    out << "t,x\n";
    const auto& x = ou->path();
    for (std::size_t i = 0; i < x.size(); ++i) out << fmt::format("{:.17g},{:.17g}\n", i * ou->mesh(), x[i]);
    return;
  }
  if (const auto* vol = dynamic_cast<const VolField*>(&sample.field())) {
    out << "i,dx\n";
    const auto& dx = vol->increments();
    for (std::size_t i = 0; i < dx.size(); ++i) out << fmt::format("{},{:.17g}\n", i + 1, dx[i]);
    return;
  }
  throw ModelError("write_path_csv: this field has no simulated path");
}

// ------------------------------------------------------------ model source

ModelSource::ModelSource(ModelSpec spec) : spec_(std::move(spec)), space_(default_space(spec_)) {
  validate(spec_);
  limits_ = analytic_limits(spec_);
}

FieldSample ModelSource::draw(double horizon, RandomStream& stream) const {
  return simulate(spec_.with_horizon(horizon), stream);
}

std::string ModelSource::describe() const {
  return fmt::format("{}(theta*={})", model_kind_name(spec_.kind), format_vector(spec_.theta_star));
}

}  // namespace qla
