#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qla/field.hpp"
#include "qla/limit_law.hpp"
#include "qla/random.hpp"

namespace qla {

enum class ModelKind { ou_drift, vol_contrast, synthetic_laq };

std::string_view model_kind_name(ModelKind kind);
/// Throws ModelError for an unknown name.
ModelKind parse_model_kind(std::string_view name);

struct ModelSpec {
  ModelKind kind = ModelKind::ou_drift;
  Vector theta_star = Vector::Constant(1, 1.0);
  /// T for ou-drift, sample count n for vol-contrast, b for synthetic-laq.
  double horizon = 100.0;
  /// Path mesh (ou-drift) or observation step h (vol-contrast); unused by synthetic-laq.
  double mesh = 0.01;
  // synthetic-laq
  double c_gamma = 0.5;
  double kappa = 0.5;
  double gamma_exp = 0.25;
  // Optional override of the default box.
  std::optional<Vector> lower;
  std::optional<Vector> upper;

  ModelSpec with_horizon(double h) const {
    ModelSpec s = *this;
    s.horizon = h;
    return s;
  }
};

/// ou-drift (0.1, 3), vol-contrast (-1.5, 1.5), synthetic-laq (-2, 2) unless overridden;
/// r0 is half the distance from theta* to the boundary.
ParameterSpace default_space(const ModelSpec& spec);

/// Checks the model preconditions; throws ModelError/PreconditionError.
void validate(const ModelSpec& spec);

/// H_T(theta) = -theta S1 - theta^2/2 S2 for a stationary OU path dX = -theta* X dt + dW
/// sampled exactly on a mesh of width delta.
class OuField final : public Field {
 public:
  OuField(std::shared_ptr<const std::vector<double>> path, double mesh);
  int dim() const override { return 1; }
  double value(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;

  double s1() const noexcept { return s1_; }
  double s2() const noexcept { return s2_; }
  double mesh() const noexcept { return mesh_; }
  const std::vector<double>& path() const noexcept { return *path_; }

 private:
  std::shared_ptr<const std::vector<double>> path_;
  double mesh_;
  double s1_;
  double s2_;
};

/// H_n(theta) = -sum [dX_i^2 / (2 e^{2 theta} h) + theta] for iid N(0, e^{2 theta*} h) increments.
class VolField final : public Field {
 public:
  VolField(std::shared_ptr<const std::vector<double>> increments, double step);
  int dim() const override { return 1; }
  double value(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;

  /// Sum of squared increments.
  double sum_squares() const noexcept { return q_; }
  double count() const noexcept { return n_; }
  double step() const noexcept { return h_; }
  const std::vector<double>& increments() const noexcept { return *increments_; }

 private:
  std::shared_ptr<const std::vector<double>> increments_;
  double h_;
  double n_;
  double q_;
};

/// H(theta) = sqrt(b Gamma) zeta v - b Gamma v^2 / 2 + kappa b^gamma sin(5 v), v = theta - theta*.
class SyntheticLaqField final : public Field {
 public:
  SyntheticLaqField(double theta_star, double b, double gamma_omega, double zeta, double kappa, double gamma_exp);
  int dim() const override { return 1; }
  double value(const Vector& theta) const override;
  Vector gradient(const Vector& theta) const override;
  Matrix hessian(const Vector& theta) const override;

  double gamma_omega() const noexcept { return gamma_omega_; }
  double zeta() const noexcept { return zeta_; }

 private:
  double theta_star_;
  double b_;
  double gamma_omega_;
  double zeta_;
  double kappa_;
  double gamma_exp_;
  double linear_;     // sqrt(b Gamma) zeta
  double amplitude_;  // kappa b^gamma
};

FieldSample simulate_ou_field(const ModelSpec& spec, RandomStream& stream);
FieldSample simulate_vol_field(const ModelSpec& spec, RandomStream& stream);
/// vol-contrast field built from given increments (horizon is taken from their count).
FieldSample vol_field_from_increments(const ModelSpec& spec, std::vector<double> increments);
FieldSample synth_laq_field(const ModelSpec& spec, RandomStream& stream);
/// Dispatch on spec.kind.
FieldSample simulate(const ModelSpec& spec, RandomStream& stream);

/// Limit objects of a model: the law of (Delta, Gamma) with the limit field Y
/// attached, chi0 and the asymptotic variance Gamma^{-1} (deterministic mode).
struct AnalyticLimits {
  LimitLaw law;
  /// Constant Gamma (deterministic mode only).
  std::optional<Matrix> gamma;
  /// Identifiability constant (deterministic mode only; conditional on Gamma via law.chi0 otherwise).
  std::optional<double> chi0;
  std::optional<Matrix> avar;
};

AnalyticLimits analytic_limits(const ModelSpec& spec);

/// Writes the simulated path as CSV: `t,x` for ou-drift, `i,dx` for vol-contrast.
/// Throws ModelError for fields without a path.
void write_path_csv(const FieldSample& sample, std::ostream& out);

/// Producer of field samples for a horizon T; probes work against this so that
/// closed-form test fields and the bundled models are interchangeable.
class FieldSource {
 public:
  virtual ~FieldSource() = default;
  virtual const ParameterSpace& space() const = 0;
  virtual FieldSample draw(double horizon, RandomStream& stream) const = 0;
  virtual const std::optional<AnalyticLimits>& limits() const = 0;
  virtual std::string describe() const = 0;
};

class ModelSource final : public FieldSource {
 public:
  explicit ModelSource(ModelSpec spec);
  const ParameterSpace& space() const override { return space_; }
  FieldSample draw(double horizon, RandomStream& stream) const override;
  const std::optional<AnalyticLimits>& limits() const override { return limits_; }
  std::string describe() const override;
  const ModelSpec& spec() const noexcept { return spec_; }

 private:
  ModelSpec spec_;
  ParameterSpace space_;
  std::optional<AnalyticLimits> limits_;
};

class CustomSource final : public FieldSource {
 public:
  using DrawFn = std::function<FieldSample(double horizon, RandomStream& stream)>;
  CustomSource(std::string name, ParameterSpace space, DrawFn draw, std::optional<AnalyticLimits> limits = std::nullopt)
      : name_(std::move(name)), space_(std::move(space)), draw_(std::move(draw)), limits_(std::move(limits)) {}
  const ParameterSpace& space() const override { return space_; }
  FieldSample draw(double horizon, RandomStream& stream) const override { return draw_(horizon, stream); }
  const std::optional<AnalyticLimits>& limits() const override { return limits_; }
  std::string describe() const override { return name_; }

 private:
  std::string name_;
  ParameterSpace space_;
  DrawFn draw_;
  std::optional<AnalyticLimits> limits_;
};

}  // namespace qla
