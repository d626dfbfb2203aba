#pragma once

#include <functional>
#include <memory>
#include <optional>

#include "qla/linalg.hpp"
#include "qla/parameter_space.hpp"

namespace qla {

/// A C^2 quasi-log-likelihood H_T on the parameter space with analytic
/// derivatives.
class Field {
 public:
  virtual ~Field() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& theta) const = 0;
  virtual Vector gradient(const Vector& theta) const = 0;
  virtual Matrix hessian(const Vector& theta) const = 0;
};

/// Field assembled from three callables; used for closed-form test fields.
class FunctionField final : public Field {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradientFn = std::function<Vector(const Vector&)>;
  using HessianFn = std::function<Matrix(const Vector&)>;

  FunctionField(int dim, ValueFn value, GradientFn gradient, HessianFn hessian)
      : dim_(dim), value_(std::move(value)), gradient_(std::move(gradient)), hessian_(std::move(hessian)) {}

  int dim() const override { return dim_; }
  double value(const Vector& theta) const override { return value_(theta); }
  Vector gradient(const Vector& theta) const override { return gradient_(theta); }
  Matrix hessian(const Vector& theta) const override { return hessian_(theta); }

 private:
  int dim_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
};

/// H(theta) = c + g.(theta - center) - 1/2 (theta - center)^T K (theta - center).
std::shared_ptr<const Field> quadratic_field(Vector center, Vector gradient_at_center, Matrix curvature,
                                             double constant = 0.0);

/// One realization of H_T for horizon `index`. Immutable; copies share the field.
/// `limit_gamma` carries the limit information matrix realized jointly with the
/// sample when the limit is random (it stands in for the conditioning sigma-field).
class FieldSample {
 public:
  FieldSample(std::shared_ptr<const Field> field, ParameterSpace space, double index,
              std::optional<Matrix> limit_gamma = std::nullopt);

  double value(const Vector& theta) const { return field_->value(theta); }
  Vector gradient(const Vector& theta) const { return field_->gradient(theta); }
  Matrix hessian(const Vector& theta) const { return field_->hessian(theta); }

  int dim() const noexcept { return space_.dim(); }
  const ParameterSpace& space() const noexcept { return space_; }
  double index() const noexcept { return index_; }
  const std::optional<Matrix>& limit_gamma() const noexcept { return limit_gamma_; }
  const Field& field() const noexcept { return *field_; }
  std::shared_ptr<const Field> field_ptr() const noexcept { return field_; }

 private:
  std::shared_ptr<const Field> field_;
  ParameterSpace space_;
  double index_;
  std::optional<Matrix> limit_gamma_;
};

}  // namespace qla
