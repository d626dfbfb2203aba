#include "qla/field.hpp"

#include "qla/errors.hpp"

namespace qla {

std::shared_ptr<const Field> quadratic_field(Vector center, Vector gradient_at_center, Matrix curvature,
                                             double constant) {
  const int dim = static_cast<int>(center.size());
  if (gradient_at_center.size() != dim || curvature.rows() != dim || curvature.cols() != dim)
    throw PreconditionError("quadratic_field: dimension mismatch");
  auto value = [=](const Vector& theta) {
    const Vector v = theta - center;
    return constant + gradient_at_center.dot(v) - 0.5 * v.dot(curvature * v);
  };
  auto gradient = [=](const Vector& theta) -> Vector { return gradient_at_center - curvature * (theta - center); };
  auto hessian = [=](const Vector&) -> Matrix { return -curvature; };
  return std::make_shared<FunctionField>(dim, value, gradient, hessian);
}

FieldSample::FieldSample(std::shared_ptr<const Field> field, ParameterSpace space, double index,
                         std::optional<Matrix> limit_gamma)
    : field_(std::move(field)), space_(std::move(space)), index_(index), limit_gamma_(std::move(limit_gamma)) {
  if (!field_) throw PreconditionError("field sample: null field");
  if (field_->dim() != space_.dim()) throw PreconditionError("field sample: field and space dimensions differ");
}

}  // namespace qla
