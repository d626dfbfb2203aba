#include "qla/parameter_space.hpp"

#include <algorithm>
#include <cmath>

#include "qla/errors.hpp"

namespace qla {

ParameterSpace::ParameterSpace(Vector lower, Vector upper, Vector theta_star, double r0)
    : lower_(std::move(lower)), upper_(std::move(upper)), theta_star_(std::move(theta_star)), r0_(r0) {
  if (lower_.size() == 0 || lower_.size() != upper_.size() || lower_.size() != theta_star_.size())
    throw PreconditionError("parameter space: lower, upper and theta_star must have the same positive length");
  if (!lower_.allFinite() || !upper_.allFinite() || !theta_star_.allFinite())
    throw PreconditionError("parameter space: bounds and theta_star must be finite");
  for (Eigen::Index i = 0; i < lower_.size(); ++i)
    if (!(lower_(i) < upper_(i)))
      throw PreconditionError("parameter space: lower must be < upper in every coordinate");
  if (!contains(theta_star_)) throw PreconditionError("parameter space: theta_star " + format_vector(theta_star_) + " is not interior");
  const double dist = boundary_distance();
  if (r0_ <= 0.0) r0_ = 0.5 * dist;
  if (!(r0_ < dist)) throw PreconditionError("parameter space: closed ball of radius r0 must lie inside Theta");
}

bool ParameterSpace::contains(const Vector& theta) const {
  if (theta.size() != lower_.size()) return false;
  return (theta.array() > lower_.array()).all() && (theta.array() < upper_.array()).all();
}

bool ParameterSpace::in_closure(const Vector& theta) const {
  if (theta.size() != lower_.size()) return false;
  return (theta.array() >= lower_.array()).all() && (theta.array() <= upper_.array()).all();
}

Vector ParameterSpace::clamp(const Vector& theta) const { return theta.cwiseMax(lower_).cwiseMin(upper_); }

double ParameterSpace::boundary_distance() const {
  return std::min((theta_star_ - lower_).minCoeff(), (upper_ - theta_star_).minCoeff());
}

ParameterSpace ParameterSpace::with_theta_star(const Vector& theta_star) const {
  return ParameterSpace(lower_, upper_, theta_star);
}

ParameterSpace ParameterSpace::translated(const Vector& shift) const {
  return ParameterSpace(lower_ + shift, upper_ + shift, theta_star_ + shift, r0_);
}

}  // namespace qla
