#pragma once

#include "qla/linalg.hpp"

namespace qla {

/// Open box Theta = prod (lower_i, upper_i) with a true point theta* and a
/// radius r0 such that the closed ball U(theta*, r0) lies inside Theta.
class ParameterSpace {
 public:
  /// r0 <= 0 selects the default: half the distance from theta* to the boundary.
  ParameterSpace(Vector lower, Vector upper, Vector theta_star, double r0 = 0.0);

  int dim() const noexcept { return static_cast<int>(lower_.size()); }
  const Vector& lower() const noexcept { return lower_; }
  const Vector& upper() const noexcept { return upper_; }
  const Vector& theta_star() const noexcept { return theta_star_; }
  double r0() const noexcept { return r0_; }

  /// Strict interior membership.
  bool contains(const Vector& theta) const;
  bool in_closure(const Vector& theta) const;
  Vector clamp(const Vector& theta) const;

  /// Euclidean distance from theta* to the boundary of the box.
  double boundary_distance() const;

  /// Same box and radius, different true point.
  ParameterSpace with_theta_star(const Vector& theta_star) const;

  /// Box translated by `shift` (theta* moves with it).
  ParameterSpace translated(const Vector& shift) const;

 private:
  Vector lower_;
  Vector upper_;
  Vector theta_star_;
  double r0_;
};

}  // namespace qla
