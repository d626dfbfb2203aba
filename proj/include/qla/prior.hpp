#pragma once

#include <functional>
#include <string>

#include "qla/linalg.hpp"
#include "qla/parameter_space.hpp"

namespace qla {

/// Prior density on Theta, bounded away from 0 and infinity. Normalization is
/// irrelevant to the quasi-Bayesian estimator and is not enforced.
class Prior {
 public:
  using Density = std::function<double(const Vector&)>;

  /// Validates the bounds on a grid over the closure of `space` (PreconditionError on failure).
  Prior(Density density, double lower_bound, double upper_bound, const ParameterSpace& space,
        std::string name = "custom");

  static Prior uniform(const ParameterSpace& space);
  /// 1 + slope * (theta_0 - midpoint_0), first coordinate only.
  static Prior linear(const ParameterSpace& space, double slope);
  /// Unnormalized N(mean, sd^2 I) restricted to Theta.
  static Prior truncated_normal(const ParameterSpace& space, const Vector& mean, double sd);

  double operator()(const Vector& theta) const { return density_(theta); }
  double lower_bound() const noexcept { return lower_; }
  double upper_bound() const noexcept { return upper_; }
  const std::string& name() const noexcept { return name_; }

  /// Same density multiplied by a positive constant.
  Prior scaled(double factor, const ParameterSpace& space) const;

 private:
  Density density_;
  double lower_;
  double upper_;
  std::string name_;
};

}  // namespace qla
