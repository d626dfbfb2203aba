#pragma once

#include <vector>

#include "qla/linalg.hpp"

namespace qla {

/// Index set T with scaling matrices a_T = b_T^{-1/2} * Q for a fixed invertible Q.
/// With this form b_T = T / lambda_min(Q^T Q) and the eigenvalue sandwich
/// b_T^{-1} <= lambda_max(a_T^T a_T) <= C0 b_T^{-1} holds with
/// C0 = cond(Q^T Q) exactly.
class ScalingSchedule {
 public:
  explicit ScalingSchedule(std::vector<double> times, int dim = 1);
  ScalingSchedule(std::vector<double> times, Matrix q);

  const std::vector<double>& times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }
  int dim() const noexcept { return static_cast<int>(q_.rows()); }
  const Matrix& q() const noexcept { return q_; }
  double c0() const noexcept { return c0_; }

  Matrix a_of(double t) const;
  double b_of(double t) const;

  /// Largest/smallest eigenvalue of a_T^T a_T.
  EigenRange gram_range(double t) const;

 private:
  std::vector<double> times_;
  Matrix q_;
  double q_gram_min_;
  double c0_;
};

}  // namespace qla
