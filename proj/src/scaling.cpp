#include "qla/scaling.hpp"

#include <cmath>

#include "qla/errors.hpp"

namespace qla {

ScalingSchedule::ScalingSchedule(std::vector<double> times, int dim)
    : ScalingSchedule(std::move(times), Matrix::Identity(dim, dim)) {}

ScalingSchedule::ScalingSchedule(std::vector<double> times, Matrix q) : times_(std::move(times)), q_(std::move(q)) {
  if (times_.empty()) throw PreconditionError("scaling schedule: no index values");
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!(times_[i] > 0.0) || !std::isfinite(times_[i]))
      throw PreconditionError("scaling schedule: index values must be positive and finite");
    if (i > 0 && !(times_[i] > times_[i - 1]))
      throw PreconditionError("scaling schedule: index values must be strictly increasing");
  }
  if (q_.rows() != q_.cols() || q_.rows() == 0) throw PreconditionError("scaling schedule: Q must be square");
  const Matrix gram = q_.transpose() * q_;
  const EigenRange range = symmetric_eigen_range(gram);
  if (!(range.min > 0.0)) throw LinearAlgebraError("scaling schedule: Q is singular");
  q_gram_min_ = range.min;
  c0_ = range.max / range.min;
}

Matrix ScalingSchedule::a_of(double t) const { return q_ / std::sqrt(t); }

double ScalingSchedule::b_of(double t) const { return t / q_gram_min_; }

EigenRange ScalingSchedule::gram_range(double t) const {
  const Matrix a = a_of(t);
  return symmetric_eigen_range(a.transpose() * a);
}

}  // namespace qla
