#include "qla/linalg.hpp"

#include <fmt/format.h>

#include <cmath>

#include "qla/errors.hpp"

namespace qla {

EigenRange symmetric_eigen_range(const Matrix& m) {
  if (m.rows() == 1) return {m(0, 0), m(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("eigenvalue decomposition failed");
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

bool is_symmetric(const Matrix& m, double tol) {
  if (m.rows() != m.cols()) return false;
  return ((m - m.transpose()).array().abs() <= tol).all();
}

bool is_positive_definite(const Matrix& m) {
  if (!is_symmetric(m, 1e-10 * (1.0 + m.cwiseAbs().maxCoeff()))) return false;
  if (!m.allFinite()) return false;
  return symmetric_eigen_range(m).min > 0.0;
}

Matrix symmetric_sqrt(const Matrix& m) {
  if (m.rows() == 1) {
    if (m(0, 0) < 0.0) throw LinearAlgebraError("square root of a negative scalar");
    return Matrix::Constant(1, 1, std::sqrt(m(0, 0)));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  if (es.info() != Eigen::Success) throw LinearAlgebraError("eigen decomposition failed");
  if (es.eigenvalues().minCoeff() < 0.0) throw LinearAlgebraError("matrix is not positive semi-definite");
  return es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

double operator_norm(const Matrix& m) {
  if (m.cols() == 1 || m.rows() == 1) return m.norm();
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

std::string format_vector(const Vector& v) {
  std::string out = "(";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += fmt::format("{:.17g}", v(i));
  }
  return out + ")";
}

}  // namespace qla
