#pragma once

#include <Eigen/Dense>
#include <string>

namespace qla {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Smallest and largest eigenvalue of a symmetric matrix.
struct EigenRange {
  double min;
  double max;
};

EigenRange symmetric_eigen_range(const Matrix& m);

bool is_symmetric(const Matrix& m, double tol = 1e-12);
bool is_positive_definite(const Matrix& m);

/// Principal square root of a symmetric positive semi-definite matrix.
Matrix symmetric_sqrt(const Matrix& m);

/// Euclidean norm for vectors, operator (spectral) norm for matrices.
double operator_norm(const Matrix& m);

/// Quadratic form m[u, u].
inline double quadratic_form(const Matrix& m, const Vector& u) { return u.dot(m * u); }

std::string format_vector(const Vector& v);

}  // namespace qla
