#pragma once

#include <string>

#include "qla/chart.hpp"
#include "qla/prior.hpp"

namespace qla {

struct OptimizerSettings {
  int coarse_grid_per_dim = 64;
  int starts = 5;
  double grad_tol = 1e-10;
  int max_iters = 100;
  double step_shrink = 0.5;

  void validate(int dim) const;
};

struct QuadratureSettings {
  int nodes_per_dim = 201;
  bool refine_check = true;
  /// Promote a self-check error above `error_tol` from a warning to QuadratureError.
  bool strict = false;
  double error_tol = 1e-6;

  void validate(int dim) const;
};

struct QmleResult {
  Vector theta;
  double value = 0.0;
  bool at_boundary = false;
  /// Newton iterations used by the winning start.
  int iterations = 0;
};

struct QbeResult {
  Vector theta;
  /// Max-norm change of the estimate when the node count is doubled (0 without refine_check).
  double quad_error = 0.0;
  bool warning = false;
};

/// Maximizer of H_T over the closed box. Coarse grid, then projected Newton with
/// backtracking from the best `starts` grid points; the best end point wins and
/// H ties (within 1e-12 relative) go to the lexicographically smallest theta.
QmleResult qmle(const FieldSample& sample, const OptimizerSettings& settings = {});

/// Posterior mean of exp(H_T) * prior over Theta by tensor Gauss-Legendre quadrature.
QbeResult qbe(const FieldSample& sample, const Prior& prior, const QuadratureSettings& settings = {});

/// u = a^{-1}(theta_hat - theta*).
Vector localize(const Vector& theta_hat, const ParameterSpace& space, const Matrix& a);

struct EstimateRecord {
  Vector theta_m;
  Vector theta_b;
  Vector u_m;
  Vector u_b;
  Vector delta;
  Matrix gamma_star;
  bool at_boundary = false;
  double quad_error = 0.0;
  bool quad_warning = false;
};

EstimateRecord estimate(const LocalChart& chart, const Prior& prior, const OptimizerSettings& opt = {},
                        const QuadratureSettings& quad = {});

}  // namespace qla
