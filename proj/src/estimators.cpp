#include "qla/estimators.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qla/errors.hpp"
#include "qla/kernels/kernels.hpp"
#include "qla/quadrature.hpp"

namespace qla {
namespace {

constexpr double kBoundaryTol = 1e-9;
constexpr double kTieTol = 1e-12;
// Integrand mass below exp(-kSupportDrop) of the peak is treated as zero when
// sizing the quadrature box.
constexpr double kSupportDrop = 50.0;

bool lex_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) < b(i)) return true;
    if (a(i) > b(i)) return false;
  }
  return false;
}

bool near_boundary(const ParameterSpace& space, const Vector& theta) {
  return ((theta - space.lower()).array().abs() <= kBoundaryTol).any() ||
         ((space.upper() - theta).array().abs() <= kBoundaryTol).any();
}

// Tensor grid of `per_dim` points per axis over [lo, hi]; point k is decoded
// with axis 0 varying slowest so that enumeration order is lexicographic.
struct Grid {
  Vector lo;
  Vector hi;
  int per_dim;

  std::size_t size() const { return static_cast<std::size_t>(std::pow(per_dim, lo.size()) + 0.5); }

  Eigen::VectorXi index(std::size_t k) const {
    const int p = static_cast<int>(lo.size());
    Eigen::VectorXi idx(p);
    for (int d = p - 1; d >= 0; --d) {
      idx(d) = static_cast<int>(k % per_dim);
      k /= per_dim;
    }
    return idx;
  }

  Vector point(const Eigen::VectorXi& idx) const {
    Vector th(lo.size());
    for (Eigen::Index d = 0; d < lo.size(); ++d)
      th(d) = per_dim == 1 ? 0.5 * (lo(d) + hi(d)) : lo(d) + (hi(d) - lo(d)) * idx(d) / (per_dim - 1);
    return th;
  }
};

struct NewtonOutcome {
  Vector theta;
  double value;
  int iterations;
  bool converged;
  double projected_gradient;
};

NewtonOutcome projected_newton(const FieldSample& sample, Vector theta, const OptimizerSettings& s) {
  const ParameterSpace& space = sample.space();
  const int p = sample.dim();
  double f = sample.value(theta);
  double pg_norm = std::numeric_limits<double>::infinity();

  for (int iter = 0; iter < s.max_iters; ++iter) {
    const Vector g = sample.gradient(theta);
    const Matrix h = sample.hessian(theta);
    if (!std::isfinite(f) || !g.allFinite() || !h.allFinite()) return {theta, f, iter, false, pg_norm};

    // Coordinates pinned at a bound with the gradient pointing outward are held fixed.
    std::vector<int> free;
    for (int i = 0; i < p; ++i) {
      const bool at_lo = theta(i) <= space.lower()(i) + kBoundaryTol && g(i) < 0.0;
      const bool at_hi = theta(i) >= space.upper()(i) - kBoundaryTol && g(i) > 0.0;
      if (!at_lo && !at_hi) free.push_back(i);
    }
    Vector g_free(free.size());
    Matrix h_free(free.size(), free.size());
    for (std::size_t i = 0; i < free.size(); ++i) {
      g_free(i) = g(free[i]);
      for (std::size_t j = 0; j < free.size(); ++j) h_free(i, j) = h(free[i], free[j]);
    }
    pg_norm = free.empty() ? 0.0 : g_free.norm();
    if (pg_norm <= s.grad_tol) return {theta, f, iter, true, pg_norm};

    Vector d_free;
    Eigen::LDLT<Matrix> ldlt(-h_free);
    if (ldlt.info() == Eigen::Success && ldlt.isPositive() && (ldlt.vectorD().array() > 0.0).all()) {
      d_free = ldlt.solve(g_free);
    } else {
      const double scale = h_free.cwiseAbs().maxCoeff();
      d_free = g_free / (scale > 0.0 ? scale : 1.0);
    }
    Vector d = Vector::Zero(p);
    for (std::size_t i = 0; i < free.size(); ++i) d(free[i]) = d_free(i);

    // A Newton step at the level of rounding means theta is as stationary as
    // double precision can resolve.
    if (d.norm() <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + theta.norm()))
      return {theta, f, iter, true, pg_norm};

    double t = 1.0;
    bool accepted = false;
    Vector next;
    double f_next = 0.0;
    for (int k = 0; k < 60; ++k, t *= s.step_shrink) {
      next = space.clamp(theta + t * d);
      f_next = sample.value(next);
      if (std::isfinite(f_next) && f_next >= f + 1e-4 * g.dot(next - theta)) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      // No ascent possible along d: accept only if theta is numerically stationary.
      const bool stationary = (next - theta).norm() <= 1e-12 * (1.0 + theta.norm());
      return {theta, f, iter, stationary, pg_norm};
    }
    const double moved = (next - theta).norm();
    theta = std::move(next);
    f = f_next;
    if (moved <= 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + theta.norm())) {
      return {theta, f, iter + 1, true, pg_norm};
    }
  }
  const Vector g = sample.gradient(theta);
  return {theta, f, s.max_iters, false, g.norm()};
}

}  // namespace

void OptimizerSettings::validate(int dim) const {
  if (coarse_grid_per_dim < 8) throw PreconditionError("optimizer: coarse_grid_per_dim must be >= 8");
  const double grid = std::pow(static_cast<double>(coarse_grid_per_dim), dim);
  if (grid > 1e7) throw PreconditionError("optimizer: coarse grid too large for this dimension");
  if (starts < 1 || starts > grid) throw PreconditionError("optimizer: starts must be in [1, grid size]");
  if (!(grad_tol > 0.0)) throw PreconditionError("optimizer: grad_tol must be positive");
  if (max_iters < 1) throw PreconditionError("optimizer: max_iters must be >= 1");
  if (!(step_shrink > 0.0 && step_shrink < 1.0)) throw PreconditionError("optimizer: step_shrink must be in (0, 1)");
}

void QuadratureSettings::validate(int dim) const {
  if (nodes_per_dim < 33) throw PreconditionError("quadrature: nodes_per_dim must be >= 33");
  if (dim > 3) throw PreconditionError("quadrature: tensor rule supports dim <= 3");
}

QmleResult qmle(const FieldSample& sample, const OptimizerSettings& settings) {
  const ParameterSpace& space = sample.space();
  const int p = sample.dim();
  settings.validate(p);

  const Grid grid{space.lower(), space.upper(), settings.coarse_grid_per_dim};
  const std::size_t n = grid.size();
  std::vector<double> values(n);
  for (std::size_t k = 0; k < n; ++k) values[k] = sample.value(grid.point(grid.index(k)));

  // Enumeration order is lexicographic in theta, so a stable sort on value
  // breaks ties toward the smallest theta.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = std::isfinite(values[a]) ? values[a] : -std::numeric_limits<double>::infinity();
    const double vb = std::isfinite(values[b]) ? values[b] : -std::numeric_limits<double>::infinity();
    return va > vb;
  });

  std::optional<NewtonOutcome> best;
  std::string diagnostics;
  for (int s = 0; s < settings.starts; ++s) {
    const Vector start = grid.point(grid.index(order[s]));
    NewtonOutcome out = projected_newton(sample, start, settings);
    if (!out.converged) {
      diagnostics += fmt::format("\n  start {} -> {} after {} iterations, |projected gradient| = {:.3e}",
                                 format_vector(start), format_vector(out.theta), out.iterations,
                                 out.projected_gradient);
      continue;
    }
    if (!best) {
      best = std::move(out);
      continue;
    }
    const double tol = kTieTol * std::max(1.0, std::abs(best->value));
    if (out.value > best->value + tol || (std::abs(out.value - best->value) <= tol && lex_less(out.theta, best->theta)))
      best = std::move(out);
  }
  if (!best) throw OptimizerError("qmle: no start converged" + diagnostics);

  QmleResult r;
  r.theta = best->theta;
  r.value = best->value;
  r.at_boundary = near_boundary(space, r.theta);
  r.iterations = best->iterations;
  return r;
}

namespace {

struct Moments {
  double mass = 0.0;
  Vector first;
};

// Weighted sums over the tensor rule; the exponent is shifted by `shift`.
Moments tensor_moments(const FieldSample& sample, const Prior& prior, const Vector& lo, const Vector& hi, int nodes,
                       double shift) {
  const int p = sample.dim();
  std::vector<GaussRule> rules;
  rules.reserve(p);
  for (int d = 0; d < p; ++d) rules.push_back(gauss_legendre_on(nodes, lo(d), hi(d)));

  std::size_t total = 1;
  for (int d = 0; d < p; ++d) total *= static_cast<std::size_t>(nodes);
  std::vector<double> weight(total);
  std::vector<double> integrand(total);
  std::vector<std::vector<double>> coord(p, std::vector<double>(total));
  Vector theta(p);
  for (std::size_t k = 0; k < total; ++k) {
    std::size_t rest = k;
    double w = 1.0;
    for (int d = p - 1; d >= 0; --d) {
      const std::size_t i = rest % nodes;
      rest /= nodes;
      theta(d) = rules[d].nodes[i];
      w *= rules[d].weights[i];
    }
    weight[k] = w;
    integrand[k] = std::exp(sample.value(theta) - shift) * prior(theta);
    for (int d = 0; d < p; ++d) coord[d][k] = theta(d) * w;
  }
  Moments m;
  m.mass = kernels::dot(weight, integrand);
  m.first.resize(p);
  for (int d = 0; d < p; ++d) m.first(d) = kernels::dot(coord[d], integrand);
  return m;
}

}  // namespace

QbeResult qbe(const FieldSample& sample, const Prior& prior, const QuadratureSettings& settings) {
  const ParameterSpace& space = sample.space();
  const int p = sample.dim();
  settings.validate(p);

  // Locate the effective support of exp(H) on a scan grid: the box spanned by
  // scan points within kSupportDrop of the scan maximum, widened by one cell.
  const int scan = p == 1 ? 2049 : (p == 2 ? 257 : 65);
  const Grid grid{space.lower(), space.upper(), scan};
  const std::size_t n = grid.size();
  std::vector<double> values(n);
  double peak = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    values[k] = sample.value(grid.point(grid.index(k)));
    if (std::isnan(values[k])) throw EvaluationError("qbe: NaN field value on the scan grid");
    peak = std::max(peak, values[k]);
  }
  if (!std::isfinite(peak)) throw EvaluationError("qbe: field has no finite value on the scan grid");
  Eigen::VectorXi first = Eigen::VectorXi::Constant(p, scan - 1);
  Eigen::VectorXi last = Eigen::VectorXi::Zero(p);
  for (std::size_t k = 0; k < n; ++k) {
    if (values[k] < peak - kSupportDrop) continue;
    const Eigen::VectorXi idx = grid.index(k);
    first = first.cwiseMin(idx);
    last = last.cwiseMax(idx);
  }
  first = (first.array() - 1).max(0).matrix();
  last = (last.array() + 1).min(scan - 1).matrix();
  const Vector lo = grid.point(first);
  const Vector hi = grid.point(last);

  const Moments coarse = tensor_moments(sample, prior, lo, hi, settings.nodes_per_dim, peak);
  if (!(coarse.mass > 0.0) || !std::isfinite(coarse.mass))
    throw QuadratureError("qbe: posterior mass is zero or non-finite");
  QbeResult r;
  r.theta = coarse.first / coarse.mass;
  if (settings.refine_check) {
    const Moments fine = tensor_moments(sample, prior, lo, hi, 2 * settings.nodes_per_dim, peak);
    const Vector refined = fine.first / fine.mass;
    r.quad_error = (refined - r.theta).cwiseAbs().maxCoeff();
    r.theta = refined;  // keep the more accurate rule; quad_error bounds the coarse one
  }
  r.theta = space.clamp(r.theta);
  if (r.quad_error > settings.error_tol) {
    r.warning = true;
    if (settings.strict)
      throw QuadratureError(fmt::format("qbe: quadrature self-check error {:.3e} exceeds {:.1e}", r.quad_error,
                                        settings.error_tol));
  }
  return r;
}

Vector localize(const Vector& theta_hat, const ParameterSpace& space, const Matrix& a) {
  if (a.rows() != a.cols() || a.rows() != theta_hat.size())
    throw LinearAlgebraError("localize: a must be square of the parameter dimension");
  Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) throw LinearAlgebraError("localize: a is singular");
  return lu.solve(theta_hat - space.theta_star());
}

EstimateRecord estimate(const LocalChart& chart, const Prior& prior, const OptimizerSettings& opt,
                        const QuadratureSettings& quad) {
  EstimateRecord rec;
  const QmleResult m = qmle(chart.sample(), opt);
  const QbeResult b = qbe(chart.sample(), prior, quad);
  rec.theta_m = m.theta;
  rec.theta_b = b.theta;
  rec.u_m = chart.to_u(m.theta);
  rec.u_b = chart.to_u(b.theta);
  rec.delta = delta(chart);
  rec.gamma_star = gamma_at(chart, chart.theta_star());
  rec.at_boundary = m.at_boundary;
  rec.quad_error = b.quad_error;
  rec.quad_warning = b.warning;
  return rec;
}

}  // namespace qla
