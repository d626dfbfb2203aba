#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qla/estimators.hpp"
#include "qla/models.hpp"
#include "qla/profile.hpp"
#include "qla/report.hpp"
#include "qla/scaling.hpp"

namespace qla {

/// Everything a probe needs besides its own knobs. Replicate k at horizon T
/// always draws from the stream (seed, T, k), so probes sharing a context see
/// the same samples and results do not depend on `threads`.
struct ProbeContext {
  const FieldSource& source;
  ScalingSchedule schedule;
  ConditionProfile profile = ConditionProfile::defaults();
  std::optional<Prior> prior;  ///< uniform on the source space when empty
  OptimizerSettings optimizer;
  QuadratureSettings quadrature;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  std::string config_hash;

  RandomStream stream(double horizon, std::size_t replicate) const;
  FieldSample draw(double horizon, std::size_t replicate) const;
  LocalChart chart(const FieldSample& sample) const;
  Prior resolved_prior() const;
};

/// sup of log Z_T over V_T(r) for each r of an increasing grid, on radial
/// shells of U_T refined once around the best point. Entries are nested
/// (nonincreasing in r) by construction; an empty V_T(r) gives -inf.
std::vector<double> shell_sup_log_z(const LocalChart& chart, std::span<const double> r_grid);

/// Probability that sup_{V_T(r)} Z_T >= exp(-r^{2-rho}/2); one report per T.
std::vector<ProbeReport> pld_tail_probe(const ProbeContext& ctx, const std::vector<double>& r_grid, int reps);

/// chi0_hat = min over a grid of -Y(theta)/|theta - theta*|^2.
std::vector<ProbeReport> identifiability_probe(const ProbeContext& ctx, int grid_size);

/// Moment norms of the four [S3]/[T2] clauses; one report per clause (and per p in T mode).
std::vector<ProbeReport> condition_norm_probe(const ProbeContext& ctx, int reps);

/// Median of sup_{U_T cap U(0,K)} |Gamma_T(theta* + a_T u) - Gamma|.
std::vector<ProbeReport> gamma_uniform_consistency_probe(const ProbeContext& ctx, double K, int reps);

/// Median of |u_hat^M - Gamma^{-1} Delta_T| with boundary hits excluded.
std::vector<ProbeReport> efficiency_residual_probe(const ProbeContext& ctx, int reps, double threshold = 0.05);

/// Medians of |u_hat^B - u_hat^M| and |u_hat^B - Gamma^{-1} Delta_T|.
std::vector<ProbeReport> mle_bayes_gap_probe(const ProbeContext& ctx, int reps, double threshold = 0.05);

/// Monte Carlo E f(u_hat_T) for f in `f_family` ("u", "u^2", "|u|^3") and both
/// estimators against the limit E f(u_hat); in random-Gamma mode also f * Gamma.
std::vector<ProbeReport> moment_convergence_probe(const ProbeContext& ctx, const std::vector<std::string>& f_family,
                                                  int reps, int limit_draws = 100000);

/// Kolmogorov-Smirnov distance of Gamma_T(theta_hat)^{1/2} u_hat^M from N(0, 1).
std::vector<ProbeReport> studentized_normality_probe(const ProbeContext& ctx, int reps, double threshold = 0.05);

/// c0_hat = max over u in U(0, delta) of E|H_T(theta* + a_T u) - H_T(theta*)|^q / |u|^q.
std::vector<ProbeReport> qbe_integrability_check(const ProbeContext& ctx, double q, double delta, int reps);

/// Kolmogorov-Smirnov distance of a sample from N(0, 1).
double ks_distance_normal(std::vector<double> sample);

double standard_normal_cdf(double x);

}  // namespace qla
