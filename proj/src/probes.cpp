#include "qla/probes.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qla/errors.hpp"
#include "qla/parallel.hpp"

namespace qla {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

ProbeReport new_report(const ProbeContext& ctx, std::string name, std::string x_label) {
  ProbeReport r;
  r.name = std::move(name);
  r.x_label = std::move(x_label);
  r.config_hash = ctx.config_hash;
  r.seed = ctx.seed;
  return r;
}

std::string t_label(double t) { return format_real(t); }

const AnalyticLimits& require_limits(const ProbeContext& ctx, std::string_view probe) {
  const auto& lim = ctx.source.limits();
  if (!lim)
    throw PreconditionError(fmt::format("{}: no analytic limits for {}; supply y_limit and Gamma", probe,
                                        ctx.source.describe()));
  return *lim;
}

// Limit Gamma for one replicate: the realized Gamma_omega in random mode,
// the model constant otherwise.
Matrix limit_gamma(const ProbeContext& ctx, const FieldSample& sample, std::string_view probe) {
  if (sample.limit_gamma()) return *sample.limit_gamma();
  const auto& lim = require_limits(ctx, probe);
  if (lim.gamma) return *lim.gamma;
  if (lim.law.fixed_gamma()) return *lim.law.fixed_gamma();
  throw PreconditionError(fmt::format("{}: the sample carries no realized Gamma", probe));
}

// Tensor grid with about `total` points over [lo, hi].
std::vector<Vector> box_grid(const Vector& lo, const Vector& hi, int total) {
  const int p = static_cast<int>(lo.size());
  const int per = std::max(2, static_cast<int>(std::ceil(std::pow(total, 1.0 / p) - 1e-9)));
  std::vector<Vector> out;
  std::vector<int> idx(p, 0);
  for (;;) {
    Vector th(p);
    for (int d = 0; d < p; ++d) th(d) = lo(d) + (hi(d) - lo(d)) * idx[d] / (per - 1);
    out.push_back(std::move(th));
    int d = p - 1;
    while (d >= 0 && ++idx[d] == per) idx[d--] = 0;
    if (d < 0) break;
  }
  return out;
}

// Points of the closed unit ball: a tensor grid on [-1, 1]^p filtered to |u| <= 1.
std::vector<Vector> unit_ball_grid(int p, int total) {
  std::vector<Vector> out;
  for (auto& u : box_grid(Vector::Constant(p, -1.0), Vector::Constant(p, 1.0), total))
    if (u.norm() <= 1.0 + 1e-12) out.push_back(std::move(u));
  return out;
}

void require(bool cond, const std::string& what) {
  if (!cond) throw PreconditionError(what);
}

// Norm estimate (E X^p)^{1/p} with a delta-method standard error.
struct NormStat {
  double norm;
  double stderr_;
};

NormStat moment_norm(const std::vector<double>& x, double p) {
  std::vector<double> pw(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pw[i] = std::pow(std::abs(x[i]), p);
  const MeanStat m = mean_stat(pw);
  if (!(m.mean > 0.0)) return {0.0, 0.0};
  const double norm = std::pow(m.mean, 1.0 / p);
  return {norm, norm / (p * m.mean) * m.stderr_};
}

}  // namespace

// ---------------------------------------------------------------- context

RandomStream ProbeContext::stream(double horizon, std::size_t replicate) const {
  return RandomStream(seed, {key_of(horizon), static_cast<std::uint64_t>(replicate)});
}

FieldSample ProbeContext::draw(double horizon, std::size_t replicate) const {
  RandomStream s = stream(horizon, replicate);
  return source.draw(horizon, s);
}

LocalChart ProbeContext::chart(const FieldSample& sample) const {
  return LocalChart(sample, schedule.a_of(sample.index()));
}

Prior ProbeContext::resolved_prior() const { return prior ? *prior : Prior::uniform(source.space()); }

// ------------------------------------------------------------- normality

double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double ks_distance_normal(std::vector<double> sample) {
  if (sample.empty()) throw PreconditionError("ks_distance_normal: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = standard_normal_cdf(sample[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  return d;
}

// --------------------------------------------------------------------- PLD

std::vector<double> shell_sup_log_z(const LocalChart& chart, std::span<const double> r_grid) {
  const int p = chart.sample().dim();
  require(p <= 2, "pld: radial shells support dim <= 2");
  require(!r_grid.empty(), "pld: empty r grid");
  const std::size_t J = r_grid.size();
  const ParameterSpace& space = chart.space();
  const Vector& ts = chart.theta_star();

  // 1-D: both half-lines with 512 radial nodes; 2-D: 512 directions x 64 radial nodes.
  std::vector<Vector> dirs;
  int radial = 512;
  if (p == 1) {
    dirs = {Vector::Constant(1, 1.0), Vector::Constant(1, -1.0)};
  } else {
    radial = 64;
    for (int k = 0; k < 512; ++k) {
      const double phi = 2.0 * std::numbers::pi * k / 512.0;
      Vector e(2);
      e << std::cos(phi), std::sin(phi);
      dirs.push_back(std::move(e));
    }
  }

  auto ray_extent = [&](const Vector& e) {
    const Vector c = chart.a() * e;
    double t_max = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p; ++i) {
      if (c(i) > 0.0) t_max = std::min(t_max, (space.upper()(i) - ts(i)) / c(i));
      if (c(i) < 0.0) t_max = std::min(t_max, (space.lower()(i) - ts(i)) / c(i));
    }
    return t_max;
  };
  auto interval_of = [&](double t) -> std::ptrdiff_t {
    auto it = std::upper_bound(r_grid.begin(), r_grid.end(), t);
    return std::distance(r_grid.begin(), it) - 1;
  };

  struct Best {
    double value = kNegInf;
    double t = 0.0;
    Vector dir;
    double t_max = 0.0;
  };
  std::vector<Best> best(J);

  for (const auto& e : dirs) {
    const double t_max = ray_extent(e);
    if (!(t_max > r_grid[0])) continue;
    std::vector<double> nodes;
    nodes.reserve(radial + J);
    for (int k = 0; k < radial; ++k) nodes.push_back(r_grid[0] + (t_max - r_grid[0]) * k / radial);
    for (double r : r_grid)
      if (r < t_max) nodes.push_back(r);
    for (double t : nodes) {
      const Vector u = t * e;
      if (!u_domain_contains(chart, u)) continue;
      const auto j = interval_of(t);
      if (j < 0) continue;
      const double v = log_z_field(chart, u);
      if (v > best[j].value) best[j] = {v, t, e, t_max};
    }
  }

  // One local refinement around each interval's best node, kept inside V_T(r_j).
  std::vector<double> local(J, kNegInf);
  for (std::size_t j = 0; j < J; ++j) {
    Best& b = best[j];
    if (b.value == kNegInf) continue;
    local[j] = b.value;
    const double dt = (b.t_max - r_grid[0]) / radial;
    const int steps_t = p == 1 ? 33 : 9;
    const int steps_phi = p == 1 ? 1 : 9;
    const double phi0 = p == 1 ? 0.0 : std::atan2(b.dir(1), b.dir(0));
    const double dphi = 2.0 * std::numbers::pi / 512.0;
    for (int kp = 0; kp < steps_phi; ++kp) {
      Vector e = b.dir;
      if (p == 2) {
        const double phi = phi0 + dphi * (2.0 * kp / (steps_phi - 1) - 1.0);
        e << std::cos(phi), std::sin(phi);
      }
      for (int kt = 0; kt < steps_t; ++kt) {
        const double t = b.t + dt * (2.0 * kt / (steps_t - 1) - 1.0);
        if (t < r_grid[j]) continue;
        const Vector u = t * e;
        if (!u_domain_contains(chart, u)) continue;
        local[j] = std::max(local[j], log_z_field(chart, u));
      }
    }
  }

  // V_T(r_j) contains V_T(r_k) for k > j: suffix maximum.
  for (std::size_t j = J - 1; j-- > 0;) local[j] = std::max(local[j], local[j + 1]);
  return local;
}

std::vector<ProbeReport> pld_tail_probe(const ProbeContext& ctx, const std::vector<double>& r_grid, int reps) {
  require(ctx.source.space().dim() <= 2, "pld_tail_probe: dim must be <= 2");
  require(!r_grid.empty() && r_grid.front() >= 1.0, "pld_tail_probe: r grid must start at >= 1");
  require(strictly_decreasing(std::vector<double>(r_grid.rbegin(), r_grid.rend())),
          "pld_tail_probe: r grid must be increasing");
  require(reps >= 1000, "pld_tail_probe: reps must be >= 1000");

  const double rho = ctx.profile.pld_rho();
  std::vector<double> threshold;
  for (double r : r_grid) threshold.push_back(-0.5 * std::pow(r, 2.0 - rho));

  std::vector<ProbeReport> out;
  for (double T : ctx.schedule.times()) {
    auto events = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const LocalChart chart = ctx.chart(ctx.draw(T, k));
      const auto sup = shell_sup_log_z(chart, r_grid);
      std::vector<char> hit(r_grid.size());
      for (std::size_t j = 0; j < r_grid.size(); ++j) hit[j] = sup[j] != kNegInf && sup[j] >= threshold[j];
      return hit;
    });

    ProbeReport rep = new_report(ctx, "pld_tail[T=" + t_label(T) + "]", "r");
    std::vector<double> prob;
    for (std::size_t j = 0; j < r_grid.size(); ++j) {
      long count = 0;
      for (const auto& h : events) count += h[j];
      const double p_hat = static_cast<double>(count) / reps;
      prob.push_back(p_hat);
      rep.grid.push_back({r_grid[j], p_hat, std::sqrt(p_hat * (1.0 - p_hat) / reps), reps,
                          {{"log_threshold", threshold[j]}}});
    }
    rep.rule = fmt::format(
        "estimate = P[sup over V_T(r) of Z_T >= exp(-r^(2-{0})/2)]. INCONCLUSIVE if every estimate is 0 (bound holds "
        "vacuously) or fewer than two are positive; otherwise PASS iff estimates are nonincreasing in r, the "
        "least-squares slope of log(estimate) on log(r) over positive estimates is <= -2, and r^2 * estimate <= "
        "r_min^2 * estimate(r_min) for every r; else FAIL.",
        format_real(rho));
    rep.metrics["T"] = T;
    rep.metrics["b_T"] = ctx.schedule.b_of(T);
    rep.metrics["rho"] = rho;

    std::vector<double> xs, ys;
    for (std::size_t j = 0; j < prob.size(); ++j)
      if (prob[j] > 0.0) xs.push_back(r_grid[j]), ys.push_back(prob[j]);
    if (xs.empty()) {
      rep.verdict = Verdict::inconclusive;
      rep.notes.push_back("all estimates are zero: the bound holds vacuously at this scale");
    } else if (xs.size() < 2) {
      rep.verdict = Verdict::inconclusive;
      rep.notes.push_back("a single positive estimate: slope not identifiable");
    } else {
      const double slope = loglog_slope(xs, ys);
      rep.metrics["slope"] = slope;
      bool envelope = true;
      const double ref = r_grid[0] * r_grid[0] * prob[0];
      for (std::size_t j = 0; j < prob.size(); ++j) envelope &= r_grid[j] * r_grid[j] * prob[j] <= ref;
      rep.verdict = nonincreasing(prob) && slope <= -2.0 && envelope ? Verdict::pass : Verdict::fail;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

// ---------------------------------------------------------- identifiability

std::vector<ProbeReport> identifiability_probe(const ProbeContext& ctx, int grid_size) {
  require(grid_size >= 1000, "identifiability_probe: grid_size must be >= 1000");
  const auto& lim = require_limits(ctx, "identifiability_probe");
  require(lim.law.has_y_limit(), "identifiability_probe: no limit field Y; supply y_limit");
  const ParameterSpace& space = ctx.source.space();
  const Vector& ts = space.theta_star();

  std::vector<Matrix> gammas;
  if (lim.law.mode() == LimitMode::deterministic_gamma) {
    gammas.push_back(*lim.law.fixed_gamma());
  } else {
    RandomStream s(ctx.seed, {0x1d3f1ab1u});
    for (int k = 0; k < 64; ++k) gammas.push_back(lim.law.sample_gamma(s));
  }

  auto chi0_hat = [&](int points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& g : gammas)
      for (const auto& th : box_grid(space.lower(), space.upper(), points)) {
        const double d2 = (th - ts).squaredNorm();
        if (std::sqrt(d2) <= 1e-6) continue;
        best = std::min(best, -lim.law.y_limit(th, g) / d2);
      }
    return best;
  };

  ProbeReport rep = new_report(ctx, "identifiability", "grid_points");
  const double coarse = chi0_hat(grid_size);
  const double fine = chi0_hat(10 * grid_size);
  rep.grid.push_back({static_cast<double>(grid_size), coarse, 0.0, 1, {}});
  rep.grid.push_back({static_cast<double>(10 * grid_size), fine, 0.0, 1, {}});
  rep.metrics["chi0_hat"] = coarse;
  rep.metrics["refinement_change"] = std::abs(fine - coarse);
  if (lim.chi0) rep.metrics["chi0_analytic"] = *lim.chi0;
  if (gammas.size() > 1) rep.notes.push_back(fmt::format("minimum over {} draws of the random Gamma", gammas.size()));
  rep.rule =
      "estimate = min over a grid of the closed box (excluding |theta - theta*| <= 1e-6) of -Y(theta)/|theta - "
      "theta*|^2; PASS iff every estimate > 0, else FAIL.";
  rep.verdict = coarse > 0.0 && fine > 0.0 ? Verdict::pass : Verdict::fail;
  return {rep};
}

// --------------------------------------------------------- condition norms

std::vector<ProbeReport> condition_norm_probe(const ProbeContext& ctx, int reps) {
  require(reps >= 500, "condition_norm_probe: reps must be >= 500");
  const auto& lim = require_limits(ctx, "condition_norm_probe");
  require(lim.law.has_y_limit(), "condition_norm_probe: no limit field Y; supply y_limit");
  const ConditionProfile& prof = ctx.profile;
  const ParameterSpace& space = ctx.source.space();
  const Vector& ts = space.theta_star();
  const int p = space.dim();
  const bool t_mode = prof.mode() == ConditionMode::T;
  const std::vector<double> deltas{0.2, 0.1, 0.05};

  // Moment orders per clause.
  std::array<std::vector<double>, 4> orders;
  if (t_mode) {
    orders.fill({2.0, 4.0, 8.0});
  } else {
    orders = {{{prof.M1()}, {prof.M2()}, {prof.M3()}, {prof.M4()}}};
  }

  const auto region = box_grid(space.lower(), space.upper(), 512);
  const auto ball = unit_ball_grid(p, 512);

  struct Draw {
    double c1;
    double c2;
    std::vector<double> c3;
    double c4;
  };

  const std::size_t nt = ctx.schedule.size();
  std::vector<std::vector<Draw>> draws(nt);
  for (std::size_t it = 0; it < nt; ++it) {
    const double T = ctx.schedule.times()[it];
    const double b = ctx.schedule.b_of(T);
    const double excl = t_mode ? 0.0 : std::pow(b, -prof.alpha() / 2.0);
    draws[it] = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const Matrix gamma = limit_gamma(ctx, sample, "condition_norm_probe");
      Draw d;
      d.c1 = delta(chart).norm();
      d.c2 = 0.0;
      for (const auto& th : region) {
        if ((th - ts).norm() < excl) continue;
        d.c2 = std::max(d.c2, std::abs(y_field(chart, th) - lim.law.y_limit(th, gamma)));
      }
      d.c2 *= std::pow(b, prof.epsilon1());
      const Matrix g_star = gamma_at(chart, ts);
      for (double dl : deltas) {
        double sup = 0.0;
        for (const auto& u : ball) {
          const Vector th = ts + dl * u;
          if (!space.in_closure(th)) continue;
          sup = std::max(sup, operator_norm(gamma_at(chart, th) - g_star));
        }
        d.c3.push_back(sup);
      }
      d.c4 = std::pow(b, prof.epsilon2()) * operator_norm(g_star - gamma);
      return d;
    });
  }

  std::vector<ProbeReport> out;
  const char* names[4] = {"(i)", "(ii)", "(iii)", "(iv)"};
  const std::string bounded_rule =
      "estimate = (E X^p)^(1/p) over replicates at each T; PASS iff every estimate after the first is <= 1.2 x the "
      "median of the estimates before it plus 1e-12 (boundedness of the sequence over T; the 1e-12 absorbs round-off "
      "around an exact zero), else FAIL.";
  for (int clause : {0, 1, 3}) {
    for (double order : orders[clause]) {
      ProbeReport rep = new_report(ctx, fmt::format("condition_norms{}[p={}]", names[clause], format_real(order)), "T");
      for (std::size_t it = 0; it < nt; ++it) {
        std::vector<double> x;
        for (const auto& d : draws[it]) x.push_back(clause == 0 ? d.c1 : (clause == 1 ? d.c2 : d.c4));
        const NormStat s = moment_norm(x, order);
        rep.grid.push_back({ctx.schedule.times()[it], s.norm, s.stderr_, reps, {}});
      }
      rep.metrics["p"] = order;
      rep.rule = bounded_rule;
      rep.verdict = bounded_by_running_median(rep.estimates(), 1.2, 1e-12) ? Verdict::pass : Verdict::fail;
      if (clause == 1)
        rep.notes.push_back(t_mode ? "sup over the whole grid of Theta, scaled by b_T^(1/2 - beta2)"
                                   : "sup over Theta minus U(theta*, b_T^(-alpha/2)), scaled by b_T^(1/2 - beta2)");
      out.push_back(std::move(rep));
    }
  }
  for (double order : orders[2]) {
    ProbeReport rep = new_report(ctx, fmt::format("condition_norms(iii)[p={}]", format_real(order)), "delta");
    for (std::size_t id = 0; id < deltas.size(); ++id) {
      double best = -1.0;
      NormStat best_stat{0.0, 0.0};
      double best_t = 0.0;
      for (std::size_t it = 0; it < nt; ++it) {
        std::vector<double> x;
        for (const auto& d : draws[it]) x.push_back(d.c3[id]);
        const NormStat s = moment_norm(x, order);
        if (s.norm > best) best = s.norm, best_stat = s, best_t = ctx.schedule.times()[it];
      }
      rep.grid.push_back({deltas[id], best_stat.norm, best_stat.stderr_, reps, {{"argmax_T", best_t}}});
    }
    rep.metrics["p"] = order;
    rep.rule =
        "estimate = max over T of (E X^p)^(1/p) with X = sup_{|u|<=1} |Gamma_T(theta* + delta u) - Gamma_T(theta*)|; "
        "PASS if every estimate is 0 (slope check skipped) or the least-squares slope of log(estimate) on "
        "log(delta) over positive estimates is >= 0.9; else FAIL.";
    std::vector<double> xs, ys;
    for (const auto& r : rep.grid)
      if (r.estimate > 0.0) xs.push_back(r.x), ys.push_back(r.estimate);
    if (xs.empty()) {
      rep.verdict = Verdict::pass;
      rep.notes.push_back("Gamma_T constant in theta: all norms are 0");
    } else if (xs.size() < 2) {
      rep.verdict = Verdict::fail;
      rep.notes.push_back("only one positive norm: O(delta) not supported");
    } else {
      const double slope = loglog_slope(xs, ys);
      rep.metrics["slope"] = slope;
      rep.verdict = slope >= 0.9 ? Verdict::pass : Verdict::fail;
    }
    out.push_back(std::move(rep));
  }
  return out;
}

// ------------------------------------------------ uniform Gamma consistency

std::vector<ProbeReport> gamma_uniform_consistency_probe(const ProbeContext& ctx, double K, int reps) {
  require(K > 0.0, "gamma_uniform_consistency_probe: K must be positive");
  require(reps >= 500, "gamma_uniform_consistency_probe: reps must be >= 500");
  const int p = ctx.source.space().dim();
  std::vector<Vector> ball;
  for (auto& u : unit_ball_grid(p, 512)) ball.push_back(K * u);

  ProbeReport rep = new_report(ctx, "gamma_uniform_consistency", "T");
  for (double T : ctx.schedule.times()) {
    auto sups = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const Matrix gamma = limit_gamma(ctx, sample, "gamma_uniform_consistency_probe");
      double sup = 0.0;
      for (const auto& u : ball) {
        if (!u_domain_contains(chart, u)) continue;
        sup = std::max(sup, operator_norm(gamma_at(chart, chart.to_theta(u)) - gamma));
      }
      return sup;
    });
    rep.grid.push_back({T, median(sups), median_stderr(sups), reps, {}});
  }
  rep.metrics["K"] = K;
  rep.rule =
      "estimate = median over replicates of sup over U_T cap U(0,K) of |Gamma_T(theta* + a_T u) - Gamma|; PASS iff "
      "estimates are strictly decreasing in T and the last is < 0.05, else FAIL.";
  const auto est = rep.estimates();
  rep.verdict = strictly_decreasing(est) && est.back() < 0.05 ? Verdict::pass : Verdict::fail;
  return {rep};
}

// ----------------------------------------------------- first-order efficiency

std::vector<ProbeReport> efficiency_residual_probe(const ProbeContext& ctx, int reps, double threshold) {
  require(reps >= 1000, "efficiency_residual_probe: reps must be >= 1000");
  struct Draw {
    double residual;
    bool boundary;
  };
  ProbeReport rep = new_report(ctx, "efficiency_residual", "T");
  double last_boundary_rate = 0.0;
  for (double T : ctx.schedule.times()) {
    auto draws = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const Matrix gamma = limit_gamma(ctx, sample, "efficiency_residual_probe");
      const QmleResult m = qmle(sample, ctx.optimizer);
      const Vector u_m = chart.to_u(m.theta);
      const Vector target = gamma.ldlt().solve(delta(chart));
      return Draw{(u_m - target).norm(), m.at_boundary};
    });
    std::vector<double> kept;
    long excluded = 0;
    for (const auto& d : draws) d.boundary ? ++excluded : (kept.push_back(d.residual), 0);
    const double rate = static_cast<double>(excluded) / reps;
    last_boundary_rate = rate;
    rep.grid.push_back({T, kept.empty() ? NAN : median(kept), kept.empty() ? NAN : median_stderr(kept),
                        static_cast<long>(kept.size()),
                        {{"p90", kept.empty() ? NAN : quantile(kept, 0.9)},
                         {"boundary_rate", rate},
                         {"excluded", static_cast<double>(excluded)}}});
  }
  rep.metrics["threshold"] = threshold;
  rep.rule = fmt::format(
      "estimate = median over interior replicates of |u_hat^M - Gamma^-1 Delta_T| (boundary hits excluded, count in "
      "extras). INCONCLUSIVE if the boundary-hit rate at the largest T exceeds 0.2; else PASS iff estimates are "
      "strictly decreasing in T and the last is < {}; else FAIL.",
      format_real(threshold));
  const auto est = rep.estimates();
  if (last_boundary_rate > 0.2)
    rep.verdict = Verdict::inconclusive;
  else
    rep.verdict = strictly_decreasing(est) && est.back() < threshold ? Verdict::pass : Verdict::fail;
  return {rep};
}

// ------------------------------------------------------- QMLE / QBE gap

std::vector<ProbeReport> mle_bayes_gap_probe(const ProbeContext& ctx, int reps, double threshold) {
  require(reps >= 500, "mle_bayes_gap_probe: reps must be >= 500");
  require(ctx.source.space().dim() <= 2, "mle_bayes_gap_probe: dim must be <= 2");
  const Prior prior = ctx.resolved_prior();
  struct Draw {
    double gap_mle;
    double gap_limit;
    double quad_error;
    bool warning;
    bool boundary;
  };
  ProbeReport vs_mle = new_report(ctx, "mle_bayes_gap.bayes_vs_mle", "T");
  ProbeReport vs_limit = new_report(ctx, "mle_bayes_gap.bayes_vs_limit", "T");
  double max_quad_error = 0.0;
  long warnings = 0;
  for (double T : ctx.schedule.times()) {
    auto draws = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const Matrix gamma = limit_gamma(ctx, sample, "mle_bayes_gap_probe");
      const QmleResult m = qmle(sample, ctx.optimizer);
      const QbeResult bq = qbe(sample, prior, ctx.quadrature);
      const Vector u_m = chart.to_u(m.theta);
      const Vector u_b = chart.to_u(bq.theta);
      const Vector target = gamma.ldlt().solve(delta(chart));
      return Draw{(u_b - u_m).norm(), (u_b - target).norm(), bq.quad_error, bq.warning, m.at_boundary};
    });
    std::vector<double> g1, g2;
    double qe = 0.0;
    long boundary = 0;
    for (const auto& d : draws) {
      g1.push_back(d.gap_mle);
      g2.push_back(d.gap_limit);
      qe = std::max(qe, d.quad_error);
      warnings += d.warning;
      boundary += d.boundary;
    }
    max_quad_error = std::max(max_quad_error, qe);
    vs_mle.grid.push_back({T, median(g1), median_stderr(g1), reps,
                           {{"max_quad_error", qe}, {"boundary_hits", static_cast<double>(boundary)}}});
    vs_limit.grid.push_back({T, median(g2), median_stderr(g2), reps, {{"max_quad_error", qe}}});
  }
  std::vector<ProbeReport> out;
  for (ProbeReport* rep : {&vs_mle, &vs_limit}) {
    rep->metrics["threshold"] = threshold;
    rep->metrics["max_quad_error"] = max_quad_error;
    rep->metrics["quad_warnings"] = static_cast<double>(warnings);
    rep->notes.push_back("prior: " + prior.name());
    rep->rule = fmt::format(
        "estimate = median over replicates of |u_hat^B - {}|; PASS iff estimates are strictly decreasing in T and the "
        "last is < {}, else FAIL.",
        rep == &vs_mle ? "u_hat^M" : "Gamma^-1 Delta_T", format_real(threshold));
    const auto est = rep->estimates();
    rep->verdict = strictly_decreasing(est) && est.back() < threshold ? Verdict::pass : Verdict::fail;
    out.push_back(std::move(*rep));
  }
  return out;
}

// ------------------------------------------------------ moment convergence

namespace {

double apply_f(const std::string& f, const Vector& u) {
  if (f == "u") return u(0);
  if (f == "u^2") return u.squaredNorm();
  if (f == "|u|^3") return std::pow(u.norm(), 3);
  throw PreconditionError(fmt::format("moment_convergence_probe: unknown test function '{}'", f));
}

// Closed-form E f(u) for u ~ N(0, Gamma^{-1}), when one is known.
std::optional<double> gaussian_moment(const std::string& f, const Matrix& gamma) {
  const Matrix cov = gamma.inverse();
  if (f == "u") return 0.0;
  if (f == "u^2") return cov.trace();
  if (f == "|u|^3" && cov.rows() == 1) return 2.0 * std::sqrt(2.0 / std::numbers::pi) * std::pow(cov(0, 0), 1.5);
  return std::nullopt;
}

}  // namespace

std::vector<ProbeReport> moment_convergence_probe(const ProbeContext& ctx, const std::vector<std::string>& f_family,
                                                  int reps, int limit_draws) {
  require(reps >= 2000, "moment_convergence_probe: reps must be >= 2000");
  require(!f_family.empty(), "moment_convergence_probe: empty test-function family");
  const auto& lim = require_limits(ctx, "moment_convergence_probe");
  const bool random_mode = lim.law.mode() == LimitMode::random_gamma;
  const Prior prior = ctx.resolved_prior();
  for (const auto& f : f_family) (void)apply_f(f, Vector::Zero(ctx.source.space().dim()));

  // Limit expectations by sampling the limit law.
  struct LimitValue {
    double sampled;
    double sampled_phi;  // E f(u_hat) Gamma (trace in dim > 1)
  };
  std::vector<LimitValue> limit(f_family.size(), {0.0, 0.0});
  {
    RandomStream s(ctx.seed, {0x4c494d4954ULL});
    for (int k = 0; k < limit_draws; ++k) {
      const LimitDraw d = lim.law.sample(s);
      const double phi = d.gamma.trace();
      for (std::size_t i = 0; i < f_family.size(); ++i) {
        const double v = apply_f(f_family[i], d.u_hat);
        limit[i].sampled += v;
        limit[i].sampled_phi += v * phi;
      }
    }
    for (auto& l : limit) l.sampled /= limit_draws, l.sampled_phi /= limit_draws;
  }

  struct Draw {
    Vector u_m;
    Vector u_b;
    double phi;
  };
  std::vector<std::vector<Draw>> draws;
  for (double T : ctx.schedule.times()) {
    draws.push_back(parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const QmleResult m = qmle(sample, ctx.optimizer);
      const QbeResult bq = qbe(sample, prior, ctx.quadrature);
      const double phi = sample.limit_gamma() ? sample.limit_gamma()->trace() : 1.0;
      return Draw{chart.to_u(m.theta), chart.to_u(bq.theta), phi};
    }));
  }

  std::vector<ProbeReport> out;
  for (std::size_t i = 0; i < f_family.size(); ++i) {
    const std::string& f = f_family[i];
    for (int with_phi = 0; with_phi <= (random_mode ? 1 : 0); ++with_phi) {
      double target = with_phi ? limit[i].sampled_phi : limit[i].sampled;
      bool closed_form = false;
      if (!random_mode && !with_phi) {
        if (auto exact = gaussian_moment(f, *lim.law.fixed_gamma())) target = *exact, closed_form = true;
      }
      for (const char* est : {"M", "B"}) {
        const std::string fname = with_phi ? f + "*Gamma" : f;
        ProbeReport rep = new_report(ctx, fmt::format("moment_convergence[f={},est={}]", fname, est), "T");
        for (std::size_t it = 0; it < draws.size(); ++it) {
          std::vector<double> v;
          for (const auto& d : draws[it]) {
            const Vector& u = est[0] == 'M' ? d.u_m : d.u_b;
            v.push_back(apply_f(f, u) * (with_phi ? d.phi : 1.0));
          }
          const MeanStat m = mean_stat(v);
          rep.grid.push_back({ctx.schedule.times()[it], m.mean, m.stderr_, reps, {}});
        }
        rep.metrics["limit"] = target;
        rep.metrics["limit_sampled"] = with_phi ? limit[i].sampled_phi : limit[i].sampled;
        rep.metrics["limit_draws"] = limit_draws;
        rep.notes.push_back(closed_form ? "limit from the Gaussian closed form; limit_sampled is the limit-law check"
                                        : "limit from limit-law sampling");
        rep.rule = fmt::format(
            "estimate = Monte Carlo mean of {} at each T; PASS iff |estimate - {}| <= 3 x stderr at the largest T, "
            "else FAIL.",
            fname, format_real(target));
        const ProbeRow& last = rep.grid.back();
        rep.verdict = std::abs(last.estimate - target) <= 3.0 * last.stderr_ ? Verdict::pass : Verdict::fail;
        out.push_back(std::move(rep));
      }
    }
  }
  return out;
}

// ------------------------------------------------------ studentized normality

std::vector<ProbeReport> studentized_normality_probe(const ProbeContext& ctx, int reps, double threshold) {
  require(reps >= 2000, "studentized_normality_probe: reps must be >= 2000");
  const int p = ctx.source.space().dim();
  ProbeReport rep = new_report(ctx, "studentized_normality", "T");
  for (double T : ctx.schedule.times()) {
    auto draws = parallel_map(static_cast<std::size_t>(reps), ctx.threads, [&](std::size_t k) -> std::optional<Vector> {
      const FieldSample sample = ctx.draw(T, k);
      const LocalChart chart = ctx.chart(sample);
      const QmleResult m = qmle(sample, ctx.optimizer);
      const Matrix g = gamma_at(chart, m.theta);
      if (!is_positive_definite(g)) return std::nullopt;
      return symmetric_sqrt(g) * chart.to_u(m.theta);
    });
    long excluded = 0;
    std::vector<std::vector<double>> coords(p);
    for (const auto& d : draws) {
      if (!d) {
        ++excluded;
        continue;
      }
      for (int c = 0; c < p; ++c) coords[c].push_back((*d)(c));
    }
    double ks = 1.0;
    const auto used = static_cast<long>(coords[0].size());
    if (used > 0) {
      ks = 0.0;
      for (auto& c : coords) ks = std::max(ks, ks_distance_normal(c));
    }
    // Kolmogorov limit law of sqrt(n) D has standard deviation 0.2603.
    rep.grid.push_back({T, ks, used > 0 ? 0.2603 / std::sqrt(static_cast<double>(used)) : NAN, used,
                        {{"excluded", static_cast<double>(excluded)}}});
  }
  rep.metrics["threshold"] = threshold;
  rep.rule = fmt::format(
      "estimate = Kolmogorov-Smirnov distance between N(0,1) and the law of Gamma_T(theta_hat^M)^(1/2) u_hat^M (max "
      "over coordinates); replicates with non-positive-definite Gamma_T(theta_hat^M) are excluded; PASS iff the "
      "estimate at the largest T is < {}, else FAIL.",
      format_real(threshold));
  rep.verdict = rep.grid.back().estimate < threshold ? Verdict::pass : Verdict::fail;
  return {rep};
}

// ---------------------------------------------------- QBE integrability

std::vector<ProbeReport> qbe_integrability_check(const ProbeContext& ctx, double q, double delta_radius, int reps) {
  const ParameterSpace& space = ctx.source.space();
  const int p = space.dim();
  require(q > p, "qbe_integrability_check: q must exceed the parameter dimension");
  require(reps >= 1, "qbe_integrability_check: reps must be positive");
  const double a_norm = operator_norm(ctx.schedule.a_of(ctx.schedule.times().front()));
  require(delta_radius > 0.0 && delta_radius <= space.r0() / a_norm,
          fmt::format("qbe_integrability_check: delta must be in (0, r0/|a_T|] = (0, {}] at the smallest T",
                      format_real(space.r0() / a_norm)));

  std::vector<Vector> grid;
  if (p == 1) {
    for (int k = 1; k <= 32; ++k)
      for (double s : {-1.0, 1.0}) grid.push_back(Vector::Constant(1, s * delta_radius * k / 32.0));
  } else {
    for (int ir = 1; ir <= 8; ++ir)
      for (int ia = 0; ia < 8; ++ia) {
        Vector u = Vector::Zero(p);
        const double phi = 2.0 * std::numbers::pi * ia / 8.0;
        u(0) = std::cos(phi);
        u(1) = std::sin(phi);
        grid.push_back(delta_radius * ir / 8.0 * u);
      }
  }

  ProbeReport rep = new_report(ctx, "qbe_integrability", "T");
  double c0 = 0.0;
  double c0_doubled = 0.0;
  for (double T : ctx.schedule.times()) {
    auto draws = parallel_map(static_cast<std::size_t>(2 * reps), ctx.threads, [&](std::size_t k) {
      const LocalChart chart = ctx.chart(ctx.draw(T, k));
      std::vector<double> v(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) v[i] = std::pow(std::abs(log_z_field(chart, grid[i])), q);
      return v;
    });
    double best = 0.0;
    double best_se = 0.0;
    double best_doubled = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      std::vector<double> first, all;
      for (std::size_t k = 0; k < draws.size(); ++k) {
        all.push_back(draws[k][i]);
        if (k < static_cast<std::size_t>(reps)) first.push_back(draws[k][i]);
      }
      const double scale = std::pow(grid[i].norm(), q);
      const MeanStat m = mean_stat(first);
      const MeanStat m2 = mean_stat(all);
      if (m.mean / scale > best) best = m.mean / scale, best_se = m.stderr_ / scale;
      best_doubled = std::max(best_doubled, m2.mean / scale);
    }
    rep.grid.push_back({T, best, best_se, reps, {{"c0_doubled_reps", best_doubled}}});
    c0 = std::max(c0, best);
    c0_doubled = std::max(c0_doubled, best_doubled);
  }
  const double rel = c0 == 0.0 && c0_doubled == 0.0 ? 0.0 : std::abs(c0_doubled - c0) / std::max(c0, c0_doubled);
  rep.metrics["q"] = q;
  rep.metrics["delta"] = delta_radius;
  rep.metrics["c0_hat"] = c0;
  rep.metrics["c0_hat_doubled_reps"] = c0_doubled;
  rep.metrics["relative_change"] = rel;
  rep.rule =
      "estimate = max over a 64-point grid of u in U(0,delta)\\{0} of mean |H_T(theta*+a_T u) - H_T(theta*)|^q / "
      "|u|^q; c0_hat = max over T. PASS iff c0_hat is finite and changes by < 10% (relative) when the replicate "
      "count is doubled (extras c0_doubled_reps), else FAIL.";
  rep.verdict = std::isfinite(c0) && std::isfinite(c0_doubled) && rel < 0.1 ? Verdict::pass : Verdict::fail;
  return {rep};
}

}  // namespace qla
