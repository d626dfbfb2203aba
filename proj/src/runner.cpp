#include "qla/runner.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <fstream>
#include <ostream>
#include <sstream>

#include "qla/chart.hpp"
#include "qla/errors.hpp"
#include "qla/parallel.hpp"

namespace qla {
namespace fs = std::filesystem;
namespace {

ScalingSchedule make_schedule(const ExperimentConfig& cfg) {
  const auto p = cfg.model.theta_star.size();
  return ScalingSchedule(cfg.schedule, cfg.a_matrix ? *cfg.a_matrix : Matrix::Identity(p, p));
}

Prior make_prior(const ExperimentConfig& cfg, const ParameterSpace& space) {
  if (cfg.prior.kind == "linear") return Prior::linear(space, cfg.prior.slope);
  if (cfg.prior.kind == "truncated-normal")
    return Prior::truncated_normal(space, cfg.prior.mean.value_or(space.theta_star()), cfg.prior.sd);
  return Prior::uniform(space);
}

ProbeContext make_context(const ExperimentConfig& cfg, const FieldSource& source) {
  QuadratureSettings quad = cfg.quadrature;
  quad.strict = quad.strict || cfg.strict;
  return ProbeContext{source,
                      make_schedule(cfg),
                      cfg.profile.build(),
                      make_prior(cfg, source.space()),
                      cfg.optimizer,
                      quad,
                      cfg.seed,
                      resolve_threads(cfg.threads),
                      cfg.hash()};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(fmt::format("cannot write {}", path.string()));
  out << content;
  if (!out) throw Error(fmt::format("write failed: {}", path.string()));
}

void dump_paths(const ExperimentConfig& cfg, const ProbeContext& ctx, const fs::path& dir) {
  if (cfg.model.kind == ModelKind::synthetic_laq) return;
  fs::create_directories(dir);
  for (double T : cfg.schedule) {
    std::ostringstream os;
    write_path_csv(ctx.draw(T, 0), os);
    write_file(dir / fmt::format("T-{}_rep-0.csv", format_real(T)), os.str());
  }
}

}  // namespace

RunEnvironment::RunEnvironment(const ExperimentConfig& cfg)
    : source(std::make_unique<ModelSource>(cfg.model)), context(make_context(cfg, *source)) {}

RunEnvironment::RunEnvironment(const ExperimentConfig& cfg, std::unique_ptr<FieldSource> custom)
    : source(std::move(custom)), context(make_context(cfg, *source)) {}

std::vector<ProbeReport> run_probe(const ProbeConfig& pc, const ExperimentConfig& cfg, const ProbeContext& ctx) {
  const int reps = pc.reps.value_or(cfg.reps);
  if (pc.name == "pld_tail") return pld_tail_probe(ctx, pc.r_grid, reps);
  if (pc.name == "identifiability") return identifiability_probe(ctx, pc.grid_size);
  if (pc.name == "condition_norms") return condition_norm_probe(ctx, reps);
  if (pc.name == "gamma_uniform_consistency") return gamma_uniform_consistency_probe(ctx, pc.K, reps);
  if (pc.name == "efficiency_residual") return efficiency_residual_probe(ctx, reps, pc.threshold);
  if (pc.name == "mle_bayes_gap") return mle_bayes_gap_probe(ctx, reps, pc.threshold);
  if (pc.name == "moment_convergence") return moment_convergence_probe(ctx, pc.f_family, reps, pc.limit_draws);
  if (pc.name == "studentized_normality") return studentized_normality_probe(ctx, reps, pc.threshold);
  if (pc.name == "qbe_integrability") {
    const double q = pc.q.value_or(ctx.source.space().dim() + 1.0);
    const double delta = pc.delta.value_or(0.5);
    return qbe_integrability_check(ctx, q, delta, reps);
  }
  throw PreconditionError(fmt::format("unknown probe '{}'", pc.name));
}

int exit_status(const std::vector<Verdict>& verdicts) {
  Verdict w = Verdict::pass;
  for (Verdict v : verdicts) w = worst(w, v);
  switch (w) {
    case Verdict::pass:
      return 0;
    case Verdict::inconclusive:
      return 2;
    case Verdict::fail:
      return 1;
  }
  return 1;
}

std::string report_stem(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.') out += c;
    else if (c == '=') out += '-';
    else if (c == '[' || c == ',' || c == '(') out += '.';
    else if (c == '^') out += "pow";
    else if (c == '*') out += "x";
    else if (c == '|') out += "abs";
    else if (c == ')' || c == ']') continue;
    else out += '_';
  }
  return out;
}

int run(const ExperimentConfig& cfg, std::ostream& log) { return run(cfg, std::make_unique<ModelSource>(cfg.model), log); }

int run(const ExperimentConfig& cfg, std::unique_ptr<FieldSource> source, std::ostream& log) {
  const fs::path dir(cfg.out_dir);
  fs::create_directories(dir);
  const fs::path marker = dir / kPartialMarker;
  write_file(marker, fmt::format("run started; config_hash {} seed {}\n", cfg.hash(), cfg.seed));
  write_file(dir / "resolved_config.json", cfg.to_json().dump(2) + "\n");

  RunEnvironment env(cfg, std::move(source));
  if (cfg.dump_paths) dump_paths(cfg, env.context, dir / "paths");

  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  std::vector<Verdict> verdicts;
  for (const auto& pc : cfg.probes) {
    log << fmt::format("[{}] running\n", pc.name) << std::flush;
    try {
      for (const ProbeReport& rep : run_probe(pc, cfg, env.context)) {
        const std::string stem = report_stem(rep.name);
        write_file(dir / (stem + ".csv"), rep.to_csv());
        write_file(dir / (stem + ".json"), rep.to_json().dump(2) + "\n");
        verdicts.push_back(rep.verdict);
        entries.push_back({{"probe", pc.name},
                           {"report", rep.name},
                           {"verdict", std::string(verdict_name(rep.verdict))},
                           {"csv", stem + ".csv"},
                           {"json", stem + ".json"}});
        log << fmt::format("  {:<48} {}\n", rep.name, verdict_name(rep.verdict));
      }
    } catch (const Error& e) {
      verdicts.push_back(Verdict::fail);
      entries.push_back({{"probe", pc.name}, {"report", pc.name}, {"verdict", "FAIL"}, {"error", e.what()}});
      log << fmt::format("  {:<48} FAIL (error: {})\n", pc.name, e.what());
    }
  }

  const int status = exit_status(verdicts);
  nlohmann::ordered_json summary;
  summary["config_hash"] = cfg.hash();
  summary["seed"] = cfg.seed;
  summary["reports"] = entries;
  summary["exit_status"] = status;
  write_file(dir / "summary.json", summary.dump(2) + "\n");
  fs::remove(marker);
  return status;
}

int report(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw Error(fmt::format("no such run directory: {}", dir.string()));
  if (fs::exists(dir / kPartialMarker)) {
    std::ifstream in(dir / kPartialMarker);
    std::stringstream ss;
    ss << in.rdbuf();
    out << fmt::format("incomplete run in {}: {}", dir.string(), ss.str());
    return 2;
  }
  std::ifstream in(dir / "summary.json");
  if (!in) throw Error(fmt::format("no summary.json in {}", dir.string()));
  const auto summary = nlohmann::json::parse(in);

  out << fmt::format("run {}  config_hash {}  seed {}\n", dir.string(), summary.at("config_hash").get<std::string>(),
                     summary.at("seed").get<std::uint64_t>());
  std::vector<Verdict> verdicts;
  for (const auto& e : summary.at("reports")) {
    const Verdict v = parse_verdict(e.at("verdict").get<std::string>());
    verdicts.push_back(v);
    if (e.contains("error")) {
      out << fmt::format("{:<48} {:<13} error: {}\n", e.at("report").get<std::string>(), verdict_name(v),
                         e.at("error").get<std::string>());
      continue;
    }
    std::ifstream rj(dir / e.at("json").get<std::string>());
    const ProbeReport rep = ProbeReport::from_json(nlohmann::json::parse(rj));
    std::string cells;
    for (const auto& row : rep.grid) cells += fmt::format(" {:g}={:.4g}", row.x, row.estimate);
    out << fmt::format("{:<48} {:<13}{}   [{}: {}]\n", rep.name, verdict_name(v), cells, rep.x_label,
                       (dir / e.at("csv").get<std::string>()).string());
  }
  if (verdicts.empty()) out << "(no probes)\n";
  return exit_status(verdicts);
}

void estimate_once(const ExperimentConfig& cfg, std::ostream& out) {
  RunEnvironment env(cfg);
  const ProbeContext& ctx = env.context;
  const double T = cfg.schedule.back();
  const FieldSample sample = ctx.draw(T, 0);
  const LocalChart chart = ctx.chart(sample);
  const QmleResult m = qmle(sample, ctx.optimizer);
  const QbeResult b = qbe(sample, ctx.resolved_prior(), ctx.quadrature);
  out << fmt::format("model        {}\n", ctx.source.describe());
  out << fmt::format("T            {}\n", format_real(T));
  out << fmt::format("theta*       {}\n", format_vector(chart.theta_star()));
  out << fmt::format("theta_hat^M  {}{}\n", format_vector(m.theta), m.at_boundary ? "  (boundary)" : "");
  out << fmt::format("theta_hat^B  {}  (quadrature error {:.3g}{})\n", format_vector(b.theta), b.quad_error,
                     b.warning ? ", WARNING" : "");
  out << fmt::format("u_hat^M      {}\n", format_vector(chart.to_u(m.theta)));
  out << fmt::format("u_hat^B      {}\n", format_vector(chart.to_u(b.theta)));
  out << fmt::format("Delta_T      {}\n", format_vector(delta(chart)));
  const Matrix g = gamma_at(chart, chart.theta_star());
  out << fmt::format("Gamma_T(th*) {}\n", format_vector(Eigen::Map<const Vector>(g.data(), g.size())));
}

}  // namespace qla
