// qla: run quasi-likelihood diagnostics from a YAML experiment file.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cstdlib>
#include <iostream>

#include "qla/config.hpp"
#include "qla/errors.hpp"
#include "qla/runner.hpp"

namespace {

unsigned parse_threads(const std::string& s) {
  if (s == "auto") return 0;
  try {
    const int t = std::stoi(s);
    if (t >= 1) return static_cast<unsigned>(t);
  } catch (const std::exception&) {
  }
  throw qla::ConfigError("--threads", 0, "expected a positive integer or 'auto'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quasi-likelihood analysis diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out_dir, threads, probe_name;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  bool strict = false, dump = false;

  auto* run = app.add_subcommand("run", "execute every probe of a config");
  run->add_option("--config", config_path, "experiment file")->required();
  run->add_option("--seed", seed, "master seed");
  run->add_option("--reps", reps, "replicates per probe");
  run->add_option("--threads", threads, "worker threads (N or auto)");
  run->add_option("--out", out_dir, fmt::format("output directory (default: ${} or config out_dir)", qla::kOutDirEnv));
  run->add_flag("--strict", strict, "turn quadrature warnings into errors");
  run->add_flag("--dump-paths", dump, "write simulated paths");

  std::string report_dir;
  auto* rep = app.add_subcommand("report", "print the verdict matrix of a finished run");
  rep->add_option("dir", report_dir, "run directory")->required();

  auto* est = app.add_subcommand("estimate", "single-sample QMLE/QBE at the largest horizon");
  est->add_option("--config", config_path, "experiment file")->required();
  est->add_option("--seed", seed, "master seed");

  auto* probe = app.add_subcommand("probe", "run one probe");
  probe->add_option("name", probe_name, "probe name")->required();
  probe->add_option("--config", config_path, "experiment file")->required();
  probe->add_option("--seed", seed, "master seed");
  probe->add_option("--reps", reps, "replicates");
  probe->add_option("--threads", threads, "worker threads (N or auto)");
  probe->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rep) return qla::report(report_dir, std::cout);

    qla::ExperimentConfig cfg = qla::parse_config(config_path);
    if (seed) cfg.seed = *seed;
    if (reps) cfg.reps = *reps;
    if (!threads.empty()) cfg.threads = parse_threads(threads);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (strict) cfg.strict = cfg.quadrature.strict = true;
    if (dump) cfg.dump_paths = true;

    if (*est) {
      qla::estimate_once(cfg, std::cout);
      return 0;
    }
    if (*probe) {
      std::vector<qla::ProbeConfig> keep;
      for (const auto& p : cfg.probes)
        if (p.name == probe_name) keep.push_back(p);
      if (keep.empty()) keep.push_back(qla::ProbeConfig{.name = probe_name});
      cfg.probes = keep;
    }
    qla::finalize(cfg);
    const int status = qla::run(cfg, std::cerr);
    std::cout << fmt::format("results in {} (exit {})\n", cfg.out_dir, status);
    return status;
  } catch (const qla::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
