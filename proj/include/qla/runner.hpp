#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "qla/config.hpp"
#include "qla/probes.hpp"

namespace qla {

/// Objects a run needs, built once from a resolved config.
struct RunEnvironment {
  std::unique_ptr<FieldSource> source;
  ProbeContext context;

  explicit RunEnvironment(const ExperimentConfig& cfg);
  RunEnvironment(const ExperimentConfig& cfg, std::unique_ptr<FieldSource> custom);
};

/// Runs one configured probe.
std::vector<ProbeReport> run_probe(const ProbeConfig& probe, const ExperimentConfig& cfg, const ProbeContext& ctx);

/// Exit status for a set of verdicts: 0 all pass, 2 any inconclusive, 1 any fail.
int exit_status(const std::vector<Verdict>& verdicts);

/// File stem for a report name (safe on every filesystem).
std::string report_stem(const std::string& report_name);

inline constexpr const char* kPartialMarker = "RUN_INCOMPLETE";

/// Executes every configured probe, writing into cfg.out_dir:
///   resolved_config.json, <report>.csv, <report>.json, summary.json
///   and paths/ when dump_paths is set.
/// A RUN_INCOMPLETE marker exists for the duration and stays behind on abort.
/// Returns the exit status.
int run(const ExperimentConfig& cfg, std::ostream& log);
/// Same, with a caller-provided field source in place of the configured model.
int run(const ExperimentConfig& cfg, std::unique_ptr<FieldSource> source, std::ostream& log);

/// Prints the verdict matrix of a finished run and returns its exit status
/// (2 with the marker echoed for an incomplete run). Throws Error for a missing directory.
int report(const std::filesystem::path& dir, std::ostream& out);

/// Single-sample QMLE/QBE at the largest scheduled horizon.
void estimate_once(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace qla
