#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qla/estimators.hpp"
#include "qla/models.hpp"
#include "qla/profile.hpp"

namespace qla {

struct PriorConfig {
  std::string kind = "uniform";  ///< uniform | linear | truncated-normal
  double slope = 0.0;
  std::optional<Vector> mean;  ///< defaults to theta*
  double sd = 1.0;
};

struct ProfileConfig {
  double alpha = 0.2;
  double beta1 = 0.3;
  double beta2 = 0.05;
  std::optional<double> rho1;  ///< filled by the finder when absent
  double rho2 = 0.5;
  double L = 2.0;
  ConditionMode mode = ConditionMode::S;

  ConditionProfile build() const;
};

/// One requested probe with its resolved settings. Only the fields used by
/// the named probe are serialized.
struct ProbeConfig {
  std::string name;
  std::optional<int> reps;  ///< overrides the run-level count
  std::vector<double> r_grid{2, 3, 4, 5, 6};
  int grid_size = 1000;
  double K = 2.0;
  double threshold = 0.05;
  std::vector<std::string> f_family{"u", "u^2", "|u|^3"};
  int limit_draws = 100000;
  std::optional<double> q;      ///< defaults to dim + 1
  std::optional<double> delta;  ///< defaults to min(0.5, r0 / |a_T|) at the smallest T
};

struct ExperimentConfig {
  ModelSpec model;
  std::vector<double> schedule;
  std::optional<Matrix> a_matrix;  ///< Q in a_T = T^{-1/2} Q; identity when absent
  ProfileConfig profile;
  PriorConfig prior;
  std::vector<ProbeConfig> probes;
  int reps = 1000;
  std::uint64_t seed = 1;
  unsigned threads = 1;  ///< 0 = auto
  std::string out_dir = "qla-out";
  bool strict = false;
  bool dump_paths = false;
  OptimizerSettings optimizer;
  QuadratureSettings quadrature;

  /// Resolved form with every default spelled out.
  nlohmann::ordered_json to_json() const;
  /// FNV-1a of the resolved form without seed, threads and out_dir, as 16 hex digits.
  std::string hash() const;
};

const std::vector<std::string>& probe_names();

/// Parses and validates a YAML experiment file; ConfigError names the key and line.
ExperimentConfig parse_config(const std::filesystem::path& path);
ExperimentConfig parse_config_text(const std::string& text);

/// Checks invariants and fills computed defaults (probe delta). Called by the
/// parsers; call again after changing fields programmatically.
void finalize(ExperimentConfig& cfg);

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "QLA_OUT_DIR";

}  // namespace qla
