#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace qla {

enum class Verdict { pass, inconclusive, fail };

std::string_view verdict_name(Verdict v);
Verdict parse_verdict(std::string_view name);
/// fail dominates inconclusive dominates pass.
Verdict worst(Verdict a, Verdict b);

struct ProbeRow {
  double x = 0.0;  ///< T, r or delta depending on the probe
  double estimate = 0.0;
  double stderr_ = 0.0;
  long reps = 0;
  std::map<std::string, double> extras;
};

struct ProbeReport {
  std::string name;
  std::string x_label = "T";
  std::vector<ProbeRow> grid;
  Verdict verdict = Verdict::inconclusive;
  /// Decision rule, stated so that the verdict can be recomputed from the grid.
  std::string rule;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, double> metrics;
  std::vector<std::string> notes;

  std::vector<double> estimates() const;
  std::vector<double> xs() const;

  nlohmann::ordered_json to_json() const;
  static ProbeReport from_json(const nlohmann::json& j);
  /// `T_or_r,estimate,stderr,reps`, full precision.
  std::string to_csv() const;
};

// Verdict helpers shared by the probes.
bool strictly_decreasing(std::span<const double> v);
bool nonincreasing(std::span<const double> v);
/// v_k <= factor * median(v_0..v_{k-1}) + floor for every k >= 1; the floor
/// keeps round-off around an exact zero from counting as growth.
bool bounded_by_running_median(std::span<const double> v, double factor, double floor = 0.0);
/// Least-squares slope of log y on log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

double median(std::vector<double> v);
double quantile(std::vector<double> v, double p);
/// Standard error of the sample median from the order-statistic interval
/// (x_(hi) - x_(lo)) / 3.92 around the median.
double median_stderr(std::vector<double> v);

struct MeanStat {
  double mean;
  double stderr_;
};
MeanStat mean_stat(std::span<const double> v);

/// Full-precision, locale-independent rendering used in every output file.
std::string format_real(double v);

}  // namespace qla
