#include "qla/report.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qla/errors.hpp"

namespace qla {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::pass:
      return "PASS";
    case Verdict::inconclusive:
      return "INCONCLUSIVE";
    case Verdict::fail:
      return "FAIL";
  }
  return "?";
}

Verdict parse_verdict(std::string_view name) {
  if (name == "PASS") return Verdict::pass;
  if (name == "INCONCLUSIVE") return Verdict::inconclusive;
  if (name == "FAIL") return Verdict::fail;
  throw Error(fmt::format("unknown verdict '{}'", name));
}

Verdict worst(Verdict a, Verdict b) { return static_cast<int>(a) >= static_cast<int>(b) ? a : b; }

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", v);
}

std::vector<double> ProbeReport::estimates() const {
  std::vector<double> out;
  for (const auto& r : grid) out.push_back(r.estimate);
  return out;
}

std::vector<double> ProbeReport::xs() const {
  std::vector<double> out;
  for (const auto& r : grid) out.push_back(r.x);
  return out;
}

namespace {

// JSON cannot carry inf/nan; they are written as strings.
nlohmann::ordered_json real_json(double v) {
  if (std::isfinite(v)) return v;
  return format_real(v);
}

double real_from_json(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return INFINITY;
  if (s == "-inf") return -INFINITY;
  return NAN;
}

}  // namespace

nlohmann::ordered_json ProbeReport::to_json() const {
  nlohmann::ordered_json j;
  j["name"] = name;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["x_label"] = x_label;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : grid) {
    nlohmann::ordered_json row;
    row["x"] = real_json(r.x);
    row["estimate"] = real_json(r.estimate);
    row["stderr"] = real_json(r.stderr_);
    row["reps"] = r.reps;
    for (const auto& [k, v] : r.extras) row["extras"][k] = real_json(v);
    rows.push_back(std::move(row));
  }
  j["grid"] = std::move(rows);
  j["verdict"] = verdict_name(verdict);
  j["rule"] = rule;
  nlohmann::ordered_json m = nlohmann::ordered_json::object();
  for (const auto& [k, v] : metrics) m[k] = real_json(v);
  j["metrics"] = std::move(m);
  j["notes"] = notes;
  return j;
}

ProbeReport ProbeReport::from_json(const nlohmann::json& j) {
  ProbeReport r;
  r.name = j.at("name").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.x_label = j.value("x_label", "T");
  for (const auto& row : j.at("grid")) {
    ProbeRow pr;
    pr.x = real_from_json(row.at("x"));
    pr.estimate = real_from_json(row.at("estimate"));
    pr.stderr_ = real_from_json(row.at("stderr"));
    pr.reps = row.at("reps").get<long>();
    if (row.contains("extras"))
      for (const auto& [k, v] : row.at("extras").items()) pr.extras[k] = real_from_json(v);
    r.grid.push_back(std::move(pr));
  }
  r.verdict = parse_verdict(j.at("verdict").get<std::string>());
  r.rule = j.at("rule").get<std::string>();
  if (j.contains("metrics"))
    for (const auto& [k, v] : j.at("metrics").items()) r.metrics[k] = real_from_json(v);
  if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
  return r;
}

std::string ProbeReport::to_csv() const {
  std::string out = "T_or_r,estimate,stderr,reps\n";
  for (const auto& r : grid)
    out += fmt::format("{},{},{},{}\n", format_real(r.x), format_real(r.estimate), format_real(r.stderr_), r.reps);
  return out;
}

bool strictly_decreasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) return false;
  return true;
}

bool nonincreasing(std::span<const double> v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (!(v[i] <= v[i - 1])) return false;
  return true;
}

bool bounded_by_running_median(std::span<const double> v, double factor, double floor) {
  for (std::size_t k = 1; k < v.size(); ++k) {
    const double m = median(std::vector<double>(v.begin(), v.begin() + k));
    if (!(v[k] <= factor * m + floor)) return false;
  }
  return true;
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw PreconditionError("loglog_slope: need at least two points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return NAN;
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

double median_stderr(std::vector<double> v) {
  if (v.size() < 2) return 0.0;
  std::sort(v.begin(), v.end());
  const double n = static_cast<double>(v.size());
  const double half_width = 0.98 * std::sqrt(n);  // 1.96 * sqrt(n)/2
  const auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(n / 2.0 - half_width)));
  const auto hi = static_cast<std::size_t>(std::min(n - 1.0, std::ceil(n / 2.0 + half_width)));
  return (v[hi] - v[lo]) / 3.92;
}

MeanStat mean_stat(std::span<const double> v) {
  if (v.empty()) return {NAN, NAN};
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  const double sd = v.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return {mean, sd / std::sqrt(n)};
}

}  // namespace qla
