#include "qla/config.hpp"

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "qla/errors.hpp"
#include "qla/prior.hpp"
#include "qla/random.hpp"
#include "qla/scaling.hpp"

namespace qla {
namespace {

int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

template <class T>
T scalar(const YAML::Node& n, const std::string& key, const char* expected) {
  if (!n.IsScalar()) throw ConfigError(key, line_of(n), fmt::format("expected {}", expected));
  try {
    return n.as<T>();
  } catch (const YAML::BadConversion&) {
    throw ConfigError(key, line_of(n), fmt::format("expected {}, got '{}'", expected, n.Scalar()));
  }
}

double real(const YAML::Node& n, const std::string& key) { return scalar<double>(n, key, "a number"); }
int integer(const YAML::Node& n, const std::string& key) { return scalar<int>(n, key, "an integer"); }
bool boolean(const YAML::Node& n, const std::string& key) { return scalar<bool>(n, key, "true or false"); }
std::string text(const YAML::Node& n, const std::string& key) { return scalar<std::string>(n, key, "a string"); }

std::vector<double> reals(const YAML::Node& n, const std::string& key) {
  std::vector<double> out;
  if (n.IsScalar()) return {real(n, key)};
  if (!n.IsSequence()) throw ConfigError(key, line_of(n), "expected a number or a list of numbers");
  for (const auto& e : n) out.push_back(real(e, key));
  return out;
}

Vector vec(const YAML::Node& n, const std::string& key) {
  const auto v = reals(n, key);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix(const YAML::Node& n, const std::string& key) {
  if (n.IsScalar()) return Matrix::Constant(1, 1, real(n, key));
  if (!n.IsSequence() || n.size() == 0) throw ConfigError(key, line_of(n), "expected a square matrix (list of rows)");
  const auto rows = static_cast<Eigen::Index>(n.size());
  Matrix m(rows, rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto row = reals(n[i], key);
    if (static_cast<Eigen::Index>(row.size()) != rows) throw ConfigError(key, line_of(n[i]), "matrix must be square");
    for (Eigen::Index j = 0; j < rows; ++j) m(i, j) = row[j];
  }
  return m;
}

// Calls fn(key, value) for each entry of a map, rejecting keys outside `allowed`.
template <class Fn>
void each_key(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed, Fn fn) {
  if (!n.IsMap()) throw ConfigError(where, line_of(n), "expected a mapping");
  for (const auto& kv : n) {
    const std::string key = kv.first.as<std::string>();
    const std::string full = where.empty() ? key : where + "." + key;
    if (!allowed.count(key)) throw ConfigError(full, line_of(kv.first), "unknown key");
    fn(key, full, kv.second);
  }
}

const std::map<std::string, std::set<std::string>>& probe_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"pld_tail", {"reps", "r_grid"}},
      {"identifiability", {"grid_size"}},
      {"condition_norms", {"reps"}},
      {"gamma_uniform_consistency", {"reps", "K"}},
      {"efficiency_residual", {"reps", "threshold"}},
      {"mle_bayes_gap", {"reps", "threshold"}},
      {"moment_convergence", {"reps", "f_family", "limit_draws"}},
      {"studentized_normality", {"reps", "threshold"}},
      {"qbe_integrability", {"reps", "q", "delta"}},
  };
  return keys;
}

ProbeConfig parse_probe(const YAML::Node& n) {
  ProbeConfig p;
  if (n.IsScalar()) {
    p.name = n.as<std::string>();
    if (!probe_keys().count(p.name)) throw ConfigError("probes", line_of(n), fmt::format("unknown probe '{}'", p.name));
    return p;
  }
  if (!n.IsMap() || !n["name"]) throw ConfigError("probes", line_of(n), "expected a probe name or a mapping with 'name'");
  p.name = text(n["name"], "probes.name");
  auto it = probe_keys().find(p.name);
  if (it == probe_keys().end())
    throw ConfigError("probes.name", line_of(n["name"]), fmt::format("unknown probe '{}'", p.name));
  std::set<std::string> allowed = it->second;
  allowed.insert("name");
  each_key(n, "probes." + p.name, allowed, [&](const std::string& key, const std::string& full, const YAML::Node& v) {
    if (key == "reps") p.reps = integer(v, full);
    else if (key == "r_grid") p.r_grid = reals(v, full);
    else if (key == "grid_size") p.grid_size = integer(v, full);
    else if (key == "K") p.K = real(v, full);
    else if (key == "threshold") p.threshold = real(v, full);
    else if (key == "limit_draws") p.limit_draws = integer(v, full);
    else if (key == "q") p.q = real(v, full);
    else if (key == "delta") p.delta = real(v, full);
    else if (key == "f_family") {
      p.f_family.clear();
      if (v.IsScalar()) p.f_family.push_back(text(v, full));
      else
        for (const auto& e : v) p.f_family.push_back(text(e, full));
    }
  });
  return p;
}

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

nlohmann::ordered_json matrix_json(const Matrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    auto row = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

Matrix resolved_q(const ExperimentConfig& cfg) {
  return cfg.a_matrix ? *cfg.a_matrix : Matrix::Identity(cfg.model.theta_star.size(), cfg.model.theta_star.size());
}

}  // namespace

const std::vector<std::string>& probe_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, _] : probe_keys()) n.push_back(k);
    return n;
  }();
  return names;
}

ConditionProfile ProfileConfig::build() const {
  if (rho1) return ConditionProfile(alpha, beta1, beta2, *rho1, rho2, L, mode);
  return ConditionProfile::with_auto_rho1(alpha, beta1, beta2, rho2, L, mode);
}

void finalize(ExperimentConfig& cfg) {
  auto guard = [](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ConfigError(key, 0, e.what());
    } catch (const std::invalid_argument& e) {
      throw ConfigError(key, 0, e.what());
    }
  };
  const int p = static_cast<int>(cfg.model.theta_star.size());
  if (cfg.reps < 100) throw ConfigError("reps", 0, "must be >= 100");
  if (cfg.schedule.size() < 2) throw ConfigError("schedule", 0, "needs at least two horizons");
  guard("schedule", [&] { ScalingSchedule(cfg.schedule, resolved_q(cfg)); });
  if (cfg.a_matrix && cfg.a_matrix->rows() != p) throw ConfigError("a_matrix", 0, "dimension differs from theta_star");
  guard("model", [&] {
    for (double t : cfg.schedule) validate(cfg.model.with_horizon(t));
  });
  ParameterSpace space = default_space(cfg.model);
  guard("profile", [&] {
    const ConditionProfile prof = cfg.profile.build();
    cfg.profile.rho1 = prof.rho1();
  });
  if (!cfg.prior.mean) cfg.prior.mean = cfg.model.theta_star;
  guard("prior", [&] {
    if (cfg.prior.kind == "uniform") Prior::uniform(space);
    else if (cfg.prior.kind == "linear") Prior::linear(space, cfg.prior.slope);
    else if (cfg.prior.kind == "truncated-normal") Prior::truncated_normal(space, *cfg.prior.mean, cfg.prior.sd);
    else throw ConfigError("prior.kind", 0, "expected uniform, linear or truncated-normal");
  });
  guard("optimizer", [&] { cfg.optimizer.validate(p); });
  guard("quadrature", [&] { cfg.quadrature.validate(p); });
  const double a_norm = operator_norm(ScalingSchedule(cfg.schedule, resolved_q(cfg)).a_of(cfg.schedule.front()));
  for (auto& pc : cfg.probes) {
    if (!probe_keys().count(pc.name)) throw ConfigError("probes", 0, fmt::format("unknown probe '{}'", pc.name));
    if (pc.reps && *pc.reps < 100) throw ConfigError("probes." + pc.name + ".reps", 0, "must be >= 100");
    if (pc.name == "qbe_integrability") {
      if (!pc.q) pc.q = p + 1.0;
      if (!pc.delta) pc.delta = std::min(0.5, space.r0() / a_norm);
    }
  }
}

nlohmann::ordered_json ExperimentConfig::to_json() const {
  using json = nlohmann::ordered_json;
  const ParameterSpace space = default_space(model);
  json j;
  json m;
  m["kind"] = std::string(model_kind_name(model.kind));
  m["theta_star"] = to_std(model.theta_star);
  m["mesh"] = model.mesh;
  if (model.kind == ModelKind::synthetic_laq) {
    m["c_gamma"] = model.c_gamma;
    m["kappa"] = model.kappa;
    m["gamma_exp"] = model.gamma_exp;
  }
  m["lower"] = to_std(space.lower());
  m["upper"] = to_std(space.upper());
  m["r0"] = space.r0();
  j["model"] = m;
  j["schedule"] = schedule;
  j["a_matrix"] = matrix_json(resolved_q(*this));
  j["profile"] = {{"alpha", profile.alpha},
                  {"beta1", profile.beta1},
                  {"beta2", profile.beta2},
                  {"rho1", profile.rho1 ? json(*profile.rho1) : json(nullptr)},
                  {"rho2", profile.rho2},
                  {"L", profile.L},
                  {"mode", std::string(condition_mode_name(profile.mode))}};
  j["prior"] = {{"kind", prior.kind},
                {"slope", prior.slope},
                {"mean", prior.mean ? json(to_std(*prior.mean)) : json(nullptr)},
                {"sd", prior.sd}};
  json probes_j = json::array();
  for (const auto& pc : probes) {
    json e;
    e["name"] = pc.name;
    const auto& keys = probe_keys().at(pc.name);
    if (keys.count("reps")) e["reps"] = pc.reps.value_or(reps);
    if (keys.count("r_grid")) e["r_grid"] = pc.r_grid;
    if (keys.count("grid_size")) e["grid_size"] = pc.grid_size;
    if (keys.count("K")) e["K"] = pc.K;
    if (keys.count("threshold")) e["threshold"] = pc.threshold;
    if (keys.count("f_family")) e["f_family"] = pc.f_family;
    if (keys.count("limit_draws")) e["limit_draws"] = pc.limit_draws;
    if (keys.count("q")) e["q"] = pc.q ? json(*pc.q) : json(nullptr);
    if (keys.count("delta")) e["delta"] = pc.delta ? json(*pc.delta) : json(nullptr);
    probes_j.push_back(e);
  }
  j["probes"] = probes_j;
  j["reps"] = reps;
  j["seed"] = seed;
  j["threads"] = threads == 0 ? json("auto") : json(threads);
  j["out_dir"] = out_dir;
  j["strict"] = strict;
  j["dump_paths"] = dump_paths;
  j["optimizer"] = {{"coarse_grid_per_dim", optimizer.coarse_grid_per_dim},
                    {"starts", optimizer.starts},
                    {"grad_tol", optimizer.grad_tol},
                    {"max_iters", optimizer.max_iters},
                    {"step_shrink", optimizer.step_shrink}};
  j["quadrature"] = {{"nodes_per_dim", quadrature.nodes_per_dim},
                     {"refine_check", quadrature.refine_check},
                     {"strict", quadrature.strict || strict},
                     {"error_tol", quadrature.error_tol}};
  return j;
}

std::string ExperimentConfig::hash() const {
  auto j = to_json();
  j.erase("seed");
  j.erase("threads");
  j.erase("out_dir");
  return fmt::format("{:016x}", fnv1a64(j.dump()));
}

ExperimentConfig parse_config_text(const std::string& text_in) {
  YAML::Node root;
  try {
    root = YAML::Load(text_in);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("<document>", e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ConfigError("<document>", line_of(root), "top level must be a mapping");

  ExperimentConfig cfg;
  if (const char* env = std::getenv(kOutDirEnv); env && *env) cfg.out_dir = env;
  std::map<std::string, int> lines;
  bool has_model = false;
  static const std::set<std::string> top{"model",  "theta_star", "mesh",      "c_gamma",  "kappa",
                                         "gamma_exp", "lower",   "upper",      "schedule",  "a_matrix", "profile",
                                         "prior",  "probes",     "reps",       "seed",      "threads",  "out_dir",
                                         "strict", "dump_paths", "optimizer",  "quadrature"};
  // Model kind first: later keys are interpreted relative to it.
  if (root["model"]) {
    try {
      cfg.model.kind = parse_model_kind(text(root["model"], "model"));
    } catch (const ModelError& e) {
      throw ConfigError("model", line_of(root["model"]), e.what());
    }
    has_model = true;
  }
  if (!has_model) throw ConfigError("model", 0, "required (ou-drift, vol-contrast or synthetic-laq)");
  cfg.model.theta_star = Vector::Constant(1, cfg.model.kind == ModelKind::ou_drift ? 1.0 : 0.0);

  each_key(root, "", top, [&](const std::string& key, const std::string& full, const YAML::Node& v) {
    lines[key] = line_of(v);
    if (key == "model") return;
    if (key == "theta_star") cfg.model.theta_star = vec(v, full);
    else if (key == "mesh") cfg.model.mesh = real(v, full);
    else if (key == "c_gamma") cfg.model.c_gamma = real(v, full);
    else if (key == "kappa") cfg.model.kappa = real(v, full);
    else if (key == "gamma_exp") cfg.model.gamma_exp = real(v, full);
    else if (key == "lower") cfg.model.lower = vec(v, full);
    else if (key == "upper") cfg.model.upper = vec(v, full);
    else if (key == "schedule") cfg.schedule = reals(v, full);
    else if (key == "a_matrix") cfg.a_matrix = matrix(v, full);
    else if (key == "reps") cfg.reps = integer(v, full);
    else if (key == "seed") cfg.seed = scalar<std::uint64_t>(v, full, "a non-negative integer");
    else if (key == "out_dir") cfg.out_dir = text(v, full);
    else if (key == "strict") cfg.strict = boolean(v, full);
    else if (key == "dump_paths") cfg.dump_paths = boolean(v, full);
    else if (key == "threads") {
      if (v.IsScalar() && v.Scalar() == "auto") cfg.threads = 0;
      else {
        const int t = integer(v, full);
        if (t < 1) throw ConfigError(full, line_of(v), "must be a positive integer or 'auto'");
        cfg.threads = static_cast<unsigned>(t);
      }
    } else if (key == "profile") {
      each_key(v, full, {"alpha", "beta1", "beta2", "rho1", "rho2", "L", "mode"},
               [&](const std::string& k, const std::string& f, const YAML::Node& x) {
                 if (k == "alpha") cfg.profile.alpha = real(x, f);
                 else if (k == "beta1") cfg.profile.beta1 = real(x, f);
                 else if (k == "beta2") cfg.profile.beta2 = real(x, f);
                 else if (k == "rho1") cfg.profile.rho1 = real(x, f);
                 else if (k == "rho2") cfg.profile.rho2 = real(x, f);
                 else if (k == "L") cfg.profile.L = real(x, f);
                 else {
                   try {
                     cfg.profile.mode = parse_condition_mode(text(x, f));
                   } catch (const PreconditionError& e) {
                     throw ConfigError(f, line_of(x), e.what());
                   }
                 }
               });
    } else if (key == "prior") {
      each_key(v, full, {"kind", "slope", "mean", "sd"}, [&](const std::string& k, const std::string& f, const YAML::Node& x) {
        if (k == "kind") cfg.prior.kind = text(x, f);
        else if (k == "slope") cfg.prior.slope = real(x, f);
        else if (k == "mean") cfg.prior.mean = vec(x, f);
        else cfg.prior.sd = real(x, f);
      });
    } else if (key == "probes") {
      if (!v.IsSequence()) throw ConfigError(full, line_of(v), "expected a list");
      for (const auto& e : v) cfg.probes.push_back(parse_probe(e));
    } else if (key == "optimizer") {
      each_key(v, full, {"coarse_grid_per_dim", "starts", "grad_tol", "max_iters", "step_shrink"},
               [&](const std::string& k, const std::string& f, const YAML::Node& x) {
                 if (k == "coarse_grid_per_dim") cfg.optimizer.coarse_grid_per_dim = integer(x, f);
                 else if (k == "starts") cfg.optimizer.starts = integer(x, f);
                 else if (k == "grad_tol") cfg.optimizer.grad_tol = real(x, f);
                 else if (k == "max_iters") cfg.optimizer.max_iters = integer(x, f);
                 else cfg.optimizer.step_shrink = real(x, f);
               });
    } else if (key == "quadrature") {
      each_key(v, full, {"nodes_per_dim", "refine_check", "strict", "error_tol"},
               [&](const std::string& k, const std::string& f, const YAML::Node& x) {
                 if (k == "nodes_per_dim") cfg.quadrature.nodes_per_dim = integer(x, f);
                 else if (k == "refine_check") cfg.quadrature.refine_check = boolean(x, f);
                 else if (k == "strict") cfg.quadrature.strict = boolean(x, f);
                 else cfg.quadrature.error_tol = real(x, f);
               });
    }
  });
  if (cfg.strict) cfg.quadrature.strict = true;

  try {
    finalize(cfg);
  } catch (const ConfigError& e) {
    if (e.line() > 0) throw;
    const std::string head = e.key().substr(0, e.key().find('.'));
    auto it = lines.find(head);
    std::string msg = e.what();
    if (auto pos = msg.find("): "); pos != std::string::npos) msg = msg.substr(pos + 3);
    else if (auto p2 = msg.find("': "); p2 != std::string::npos) msg = msg.substr(p2 + 3);
    throw ConfigError(e.key(), it == lines.end() ? 0 : it->second, msg);
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", 0, fmt::format("cannot read {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace qla
