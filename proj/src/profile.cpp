#include "qla/profile.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "qla/errors.hpp"

namespace qla {

std::string_view condition_mode_name(ConditionMode mode) {
  switch (mode) {
    case ConditionMode::S:
      return "S";
    case ConditionMode::T:
      return "T";
    case ConditionMode::U:
      return "U";
  }
  return "?";
}

ConditionMode parse_condition_mode(std::string_view name) {
  if (name == "S") return ConditionMode::S;
  if (name == "T") return ConditionMode::T;
  if (name == "U") return ConditionMode::U;
  throw PreconditionError(fmt::format("unknown condition mode '{}' (expected S, T or U)", name));
}

std::vector<std::string> s1_violations(double alpha, double beta1, double beta2, double rho1, double rho2, double L) {
  std::vector<std::string> out;
  if (!(L > 0.0)) out.push_back("L > 0");
  if (!(beta1 > 0.0 && beta1 < 0.5)) out.push_back("0 < beta1 < 1/2");
  if (!(alpha > 0.0 && 2.0 * alpha < rho2)) out.push_back("0 < 2 alpha < rho2");
  if (!(beta2 >= 0.0)) out.push_back("beta2 >= 0");
  if (!(1.0 - 2.0 * beta2 - rho2 > 0.0)) out.push_back("1 - 2 beta2 - rho2 > 0");
  if (alpha > 0.0 && alpha < 1.0) {
    const double bound = std::min({1.0, alpha / (1.0 - alpha), 2.0 * beta1 / (1.0 - alpha)});
    if (!(rho1 > 0.0 && rho1 < bound)) out.push_back("0 < rho1 < min{1, alpha/(1-alpha), 2 beta1/(1-alpha)}");
  } else {
    out.push_back("alpha < 1");
  }
  return out;
}

ConditionProfile::ConditionProfile(double alpha, double beta1, double beta2, double rho1, double rho2, double L,
                                   ConditionMode mode)
    : alpha_(alpha), beta1_(beta1), beta2_(beta2), rho1_(rho1), rho2_(rho2), L_(L), mode_(mode) {
  const auto bad = s1_violations(alpha, beta1, beta2, rho1, rho2, L);
  if (!bad.empty()) {
    std::string msg = "condition profile violates:";
    for (const auto& b : bad) msg += " [" + b + "]";
    throw PreconditionError(msg);
  }
  for (double m : {M1(), M2(), M3(), M4()})
    if (!(m > 0.0) || !std::isfinite(m)) throw PreconditionError("condition profile: derived moment orders must be positive");
}

ConditionProfile ConditionProfile::with_auto_rho1(double alpha, double beta1, double beta2, double rho2, double L,
                                                  ConditionMode mode) {
  return ConditionProfile(alpha, beta1, beta2, find_rho1(alpha, beta1, beta2, rho2), rho2, L, mode);
}

ConditionProfile ConditionProfile::defaults(ConditionMode mode) {
  return with_auto_rho1(0.2, 0.3, 0.05, 0.5, 2.0, mode);
}

double ConditionProfile::pld_rho() const noexcept {
  return mode_ == ConditionMode::U ? rho2_ : std::max(rho1_, rho2_);
}

double find_rho1(double alpha, double beta1, double beta2, double rho2) {
  if (!(alpha > 0.0 && 2.0 * alpha < rho2 && beta2 >= 0.0 && 1.0 - 2.0 * beta2 - rho2 > 0.0 && beta1 > 0.0 &&
        beta1 < 0.5))
    throw PreconditionError(
        "rho1 finder: need 0 < 2 alpha < rho2, beta2 >= 0, 1 - 2 beta2 - rho2 > 0 and 0 < beta1 < 1/2");
  return 0.5 * std::min({1.0, alpha / (1.0 - alpha), 2.0 * beta1 / (1.0 - alpha)});
}

}  // namespace qla
