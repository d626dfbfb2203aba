#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace qla {

/// Which condition family the probes target: [S1]-[S3], [T1]-[T2] or [U1]-[U2].
enum class ConditionMode { S, T, U };

std::string_view condition_mode_name(ConditionMode mode);
ConditionMode parse_condition_mode(std::string_view name);

/// Exponent bundle (alpha, beta1, beta2, rho1, rho2, L) with the derived
/// moment orders. Construction enforces
///   0 < beta1 < 1/2,  0 < rho1 < min{1, alpha/(1-alpha), 2 beta1/(1-alpha)},
///   0 < 2 alpha < rho2,  beta2 >= 0,  1 - 2 beta2 - rho2 > 0.
class ConditionProfile {
 public:
  ConditionProfile(double alpha, double beta1, double beta2, double rho1, double rho2, double L,
                   ConditionMode mode = ConditionMode::S);

  /// Fills rho1 with find_rho1 when it is not given.
  static ConditionProfile with_auto_rho1(double alpha, double beta1, double beta2, double rho2, double L,
                                         ConditionMode mode = ConditionMode::S);

  /// alpha = 0.2, beta1 = 0.3, beta2 = 0.05, rho2 = 0.5, L = 2, rho1 from the finder.
  static ConditionProfile defaults(ConditionMode mode = ConditionMode::S);

  double alpha() const noexcept { return alpha_; }
  double beta1() const noexcept { return beta1_; }
  double beta2() const noexcept { return beta2_; }
  double rho1() const noexcept { return rho1_; }
  double rho2() const noexcept { return rho2_; }
  double L() const noexcept { return L_; }
  ConditionMode mode() const noexcept { return mode_; }

  double beta() const noexcept { return alpha_ / (1.0 - alpha_); }
  double M1() const noexcept { return L_ / (1.0 - rho1_); }
  double M2() const noexcept { return L_ / (1.0 - 2.0 * beta2_ - rho2_); }
  double M3() const noexcept { return L_ / (beta() - rho1_); }
  double M4() const noexcept { return L_ / (2.0 * beta1_ / (1.0 - alpha_) - rho1_); }

  /// Exponent rho in the PLD threshold exp(-r^{2 - rho} / 2): rho1 v rho2, or rho2 in U mode.
  double pld_rho() const noexcept;

  /// [T2] exponents: epsilon1 = 1/2 - beta2, epsilon2 = beta1.
  double epsilon1() const noexcept { return 0.5 - beta2_; }
  double epsilon2() const noexcept { return beta1_; }

 private:
  double alpha_, beta1_, beta2_, rho1_, rho2_, L_;
  ConditionMode mode_;
};

/// Returns rho1 = half the upper bound min{1, alpha/(1-alpha), 2 beta1/(1-alpha)},
/// which completes [S1] whenever (alpha, beta1, beta2, rho2) satisfy the [U2]
/// inequalities. Throws PreconditionError when they do not.
double find_rho1(double alpha, double beta1, double beta2, double rho2);

/// Reasons the [S1] inequalities fail, empty when they hold.
std::vector<std::string> s1_violations(double alpha, double beta1, double beta2, double rho1, double rho2, double L);

}  // namespace qla
