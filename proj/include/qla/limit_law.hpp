#pragma once

#include <functional>
#include <optional>

#include "qla/linalg.hpp"
#include "qla/random.hpp"

namespace qla {

enum class LimitMode { deterministic_gamma, random_gamma };

/// One draw of the limit pair (Delta, Gamma), with u_hat = Gamma^{-1} Delta.
struct LimitDraw {
  Matrix gamma;
  Vector delta;
  Vector u_hat;
};

/// Law of the limit (Delta, Gamma) with Delta = Gamma^{1/2} zeta, zeta standard
/// normal independent of Gamma; optionally carries the limit field Y and its
/// identifiability constant chi0.
class LimitLaw {
 public:
  using GammaSampler = std::function<Matrix(RandomStream&)>;
  /// Y(theta | Gamma); Gamma matters only in random mode.
  using YLimit = std::function<double(const Vector& theta, const Matrix& gamma)>;
  using Chi0 = std::function<double(const Matrix& gamma)>;

  /// Deterministic (ergodic) mode with constant Gamma.
  static LimitLaw deterministic(Matrix gamma);
  /// Mixed-normal mode with a random Gamma.
  static LimitLaw random(int dim, GammaSampler sampler);

  LimitLaw& with_y_limit(YLimit y, Chi0 chi0 = {});

  LimitMode mode() const noexcept { return mode_; }
  int dim() const noexcept { return dim_; }

  /// Draws Gamma; always the same matrix in deterministic mode.
  Matrix sample_gamma(RandomStream& stream) const;
  /// Draws Delta = Gamma^{1/2} zeta given Gamma.
  Vector sample_delta(const Matrix& gamma, RandomStream& stream) const;
  LimitDraw sample(RandomStream& stream) const;

  /// Constant Gamma in deterministic mode, nullopt otherwise.
  const std::optional<Matrix>& fixed_gamma() const noexcept { return fixed_gamma_; }

  bool has_y_limit() const noexcept { return static_cast<bool>(y_limit_); }
  double y_limit(const Vector& theta, const Matrix& gamma) const;
  bool has_chi0() const noexcept { return static_cast<bool>(chi0_); }
  double chi0(const Matrix& gamma) const;

  /// Z(u) for a given pair; requires gamma positive-definite.
  static double z(const Vector& delta, const Matrix& gamma, const Vector& u);

 private:
  LimitLaw(LimitMode mode, int dim) : mode_(mode), dim_(dim) {}

  LimitMode mode_;
  int dim_;
  std::optional<Matrix> fixed_gamma_;
  GammaSampler sampler_;
  YLimit y_limit_;
  Chi0 chi0_;
};

}  // namespace qla
