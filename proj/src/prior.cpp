#include "qla/prior.hpp"

#include <cmath>
#include <fmt/format.h>

#include "qla/errors.hpp"

namespace qla {
namespace {

// Visits a tensor grid with `per_dim` points per axis over the closure of the box.
template <class Fn>
void for_grid(const ParameterSpace& space, int per_dim, Fn&& fn) {
  const int p = space.dim();
  std::vector<int> idx(p, 0);
  Vector theta(p);
  for (;;) {
    for (int d = 0; d < p; ++d)
      theta(d) = space.lower()(d) + (space.upper()(d) - space.lower()(d)) * idx[d] / (per_dim - 1);
    fn(theta);
    int d = 0;
    while (d < p && ++idx[d] == per_dim) idx[d++] = 0;
    if (d == p) return;
  }
}

}  // namespace

Prior::Prior(Density density, double lower_bound, double upper_bound, const ParameterSpace& space, std::string name)
    : density_(std::move(density)), lower_(lower_bound), upper_(upper_bound), name_(std::move(name)) {
  if (!density_) throw PreconditionError("prior: null density");
  if (!(lower_ > 0.0) || !(upper_ >= lower_) || !std::isfinite(upper_))
    throw PreconditionError("prior: need 0 < lower_bound <= upper_bound < inf");
  const int per_dim = space.dim() == 1 ? 1001 : (space.dim() == 2 ? 101 : 21);
  const double slack = 1e-12 * upper_;
  for_grid(space, per_dim, [&](const Vector& theta) {
    const double v = density_(theta);
    if (!(v >= lower_ - slack && v <= upper_ + slack))
      throw PreconditionError(fmt::format("prior '{}': density {} at {} violates bounds [{}, {}]", name_, v,
                                          format_vector(theta), lower_, upper_));
  });
}

Prior Prior::uniform(const ParameterSpace& space) {
  return Prior([](const Vector&) { return 1.0; }, 1.0, 1.0, space, "uniform");
}

Prior Prior::linear(const ParameterSpace& space, double slope) {
  const double mid = 0.5 * (space.lower()(0) + space.upper()(0));
  const double half = 0.5 * (space.upper()(0) - space.lower()(0));
  const double lo = 1.0 - std::abs(slope) * half;
  const double hi = 1.0 + std::abs(slope) * half;
  if (!(lo > 0.0)) throw PreconditionError("linear prior: density must stay positive on Theta");
  return Prior([=](const Vector& theta) { return 1.0 + slope * (theta(0) - mid); }, lo, hi, space,
               fmt::format("linear({})", slope));
}

Prior Prior::truncated_normal(const ParameterSpace& space, const Vector& mean, double sd) {
  if (!(sd > 0.0)) throw PreconditionError("truncated-normal prior: sd must be positive");
  if (mean.size() != space.dim()) throw PreconditionError("truncated-normal prior: mean has the wrong dimension");
  // Extremes of |theta - mean| over the box.
  double near2 = 0.0;
  double far2 = 0.0;
  for (int d = 0; d < space.dim(); ++d) {
    const double lo = space.lower()(d);
    const double hi = space.upper()(d);
    const double m = mean(d);
    const double near = m < lo ? lo - m : (m > hi ? m - hi : 0.0);
    const double far = std::max(std::abs(lo - m), std::abs(hi - m));
    near2 += near * near;
    far2 += far * far;
  }
  const double inv = 1.0 / (2.0 * sd * sd);
  return Prior([=](const Vector& theta) { return std::exp(-(theta - mean).squaredNorm() * inv); },
               std::exp(-far2 * inv), std::exp(-near2 * inv), space,
               fmt::format("truncated-normal({}, {})", format_vector(mean), sd));
}

Prior Prior::scaled(double factor, const ParameterSpace& space) const {
  if (!(factor > 0.0)) throw PreconditionError("prior: scale factor must be positive");
  auto d = density_;
  return Prior([d, factor](const Vector& theta) { return factor * d(theta); }, factor * lower_, factor * upper_,
               space, name_);
}

}  // namespace qla
