#pragma once

#include <memory>
#include <vector>

namespace qla {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule; computed once per n and cached.
std::shared_ptr<const GaussRule> gauss_legendre(int n);

/// Nodes/weights mapped to [lo, hi].
GaussRule gauss_legendre_on(int n, double lo, double hi);

}  // namespace qla
