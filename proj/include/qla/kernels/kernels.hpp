#pragma once

// Reduction kernels behind the sufficient statistics of the bundled models and
// the quadrature sums. Each kernel has a scalar reference implementation and
// vectorized variants; the variant is picked once at runtime from the CPU
// features, and can be pinned for equivalence testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace qla::kernels {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa);

/// Best instruction set this binary can run on this CPU.
Isa detected_isa();

/// Instruction set currently used by the dispatched entry points.
Isa active_isa();

/// Pins the dispatched entry points to `isa`. Returns false (and changes
/// nothing) if `isa` is not available here.
bool set_active_isa(Isa isa);

bool isa_available(Isa isa);

/// Sum of x.
double sum(std::span<const double> x);

/// Sum of x_i^2.
double sum_squares(std::span<const double> x);

/// Sum of a_i * b_i; spans must have equal length.
double dot(std::span<const double> a, std::span<const double> b);

/// Sum over i < n-1 of x_i * (x_{i+1} - x_i): the left-point Ito sum of x dx.
double increment_cross(std::span<const double> x);

namespace scalar {
double sum(std::span<const double> x);
double sum_squares(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double increment_cross(std::span<const double> x);
}  // namespace scalar

namespace avx2 {
double sum(std::span<const double> x);
double sum_squares(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double increment_cross(std::span<const double> x);
}  // namespace avx2

namespace neon {
double sum(std::span<const double> x);
double sum_squares(std::span<const double> x);
double dot(std::span<const double> a, std::span<const double> b);
double increment_cross(std::span<const double> x);
}  // namespace neon

}  // namespace qla::kernels
