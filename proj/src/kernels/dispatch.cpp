#include <atomic>
#include <stdexcept>

#include "qla/kernels/kernels.hpp"

namespace qla::kernels {
namespace {

struct Table {
  double (*sum)(std::span<const double>);
  double (*sum_squares)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*increment_cross)(std::span<const double>);
};

constexpr Table kScalar{scalar::sum, scalar::sum_squares, scalar::dot, scalar::increment_cross};
#if defined(QLA_HAVE_AVX2_TU)
constexpr Table kAvx2{avx2::sum, avx2::sum_squares, avx2::dot, avx2::increment_cross};
#endif
#if defined(QLA_HAVE_NEON_TU)
constexpr Table kNeon{neon::sum, neon::sum_squares, neon::dot, neon::increment_cross};
#endif

const Table* table_for(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return &kScalar;
    case Isa::avx2:
#if defined(QLA_HAVE_AVX2_TU)
      return &kAvx2;
#else
      return nullptr;
#endif
    case Isa::neon:
#if defined(QLA_HAVE_NEON_TU)
      return &kNeon;
#else
      return nullptr;
#endif
  }
  return nullptr;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

const Table& current() { return *table_for(active().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(QLA_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(QLA_HAVE_NEON_TU)
      return true;  // baseline on aarch64
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() {
  if (isa_available(Isa::avx2)) return Isa::avx2;
  if (isa_available(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

Isa active_isa() { return active().load(std::memory_order_relaxed); }

bool set_active_isa(Isa isa) {
  if (!isa_available(isa)) return false;
  active().store(isa, std::memory_order_relaxed);
  return true;
}

double sum(std::span<const double> x) { return current().sum(x); }
double sum_squares(std::span<const double> x) { return current().sum_squares(x); }
double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("kernels::dot: length mismatch");
  return current().dot(a, b);
}
double increment_cross(std::span<const double> x) { return current().increment_cross(x); }

}  // namespace qla::kernels
