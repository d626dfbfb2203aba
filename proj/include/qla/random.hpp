#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string_view>

namespace qla {

/// Deterministic random stream. A child stream is a pure function of the master
/// seed and a key path, so replicate k draws the same numbers no matter which
/// worker runs it or in which order.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key);

  /// Child keyed by an additional path component.
  RandomStream child(std::uint64_t key) const;

  double normal() { return normal_(engine_); }
  double uniform() { return uniform_(engine_); }
  std::mt19937_64& engine() { return engine_; }

  std::uint64_t fingerprint() const noexcept { return fingerprint_; }

 private:
  explicit RandomStream(std::uint64_t fingerprint);

  std::uint64_t fingerprint_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Stable 64-bit key for a real index value (e.g. a horizon T).
std::uint64_t key_of(double value);

/// FNV-1a, used for config hashes.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace qla
