#include "qla/random.hpp"

#include <bit>
#include <vector>

namespace qla {
namespace {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t fingerprint) {
  const std::uint64_t a = splitmix64(fingerprint);
  const std::uint64_t b = splitmix64(a);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t fingerprint) : fingerprint_(fingerprint), engine_(seeded_engine(fingerprint)) {}

RandomStream::RandomStream(std::uint64_t master_seed, std::initializer_list<std::uint64_t> key)
    : RandomStream([&] {
        std::uint64_t h = splitmix64(master_seed);
        for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
        return h;
      }()) {}

RandomStream RandomStream::child(std::uint64_t key) const {
  return RandomStream(splitmix64(fingerprint_ ^ splitmix64(key + 0x632be59bd9b4e019ULL)));
}

std::uint64_t key_of(double value) { return std::bit_cast<std::uint64_t>(value == 0.0 ? 0.0 : value); }

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace qla
