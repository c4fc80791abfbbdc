#pragma once
// Deterministic random streams for the network simulator.
//
// xoshiro256** 1.0 seeded through SplitMix64.  Substreams are derived from
// (seed, label) so that e.g. the loss stream of a link is unaffected by how
// many jitter draws were taken, and identical seeds reproduce identical
// packet-level randomness across runs and hosts.

#include <cstdint>
#include <string_view>

namespace vcsim {

// Recorded in reports so runs can be tied to the exact generator.
inline constexpr const char* kRngAlgorithm = "xoshiro256** 1.0";

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) word = detail::splitmix64(sm);
  }

  // Independent substream: the label decouples consumers sharing one seed.
  Rng(std::uint64_t seed, std::string_view label)
      : Rng(seed ^ detail::fnv1a64(label)) {}

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 bits of mantissa.
  double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [0, max].
  double next_double(double max) { return next_double() * max; }

  bool bernoulli(double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return next_double() < p;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace vcsim
