#pragma once

#include <cstdint>
#include <string_view>

namespace cgdpd {

// SplitMix64. The output sequence is fully specified, so seeded runs reproduce
// bit-for-bit on every platform (unlike the std:: distributions).
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix(state_);
  }

  // Uniform in [0, 1) with 53 bits of resolution.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). Rejection sampling keeps it unbiased.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = (*this)();
      if (r >= threshold) return r % bound;
    }
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, used to key random streams by string identifiers.
constexpr std::uint64_t fnv1a(std::string_view text) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const char c : text) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

// Combines stream coordinates into one seed. Order matters.
constexpr std::uint64_t stream_key(std::uint64_t seed) noexcept { return SplitMix64::mix(seed); }

template <class... Rest>
constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t next, Rest... rest) noexcept {
  return stream_key(SplitMix64::mix(seed ^ (next + 0x9E3779B97F4A7C15ULL)), static_cast<std::uint64_t>(rest)...);
}

}  // namespace cgdpd
