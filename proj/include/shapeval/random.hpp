#pragma once

#include <cstdint>
#include <string_view>

namespace shapeval {

/// Seed for every randomized operation.
struct Seed {
  std::uint64_t value = 0;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

/// Counter-based stream: draw(i) = mix64(seed + (i + 1) * gamma).
///
/// This is exactly the i-th output of a SplitMix64 generator started at
/// `seed`, but any element can be computed independently, so parallel
/// consumers that own disjoint counter ranges reproduce the serial stream.
class CounterRng {
 public:
  constexpr explicit CounterRng(Seed seed) noexcept : seed_(seed.value) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(seed_ + (counter + 1) * kGoldenGamma);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  constexpr double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n) via the top 53 bits; n must be > 0.
  constexpr std::uint64_t below(std::uint64_t counter, std::uint64_t n) const noexcept {
    auto idx = static_cast<std::uint64_t>(uniform(counter) * static_cast<double>(n));
    return idx < n ? idx : n - 1;
  }

 private:
  std::uint64_t seed_;
};

/// FNV-1a over the bytes of a string.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derives an independent seed from a global seed and a string key (e.g. a shape id).
constexpr Seed derive_seed(Seed global, std::string_view key) noexcept {
  return Seed{mix64(global.value ^ mix64(fnv1a64(key)))};
}

}  // namespace shapeval
