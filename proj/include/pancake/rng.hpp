#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace pancake {

// SplitMix64 finalizer. Used both as the counter-based generator's output
// function and as the fixed hash for seed splitting.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Sub-seed for a named stage: mix64(master ^ fnv1a64(stage)).
constexpr std::uint64_t split_seed(std::uint64_t master, std::string_view stage) noexcept {
  return mix64(master ^ fnv1a64(stage));
}

constexpr std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) noexcept {
  return mix64(master ^ mix64(index + 0x9E3779B97F4A7C15ULL));
}

/// Counter-based generator: the i-th draw is mix64(key + i * golden), with
/// key = mix64(seed). Every transform on top of it (uniform, normal, bounded
/// integer) is written out here so the stream is identical on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept : key_(mix64(seed)) {}

  std::uint64_t next_u64() noexcept {
    ++counter_;
    return mix64(key_ + counter_ * 0x9E3779B97F4A7C15ULL);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open_zero() noexcept {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double r = std::sqrt(-2.0 * std::log(uniform_open_zero()));
    const double theta = 2.0 * std::numbers::pi * uniform();
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % bound;
  }

  std::uint64_t draws() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace pancake
