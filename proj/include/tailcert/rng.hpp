#pragma once

#include <cmath>
#include <cstdint>

namespace tailcert {

// splitmix64 finalizer (Steele, Lea, Flood 2014).
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Sub-seed for replica `index` of a run seeded with `seed`.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) noexcept {
  return splitmix_finalize(seed ^ splitmix_finalize(index + kGolden));
}

/// Counter-based generator: output k is finalize(key + k * golden).
/// State is two words, so cloning and reseeding are free and there is no
/// hidden global state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed = 0) noexcept : key_(splitmix_finalize(seed)) {}

  std::uint64_t next() noexcept { return splitmix_finalize(key_ + (++counter_) * kGolden); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() noexcept {
    return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
  }

  double normal() noexcept {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * M_PI * u2;
    spare_ = r * std::sin(th);
    has_spare_ = true;
    return r * std::cos(th);
  }

  /// Laplace with unit variance (scale 1/sqrt(2)).
  double laplace() noexcept {
    const std::uint64_t bits = next();
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    const double e = -std::log(u) * M_SQRT1_2;
    return (bits & 1u) ? e : -e;
  }

  double rademacher() noexcept { return (next() >> 63) ? 1.0 : -1.0; }

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace tailcert
