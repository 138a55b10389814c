#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

#include "m2m/error.hpp"

namespace m2m {

namespace detail {
// splitmix64 finalizer; decorrelates structured inputs such as (seed, epoch, index).
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Derives an independent stream seed from a master seed plus stream tags.
/// Streams derived with distinct tag tuples are statistically independent,
/// which is what makes per-index generation schedule-independent.
inline std::uint64_t derive_seed(std::uint64_t seed) { return detail::mix64(seed); }
template <typename... Tags>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
  return derive_seed(detail::mix64(seed ^ detail::mix64(tag)), rest...);
}

/// Deterministic random source. All distributions are implemented by hand on
/// top of mt19937_64 so that identical seeds produce identical draws on any
/// standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller; consumes exactly two uniforms per call.
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw DomainError("Rng::index: empty range");
    auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Draws from a categorical distribution given probabilities summing to ~1.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw DomainError("Rng::categorical: empty distribution");
    const double u = uniform();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
      cum += probs[i];
      if (u < cum) return static_cast<int>(i);
    }
    // rounding spill: return the last index with positive mass
    for (std::size_t i = probs.size(); i-- > 0;) {
      if (probs[i] > 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size()) - 1;
  }

  /// Deterministic partial Fisher-Yates: places a uniform k-subset of
  /// [0, n) in the first k slots of `indices`.
  template <typename Int>
  void partial_shuffle(std::span<Int> indices, std::size_t k) {
    const std::size_t n = indices.size();
    for (std::size_t i = 0; i < k && i + 1 < n; ++i) {
      const std::size_t j = i + index(n - i);
      std::swap(indices[i], indices[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace m2m
