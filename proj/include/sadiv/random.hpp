#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace sadiv {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Folds grid or stream coordinates into a seed, order-sensitive.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept;

/// Splittable SplitMix64 stream.
///
/// Substreams are derived as `mix64(seed ^ mix64(stream * phi + tag))`; the
/// simulator opens one substream per slot (or per trial, per relay encoder,
/// per packet payload) so results never depend on evaluation order or on how
/// work is spread over threads.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t state) noexcept : state_(state) {}

  /// Independent substream `stream` of the master `seed`.
  static RandomStream derive(std::uint64_t seed, std::uint64_t stream) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// True with probability p (p <= 0 never, p >= 1 always).
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform on {0, ..., bound - 1}; bound must be positive.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept;

  /// Poisson(mean) by inverse transform; means above 30 are drawn as sums
  /// of Poisson(30) chunks.
  std::uint64_t poisson(double mean) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace sadiv
