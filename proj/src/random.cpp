#include "sadiv/random.hpp"

#include <cmath>

namespace sadiv {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kStreamTag = 0x5ad1'0000'0000'0001ull;
constexpr double kPoissonChunk = 30.0;

std::uint64_t poisson_inverse_transform(RandomStream& rng, double mean) noexcept {
  const double u = rng.uniform();
  double pmf = std::exp(-mean);
  double cdf = pmf;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    pmf *= mean / static_cast<double>(k);
    if (pmf == 0.0) break;  // cdf stalled below u by rounding
    cdf += pmf;
  }
  return k;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> coords) noexcept {
  std::uint64_t h = mix64(seed);
  for (std::uint64_t c : coords) h = mix64(h ^ mix64(c * kGolden + kStreamTag));
  return h;
}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t stream) noexcept {
  return RandomStream(mix64(seed ^ mix64(stream * kGolden + kStreamTag)));
}

std::uint64_t RandomStream::uniform_below(std::uint64_t bound) noexcept {
  // Rejection on the top of the range keeps the draw exactly uniform.
  const std::uint64_t limit = max() - (max() % bound + 1) % bound;
  std::uint64_t x;
  do {
    x = (*this)();
  } while (x > limit);
  return x % bound;
}

std::uint64_t RandomStream::poisson(double mean) noexcept {
  if (mean <= 0.0) return 0;
  std::uint64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_inverse_transform(*this, kPoissonChunk);
    mean -= kPoissonChunk;
  }
  return total + poisson_inverse_transform(*this, mean);
}

}  // namespace sadiv
