#include "qkdlc/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qkdlc {
namespace {

// splitmix64 finalizer; full-period mixer over 64-bit counters.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t index)
    // Decorrelate the two keys before combining so that (seed, index) and
    // (seed + 1, index - 1) do not collide.
    : state_(mix64(seed) ^ mix64(mix64(index) + 0x6a09e667f3bcc909ULL)) {}

std::uint64_t CounterRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double CounterRng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() {
  if (has_cached_normal_) {
    has_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_normal_ = radius * std::sin(angle);
  has_cached_normal_ = true;
  return radius * std::cos(angle);
}

std::uint64_t sample_poisson(double mean, CounterRng& rng) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw std::domain_error("rng: Poisson mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  if (mean <= 1.0e4) {
    // Knuth's product method in chunks of at most 30 mean photons each;
    // Poisson additivity makes the chunked sum exact, and exp(-30) keeps
    // each chunk's stopping threshold comfortably above double underflow.
    std::uint64_t total = 0;
    double remaining = mean;
    while (remaining > 0.0) {
      const double chunk = remaining > 30.0 ? 30.0 : remaining;
      remaining -= chunk;
      const double threshold = std::exp(-chunk);
      double product = rng.uniform_open();
      while (product > threshold) {
        ++total;
        product *= rng.uniform_open();
      }
    }
    return total;
  }
  // Large means: normal approximation, relative skew error O(1/sqrt(mean)).
  const double value = std::round(mean + std::sqrt(mean) * rng.normal());
  return value <= 0.0 ? 0 : static_cast<std::uint64_t>(value);
}

}  // namespace qkdlc
