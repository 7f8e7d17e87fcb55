#pragma once

#include <cstdint>

namespace qkdlc {

/// Deterministic per-index random stream.  Each (seed, index) pair opens an
/// independent splitmix64 stream, so work items can be distributed across
/// any number of threads and still draw exactly the same values.  Results
/// are reproducible across platforms: only integer arithmetic and IEEE
/// double operations are involved.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t index);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform double in (0, 1): never returns an endpoint, safe under log.
  double uniform_open();

  /// Standard normal via Box-Muller.  The second deviate of each pair is
  /// cached, so one stream yields a fixed sequence regardless of call site.
  double normal();

  bool bernoulli(double p) { return uniform() < p; }

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// Poisson sample with the given mean.  Exact (Knuth product method, chunked
/// so the running product stays away from underflow) for means up to 1e4;
/// above that a rounded normal approximation is used, whose error is far
/// below sampling noise at such means.  Throws std::domain_error for
/// negative or non-finite means.
std::uint64_t sample_poisson(double mean, CounterRng& rng);

}  // namespace qkdlc
