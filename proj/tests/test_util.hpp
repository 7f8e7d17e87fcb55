#pragma once

#include <algorithm>
#include <cmath>
#include <random>

namespace testutil {

/// Relative closeness against the larger magnitude; exact equality (and
/// matching infinities) always passes.
inline bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::fabs(a - b) <= rel * std::max(std::fabs(a), std::fabs(b));
}

inline bool close_abs(double a, double b, double abs_tol) {
  return std::fabs(a - b) <= abs_tol;
}

/// Seeded draws for property tests; fixed seeds keep the suite
/// deterministic.
struct Rand {
  std::mt19937_64 gen;
  explicit Rand(std::uint64_t seed) : gen(seed) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  }
  double log_uniform(double lo, double hi) {
    return std::exp(uniform(std::log(lo), std::log(hi)));
  }
  std::uint64_t integer(std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(gen);
  }
};

}  // namespace testutil
