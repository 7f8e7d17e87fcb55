#include "qkdlc/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qkdlc {
namespace {

void check_transmittance(double t) {
  if (!(t > 0.0 && t <= 1.0)) {
    throw std::domain_error("keyrate: transmittance must lie in (0, 1], got " +
                            std::to_string(t));
  }
}

void check_leak(double r) {
  if (!(r >= 0.0 && r <= 1.0)) {
    throw std::domain_error("keyrate: leak fraction must lie in [0, 1], got " +
                            std::to_string(r));
  }
}

void check_intensity(double x) {
  if (!(x >= 0.0)) {
    throw std::domain_error("keyrate: intensity must be non-negative, got " +
                            std::to_string(x));
  }
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw std::domain_error(std::string("keyrate: ") + what + " must lie in [0, 1], got " +
                            std::to_string(v));
  }
}

// 1 - exp(-z) without cancellation for small z.
double one_minus_exp(double z) { return -std::expm1(-z); }

// Holevo bound h2((1 - e^-z) / 2) for two pure states whose overlap is
// exp(-z).  Going through the exponent keeps the entropy argument accurate
// when z is tiny.
double holevo_from_exponent(double z) { return binary_entropy(0.5 * one_minus_exp(z)); }

// Complement 1 - h2((1 - v)/2) of the bound above, v = e^-z.  Computing it
// as 1 - eve_info collapses to zero once the entropy saturates; this form,
//   ((1-v) log1p(-v) + (1+v) log1p(v)) / (2 ln 2)
// and its small-v series sum_m v^(2m) / (m (2m-1)) stay accurate down to
// the deepest rate tails, which keeps rate curves monotone instead of
// dissolving into cancellation crumbs.
double holevo_keep_from_exponent(double z) {
  const double v = std::exp(-z);
  if (v == 1.0) return 1.0;
  if (v < 0.25) {
    const double v2 = v * v;
    double power = v2;
    double sum = power;
    for (int m = 2; m <= 16; ++m) {
      power *= v2;
      sum += power / (m * (2 * m - 1));
    }
    return sum / (2.0 * std::numbers::ln2);
  }
  return ((1.0 - v) * std::log1p(-v) + (1.0 + v) * std::log1p(v)) /
         (2.0 * std::numbers::ln2);
}

}  // namespace

std::string_view protocol_name(Protocol protocol) {
  switch (protocol) {
    case Protocol::kBb84DecoyUpper: return "bb84-decoy-upper";
    case Protocol::kBb84Lc: return "bb84-lc";
    case Protocol::kCow: return "cow";
    case Protocol::kCowLc: return "cow-lc";
    case Protocol::kDps: return "dps";
    case Protocol::kDpsLc: return "dps-lc";
  }
  throw std::logic_error("keyrate: unhandled protocol enum value");
}

std::optional<Protocol> protocol_from_name(std::string_view name) {
  for (Protocol p : {Protocol::kBb84DecoyUpper, Protocol::kBb84Lc, Protocol::kCow,
                     Protocol::kCowLc, Protocol::kDps, Protocol::kDpsLc}) {
    if (name == protocol_name(p)) return p;
  }
  return std::nullopt;
}

bool is_line_controlled(Protocol protocol) {
  return protocol == Protocol::kBb84Lc || protocol == Protocol::kCowLc ||
         protocol == Protocol::kDpsLc;
}

bool has_basis_sifting(Protocol protocol) {
  return protocol == Protocol::kBb84DecoyUpper || protocol == Protocol::kBb84Lc;
}

double binary_entropy(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::domain_error("keyrate: entropy argument must lie in [0, 1], got " +
                            std::to_string(p));
  }
  if (p == 0.0 || p == 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

double holevo_two_pure(double overlap) {
  check_unit(overlap, "state overlap");
  return binary_entropy(0.5 * (1.0 - overlap));
}

double decoy_key_length(const DecoyObservables& obs, double sifted_length) {
  check_unit(obs.gain_signal, "signal gain");
  check_unit(obs.qber, "QBER");
  check_unit(obs.gain_single, "single-photon gain");
  check_unit(obs.error_single, "single-photon error rate");
  check_unit(obs.ec_efficiency, "error-correction efficiency");
  if (obs.gain_single > obs.gain_signal) {
    throw std::domain_error("keyrate: single-photon gain cannot exceed the signal gain");
  }
  if (!(sifted_length >= 0.0)) {
    throw std::domain_error("keyrate: sifted length must be non-negative");
  }
  const double per_bit = 0.5 * (obs.gain_single * (1.0 - binary_entropy(obs.error_single)) -
                                obs.gain_signal * obs.ec_efficiency * binary_entropy(obs.qber));
  return std::max(0.0, sifted_length * per_bit);
}

double bb84_decoy_upper(double transmittance, double intensity) {
  check_transmittance(transmittance);
  check_intensity(intensity);
  return 0.5 * transmittance * intensity * std::exp(-intensity);
}

double bb84_lc_conclusive(double transmittance, double leak_fraction, double intensity) {
  check_transmittance(transmittance);
  check_leak(leak_fraction);
  check_intensity(intensity);
  return 0.5 * one_minus_exp(transmittance * (1.0 - leak_fraction) * intensity);
}

RatePoint bb84_lc_rate(double transmittance, double leak_fraction, double intensity) {
  const double conclusive = bb84_lc_conclusive(transmittance, leak_fraction, intensity);
  // exp(-r x) rather than 1 - eve_info: the latter underflows to zero once
  // Eve's information saturates, losing the deep tail of the rate curve.
  return RatePoint{
      .rate = conclusive * std::exp(-leak_fraction * intensity),
      .conclusive_prob = conclusive,
      .eve_info = one_minus_exp(leak_fraction * intensity),
  };
}

double cow_conclusive(double transmittance, double intensity) {
  check_transmittance(transmittance);
  check_intensity(intensity);
  return one_minus_exp(transmittance * intensity);
}

RatePoint cow_rate(double transmittance, double intensity) {
  const double conclusive = cow_conclusive(transmittance, intensity);
  const double exponent = (1.0 - transmittance) * intensity;
  return RatePoint{
      .rate = conclusive * holevo_keep_from_exponent(exponent),
      .conclusive_prob = conclusive,
      .eve_info = holevo_from_exponent(exponent),
  };
}

RatePoint cow_lc_rate(double transmittance, double leak_fraction, double intensity) {
  check_transmittance(transmittance);
  check_leak(leak_fraction);
  check_intensity(intensity);
  const double conclusive =
      one_minus_exp(transmittance * (1.0 - leak_fraction) * intensity);
  const double exponent = leak_fraction * intensity;
  return RatePoint{
      .rate = conclusive * holevo_keep_from_exponent(exponent),
      .conclusive_prob = conclusive,
      .eve_info = holevo_from_exponent(exponent),
  };
}

RatePoint dps_rate(double transmittance, double intensity) {
  const double conclusive = cow_conclusive(transmittance, intensity);
  const double exponent = 4.0 * (1.0 - transmittance) * intensity;
  return RatePoint{
      .rate = conclusive * holevo_keep_from_exponent(exponent),
      .conclusive_prob = conclusive,
      .eve_info = holevo_from_exponent(exponent),
  };
}

RatePoint dps_lc_rate(double transmittance, double leak_fraction, double intensity) {
  check_transmittance(transmittance);
  check_leak(leak_fraction);
  check_intensity(intensity);
  const double conclusive =
      one_minus_exp(transmittance * (1.0 - leak_fraction) * intensity);
  const double exponent = 4.0 * leak_fraction * intensity;
  return RatePoint{
      .rate = conclusive * holevo_keep_from_exponent(exponent),
      .conclusive_prob = conclusive,
      .eve_info = holevo_from_exponent(exponent),
  };
}

RatePoint protocol_rate(Protocol protocol, double transmittance, double leak_fraction,
                        double intensity) {
  switch (protocol) {
    case Protocol::kBb84DecoyUpper: {
      const double rate = bb84_decoy_upper(transmittance, intensity);
      const double multiphoton =
          std::max(0.0, 1.0 - (1.0 + intensity) * std::exp(-intensity));
      return RatePoint{
          .rate = rate,
          .conclusive_prob = 0.5 * one_minus_exp(transmittance * intensity),
          .eve_info = multiphoton,
      };
    }
    case Protocol::kBb84Lc:
      return bb84_lc_rate(transmittance, leak_fraction, intensity);
    case Protocol::kCow:
      return cow_rate(transmittance, intensity);
    case Protocol::kCowLc:
      return cow_lc_rate(transmittance, leak_fraction, intensity);
    case Protocol::kDps:
      return dps_rate(transmittance, intensity);
    case Protocol::kDpsLc:
      return dps_lc_rate(transmittance, leak_fraction, intensity);
  }
  throw std::logic_error("keyrate: unhandled protocol enum value");
}

RatePoint protocol_rate(const ProtocolSpec& spec, const ChannelParams& channel) {
  return protocol_rate(spec.protocol, transmittance(channel), channel.leak_fraction,
                       spec.intensity);
}

}  // namespace qkdlc
