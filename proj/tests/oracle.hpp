#pragma once

// Reference implementations written directly from the closed-form
// expressions, kept deliberately independent of the library: only <cmath>
// and the printed formulas.  Tests compare the production code against
// these, and the frozen literals in the test files were produced by this
// header together with a high-precision arbitrary-precision cross-check.

#include <algorithm>
#include <cmath>

namespace oracle {

inline double h2(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

// Holevo bound for two equiprobable pure states with overlap exp(-z).
inline double holevo_exp(double z) { return h2(0.5 * -std::expm1(-z)); }

// 1 - holevo_exp(z), written to survive entropy saturation: with v = e^-z,
//   1 - h2((1 - v)/2) = ((1-v) ln(1-v) + (1+v) ln(1+v)) / (2 ln 2)
//                     = (v^2 + v^4/6 + v^6/15 + ...) / (2 ln 2).
inline double holevo_keep(double z) {
  const double v = std::exp(-z);
  if (v == 1.0) return 1.0;
  if (v >= 0.5) {
    return ((1.0 - v) * std::log1p(-v) + (1.0 + v) * std::log1p(v)) /
           (2.0 * std::log(2.0));
  }
  double sum = 0.0;
  for (int m = 28; m >= 1; --m) {
    sum += std::pow(v, 2 * m) / static_cast<double>(m * (2 * m - 1));
  }
  return sum / (2.0 * std::log(2.0));
}

inline double transmittance(double mu, double distance_km) {
  return std::pow(10.0, -mu * distance_km);
}

// Decoy-state distillable key length (clamped below at zero).
inline double decoy_key_length(double q_signal, double qber, double q_single,
                               double e_single, double f_ec, double sifted) {
  return std::max(0.0, sifted * 0.5 *
                           (q_single * (1.0 - h2(e_single)) -
                            q_signal * f_ec * h2(qber)));
}

inline double bb84_decoy_upper(double t, double x) {
  return 0.5 * t * x * std::exp(-x);
}

inline double bb84_lc_conclusive(double t, double r, double x) {
  return 0.5 * -std::expm1(-t * (1.0 - r) * x);
}

inline double bb84_lc_eve_info(double r, double x) { return -std::expm1(-r * x); }

inline double bb84_lc_rate(double t, double r, double x) {
  return std::max(0.0, bb84_lc_conclusive(t, r, x) * std::exp(-r * x));
}

inline double cow_conclusive(double t, double x) { return -std::expm1(-t * x); }

inline double cow_eve_info(double t, double x) { return holevo_exp((1.0 - t) * x); }

inline double cow_rate(double t, double x) {
  return cow_conclusive(t, x) * holevo_keep((1.0 - t) * x);
}

inline double cow_lc_conclusive(double t, double r, double x) {
  return -std::expm1(-t * (1.0 - r) * x);
}

inline double cow_lc_eve_info(double r, double x) { return holevo_exp(r * x); }

inline double cow_lc_rate(double t, double r, double x) {
  return cow_lc_conclusive(t, r, x) * holevo_keep(r * x);
}

inline double dps_eve_info(double t, double x) { return holevo_exp(4.0 * (1.0 - t) * x); }

inline double dps_rate(double t, double x) {
  return cow_conclusive(t, x) * holevo_keep(4.0 * (1.0 - t) * x);
}

inline double dps_lc_eve_info(double r, double x) { return holevo_exp(4.0 * r * x); }

inline double dps_lc_rate(double t, double r, double x) {
  return cow_lc_conclusive(t, r, x) * holevo_keep(4.0 * r * x);
}

// Shot-noise-limited test-pulse intensity and its inverse.
inline double required_test_intensity(double r_min, double t) {
  return 1.0 / (t * r_min * r_min);
}

inline double min_detectable_leakage(double intensity, double t) {
  return 1.0 / std::sqrt(t * intensity);
}

}  // namespace oracle
