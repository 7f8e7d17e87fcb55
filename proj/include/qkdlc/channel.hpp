#pragma once

#include <cstdint>

namespace qkdlc {

/// Default fiber attenuation coefficient, km^-1 in the base-10 exponent
/// sense: T = 10^(-mu * D).  1/50 km^-1 corresponds to 0.2 dB/km.
inline constexpr double kDefaultAttenuationPerKm = 1.0 / 50.0;

/// Physical parameters of one fiber link plus the eavesdropper's local tap.
struct ChannelParams {
  double mu = kDefaultAttenuationPerKm;  ///< attenuation coefficient (km^-1)
  double distance_km = 0.0;              ///< line length D
  double leak_fraction = 0.0;            ///< r_E, intensity fraction diverted at the tap
};

/// Throws std::domain_error if mu <= 0, distance_km < 0 or
/// leak_fraction is outside [0, 1].
void validate(const ChannelParams& params);

/// Coherent state restricted to real amplitude: phase 0 (sign +1) or
/// pi (sign -1).  All protocol states used here live on this axis.
struct CoherentAmplitude {
  double mean_photons = 0.0;  ///< |gamma|^2
  int sign = +1;              ///< relative phase sign, +1 or -1
};

/// End-to-end power transmittance T = 10^(-mu * D).
double transmittance(const ChannelParams& params);

struct LeakSplit {
  double eve_mean;  ///< mean photons diverted to Eve
  double bob_mean;  ///< mean photons reaching Bob
};

/// Splits a pulse of the given mean intensity between Eve's tap and Bob.
/// The tap sits at the channel input (before distributed attenuation):
/// Eve's mean carries no T factor, Bob's mean is T * (1 - r_E) * intensity.
LeakSplit leak_split(const ChannelParams& params, double intensity);

/// |<alpha|beta>| = exp(-|alpha - beta|^2 / 2) for real amplitudes
/// alpha = sign_a * sqrt(mean_a), beta = sign_b * sqrt(mean_b).
double coherent_overlap(const CoherentAmplitude& a, const CoherentAmplitude& b);

/// Poisson pmf at n = 0: exp(-mean).
double vacuum_probability(double mean_photons);

}  // namespace qkdlc
