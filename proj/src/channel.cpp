#include "qkdlc/channel.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qkdlc {

void validate(const ChannelParams& params) {
  if (!(params.mu > 0.0)) {
    throw std::domain_error("channel: attenuation coefficient must be positive, got " +
                            std::to_string(params.mu));
  }
  if (!(params.distance_km >= 0.0)) {
    throw std::domain_error("channel: distance must be non-negative, got " +
                            std::to_string(params.distance_km));
  }
  if (!(params.leak_fraction >= 0.0 && params.leak_fraction <= 1.0)) {
    throw std::domain_error("channel: leak fraction must lie in [0, 1], got " +
                            std::to_string(params.leak_fraction));
  }
}

double transmittance(const ChannelParams& params) {
  validate(params);
  return std::pow(10.0, -params.mu * params.distance_km);
}

LeakSplit leak_split(const ChannelParams& params, double intensity) {
  if (!(intensity >= 0.0)) {
    throw std::domain_error("channel: intensity must be non-negative");
  }
  const double t = transmittance(params);
  return LeakSplit{
      .eve_mean = params.leak_fraction * intensity,
      .bob_mean = t * (1.0 - params.leak_fraction) * intensity,
  };
}

double coherent_overlap(const CoherentAmplitude& a, const CoherentAmplitude& b) {
  if (!(a.mean_photons >= 0.0) || !(b.mean_photons >= 0.0)) {
    throw std::domain_error("channel: mean photon number must be non-negative");
  }
  const double alpha = (a.sign < 0 ? -1.0 : 1.0) * std::sqrt(a.mean_photons);
  const double beta = (b.sign < 0 ? -1.0 : 1.0) * std::sqrt(b.mean_photons);
  const double d = alpha - beta;
  return std::exp(-0.5 * d * d);
}

double vacuum_probability(double mean_photons) {
  if (!(mean_photons >= 0.0)) {
    throw std::domain_error("channel: mean photon number must be non-negative");
  }
  return std::exp(-mean_photons);
}

}  // namespace qkdlc
