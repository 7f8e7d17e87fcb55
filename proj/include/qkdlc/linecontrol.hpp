#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "qkdlc/channel.hpp"

namespace qkdlc {

// ---------------------------------------------------------------------------
// Transmittometry: bright test pulses interleaved with signal pulses measure
// the line transmission; a local tap of fraction r_E shows up as missing
// power.  The tap is indistinguishable from loss only below the shot-noise
// resolution, which sets the required test-pulse intensity.
// ---------------------------------------------------------------------------

/// Test-pulse intensity needed to resolve a leak of r_e_min:
///   n_test = 10^(mu * D) / r_e_min^2 = 1 / (T * r_e_min^2).
double required_test_intensity(double r_e_min, double distance_km,
                               double mu = kDefaultAttenuationPerKm);

/// Smallest leak fraction resolvable with the given test intensity:
///   r_e_min = 1 / sqrt(T * intensity).  Inverse of required_test_intensity.
double min_detectable_leakage(double intensity, double distance_km,
                              double mu = kDefaultAttenuationPerKm);

/// Schedule of bright test pulses.  When slot_indices is empty every one of
/// n_pulses slots is a test pulse; otherwise slot_indices lists which slots
/// (all < n_pulses, strictly increasing) carry tests.  Which slots are
/// tests is the sender's secret; receiver counts are examined only there.
struct TestPulsePlan {
  double intensity = 0.0;
  std::uint64_t n_pulses = 0;
  std::vector<std::uint64_t> slot_indices;
};

struct LeakEstimate {
  double r_hat = 0.0;     ///< estimated leak fraction, can be slightly negative
  double std_err = 0.0;   ///< shot-noise standard error, > 0
  std::uint64_t n_used = 0;
  bool usable = false;    ///< false when T * intensity < 1 photon expected

  /// A deficit beyond noise means loss; an excess beyond noise means the
  /// line model itself is wrong and the run should be treated as hostile.
  bool suspiciously_negative() const { return r_hat < -3.0 * std_err; }
};

/// Simulates a test-pulse exchange over the given channel (whose
/// leak_fraction plays the true tap) and estimates it from received counts:
///   r_hat = 1 - mean_count / (T * intensity).
/// Deterministic per (seed, slot index).  Throws std::domain_error on an
/// invalid plan; sub-photon expected counts are flagged unusable instead.
LeakEstimate estimate_leakage(const TestPulsePlan& plan, const ChannelParams& channel,
                              std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reflectometry: an OTDR-style backscatter trace in dB versus position.
// A clean fiber shows a straight line of slope -10 * mu dB/km; splices and
// taps add loss steps, connectors and breaks add reflective spikes.
// ---------------------------------------------------------------------------

enum class EventKind { kReflectiveSpike, kLossStep };

std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> event_kind_from_name(std::string_view name);

struct FiberEvent {
  double position_km = 0.0;
  EventKind kind = EventKind::kLossStep;
  double magnitude_db = 0.0;  ///< > 0; steps subtract from everything downstream
};

struct Reflectogram {
  double sample_spacing_km = 0.0;
  double noise_sigma_db = 0.0;
  std::vector<double> samples;  ///< power in dB at position i * spacing

  double length_km() const {
    return samples.empty() ? 0.0
                           : sample_spacing_km * static_cast<double>(samples.size() - 1);
  }
  double position_km(std::size_t i) const {
    return sample_spacing_km * static_cast<double>(i);
  }
};

/// Builds a synthetic trace: linear baseline of slope -10 * mu dB/km, each
/// LOSS_STEP subtracting its magnitude from all samples at or beyond its
/// position, each REFLECTIVE_SPIKE adding its magnitude to the single
/// nearest sample, plus i.i.d. Gaussian noise per sample.  Event
/// contributions are additive, so injecting a union of event sets equals
/// injecting them one set at a time.  Noise is keyed by (seed, sample
/// index) only, independent of the event list.
Reflectogram synthesize_reflectogram(double length_km, double mu,
                                     std::span<const FiberEvent> events,
                                     double sample_spacing_km, double noise_sigma_db,
                                     std::uint64_t seed);

struct BaselineFit {
  double slope_db_per_km = 0.0;
  double intercept_db = 0.0;
  double residual_sigma_db = 0.0;
};

/// Least-squares line through the trace, skipping samples within
/// exclusion_halfwidth_km of any listed position (pass the known event
/// positions so they do not bias the fit).  A negative halfwidth selects
/// the default of 5 sample spacings.  Throws std::domain_error when fewer
/// than 10 samples remain.
BaselineFit fit_baseline(const Reflectogram& trace,
                         std::span<const double> excluded_positions_km = {},
                         double exclusion_halfwidth_km = -1.0);

struct DetectionResult {
  std::vector<FiberEvent> events;  ///< ordered by position
  bool alarm = false;              ///< true iff any event was found
};

/// Compares a fresh trace against a reference one and reports what changed.
/// Spikes are single-sample excursions over the neighbour average exceeding
/// threshold_db + 3 * noise, where noise is the standard deviation of that
/// excursion statistic (sqrt(3/2) times the combined sigma of both traces);
/// the two flanking samples must agree to within the same gate, which
/// separates spikes from loss-step edges.
/// Steps are persistent level changes of at least threshold_db in the
/// 5-sample moving average of the difference; each is localised to the
/// center of the split window maximising the level change, and its
/// magnitude is the across-split mean difference.  Traces must share
/// geometry (size and spacing) or std::invalid_argument is thrown.
DetectionResult detect_new_events(const Reflectogram& current, const Reflectogram& baseline,
                                  double threshold_db);

}  // namespace qkdlc
