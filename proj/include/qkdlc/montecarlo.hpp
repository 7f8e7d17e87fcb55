#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qkdlc/channel.hpp"
#include "qkdlc/keyrate.hpp"

namespace qkdlc {

/// Eavesdropping model applied to each pulse.
///  - kNone: photons face only fiber loss; nothing reaches Eve.
///  - kLeakTap: Eve taps a fraction r_E of each photon at the channel
///    input; survivors face the fiber independently.
///  - kAllLossesBeamSplit: the worst-case reading of plain protocols --
///    every photon the fiber would lose lands in Eve's lab instead.
///  - kPhotonNumberSplit: Eve counts photons, keeps all but one of any
///    multiphoton pulse and forwards the last photon losslessly;
///    single photons face the fiber untouched.
enum class Attack {
  kNone,
  kLeakTap,
  kAllLossesBeamSplit,
  kPhotonNumberSplit,
};

std::string_view attack_name(Attack attack);
std::optional<Attack> attack_from_name(std::string_view name);

struct SimConfig {
  ProtocolSpec protocol;
  ChannelParams channel;
  Attack attack = Attack::kNone;
  std::uint64_t n_pulses = 0;
  std::uint64_t seed = 0;
};

/// Tallies and derived estimates of one simulation run.  Photon counts
/// satisfy photons_emitted == photons_to_eve + photons_to_bob +
/// photons_dissipated exactly.
struct SimOutcome {
  std::uint64_t n_pulses = 0;
  std::uint64_t n_conclusive = 0;      ///< pulses Bob both detected and kept
  std::uint64_t n_eve_nonvacuum = 0;   ///< pulses where Eve holds >= 1 photon
  std::uint64_t photons_emitted = 0;
  std::uint64_t photons_to_eve = 0;
  std::uint64_t photons_to_bob = 0;
  std::uint64_t photons_dissipated = 0;
  double est_conclusive_prob = 0.0;
  double conclusive_std_err = 0.0;  ///< binomial standard error, > 0
  double est_eve_nonvacuum_prob = 0.0;
  double eve_nonvacuum_std_err = 0.0;
};

/// Runs n_pulses independent pulses.  Each pulse draws from its own
/// (seed, pulse index) random stream, so the outcome is bit-identical for
/// any worker count.  Throws std::domain_error on invalid configuration
/// (n_pulses == 0, bad channel, negative intensity).
SimOutcome run_simulation(const SimConfig& config, unsigned workers = 1);

struct ValidationCheck {
  std::string quantity;
  double analytic = 0.0;
  double empirical = 0.0;
  double z_score = 0.0;  ///< (empirical - analytic) / standard error
};

struct ValidationReport {
  SimOutcome outcome;
  std::vector<ValidationCheck> checks;
  bool pass = false;  ///< all |z| <= 3
};

/// Runs the simulation and compares conclusive and Eve-nonvacuum
/// probabilities against the closed-form expectations for the configured
/// protocol and attack.
ValidationReport validate_against_analytic(const SimConfig& config, unsigned workers = 1);

/// Closed-form per-pulse probabilities the simulator is expected to
/// reproduce; exposed so callers can report them alongside estimates.
struct PulseProbabilities {
  double conclusive = 0.0;
  double eve_nonvacuum = 0.0;
};
PulseProbabilities analytic_pulse_probabilities(const SimConfig& config);

}  // namespace qkdlc
