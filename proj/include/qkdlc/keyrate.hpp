#pragma once

#include <optional>
#include <string_view>

#include "qkdlc/channel.hpp"

namespace qkdlc {

/// Protocol variants.  The *_LC variants assume the sender verifies, via
/// line control, that at most a known fraction r_E of each pulse leaks to
/// the eavesdropper; the plain variants concede every photon lost in the
/// fiber.  BB84_DECOY_UPPER is the decoy-state upper bound, not an
/// achievable rate.
enum class Protocol {
  kBb84DecoyUpper,
  kBb84Lc,
  kCow,
  kCowLc,
  kDps,
  kDpsLc,
};

/// Canonical lowercase-hyphen name, e.g. "bb84-lc", "cow", "dps-lc".
std::string_view protocol_name(Protocol protocol);

/// Inverse of protocol_name.  Returns nullopt for unknown names.
std::optional<Protocol> protocol_from_name(std::string_view name);

/// True for the *_LC variants.
bool is_line_controlled(Protocol protocol);

/// True for the BB84 family, whose sifting halves the conclusive fraction.
bool has_basis_sifting(Protocol protocol);

struct ProtocolSpec {
  Protocol protocol = Protocol::kBb84Lc;
  double intensity = 1.0;  ///< source mean photon number |gamma|^2 per pulse
};

/// Observed quantities entering the decoy-state key length bound.
/// All fields must lie in [0, 1] and gain_single must not exceed
/// gain_signal.
struct DecoyObservables {
  double gain_signal;    ///< overall signal gain Q
  double qber;           ///< quantum bit error rate E
  double gain_single;    ///< single-photon gain contribution Q_1
  double error_single;   ///< single-photon error rate e_1
  double ec_efficiency;  ///< error-correction efficiency factor f(E)
};

/// One evaluation of a protocol's asymptotic performance.
struct RatePoint {
  double rate;             ///< secret bits per emitted pulse, >= 0
  double conclusive_prob;  ///< probability a pulse yields a conclusive event
  double eve_info;         ///< eavesdropper information bound per sifted bit, in [0, 1]
};

/// Shannon entropy of a {p, 1-p} coin, in bits.  Defined as 0 at the
/// endpoints (continuity).  Throws std::domain_error outside [0, 1].
double binary_entropy(double p);

/// Holevo bound for two equiprobable pure states with total state overlap
/// magnitude |<psi_0|psi_1>| = overlap: chi = h2((1 - overlap) / 2).
double holevo_two_pure(double overlap);

/// Secret key length distillable from sifted_length raw bits under the
/// decoy-state bound, clamped below at zero:
///   L_f = sifted_length * 1/2 * [Q_1 (1 - h2(e_1)) - Q f(E) h2(E)].
double decoy_key_length(const DecoyObservables& obs, double sifted_length);

/// Decoy-state BB84 key-rate upper bound per pulse:
///   1/2 * T * intensity * exp(-intensity).
/// Maximised over intensity at exactly one photon per pulse.
double bb84_decoy_upper(double transmittance, double intensity);

/// Conclusive-detection probability for line-controlled BB84:
///   1/2 * (1 - exp(-T (1 - r_E) intensity)).
double bb84_lc_conclusive(double transmittance, double leak_fraction, double intensity);

/// Line-controlled BB84.  Eve holds a fraction r_E of each pulse; her
/// per-bit information is bounded by 1 - exp(-r_E * intensity) and the
/// rate is conclusive * (1 - eve_info).
RatePoint bb84_lc_rate(double transmittance, double leak_fraction, double intensity);

/// Conclusive probability for plain COW: 1 - exp(-T * intensity).
double cow_conclusive(double transmittance, double intensity);

/// Plain COW, conceding all fiber losses to Eve.  Her information is the
/// Holevo bound for the two pulse states of the lost fraction.
RatePoint cow_rate(double transmittance, double intensity);

/// Line-controlled COW: Eve's states carry only the leaked fraction r_E.
RatePoint cow_lc_rate(double transmittance, double leak_fraction, double intensity);

/// Plain DPS.  Key bits sit in phase differences of adjacent pulses, so
/// Eve's two effective states are +/- amplitudes over two slots and her
/// Holevo overlap exponent carries a factor 4 relative to COW.
RatePoint dps_rate(double transmittance, double intensity);

/// Line-controlled DPS.
RatePoint dps_lc_rate(double transmittance, double leak_fraction, double intensity);

/// Uniform dispatcher.  leak_fraction is ignored by the non-LC variants.
/// For BB84_DECOY_UPPER the returned conclusive_prob is the sifted
/// detection probability 1/2 (1 - exp(-T intensity)) and eve_info is the
/// multiphoton emission fraction 1 - (1 + intensity) exp(-intensity);
/// the rate bound itself does not consume either.
RatePoint protocol_rate(Protocol protocol, double transmittance, double leak_fraction,
                        double intensity);

/// Convenience overload evaluating the channel first.
RatePoint protocol_rate(const ProtocolSpec& spec, const ChannelParams& channel);

}  // namespace qkdlc
