#include "qkdlc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

#include "qkdlc/rng.hpp"

namespace qkdlc {
namespace {

struct Tally {
  std::uint64_t conclusive = 0;
  std::uint64_t eve_nonvacuum = 0;
  std::uint64_t photons = 0;
  std::uint64_t to_eve = 0;
  std::uint64_t to_bob = 0;

  Tally& operator+=(const Tally& o) {
    conclusive += o.conclusive;
    eve_nonvacuum += o.eve_nonvacuum;
    photons += o.photons;
    to_eve += o.to_eve;
    to_bob += o.to_bob;
    return *this;
  }
};

void validate(const SimConfig& config) {
  qkdlc::validate(config.channel);
  if (!(config.protocol.intensity >= 0.0)) {
    throw std::domain_error("montecarlo: intensity must be non-negative");
  }
  if (config.n_pulses == 0) {
    throw std::domain_error("montecarlo: need at least one pulse");
  }
}

// One pulse: draw the photon number, route every photon, apply the basis
// coin.  The draw order is fixed, so a (seed, index) pair fully determines
// the outcome independent of scheduling.
Tally simulate_pulse(const SimConfig& config, double t, std::uint64_t index) {
  CounterRng rng(config.seed, index);
  const std::uint64_t n = sample_poisson(config.protocol.intensity, rng);

  Tally tally;
  tally.photons = n;
  switch (config.attack) {
    case Attack::kNone:
    case Attack::kLeakTap: {
      const double tap =
          config.attack == Attack::kLeakTap ? config.channel.leak_fraction : 0.0;
      for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.bernoulli(tap)) {
          ++tally.to_eve;
        } else if (rng.bernoulli(t)) {
          ++tally.to_bob;
        }
      }
      break;
    }
    case Attack::kAllLossesBeamSplit: {
      for (std::uint64_t i = 0; i < n; ++i) {
        if (rng.bernoulli(1.0 - t)) {
          ++tally.to_eve;
        } else {
          ++tally.to_bob;
        }
      }
      break;
    }
    case Attack::kPhotonNumberSplit: {
      if (n >= 2) {
        tally.to_eve = n - 1;
        tally.to_bob = 1;  // forwarded over Eve's lossless line
      } else if (n == 1 && rng.bernoulli(t)) {
        tally.to_bob = 1;
      }
      break;
    }
  }

  bool conclusive = tally.to_bob >= 1;
  if (conclusive && has_basis_sifting(config.protocol.protocol)) {
    conclusive = rng.bernoulli(0.5);
  }
  tally.conclusive = conclusive ? 1 : 0;
  tally.eve_nonvacuum = tally.to_eve >= 1 ? 1 : 0;
  return tally;
}

// Binomial standard error with the success probability clamped into
// (0, 1) so the reported error is positive even for all-or-nothing counts.
double binomial_std_err(double p_hat, std::uint64_t n) {
  const double nd = static_cast<double>(n);
  const double p = std::clamp(p_hat, 1.0 / (nd + 1.0), nd / (nd + 1.0));
  return std::sqrt(p * (1.0 - p) / nd);
}

double z_score(double empirical, double analytic, std::uint64_t n) {
  const double variance = analytic * (1.0 - analytic) / static_cast<double>(n);
  if (variance <= 0.0) {
    return empirical == analytic ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (empirical - analytic) / std::sqrt(variance);
}

}  // namespace

std::string_view attack_name(Attack attack) {
  switch (attack) {
    case Attack::kNone: return "none";
    case Attack::kLeakTap: return "leak-tap";
    case Attack::kAllLossesBeamSplit: return "all-losses-bs";
    case Attack::kPhotonNumberSplit: return "pns";
  }
  throw std::logic_error("montecarlo: unhandled attack enum value");
}

std::optional<Attack> attack_from_name(std::string_view name) {
  for (Attack a : {Attack::kNone, Attack::kLeakTap, Attack::kAllLossesBeamSplit,
                   Attack::kPhotonNumberSplit}) {
    if (name == attack_name(a)) return a;
  }
  return std::nullopt;
}

SimOutcome run_simulation(const SimConfig& config, unsigned workers) {
  validate(config);
  const double t = transmittance(config.channel);
  const std::uint64_t n = config.n_pulses;

  const unsigned hw = std::max(1u, workers);
  const std::uint64_t n_threads = std::min<std::uint64_t>(hw, n);
  std::vector<Tally> partial(n_threads);

  if (n_threads == 1) {
    for (std::uint64_t i = 0; i < n; ++i) partial[0] += simulate_pulse(config, t, i);
  } else {
    const std::uint64_t chunk = (n + n_threads - 1) / n_threads;
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    for (std::uint64_t w = 0; w < n_threads; ++w) {
      const std::uint64_t begin = w * chunk;
      const std::uint64_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        Tally local;
        for (std::uint64_t i = begin; i < end; ++i) local += simulate_pulse(config, t, i);
        partial[w] = local;
      });
    }
    for (auto& th : pool) th.join();
  }

  Tally total;
  for (const Tally& p : partial) total += p;

  SimOutcome out;
  out.n_pulses = n;
  out.n_conclusive = total.conclusive;
  out.n_eve_nonvacuum = total.eve_nonvacuum;
  out.photons_emitted = total.photons;
  out.photons_to_eve = total.to_eve;
  out.photons_to_bob = total.to_bob;
  out.photons_dissipated = total.photons - total.to_eve - total.to_bob;
  const double nd = static_cast<double>(n);
  out.est_conclusive_prob = static_cast<double>(total.conclusive) / nd;
  out.conclusive_std_err = binomial_std_err(out.est_conclusive_prob, n);
  out.est_eve_nonvacuum_prob = static_cast<double>(total.eve_nonvacuum) / nd;
  out.eve_nonvacuum_std_err = binomial_std_err(out.est_eve_nonvacuum_prob, n);
  return out;
}

PulseProbabilities analytic_pulse_probabilities(const SimConfig& config) {
  validate(config);
  const double t = transmittance(config.channel);
  const double x = config.protocol.intensity;
  const double r = config.channel.leak_fraction;
  const double sift = has_basis_sifting(config.protocol.protocol) ? 0.5 : 1.0;

  PulseProbabilities p;
  switch (config.attack) {
    case Attack::kNone:
      p.conclusive = sift * -std::expm1(-t * x);
      p.eve_nonvacuum = 0.0;
      break;
    case Attack::kLeakTap:
      // Independent thinning keeps both arms Poisson.
      p.conclusive = sift * -std::expm1(-t * (1.0 - r) * x);
      p.eve_nonvacuum = -std::expm1(-r * x);
      break;
    case Attack::kAllLossesBeamSplit:
      p.conclusive = sift * -std::expm1(-t * x);
      p.eve_nonvacuum = -std::expm1(-(1.0 - t) * x);
      break;
    case Attack::kPhotonNumberSplit: {
      const double p1 = x * std::exp(-x);
      const double p2plus = std::max(0.0, -std::expm1(-x) - p1);
      p.conclusive = sift * (p1 * t + p2plus);
      p.eve_nonvacuum = p2plus;
      break;
    }
  }
  return p;
}

ValidationReport validate_against_analytic(const SimConfig& config, unsigned workers) {
  const PulseProbabilities expected = analytic_pulse_probabilities(config);
  ValidationReport report;
  report.outcome = run_simulation(config, workers);

  report.checks.push_back(
      {"conclusive_prob", expected.conclusive, report.outcome.est_conclusive_prob,
       z_score(report.outcome.est_conclusive_prob, expected.conclusive, config.n_pulses)});
  report.checks.push_back({"eve_nonvacuum_prob", expected.eve_nonvacuum,
                           report.outcome.est_eve_nonvacuum_prob,
                           z_score(report.outcome.est_eve_nonvacuum_prob,
                                   expected.eve_nonvacuum, config.n_pulses)});

  report.pass = std::all_of(report.checks.begin(), report.checks.end(),
                            [](const ValidationCheck& c) { return std::abs(c.z_score) <= 3.0; });
  return report;
}

}  // namespace qkdlc
