#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "qkdlc/linecontrol.hpp"
#include "test_util.hpp"

using namespace qkdlc;
using testutil::close_rel;
using testutil::Rand;

TEST_CASE("required test intensity: shot noise against a 1% tap at 100 km") {
  CHECK(close_rel(required_test_intensity(0.01, 100.0), 1e6, 1e-12));
  CHECK(close_rel(required_test_intensity(1.0, 0.0), 1.0, 1e-12));
  CHECK(close_rel(required_test_intensity(0.1, 50.0), 1000.0, 1e-12));
  CHECK_THROWS_AS(required_test_intensity(0.0, 100.0), std::domain_error);
  CHECK_THROWS_AS(required_test_intensity(1.5, 100.0), std::domain_error);
  CHECK_THROWS_AS(required_test_intensity(0.01, -5.0), std::domain_error);
}

TEST_CASE("resolution and required intensity invert each other") {
  CHECK(close_rel(min_detectable_leakage(1e6, 100.0), 0.01, 1e-12));
  CHECK(close_rel(min_detectable_leakage(100.0, 0.0), 0.1, 1e-12));
  Rand rng(31);
  for (int i = 0; i < 200; ++i) {
    const double r = rng.log_uniform(1e-4, 1.0);
    const double d = rng.uniform(0.0, 200.0);
    CHECK(close_rel(min_detectable_leakage(required_test_intensity(r, d), d), r, 1e-12));
  }
  CHECK_THROWS_AS(min_detectable_leakage(0.0, 100.0), std::domain_error);
}

TEST_CASE("leak estimation recovers the true tap within its own error bar") {
  const ChannelParams tapped{.mu = 1.0 / 50.0, .distance_km = 100.0, .leak_fraction = 0.01};
  const TestPulsePlan plan{.intensity = 1e6, .n_pulses = 100, .slot_indices = {}};
  const LeakEstimate est = estimate_leakage(plan, tapped, 5);
  CHECK(est.usable);
  CHECK(est.n_used == 100);
  CHECK(std::abs(est.r_hat - 0.01) <= 3.0 * est.std_err);
  // Shot-noise prediction: sqrt(lambda / n) / (T n_A) with lambda ~ 9900.
  const double predicted = std::sqrt(9900.0 / 100.0) / (0.01 * 1e6);
  CHECK(close_rel(est.std_err, predicted, 0.2));
}

TEST_CASE("a sealed line estimates zero leak, within noise") {
  const ChannelParams sealed{.mu = 1.0 / 50.0, .distance_km = 50.0, .leak_fraction = 0.0};
  const TestPulsePlan plan{.intensity = 1e5, .n_pulses = 200, .slot_indices = {}};
  const LeakEstimate est = estimate_leakage(plan, sealed, 17);
  CHECK(std::abs(est.r_hat) <= 3.0 * est.std_err);
  CHECK(!est.suspiciously_negative());
}

TEST_CASE("error bars shrink with more pulses and more photons") {
  const ChannelParams ch{.mu = 1.0 / 50.0, .distance_km = 100.0, .leak_fraction = 0.01};
  const LeakEstimate few =
      estimate_leakage({.intensity = 1e6, .n_pulses = 100, .slot_indices = {}}, ch, 3);
  const LeakEstimate many =
      estimate_leakage({.intensity = 1e6, .n_pulses = 10000, .slot_indices = {}}, ch, 3);
  const double shrink = few.std_err / many.std_err;
  CHECK(shrink > 8.0);
  CHECK(shrink < 12.0);

  const LeakEstimate brighter =
      estimate_leakage({.intensity = 1e8, .n_pulses = 100, .slot_indices = {}}, ch, 3);
  CHECK(brighter.std_err < 0.2 * few.std_err);
}

TEST_CASE("sub-photon expected counts are flagged unusable") {
  const ChannelParams ch{.mu = 1.0 / 50.0, .distance_km = 100.0, .leak_fraction = 0.0};
  const LeakEstimate est =
      estimate_leakage({.intensity = 50.0, .n_pulses = 100, .slot_indices = {}}, ch, 1);
  CHECK(!est.usable);   // T * n_A = 0.5 expected photons
  CHECK(est.std_err > 0.0);
}

TEST_CASE("explicit slot schedules draw the same randomness as dense plans") {
  const ChannelParams ch{.mu = 1.0 / 50.0, .distance_km = 50.0, .leak_fraction = 0.02};
  TestPulsePlan dense{.intensity = 1e4, .n_pulses = 64, .slot_indices = {}};
  TestPulsePlan listed{.intensity = 1e4, .n_pulses = 64, .slot_indices = {}};
  for (std::uint64_t i = 0; i < 64; ++i) listed.slot_indices.push_back(i);
  const LeakEstimate a = estimate_leakage(dense, ch, 9);
  const LeakEstimate b = estimate_leakage(listed, ch, 9);
  CHECK(a.r_hat == b.r_hat);
  CHECK(a.std_err == b.std_err);

  // A sparse schedule interleaved with signal slots: estimates come from
  // the scheduled slots only.
  TestPulsePlan sparse{.intensity = 1e4, .n_pulses = 1000, .slot_indices = {}};
  for (std::uint64_t i = 0; i < 1000; i += 10) sparse.slot_indices.push_back(i);
  const LeakEstimate c = estimate_leakage(sparse, ch, 9);
  CHECK(c.n_used == 100);
  CHECK(std::abs(c.r_hat - 0.02) <= 3.0 * c.std_err);
}

TEST_CASE("test plan validation") {
  const ChannelParams ch{.mu = 1.0 / 50.0, .distance_km = 10.0, .leak_fraction = 0.0};
  CHECK_THROWS_AS(estimate_leakage({.intensity = 0.0, .n_pulses = 10, .slot_indices = {}}, ch, 0),
                  std::domain_error);
  CHECK_THROWS_AS(estimate_leakage({.intensity = 1e3, .n_pulses = 0, .slot_indices = {}}, ch, 0),
                  std::domain_error);
  CHECK_THROWS_AS(
      estimate_leakage({.intensity = 1e3, .n_pulses = 10, .slot_indices = {3, 3}}, ch, 0),
      std::domain_error);
  CHECK_THROWS_AS(
      estimate_leakage({.intensity = 1e3, .n_pulses = 10, .slot_indices = {5, 12}}, ch, 0),
      std::domain_error);
}

TEST_CASE("a deficit is suspicious only beyond three error bars") {
  const LeakEstimate fine{.r_hat = -0.02, .std_err = 0.01, .n_used = 10, .usable = true};
  CHECK(!fine.suspiciously_negative());
  const LeakEstimate broken{.r_hat = -0.05, .std_err = 0.01, .n_used = 10, .usable = true};
  CHECK(broken.suspiciously_negative());
}

// ---------------------------------------------------------------------------
// Reflectometry
// ---------------------------------------------------------------------------

TEST_CASE("clean synthetic trace: straight line at -0.2 dB/km") {
  const Reflectogram trace =
      synthesize_reflectogram(100.0, 1.0 / 50.0, {}, 0.1, 0.0, 0);
  REQUIRE(trace.samples.size() == 1001);
  CHECK(trace.samples[0] == 0.0);
  CHECK(close_rel(trace.samples[1000], -20.0, 1e-12));
  CHECK(close_rel(trace.length_km(), 100.0, 1e-12));
  for (std::size_t i = 0; i < trace.samples.size(); i += 97) {
    const bool on_line = close_rel(trace.samples[i], -0.2 * trace.position_km(i), 1e-12) ||
                         trace.samples[i] == 0.0;
    CHECK(on_line);
  }
}

TEST_CASE("loss steps lower everything downstream; spikes touch one sample") {
  const std::vector<FiberEvent> events{
      {.position_km = 42.0, .kind = EventKind::kLossStep, .magnitude_db = 0.5},
      {.position_km = 17.0, .kind = EventKind::kReflectiveSpike, .magnitude_db = 1.2},
  };
  const Reflectogram trace = synthesize_reflectogram(100.0, 1.0 / 50.0, events, 0.1, 0.0, 0);
  const Reflectogram clean = synthesize_reflectogram(100.0, 1.0 / 50.0, {}, 0.1, 0.0, 0);

  CHECK(close_rel(trace.samples[419] - clean.samples[419], 0.0, 1e-12));
  CHECK(std::abs(trace.samples[420] - clean.samples[420] + 0.5) < 1e-12);
  CHECK(std::abs(trace.samples[1000] - clean.samples[1000] + 0.5) < 1e-12);
  CHECK(std::abs(trace.samples[170] - clean.samples[170] - 1.2) < 1e-12);
  CHECK(trace.samples[171] == clean.samples[171]);
  CHECK(trace.samples[169] == clean.samples[169]);
}

TEST_CASE("event injection is additive") {
  const std::vector<FiberEvent> set_a{
      {.position_km = 30.0, .kind = EventKind::kLossStep, .magnitude_db = 0.4}};
  const std::vector<FiberEvent> set_b{
      {.position_km = 60.0, .kind = EventKind::kReflectiveSpike, .magnitude_db = 0.9}};
  std::vector<FiberEvent> both = set_a;
  both.insert(both.end(), set_b.begin(), set_b.end());

  const Reflectogram ab = synthesize_reflectogram(80.0, 0.02, both, 0.1, 0.03, 77);
  const Reflectogram a = synthesize_reflectogram(80.0, 0.02, set_a, 0.1, 0.03, 77);
  const Reflectogram b = synthesize_reflectogram(80.0, 0.02, set_b, 0.1, 0.03, 77);
  const Reflectogram none = synthesize_reflectogram(80.0, 0.02, {}, 0.1, 0.03, 77);
  for (std::size_t i = 0; i < ab.samples.size(); ++i) {
    const double reconstructed = a.samples[i] + (b.samples[i] - none.samples[i]);
    CHECK(std::abs(ab.samples[i] - reconstructed) < 1e-9);
  }
}

TEST_CASE("noise is reproducible per seed and has the requested spread") {
  const Reflectogram one = synthesize_reflectogram(100.0, 0.02, {}, 0.01, 0.02, 123);
  const Reflectogram two = synthesize_reflectogram(100.0, 0.02, {}, 0.01, 0.02, 123);
  CHECK(one.samples == two.samples);
  const Reflectogram other = synthesize_reflectogram(100.0, 0.02, {}, 0.01, 0.02, 124);
  CHECK(one.samples != other.samples);

  const Reflectogram clean = synthesize_reflectogram(100.0, 0.02, {}, 0.01, 0.0, 123);
  double ss = 0.0;
  for (std::size_t i = 0; i < one.samples.size(); ++i) {
    const double r = one.samples[i] - clean.samples[i];
    ss += r * r;
  }
  const double sigma = std::sqrt(ss / static_cast<double>(one.samples.size()));
  CHECK(sigma > 0.018);
  CHECK(sigma < 0.022);
}

TEST_CASE("synthesis input validation") {
  CHECK_THROWS_AS(synthesize_reflectogram(100.0, 0.02, {}, 0.0, 0.0, 0), std::domain_error);
  CHECK_THROWS_AS(synthesize_reflectogram(100.0, 0.0, {}, 0.1, 0.0, 0), std::domain_error);
  CHECK_THROWS_AS(synthesize_reflectogram(100.0, 0.02, {}, 0.1, -0.1, 0), std::domain_error);
  const std::vector<FiberEvent> outside{
      {.position_km = 150.0, .kind = EventKind::kLossStep, .magnitude_db = 0.5}};
  CHECK_THROWS_AS(synthesize_reflectogram(100.0, 0.02, outside, 0.1, 0.0, 0),
                  std::domain_error);
  const std::vector<FiberEvent> weightless{
      {.position_km = 10.0, .kind = EventKind::kLossStep, .magnitude_db = 0.0}};
  CHECK_THROWS_AS(synthesize_reflectogram(100.0, 0.02, weightless, 0.1, 0.0, 0),
                  std::domain_error);
}

TEST_CASE("baseline fit recovers the slope exactly on a clean trace") {
  const Reflectogram trace = synthesize_reflectogram(100.0, 1.0 / 50.0, {}, 0.1, 0.0, 0);
  const BaselineFit fit = fit_baseline(trace);
  CHECK(std::abs(fit.slope_db_per_km + 0.2) < 1e-9);
  CHECK(std::abs(fit.intercept_db) < 1e-9);
  CHECK(fit.residual_sigma_db < 1e-9);
}

TEST_CASE("baseline fit tolerates noise at the documented level") {
  const Reflectogram trace = synthesize_reflectogram(99.9, 1.0 / 50.0, {}, 0.1, 0.02, 2024);
  REQUIRE(trace.samples.size() == 1000);
  const BaselineFit fit = fit_baseline(trace);
  CHECK(std::abs(fit.slope_db_per_km + 0.2) < 0.01);
  CHECK(fit.residual_sigma_db > 0.015);
  CHECK(fit.residual_sigma_db < 0.025);
}

TEST_CASE("excluding a known event keeps it from biasing the fit") {
  const std::vector<FiberEvent> events{
      {.position_km = 50.0, .kind = EventKind::kReflectiveSpike, .magnitude_db = 8.0}};
  const Reflectogram trace = synthesize_reflectogram(100.0, 1.0 / 50.0, events, 0.1, 0.0, 0);
  const double positions[] = {50.0};
  const BaselineFit masked = fit_baseline(trace, positions);
  CHECK(std::abs(masked.slope_db_per_km + 0.2) < 1e-9);
  const BaselineFit biased = fit_baseline(trace);
  CHECK(std::abs(biased.slope_db_per_km + 0.2) > std::abs(masked.slope_db_per_km + 0.2));
}

TEST_CASE("baseline fit refuses starved inputs") {
  const Reflectogram tiny = synthesize_reflectogram(0.5, 0.02, {}, 0.1, 0.0, 0);
  CHECK_THROWS_AS(fit_baseline(tiny), std::domain_error);
  const Reflectogram trace = synthesize_reflectogram(10.0, 0.02, {}, 0.1, 0.0, 0);
  const double everything[] = {5.0};
  CHECK_THROWS_AS(fit_baseline(trace, everything, 100.0), std::domain_error);
}

TEST_CASE("identical traces raise no alarm") {
  const Reflectogram trace = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.02, 5);
  const DetectionResult result = detect_new_events(trace, trace, 0.1);
  CHECK(result.events.empty());
  CHECK(!result.alarm);
}

TEST_CASE("a half-dB step at 42 km is found, located and sized") {
  const Reflectogram baseline = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.02, 800);
  const std::vector<FiberEvent> events{
      {.position_km = 42.0, .kind = EventKind::kLossStep, .magnitude_db = 0.5}};
  const Reflectogram current = synthesize_reflectogram(100.0, 0.02, events, 0.1, 0.02, 801);
  const DetectionResult result = detect_new_events(current, baseline, 0.1);
  REQUIRE(result.events.size() == 1);
  CHECK(result.alarm);
  CHECK(result.events[0].kind == EventKind::kLossStep);
  CHECK(std::abs(result.events[0].position_km - 42.0) <= 0.1 + 1e-9);
  CHECK(std::abs(result.events[0].magnitude_db - 0.5) < 0.05);
}

TEST_CASE("changes below threshold stay quiet") {
  const Reflectogram baseline = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.01, 900);
  const std::vector<FiberEvent> events{
      {.position_km = 42.0, .kind = EventKind::kLossStep, .magnitude_db = 0.05}};
  const Reflectogram current = synthesize_reflectogram(100.0, 0.02, events, 0.1, 0.01, 901);
  const DetectionResult result = detect_new_events(current, baseline, 0.1);
  CHECK(result.events.empty());
  CHECK(!result.alarm);
}

TEST_CASE("a reflective spike is classified as such and does not fake a step") {
  const Reflectogram baseline = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.02, 810);
  const std::vector<FiberEvent> events{
      {.position_km = 17.0, .kind = EventKind::kReflectiveSpike, .magnitude_db = 1.2}};
  const Reflectogram current = synthesize_reflectogram(100.0, 0.02, events, 0.1, 0.02, 811);
  const DetectionResult result = detect_new_events(current, baseline, 0.1);
  REQUIRE(result.events.size() == 1);
  CHECK(result.events[0].kind == EventKind::kReflectiveSpike);
  CHECK(std::abs(result.events[0].position_km - 17.0) <= 0.1 + 1e-9);
  CHECK(std::abs(result.events[0].magnitude_db - 1.2) < 0.15);
}

TEST_CASE("a spike and a step in the same trace are reported in position order") {
  const Reflectogram baseline = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.02, 820);
  const std::vector<FiberEvent> events{
      {.position_km = 64.0, .kind = EventKind::kLossStep, .magnitude_db = 0.4},
      {.position_km = 17.0, .kind = EventKind::kReflectiveSpike, .magnitude_db = 1.2},
  };
  const Reflectogram current = synthesize_reflectogram(100.0, 0.02, events, 0.1, 0.02, 821);
  const DetectionResult result = detect_new_events(current, baseline, 0.1);
  REQUIRE(result.events.size() == 2);
  CHECK(result.events[0].kind == EventKind::kReflectiveSpike);
  CHECK(result.events[1].kind == EventKind::kLossStep);
  CHECK(result.events[0].position_km < result.events[1].position_km);
}

TEST_CASE("detection rejects mismatched trace geometry and bad thresholds") {
  const Reflectogram a = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.0, 0);
  const Reflectogram b = synthesize_reflectogram(50.0, 0.02, {}, 0.1, 0.0, 0);
  CHECK_THROWS_AS(detect_new_events(a, b, 0.1), std::invalid_argument);
  const Reflectogram c = synthesize_reflectogram(100.0, 0.02, {}, 0.2, 0.0, 0);
  CHECK_THROWS_AS(detect_new_events(a, c, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(detect_new_events(a, a, 0.0), std::domain_error);
}

TEST_CASE("randomized step scenarios: every event found, nothing invented") {
  Rand rng(4096);
  for (int scenario = 0; scenario < 10; ++scenario) {
    const int n_events = static_cast<int>(rng.integer(1, 3));
    std::vector<FiberEvent> truth;
    std::vector<double> positions;
    for (int e = 0; e < n_events; ++e) {
      double pos = 0.0;
      bool ok = false;
      for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
        pos = 0.1 * static_cast<double>(rng.integer(20, 980));
        ok = true;
        for (double p : positions) {
          if (std::abs(p - pos) < 2.0) ok = false;
        }
      }
      if (!ok) continue;
      positions.push_back(pos);
      truth.push_back({.position_km = pos,
                       .kind = EventKind::kLossStep,
                       .magnitude_db = rng.uniform(0.1, 1.0)});
    }
    const auto seed = static_cast<std::uint64_t>(7000 + scenario);
    const Reflectogram baseline = synthesize_reflectogram(100.0, 0.02, {}, 0.1, 0.02, seed);
    const Reflectogram current =
        synthesize_reflectogram(100.0, 0.02, truth, 0.1, 0.02, seed + 5000);
    const DetectionResult result = detect_new_events(current, baseline, 0.05);

    REQUIRE(result.events.size() == truth.size());
    for (const FiberEvent& expected : truth) {
      bool matched = false;
      for (const FiberEvent& found : result.events) {
        if (found.kind == EventKind::kLossStep &&
            std::abs(found.position_km - expected.position_km) <= 0.1 + 1e-9) {
          matched = true;
        }
      }
      CHECK_MESSAGE(matched, "missed step at ", expected.position_km, " km in scenario ",
                    scenario);
    }
  }
}
