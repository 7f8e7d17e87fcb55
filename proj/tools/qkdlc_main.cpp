// qkdlc: command-line front end for the line-controlled QKD toolkit.
//
// Exit codes: 0 success, 1 usage error, 2 domain/validation error,
// 3 I/O error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qkdlc/channel.hpp"
#include "qkdlc/io.hpp"
#include "qkdlc/keyrate.hpp"
#include "qkdlc/linecontrol.hpp"
#include "qkdlc/montecarlo.hpp"
#include "qkdlc/optimize.hpp"

namespace {

using nlohmann::json;

/// Command-line misuse that CLI11 itself cannot catch (bad enum names,
/// malformed ranges); mapped to exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// "start:stop:count", "start:stop:logCOUNT", "a,b,c" or a single number.
/// Counted ranges are inclusive of both endpoints.
std::vector<double> parse_value_list(const std::string& text) {
  const auto to_double = [&](const std::string& s) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || end != begin + s.size()) {
      throw UsageError("cannot parse number '" + s + "' in '" + text + "'");
    }
    return v;
  };

  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (true) {
      const std::size_t colon = text.find(':', start);
      if (colon == std::string::npos) {
        parts.push_back(text.substr(start));
        break;
      }
      parts.push_back(text.substr(start, colon - start));
      start = colon + 1;
    }
    if (parts.size() != 3) {
      throw UsageError("range '" + text + "' must be start:stop:count");
    }
    const double lo = to_double(parts[0]);
    const double hi = to_double(parts[1]);
    bool log_spaced = false;
    std::string count_text = parts[2];
    if (count_text.rfind("log", 0) == 0) {
      log_spaced = true;
      count_text = count_text.substr(3);
    }
    char* end = nullptr;
    const long count = std::strtol(count_text.c_str(), &end, 10);
    if (end == count_text.c_str() || *end != '\0' || count < 1 || count > 1000000) {
      throw UsageError("bad point count in range '" + text + "'");
    }
    if (log_spaced && !(lo > 0.0 && hi > 0.0)) {
      throw UsageError("log-spaced range '" + text + "' needs positive endpoints");
    }
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(count));
    if (count == 1) {
      values.push_back(lo);
      return values;
    }
    for (long i = 0; i < count; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(count - 1);
      values.push_back(log_spaced ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    return values;
  }

  std::vector<double> values;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        comma == std::string::npos ? text.substr(start) : text.substr(start, comma - start);
    values.push_back(to_double(item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return values;
}

qkdlc::Protocol parse_protocol(const std::string& name) {
  if (const auto p = qkdlc::protocol_from_name(name)) return *p;
  throw UsageError("unknown protocol '" + name +
                   "' (expected bb84-decoy-upper, bb84-lc, cow, cow-lc, dps or dps-lc)");
}

qkdlc::ProtocolPair parse_pair(const std::string& name) {
  if (const auto p = qkdlc::pair_from_name(name)) return *p;
  throw UsageError("unknown protocol pair '" + name + "' (expected bb84, cow or dps)");
}

qkdlc::Attack parse_attack(const std::string& name) {
  if (const auto a = qkdlc::attack_from_name(name)) return *a;
  throw UsageError("unknown attack '" + name +
                   "' (expected none, leak-tap, all-losses-bs or pns)");
}

qkdlc::FiberEvent parse_event(const std::string& text) {
  const std::size_t c1 = text.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : text.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos) {
    throw UsageError("event '" + text + "' must be position:kind:magnitude");
  }
  const std::string pos_text = text.substr(0, c1);
  const std::string kind_text = text.substr(c1 + 1, c2 - c1 - 1);
  const std::string mag_text = text.substr(c2 + 1);
  const auto kind = qkdlc::event_kind_from_name(kind_text);
  if (!kind) {
    throw UsageError("unknown event kind '" + kind_text + "' (expected step or spike)");
  }
  char* end = nullptr;
  const double pos = std::strtod(pos_text.c_str(), &end);
  if (end != pos_text.c_str() + pos_text.size() || pos_text.empty()) {
    throw UsageError("bad event position in '" + text + "'");
  }
  const double mag = std::strtod(mag_text.c_str(), &end);
  if (end != mag_text.c_str() + mag_text.size() || mag_text.empty()) {
    throw UsageError("bad event magnitude in '" + text + "'");
  }
  return qkdlc::FiberEvent{.position_km = pos, .kind = *kind, .magnitude_db = mag};
}

unsigned resolve_workers(const CLI::Option* workers_opt, unsigned flag_value) {
  if (workers_opt->count() > 0) {
    return std::max(1u, flag_value);
  }
  if (const char* env = std::getenv("QKDLC_WORKERS")) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 4096) {
      return static_cast<unsigned>(v);
    }
    std::cerr << "warning: ignoring unparseable QKDLC_WORKERS='" << env << "'\n";
  }
  return 1;
}

void write_text(const std::string& text, const std::optional<std::string>& path) {
  if (!path) {
    std::cout << text;
    return;
  }
  std::ofstream out(*path, std::ios::binary);
  if (!out) throw qkdlc::IoError("cannot open '" + *path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw qkdlc::IoError("write to '" + *path + "' failed");
}

// NaN/inf have no JSON literals; encode them as strings so reports stay
// loadable.
json json_number(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

json outcome_to_json(const qkdlc::SimOutcome& o) {
  return json{{"n_pulses", o.n_pulses},
              {"n_conclusive", o.n_conclusive},
              {"n_eve_nonvacuum", o.n_eve_nonvacuum},
              {"photons_emitted", o.photons_emitted},
              {"photons_to_eve", o.photons_to_eve},
              {"photons_to_bob", o.photons_to_bob},
              {"photons_dissipated", o.photons_dissipated},
              {"est_conclusive_prob", o.est_conclusive_prob},
              {"conclusive_std_err", o.conclusive_std_err},
              {"est_eve_nonvacuum_prob", o.est_eve_nonvacuum_prob},
              {"eve_nonvacuum_std_err", o.eve_nonvacuum_std_err}};
}

// Injects config-file values as trailing long options for any flag the
// command line left unset.  Keys mirror long option names without the
// leading dashes; booleans inject bare flags, arrays inject the option
// repeatedly.
std::vector<std::string> apply_config_file(const std::vector<std::string>& args) {
  std::optional<std::string> config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    }
  }
  if (!config_path) return args;

  std::ifstream in(*config_path, std::ios::binary);
  if (!in) throw qkdlc::IoError("cannot open config file '" + *config_path + "'");
  json config;
  try {
    in >> config;
  } catch (const json::exception& e) {
    throw std::invalid_argument("config file '" + *config_path + "': " + e.what());
  }
  if (!config.is_object()) {
    throw std::invalid_argument("config file '" + *config_path + "' must hold a JSON object");
  }

  std::vector<std::string> augmented = args;
  for (const auto& [key, value] : config.items()) {
    const std::string flag = "--" + key;
    const bool already_set =
        std::any_of(args.begin(), args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    if (already_set) continue;
    const auto append_scalar = [&](const json& v) {
      if (v.is_boolean()) {
        if (v.get<bool>()) augmented.push_back(flag);
      } else if (v.is_string()) {
        augmented.push_back(flag);
        augmented.push_back(v.get<std::string>());
      } else if (!v.is_null()) {
        augmented.push_back(flag);
        augmented.push_back(v.dump());
      }
    };
    if (value.is_array()) {
      for (const json& item : value) append_scalar(item);
    } else {
      append_scalar(value);
    }
  }
  return augmented;
}

struct CommonChannelOpts {
  double distance_km = 0.0;
  double leak_fraction = 0.0;
  double mu = qkdlc::kDefaultAttenuationPerKm;

  qkdlc::ChannelParams channel() const {
    return qkdlc::ChannelParams{.mu = mu, .distance_km = distance_km,
                                .leak_fraction = leak_fraction};
  }
};

int run(std::vector<std::string> args) {
  CLI::App app{"Key-rate analysis and channel monitoring for line-controlled QKD"};
  app.require_subcommand(1);
  app.fallthrough(true);
  std::string config_path;
  app.add_option("--config", config_path, "JSON file whose keys mirror long option names");
  unsigned workers_flag = 1;
  CLI::Option* workers_opt =
      app.add_option("--workers", workers_flag, "worker threads (default: QKDLC_WORKERS or 1)");

  // ---- rate ----
  auto* rate_cmd = app.add_subcommand("rate", "Evaluate one protocol at one operating point");
  {
    static std::string protocol;
    static CommonChannelOpts ch;
    static double intensity = 0.0;
    static std::optional<std::string> output;
    rate_cmd->add_option("--protocol", protocol, "protocol name")->required();
    rate_cmd->add_option("--distance", ch.distance_km, "fiber length, km")->required();
    rate_cmd->add_option("--leak", ch.leak_fraction, "leak fraction r_E (default 0)");
    rate_cmd->add_option("--mu", ch.mu, "attenuation coefficient, km^-1 (default 0.02)");
    rate_cmd->add_option("--intensity", intensity, "mean photons per pulse")->required();
    rate_cmd->add_option("--output", output, "write JSON here instead of stdout");
    rate_cmd->callback([&] {
      const qkdlc::Protocol p = parse_protocol(protocol);
      const double t = qkdlc::transmittance(ch.channel());
      const qkdlc::RatePoint point = qkdlc::protocol_rate(p, t, ch.leak_fraction, intensity);
      const json out{{"protocol", protocol},
                     {"distance_km", ch.distance_km},
                     {"leak_fraction", ch.leak_fraction},
                     {"mu", ch.mu},
                     {"intensity", intensity},
                     {"transmittance", t},
                     {"rate", point.rate},
                     {"conclusive_prob", point.conclusive_prob},
                     {"eve_info", point.eve_info}};
      write_text(out.dump(2) + "\n", output);
    });
  }

  // ---- optimize ----
  auto* opt_cmd = app.add_subcommand("optimize", "Find the rate-maximising intensity");
  {
    static std::string protocol;
    static CommonChannelOpts ch;
    static std::optional<std::string> output;
    static qkdlc::IntensitySearch search;
    opt_cmd->add_option("--protocol", protocol, "protocol name")->required();
    opt_cmd->add_option("--distance", ch.distance_km, "fiber length, km")->required();
    opt_cmd->add_option("--leak", ch.leak_fraction, "leak fraction r_E (default 0)");
    opt_cmd->add_option("--mu", ch.mu, "attenuation coefficient, km^-1 (default 0.02)");
    opt_cmd->add_option("--min-intensity", search.min_intensity, "search domain lower edge");
    opt_cmd->add_option("--max-intensity", search.max_intensity, "search domain upper edge");
    opt_cmd->add_option("--output", output, "write JSON here instead of stdout");
    opt_cmd->callback([&] {
      const qkdlc::Protocol p = parse_protocol(protocol);
      const double t = qkdlc::transmittance(ch.channel());
      const auto rate_fn = [&](double x) {
        return qkdlc::protocol_rate(p, t, ch.leak_fraction, x).rate;
      };
      const qkdlc::IntensityOptimum opt = qkdlc::optimal_intensity(rate_fn, search);
      const json out{{"protocol", protocol},
                     {"distance_km", ch.distance_km},
                     {"leak_fraction", ch.leak_fraction},
                     {"mu", ch.mu},
                     {"transmittance", t},
                     {"intensity", opt.intensity},
                     {"rate", opt.rate},
                     {"degenerate", opt.degenerate}};
      write_text(out.dump(2) + "\n", output);
    });
  }

  // ---- sweep ----
  auto* sweep_cmd =
      app.add_subcommand("sweep", "Compare a line-controlled protocol against its baseline "
                                  "over a distance x leak grid");
  {
    static std::string pair_name_text = "bb84";
    static std::string distance_range, leak_range;
    static double mu = qkdlc::kDefaultAttenuationPerKm;
    static std::optional<double> fixed_intensity;
    static std::string format = "csv";
    static std::string value_column = "ratio";
    static std::string scale_name = "linear";
    static std::string output;
    sweep_cmd->add_option("--pair", pair_name_text, "protocol pair: bb84, cow or dps");
    sweep_cmd->add_option("--distance", distance_range, "distances, start:stop:count or list")
        ->required();
    sweep_cmd->add_option("--leak", leak_range, "leak fractions, start:stop:[log]count or list")
        ->required();
    sweep_cmd->add_option("--mu", mu, "attenuation coefficient, km^-1 (default 0.02)");
    sweep_cmd->add_option("--fixed-intensity", fixed_intensity,
                          "evaluate both variants at this intensity instead of optimising");
    sweep_cmd->add_option("--format", format, "csv (default), json or svg");
    sweep_cmd->add_option("--value", value_column, "svg only: column to render (default ratio)");
    sweep_cmd->add_option("--scale", scale_name, "svg only: linear (default) or log");
    sweep_cmd->add_option("--output", output, "output file")->required();
    sweep_cmd->callback([&] {
      qkdlc::SweepGrid grid;
      grid.pair = parse_pair(pair_name_text);
      grid.distances_km = parse_value_list(distance_range);
      grid.leak_fractions = parse_value_list(leak_range);
      grid.mu = mu;
      grid.fixed_intensity = fixed_intensity;
      const unsigned workers = resolve_workers(workers_opt, workers_flag);
      const std::vector<qkdlc::SweepRecord> records = qkdlc::sweep(grid, workers);

      if (format == "csv") {
        qkdlc::save_sweep_csv(records, output);
      } else if (format == "json") {
        json out;
        out["config"] = {{"pair", pair_name_text},
                         {"mu", mu},
                         {"distances_km", grid.distances_km},
                         {"leak_fractions", grid.leak_fractions},
                         {"workers", workers}};
        if (fixed_intensity) out["config"]["fixed_intensity"] = *fixed_intensity;
        out["records"] = json::array();
        for (const qkdlc::SweepRecord& r : records) {
          out["records"].push_back({{"distance_km", r.distance_km},
                                    {"leak_fraction", r.leak_fraction},
                                    {"intensity_lc", r.intensity_lc},
                                    {"intensity_base", r.intensity_base},
                                    {"rate_lc", r.rate_lc},
                                    {"rate_base", r.rate_base},
                                    {"ratio", json_number(r.ratio)}});
        }
        write_text(out.dump(2) + "\n", output);
      } else if (format == "svg") {
        const auto column = qkdlc::column_from_name(value_column);
        if (!column) throw UsageError("unknown value column '" + value_column + "'");
        if (scale_name != "linear" && scale_name != "log") {
          throw UsageError("unknown scale '" + scale_name + "' (expected linear or log)");
        }
        const auto scale = scale_name == "log" ? qkdlc::ColorScale::kLog
                                               : qkdlc::ColorScale::kLinear;
        write_text(qkdlc::render_svg_heatmap(records, *column, scale), output);
      } else {
        throw UsageError("unknown format '" + format + "' (expected csv, json or svg)");
      }
      std::cout << "wrote " << records.size() << " records to " << output << "\n";
    });
  }

  // ---- simulate ----
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo pulse-train simulation");
  {
    static std::string protocol = "bb84-lc";
    static std::string attack = "none";
    static CommonChannelOpts ch;
    static double intensity = 1.0;
    static std::uint64_t pulses = 100000;
    static std::uint64_t seed = 0;
    static bool validate_flag = false;
    static std::optional<std::string> output;
    sim_cmd->add_option("--protocol", protocol, "protocol name")->required();
    sim_cmd->add_option("--distance", ch.distance_km, "fiber length, km")->required();
    sim_cmd->add_option("--leak", ch.leak_fraction, "leak fraction r_E (default 0)");
    sim_cmd->add_option("--mu", ch.mu, "attenuation coefficient, km^-1 (default 0.02)");
    sim_cmd->add_option("--intensity", intensity, "mean photons per pulse")->required();
    sim_cmd->add_option("--attack", attack, "none, leak-tap, all-losses-bs or pns");
    sim_cmd->add_option("--pulses", pulses, "number of pulses (default 100000)");
    sim_cmd->add_option("--seed", seed, "random seed (default 0)");
    sim_cmd->add_flag("--validate", validate_flag, "compare against closed-form probabilities");
    sim_cmd->add_option("--output", output, "write JSON here instead of stdout");
    sim_cmd->callback([&] {
      qkdlc::SimConfig config;
      config.protocol = {parse_protocol(protocol), intensity};
      config.channel = ch.channel();
      config.attack = parse_attack(attack);
      config.n_pulses = pulses;
      config.seed = seed;
      const unsigned workers = resolve_workers(workers_opt, workers_flag);

      json out{{"protocol", protocol},
               {"attack", attack},
               {"distance_km", ch.distance_km},
               {"leak_fraction", ch.leak_fraction},
               {"mu", ch.mu},
               {"intensity", intensity},
               {"n_pulses", pulses},
               {"seed", seed},
               {"workers", workers}};
      if (validate_flag) {
        const qkdlc::ValidationReport report = qkdlc::validate_against_analytic(config, workers);
        out["outcome"] = outcome_to_json(report.outcome);
        out["checks"] = json::array();
        for (const qkdlc::ValidationCheck& c : report.checks) {
          out["checks"].push_back({{"quantity", c.quantity},
                                   {"analytic", c.analytic},
                                   {"empirical", c.empirical},
                                   {"z_score", json_number(c.z_score)}});
        }
        out["pass"] = report.pass;
      } else {
        out["outcome"] = outcome_to_json(qkdlc::run_simulation(config, workers));
      }
      write_text(out.dump(2) + "\n", output);
    });
  }

  // ---- transmit-test ----
  auto* tt_cmd = app.add_subcommand(
      "transmit-test", "Test-pulse planning and leak estimation for transmittometry");
  {
    static CommonChannelOpts ch;
    static std::optional<double> min_leak;
    static std::optional<double> intensity;
    static std::optional<std::uint64_t> pulses;
    static std::uint64_t seed = 0;
    static std::optional<std::string> output;
    tt_cmd->add_option("--distance", ch.distance_km, "fiber length, km")->required();
    tt_cmd->add_option("--mu", ch.mu, "attenuation coefficient, km^-1 (default 0.02)");
    tt_cmd->add_option("--leak", ch.leak_fraction, "true leak fraction for the simulated run");
    tt_cmd->add_option("--min-leak", min_leak, "report the intensity resolving this leak");
    tt_cmd->add_option("--intensity", intensity, "test-pulse intensity");
    tt_cmd->add_option("--pulses", pulses, "simulate and estimate over this many test pulses");
    tt_cmd->add_option("--seed", seed, "random seed (default 0)");
    tt_cmd->add_option("--output", output, "write JSON here instead of stdout");
    tt_cmd->callback([&] {
      if (!min_leak && !intensity) {
        throw UsageError("transmit-test needs --min-leak and/or --intensity");
      }
      json out{{"distance_km", ch.distance_km}, {"mu", ch.mu}};
      if (min_leak) {
        out["min_leak"] = *min_leak;
        out["required_test_intensity"] =
            qkdlc::required_test_intensity(*min_leak, ch.distance_km, ch.mu);
      }
      if (intensity) {
        out["intensity"] = *intensity;
        out["min_detectable_leakage"] =
            qkdlc::min_detectable_leakage(*intensity, ch.distance_km, ch.mu);
      }
      if (pulses) {
        if (!intensity) {
          throw UsageError("transmit-test --pulses needs --intensity");
        }
        const qkdlc::TestPulsePlan plan{
            .intensity = *intensity, .n_pulses = *pulses, .slot_indices = {}};
        const qkdlc::LeakEstimate est = qkdlc::estimate_leakage(plan, ch.channel(), seed);
        out["true_leak"] = ch.leak_fraction;
        out["seed"] = seed;
        out["estimate"] = {{"r_hat", est.r_hat},
                           {"std_err", est.std_err},
                           {"n_used", est.n_used},
                           {"usable", est.usable},
                           {"suspiciously_negative", est.suspiciously_negative()}};
      }
      write_text(out.dump(2) + "\n", output);
    });
  }

  // ---- reflect-synth ----
  auto* rs_cmd = app.add_subcommand("reflect-synth", "Synthesize an OTDR backscatter trace");
  {
    static double length = 0.0;
    static double spacing = 0.1;
    static double noise = 0.0;
    static double mu = qkdlc::kDefaultAttenuationPerKm;
    static std::uint64_t seed = 0;
    static std::vector<std::string> event_texts;
    static std::string output;
    rs_cmd->add_option("--length", length, "trace length, km")->required();
    rs_cmd->add_option("--spacing", spacing, "sample spacing, km (default 0.1)");
    rs_cmd->add_option("--noise", noise, "Gaussian noise sigma, dB (default 0)");
    rs_cmd->add_option("--mu", mu, "attenuation coefficient, km^-1 (default 0.02)");
    rs_cmd->add_option("--seed", seed, "noise seed (default 0)");
    rs_cmd->add_option("--event", event_texts,
                       "position:kind:magnitude with kind step|spike; repeatable");
    rs_cmd->add_option("--output", output, "CSV output path (sidecar written next to it)")
        ->required();
    rs_cmd->callback([&] {
      std::vector<qkdlc::FiberEvent> events;
      events.reserve(event_texts.size());
      for (const std::string& text : event_texts) events.push_back(parse_event(text));
      const qkdlc::Reflectogram trace =
          qkdlc::synthesize_reflectogram(length, mu, events, spacing, noise, seed);
      qkdlc::save_reflectogram(trace, output);
      std::cout << "wrote " << trace.samples.size() << " samples to " << output << "\n";
    });
  }

  // ---- reflect-detect ----
  auto* rd_cmd = app.add_subcommand(
      "reflect-detect", "Compare a trace against a reference and report new events");
  {
    static std::string current_path, baseline_path;
    static double threshold = 0.1;
    static std::optional<std::string> output;
    rd_cmd->add_option("--current", current_path, "fresh trace CSV")->required();
    rd_cmd->add_option("--baseline", baseline_path, "reference trace CSV")->required();
    rd_cmd->add_option("--threshold", threshold, "step threshold, dB (default 0.1)");
    rd_cmd->add_option("--output", output, "write JSON here instead of stdout");
    rd_cmd->callback([&] {
      const qkdlc::Reflectogram current = qkdlc::load_reflectogram(current_path);
      const qkdlc::Reflectogram baseline = qkdlc::load_reflectogram(baseline_path);
      const qkdlc::DetectionResult result =
          qkdlc::detect_new_events(current, baseline, threshold);
      json out{{"current", current_path},
               {"baseline", baseline_path},
               {"threshold_db", threshold},
               {"alarm", result.alarm},
               {"events", json::array()}};
      for (const qkdlc::FiberEvent& e : result.events) {
        out["events"].push_back({{"position_km", e.position_km},
                                 {"kind", std::string(qkdlc::event_kind_name(e.kind))},
                                 {"magnitude_db", e.magnitude_db}});
      }
      write_text(out.dump(2) + "\n", output);
    });
  }

  // ---- heatmap ----
  auto* hm_cmd = app.add_subcommand("heatmap", "Render a sweep CSV as an SVG heatmap");
  {
    static std::string input;
    static std::string value_column = "ratio";
    static std::string scale_name = "linear";
    static std::string output;
    hm_cmd->add_option("--input", input, "sweep CSV path")->required();
    hm_cmd->add_option("--value", value_column,
                       "column: ratio (default), rate-lc, rate-base, intensity-lc, intensity-base");
    hm_cmd->add_option("--scale", scale_name, "linear (default) or log");
    hm_cmd->add_option("--output", output, "SVG output path")->required();
    hm_cmd->callback([&] {
      const auto column = qkdlc::column_from_name(value_column);
      if (!column) throw UsageError("unknown value column '" + value_column + "'");
      if (scale_name != "linear" && scale_name != "log") {
        throw UsageError("unknown scale '" + scale_name + "' (expected linear or log)");
      }
      const std::vector<qkdlc::SweepRecord> records = qkdlc::load_sweep_csv(input);
      const auto scale =
          scale_name == "log" ? qkdlc::ColorScale::kLog : qkdlc::ColorScale::kLinear;
      write_text(qkdlc::render_svg_heatmap(records, *column, scale), output);
      std::cout << "wrote heatmap to " << output << "\n";
    });
  }

  try {
    // CLI11 wants reversed arguments without the program name.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config_file(args);
    return run(std::move(args));
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const qkdlc::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::domain_error& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
