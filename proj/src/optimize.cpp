#include "qkdlc/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

namespace qkdlc {
namespace {

void validate(const IntensitySearch& search) {
  if (!(search.min_intensity > 0.0) || !(search.max_intensity > search.min_intensity)) {
    throw std::domain_error("optimize: need 0 < min_intensity < max_intensity");
  }
  if (search.scan_points < 4) {
    throw std::domain_error("optimize: coarse scan needs at least 4 points");
  }
  if (!(search.rel_tol > 0.0)) {
    throw std::domain_error("optimize: relative tolerance must be positive");
  }
}

void validate(const SweepGrid& grid) {
  if (grid.distances_km.empty() || grid.leak_fractions.empty()) {
    throw std::domain_error("optimize: sweep grid axes must be non-empty");
  }
  if (!std::is_sorted(grid.distances_km.begin(), grid.distances_km.end(),
                      std::less_equal<double>())) {
    throw std::domain_error("optimize: sweep distances must be strictly increasing");
  }
  if (!std::is_sorted(grid.leak_fractions.begin(), grid.leak_fractions.end(),
                      std::less_equal<double>())) {
    throw std::domain_error("optimize: sweep leak fractions must be strictly increasing");
  }
}

}  // namespace

std::string_view pair_name(ProtocolPair pair) {
  switch (pair) {
    case ProtocolPair::kBb84: return "bb84";
    case ProtocolPair::kCow: return "cow";
    case ProtocolPair::kDps: return "dps";
  }
  throw std::logic_error("optimize: unhandled protocol pair");
}

std::optional<ProtocolPair> pair_from_name(std::string_view name) {
  for (ProtocolPair p : {ProtocolPair::kBb84, ProtocolPair::kCow, ProtocolPair::kDps}) {
    if (name == pair_name(p)) return p;
  }
  return std::nullopt;
}

Protocol lc_variant(ProtocolPair pair) {
  switch (pair) {
    case ProtocolPair::kBb84: return Protocol::kBb84Lc;
    case ProtocolPair::kCow: return Protocol::kCowLc;
    case ProtocolPair::kDps: return Protocol::kDpsLc;
  }
  throw std::logic_error("optimize: unhandled protocol pair");
}

Protocol baseline_variant(ProtocolPair pair) {
  switch (pair) {
    case ProtocolPair::kBb84: return Protocol::kBb84DecoyUpper;
    case ProtocolPair::kCow: return Protocol::kCow;
    case ProtocolPair::kDps: return Protocol::kDps;
  }
  throw std::logic_error("optimize: unhandled protocol pair");
}

IntensityOptimum optimal_intensity(const std::function<double(double)>& rate_of_intensity,
                                   const IntensitySearch& search) {
  validate(search);

  double best_x = 0.0;
  double best_f = -std::numeric_limits<double>::infinity();
  const auto consider = [&](double x) {
    const double f = rate_of_intensity(x);
    if (f > best_f) {
      best_f = f;
      best_x = x;
    }
    return f;
  };

  // Coarse log-spaced scan to bracket the maximum.
  const int n = search.scan_points;
  const double log_lo = std::log(search.min_intensity);
  const double log_hi = std::log(search.max_intensity);
  std::vector<double> xs(n);
  int best_i = 0;
  for (int i = 0; i < n; ++i) {
    xs[i] = std::exp(log_lo + (log_hi - log_lo) * i / (n - 1));
    consider(xs[i]);
    if (best_x == xs[i]) best_i = i;
  }
  if (!(best_f > 0.0)) {
    return IntensityOptimum{.intensity = best_x, .rate = 0.0, .degenerate = true};
  }

  // Golden-section refinement inside the bracketing scan interval.
  double a = xs[std::max(0, best_i - 1)];
  double b = xs[std::min(n - 1, best_i + 1)];
  constexpr double kInvPhi = 0.6180339887498949;
  double c = b - (b - a) * kInvPhi;
  double d = a + (b - a) * kInvPhi;
  double fc = consider(c);
  double fd = consider(d);
  int guard = 0;
  while ((b - a) > search.rel_tol * 0.5 * (a + b) && ++guard < 200) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - (b - a) * kInvPhi;
      fc = consider(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + (b - a) * kInvPhi;
      fd = consider(d);
    }
  }
  consider(0.5 * (a + b));
  return IntensityOptimum{.intensity = best_x, .rate = best_f, .degenerate = false};
}

SweepRecord rate_ratio(double distance_km, double leak_fraction, double mu, ProtocolPair pair,
                       std::optional<double> fixed_intensity, const IntensitySearch& search) {
  const ChannelParams channel{.mu = mu, .distance_km = distance_km,
                              .leak_fraction = leak_fraction};
  const double t = transmittance(channel);

  const Protocol lc = lc_variant(pair);
  const Protocol base = baseline_variant(pair);
  const auto lc_rate = [&](double x) { return protocol_rate(lc, t, leak_fraction, x).rate; };
  const auto base_rate = [&](double x) {
    return protocol_rate(base, t, leak_fraction, x).rate;
  };

  SweepRecord rec{.distance_km = distance_km, .leak_fraction = leak_fraction};
  if (fixed_intensity) {
    if (!(*fixed_intensity >= 0.0)) {
      throw std::domain_error("optimize: fixed intensity must be non-negative");
    }
    rec.intensity_lc = rec.intensity_base = *fixed_intensity;
    rec.rate_lc = lc_rate(*fixed_intensity);
    rec.rate_base = base_rate(*fixed_intensity);
  } else {
    const IntensityOptimum opt_lc = optimal_intensity(lc_rate, search);
    const IntensityOptimum opt_base = optimal_intensity(base_rate, search);
    rec.intensity_lc = opt_lc.intensity;
    rec.intensity_base = opt_base.intensity;
    rec.rate_lc = opt_lc.rate;
    rec.rate_base = opt_base.rate;
  }

  if (rec.rate_base > 0.0) {
    rec.ratio = rec.rate_lc / rec.rate_base;
  } else if (rec.rate_lc > 0.0) {
    rec.ratio = std::numeric_limits<double>::infinity();
  } else {
    rec.ratio = std::numeric_limits<double>::quiet_NaN();
  }
  return rec;
}

std::vector<SweepRecord> sweep(const SweepGrid& grid, unsigned workers) {
  validate(grid);
  const std::size_t nd = grid.distances_km.size();
  const std::size_t nl = grid.leak_fractions.size();
  const std::size_t n_cells = nd * nl;
  std::vector<SweepRecord> records(n_cells);

  std::atomic<bool> failed{false};
  std::string error_message;
  std::mutex error_mutex;

  const auto run_cell = [&](std::size_t cell) {
    const std::size_t i = cell / nl;
    const std::size_t j = cell % nl;
    try {
      records[cell] = rate_ratio(grid.distances_km[i], grid.leak_fractions[j], grid.mu,
                                 grid.pair, grid.fixed_intensity, grid.search);
    } catch (const std::exception& e) {
      const std::lock_guard<std::mutex> lock(error_mutex);
      if (!failed.exchange(true)) {
        error_message = "sweep cell (distance_km=" + std::to_string(grid.distances_km[i]) +
                        ", leak_fraction=" + std::to_string(grid.leak_fractions[j]) +
                        ") failed: " + e.what();
      }
    }
  };

  const std::size_t n_threads = std::max<std::size_t>(
      1, std::min<std::size_t>(std::max(1u, workers), n_cells));
  if (n_threads == 1) {
    for (std::size_t cell = 0; cell < n_cells && !failed; ++cell) run_cell(cell);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_threads);
    const std::size_t chunk = (n_cells + n_threads - 1) / n_threads;
    for (std::size_t w = 0; w < n_threads; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n_cells, begin + chunk);
      pool.emplace_back([&, begin, end] {
        for (std::size_t cell = begin; cell < end && !failed; ++cell) run_cell(cell);
      });
    }
    for (auto& th : pool) th.join();
  }

  if (failed) throw std::domain_error("optimize: " + error_message);
  return records;
}

}  // namespace qkdlc
