#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "qkdlc/channel.hpp"
#include "qkdlc/keyrate.hpp"

namespace qkdlc {

/// A line-controlled protocol paired with the plain variant it is judged
/// against.  BB84's baseline is the decoy-state upper bound, which only
/// strengthens any advantage the comparison shows.
enum class ProtocolPair { kBb84, kCow, kDps };

std::string_view pair_name(ProtocolPair pair);
std::optional<ProtocolPair> pair_from_name(std::string_view name);
Protocol lc_variant(ProtocolPair pair);
Protocol baseline_variant(ProtocolPair pair);

struct IntensityOptimum {
  double intensity = 0.0;
  double rate = 0.0;
  bool degenerate = false;  ///< rate vanished everywhere on the scan
};

/// Search controls.  The domain covers every regime the rate formulas
/// reach: deep-loss optima sit near 1e-2 photons, line-controlled optima
/// can exceed 10^2.
struct IntensitySearch {
  double min_intensity = 1e-3;
  double max_intensity = 1e3;
  int scan_points = 128;   ///< log-spaced coarse scan
  double rel_tol = 1e-6;   ///< golden-section stop: bracket width / midpoint
};

/// Maximises a rate-vs-intensity curve: log-spaced coarse scan, then
/// golden-section refinement around the best scan point.  The returned
/// point dominates every intensity evaluated along the way.  A curve that
/// never rises above zero comes back degenerate with zero rate.
IntensityOptimum optimal_intensity(const std::function<double(double)>& rate_of_intensity,
                                   const IntensitySearch& search = {});

/// One cell of a comparison sweep.  ratio is rate_lc / rate_base, +inf
/// when only the baseline vanishes and NaN when both rates are zero.
struct SweepRecord {
  double distance_km = 0.0;
  double leak_fraction = 0.0;
  double intensity_lc = 0.0;
  double intensity_base = 0.0;
  double rate_lc = 0.0;
  double rate_base = 0.0;
  double ratio = 0.0;
};

/// Evaluates one channel cell.  With fixed_intensity both variants run at
/// that intensity; otherwise each is optimised independently.
SweepRecord rate_ratio(double distance_km, double leak_fraction, double mu,
                       ProtocolPair pair,
                       std::optional<double> fixed_intensity = std::nullopt,
                       const IntensitySearch& search = {});

struct SweepGrid {
  std::vector<double> distances_km;  ///< strictly increasing, non-empty
  std::vector<double> leak_fractions;  ///< strictly increasing, non-empty, within [0, 1]
  double mu = kDefaultAttenuationPerKm;
  ProtocolPair pair = ProtocolPair::kBb84;
  std::optional<double> fixed_intensity;
  IntensitySearch search;
};

/// Evaluates the full grid, distances outer and leak fractions inner
/// (row-major).  Cells are independent, so worker threads partition them
/// without changing any result.  A failing cell aborts the sweep with the
/// offending coordinates in the error message.
std::vector<SweepRecord> sweep(const SweepGrid& grid, unsigned workers = 1);

}  // namespace qkdlc
