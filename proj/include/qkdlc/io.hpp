#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "qkdlc/linecontrol.hpp"
#include "qkdlc/optimize.hpp"

namespace qkdlc {

/// Filesystem-level failure (open/read/write), as opposed to malformed
/// content which throws std::invalid_argument.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Sweep tables.  CSV is the canonical interchange: fixed header, one row per
// record, every number printed with 17 significant digits so doubles survive
// a round trip bit-exactly.  Identical inputs produce identical bytes.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kSweepCsvHeader =
    "distance_km,leak_fraction,intensity_lc,intensity_base,rate_lc,rate_base,ratio";

/// Writes header plus one line per record; returns the number of bytes
/// emitted.  Rejects an empty record set with std::invalid_argument.
std::size_t write_sweep_csv(std::span<const SweepRecord> records, std::ostream& out);

std::string sweep_csv_string(std::span<const SweepRecord> records);

/// Strict parser for the format above.  Throws std::invalid_argument on a
/// wrong header, field count, or unparseable number.
std::vector<SweepRecord> parse_sweep_csv(std::istream& in);

void save_sweep_csv(std::span<const SweepRecord> records, const std::filesystem::path& path);
std::vector<SweepRecord> load_sweep_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// SVG heatmaps.  Pure function of the records: fixed layout, fixed number
// formatting, no timestamps, so equal inputs give byte-identical files.
// ---------------------------------------------------------------------------

enum class SweepColumn { kRatio, kRateLc, kRateBase, kIntensityLc, kIntensityBase };

std::string_view column_name(SweepColumn column);
std::optional<SweepColumn> column_from_name(std::string_view name);

enum class ColorScale { kLinear, kLog };

/// Renders one column of a complete rectangular sweep grid as a standalone
/// SVG heatmap (viridis ramp, axes, legend).  Cells whose value cannot be
/// mapped (NaN, or non-positive under the log scale) are painted a neutral
/// sentinel grey.  Throws std::invalid_argument if the records do not form
/// a complete grid.
std::string render_svg_heatmap(std::span<const SweepRecord> records, SweepColumn column,
                               ColorScale scale);

// ---------------------------------------------------------------------------
// Reflectogram persistence: a position_km,power_db CSV next to a JSON
// sidecar (same path + ".meta.json") carrying spacing, noise sigma and
// length.  Samples survive the round trip bit-exactly.
// ---------------------------------------------------------------------------

void save_reflectogram(const Reflectogram& trace, const std::filesystem::path& csv_path);
Reflectogram load_reflectogram(const std::filesystem::path& csv_path);

/// 17-significant-digit formatting used by every writer above.
std::string format_g17(double value);

}  // namespace qkdlc
