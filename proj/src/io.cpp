#include "qkdlc/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace qkdlc {
namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_double(const std::string& field, std::size_t line_no) {
  const char* begin = field.c_str();
  char* end = nullptr;
  const double value = std::strtod(begin, &end);
  if (end == begin || end != begin + field.size()) {
    throw std::invalid_argument("csv: line " + std::to_string(line_no) +
                                ": cannot parse number from '" + field + "'");
  }
  return value;
}

}  // namespace

std::string format_g17(double value) {
  std::array<char, 40> buf;
  const int len = std::snprintf(buf.data(), buf.size(), "%.17g", value);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

std::size_t write_sweep_csv(std::span<const SweepRecord> records, std::ostream& out) {
  if (records.empty()) {
    throw std::invalid_argument("csv: refusing to write an empty sweep table");
  }
  const std::string body = sweep_csv_string(records);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw IoError("csv: stream write failed");
  return body.size();
}

std::string sweep_csv_string(std::span<const SweepRecord> records) {
  if (records.empty()) {
    throw std::invalid_argument("csv: refusing to write an empty sweep table");
  }
  std::string body(kSweepCsvHeader);
  body.push_back('\n');
  for (const SweepRecord& r : records) {
    body += format_g17(r.distance_km);
    body.push_back(',');
    body += format_g17(r.leak_fraction);
    body.push_back(',');
    body += format_g17(r.intensity_lc);
    body.push_back(',');
    body += format_g17(r.intensity_base);
    body.push_back(',');
    body += format_g17(r.rate_lc);
    body.push_back(',');
    body += format_g17(r.rate_base);
    body.push_back(',');
    body += format_g17(r.ratio);
    body.push_back('\n');
  }
  return body;
}

std::vector<SweepRecord> parse_sweep_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("csv: empty input");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSweepCsvHeader) {
    throw std::invalid_argument("csv: unexpected header '" + line + "'");
  }
  std::vector<SweepRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 7) {
      throw std::invalid_argument("csv: line " + std::to_string(line_no) + " has " +
                                  std::to_string(fields.size()) + " fields, expected 7");
    }
    SweepRecord r;
    r.distance_km = parse_double(fields[0], line_no);
    r.leak_fraction = parse_double(fields[1], line_no);
    r.intensity_lc = parse_double(fields[2], line_no);
    r.intensity_base = parse_double(fields[3], line_no);
    r.rate_lc = parse_double(fields[4], line_no);
    r.rate_base = parse_double(fields[5], line_no);
    r.ratio = parse_double(fields[6], line_no);
    records.push_back(r);
  }
  if (records.empty()) {
    throw std::invalid_argument("csv: no data rows");
  }
  return records;
}

void save_sweep_csv(std::span<const SweepRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_sweep_csv(records, out);
  out.close();
  if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<SweepRecord> load_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return parse_sweep_csv(in);
}

std::string_view column_name(SweepColumn column) {
  switch (column) {
    case SweepColumn::kRatio: return "ratio";
    case SweepColumn::kRateLc: return "rate-lc";
    case SweepColumn::kRateBase: return "rate-base";
    case SweepColumn::kIntensityLc: return "intensity-lc";
    case SweepColumn::kIntensityBase: return "intensity-base";
  }
  throw std::logic_error("io: unhandled sweep column");
}

std::optional<SweepColumn> column_from_name(std::string_view name) {
  for (SweepColumn c : {SweepColumn::kRatio, SweepColumn::kRateLc, SweepColumn::kRateBase,
                        SweepColumn::kIntensityLc, SweepColumn::kIntensityBase}) {
    if (name == column_name(c)) return c;
  }
  return std::nullopt;
}

namespace {

double column_value(const SweepRecord& r, SweepColumn column) {
  switch (column) {
    case SweepColumn::kRatio: return r.ratio;
    case SweepColumn::kRateLc: return r.rate_lc;
    case SweepColumn::kRateBase: return r.rate_base;
    case SweepColumn::kIntensityLc: return r.intensity_lc;
    case SweepColumn::kIntensityBase: return r.intensity_base;
  }
  throw std::logic_error("io: unhandled sweep column");
}

struct Rgb {
  int r, g, b;
};

// Viridis anchors, interpolated linearly.
constexpr std::array<Rgb, 9> kViridis = {{{68, 1, 84},
                                          {71, 44, 122},
                                          {59, 81, 139},
                                          {44, 113, 142},
                                          {33, 144, 141},
                                          {39, 173, 129},
                                          {92, 200, 99},
                                          {170, 220, 50},
                                          {253, 231, 37}}};

std::string color_hex(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const double scaled = t * (kViridis.size() - 1);
  const auto lo = static_cast<std::size_t>(scaled);
  const std::size_t hi = std::min(lo + 1, kViridis.size() - 1);
  const double frac = scaled - static_cast<double>(lo);
  const auto lerp = [&](int a, int b) {
    return static_cast<int>(std::lround(a + (b - a) * frac));
  };
  std::array<char, 8> buf;
  std::snprintf(buf.data(), buf.size(), "#%02x%02x%02x", lerp(kViridis[lo].r, kViridis[hi].r),
                lerp(kViridis[lo].g, kViridis[hi].g), lerp(kViridis[lo].b, kViridis[hi].b));
  return std::string(buf.data(), 7);
}

constexpr std::string_view kSentinelColor = "#808080";

std::string format_num(double v, const char* fmt) {
  std::array<char, 40> buf;
  const int len = std::snprintf(buf.data(), buf.size(), fmt, v);
  return std::string(buf.data(), static_cast<std::size_t>(len));
}

// Axis values of a complete rectangular grid, recovered from the records.
struct GridAxes {
  std::vector<double> distances;
  std::vector<double> leaks;
  // cell index: row-major over (distance, leak)
  std::vector<double> values;
};

GridAxes recover_grid(std::span<const SweepRecord> records, SweepColumn column) {
  if (records.empty()) {
    throw std::invalid_argument("svg: no records to render");
  }
  GridAxes axes;
  for (const SweepRecord& r : records) {
    axes.distances.push_back(r.distance_km);
    axes.leaks.push_back(r.leak_fraction);
  }
  const auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(axes.distances);
  uniq(axes.leaks);
  const std::size_t nd = axes.distances.size();
  const std::size_t nl = axes.leaks.size();
  if (nd * nl != records.size()) {
    throw std::invalid_argument("svg: records do not form a complete grid (" +
                                std::to_string(records.size()) + " records, expected " +
                                std::to_string(nd) + " x " + std::to_string(nl) + ")");
  }
  axes.values.assign(nd * nl, std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(nd * nl, 0);
  for (const SweepRecord& r : records) {
    const auto di = static_cast<std::size_t>(
        std::lower_bound(axes.distances.begin(), axes.distances.end(), r.distance_km) -
        axes.distances.begin());
    const auto lj = static_cast<std::size_t>(
        std::lower_bound(axes.leaks.begin(), axes.leaks.end(), r.leak_fraction) -
        axes.leaks.begin());
    const std::size_t cell = di * nl + lj;
    if (seen[cell]) {
      throw std::invalid_argument("svg: duplicate grid cell in records");
    }
    seen[cell] = 1;
    axes.values[cell] = column_value(r, column);
  }
  return axes;
}

}  // namespace

std::string render_svg_heatmap(std::span<const SweepRecord> records, SweepColumn column,
                               ColorScale scale) {
  const GridAxes grid = recover_grid(records, column);
  const std::size_t nd = grid.distances.size();
  const std::size_t nl = grid.leaks.size();

  const bool log_scale = scale == ColorScale::kLog;
  const auto mappable = [&](double v) {
    return std::isfinite(v) && (!log_scale || v > 0.0);
  };
  double vmin = std::numeric_limits<double>::infinity();
  double vmax = -std::numeric_limits<double>::infinity();
  for (double v : grid.values) {
    if (mappable(v)) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  const bool any_mappable = vmin <= vmax;

  const auto cell_color = [&](double v) -> std::string {
    if (!any_mappable || !mappable(v)) {
      // +inf under a linear scale still means "top of the range".
      if (!log_scale && v == std::numeric_limits<double>::infinity()) return color_hex(1.0);
      if (!log_scale && v == -std::numeric_limits<double>::infinity()) return color_hex(0.0);
      return std::string(kSentinelColor);
    }
    if (vmax == vmin) return color_hex(0.5);
    const double t = log_scale
                         ? (std::log(v) - std::log(vmin)) / (std::log(vmax) - std::log(vmin))
                         : (v - vmin) / (vmax - vmin);
    return color_hex(t);
  };

  // Fixed layout; everything below is a pure function of the inputs.
  constexpr int kWidth = 780, kHeight = 560;
  constexpr int kPlotX = 90, kPlotY = 50, kPlotW = 560, kPlotH = 430;
  constexpr int kLegendX = 690, kLegendW = 20;
  const double cw = static_cast<double>(kPlotW) / static_cast<double>(nd);
  const double ch = static_cast<double>(kPlotH) / static_cast<double>(nl);

  std::string svg;
  svg.reserve(4096 + 90 * nd * nl);
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(kWidth) +
         "\" height=\"" + std::to_string(kHeight) + "\" viewBox=\"0 0 " +
         std::to_string(kWidth) + " " + std::to_string(kHeight) + "\">\n";
  svg += "<rect width=\"" + std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) +
         "\" fill=\"#ffffff\"/>\n";
  svg += "<text x=\"" + std::to_string(kPlotX + kPlotW / 2) +
         "\" y=\"28\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"16\">";
  svg += std::string(column_name(column));
  svg += log_scale ? " (log scale)" : " (linear scale)";
  svg += "</text>\n";

  // Cells: distance along x, leak fraction along y, smallest leak at the
  // bottom row.
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < nl; ++j) {
      const double v = grid.values[i * nl + j];
      const double x = kPlotX + cw * static_cast<double>(i);
      const double y = kPlotY + ch * static_cast<double>(nl - 1 - j);
      svg += "<rect class=\"cell\" x=\"" + format_num(x, "%.2f") + "\" y=\"" +
             format_num(y, "%.2f") + "\" width=\"" + format_num(cw + 0.5, "%.2f") +
             "\" height=\"" + format_num(ch + 0.5, "%.2f") + "\" fill=\"" + cell_color(v) +
             "\"/>\n";
    }
  }
  svg += "<rect x=\"" + std::to_string(kPlotX) + "\" y=\"" + std::to_string(kPlotY) +
         "\" width=\"" + std::to_string(kPlotW) + "\" height=\"" + std::to_string(kPlotH) +
         "\" fill=\"none\" stroke=\"#000000\"/>\n";

  // Axis ticks, at most 8 per axis.
  const std::size_t x_stride = std::max<std::size_t>(1, (nd + 7) / 8);
  for (std::size_t i = 0; i < nd; i += x_stride) {
    const double x = kPlotX + cw * (static_cast<double>(i) + 0.5);
    svg += "<text x=\"" + format_num(x, "%.2f") + "\" y=\"" + std::to_string(kPlotY + kPlotH + 18) +
           "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"11\">" +
           format_num(grid.distances[i], "%.4g") + "</text>\n";
  }
  svg += "<text x=\"" + std::to_string(kPlotX + kPlotW / 2) + "\" y=\"" +
         std::to_string(kPlotY + kPlotH + 40) +
         "\" text-anchor=\"middle\" font-family=\"monospace\" font-size=\"13\">distance "
         "(km)</text>\n";
  const std::size_t y_stride = std::max<std::size_t>(1, (nl + 7) / 8);
  for (std::size_t j = 0; j < nl; j += y_stride) {
    const double y = kPlotY + ch * (static_cast<double>(nl - 1 - j) + 0.5) + 4.0;
    svg += "<text x=\"" + std::to_string(kPlotX - 8) + "\" y=\"" + format_num(y, "%.2f") +
           "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">" +
           format_num(grid.leaks[j], "%.4g") + "</text>\n";
  }
  svg += "<text x=\"16\" y=\"" + std::to_string(kPlotY + kPlotH / 2) +
         "\" font-family=\"monospace\" font-size=\"13\" transform=\"rotate(-90 16 " +
         std::to_string(kPlotY + kPlotH / 2) + ")\" text-anchor=\"middle\">leak fraction</text>\n";

  // Legend: 64 swatches bottom-to-top plus range labels.
  constexpr int kSwatches = 64;
  const double sh = static_cast<double>(kPlotH) / kSwatches;
  for (int s = 0; s < kSwatches; ++s) {
    const double t = (static_cast<double>(s) + 0.5) / kSwatches;
    const double y = kPlotY + kPlotH - sh * (s + 1);
    svg += "<rect x=\"" + std::to_string(kLegendX) + "\" y=\"" + format_num(y, "%.2f") +
           "\" width=\"" + std::to_string(kLegendW) + "\" height=\"" +
           format_num(sh + 0.5, "%.2f") + "\" fill=\"" +
           (any_mappable ? color_hex(t) : std::string(kSentinelColor)) + "\"/>\n";
  }
  svg += "<rect x=\"" + std::to_string(kLegendX) + "\" y=\"" + std::to_string(kPlotY) +
         "\" width=\"" + std::to_string(kLegendW) + "\" height=\"" + std::to_string(kPlotH) +
         "\" fill=\"none\" stroke=\"#000000\"/>\n";
  svg += "<text x=\"" + std::to_string(kLegendX + kLegendW + 6) + "\" y=\"" +
         std::to_string(kPlotY + kPlotH) +
         "\" font-family=\"monospace\" font-size=\"11\">" +
         (any_mappable ? format_num(vmin, "%.3g") : std::string("n/a")) + "</text>\n";
  svg += "<text x=\"" + std::to_string(kLegendX + kLegendW + 6) + "\" y=\"" +
         std::to_string(kPlotY + 10) + "\" font-family=\"monospace\" font-size=\"11\">" +
         (any_mappable ? format_num(vmax, "%.3g") : std::string("n/a")) + "</text>\n";
  svg += "</svg>\n";
  return svg;
}

void save_reflectogram(const Reflectogram& trace, const std::filesystem::path& csv_path) {
  if (trace.samples.empty()) {
    throw std::invalid_argument("reflectogram: refusing to save an empty trace");
  }
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + csv_path.string() + "' for writing");
  out << "position_km,power_db\n";
  for (std::size_t i = 0; i < trace.samples.size(); ++i) {
    out << format_g17(trace.position_km(i)) << ',' << format_g17(trace.samples[i]) << '\n';
  }
  out.close();
  if (!out) throw IoError("write to '" + csv_path.string() + "' failed");

  nlohmann::json meta;
  meta["sample_spacing_km"] = trace.sample_spacing_km;
  meta["noise_sigma_db"] = trace.noise_sigma_db;
  meta["length_km"] = trace.length_km();
  std::filesystem::path meta_path = csv_path;
  meta_path += ".meta.json";
  std::ofstream meta_out(meta_path, std::ios::binary);
  if (!meta_out) throw IoError("cannot open '" + meta_path.string() + "' for writing");
  meta_out << meta.dump(2) << '\n';
  meta_out.close();
  if (!meta_out) throw IoError("write to '" + meta_path.string() + "' failed");
}

Reflectogram load_reflectogram(const std::filesystem::path& csv_path) {
  std::filesystem::path meta_path = csv_path;
  meta_path += ".meta.json";
  std::ifstream meta_in(meta_path, std::ios::binary);
  if (!meta_in) throw IoError("cannot open '" + meta_path.string() + "' for reading");
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("reflectogram: bad sidecar '" + meta_path.string() +
                                "': " + e.what());
  }

  std::ifstream in(csv_path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + csv_path.string() + "' for reading");
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("reflectogram: empty file");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "position_km,power_db") {
    throw std::invalid_argument("reflectogram: unexpected header '" + line + "'");
  }

  Reflectogram trace;
  try {
    trace.sample_spacing_km = meta.at("sample_spacing_km").get<double>();
    trace.noise_sigma_db = meta.at("noise_sigma_db").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("reflectogram: sidecar missing fields: " + std::string(e.what()));
  }
  if (!(trace.sample_spacing_km > 0.0)) {
    throw std::invalid_argument("reflectogram: sidecar spacing must be positive");
  }

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != 2) {
      throw std::invalid_argument("reflectogram: line " + std::to_string(line_no) +
                                  " has " + std::to_string(fields.size()) +
                                  " fields, expected 2");
    }
    trace.samples.push_back(parse_double(fields[1], line_no));
  }
  if (trace.samples.empty()) {
    throw std::invalid_argument("reflectogram: no samples");
  }
  if (meta.contains("length_km")) {
    const double expected = meta["length_km"].get<double>();
    if (std::abs(trace.length_km() - expected) > 1e-6 * std::max(1.0, expected)) {
      throw std::invalid_argument("reflectogram: sidecar length disagrees with sample count");
    }
  }
  return trace;
}

}  // namespace qkdlc
