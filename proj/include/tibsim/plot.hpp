// plot.hpp — deterministic SVG rendering of the emitted CSV files.
//
// The renderer reads columns out of CSV tables and draws them as lines or
// point markers on a fixed-size canvas with optional log axes. Output bytes
// depend only on the input data, so identical inputs give identical files.
#ifndef TIBSIM_PLOT_HPP
#define TIBSIM_PLOT_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "tibsim/csv.hpp"
#include "tibsim/errors.hpp"

namespace tibsim {

struct PlotSeries {
  std::string csv_path;   // data source
  std::string x_column;   // column name for x
  std::string y_column;   // column name for y
  std::string label;      // legend entry; empty = no legend line
  bool markers = false;   // draw point markers instead of a line
};

struct PlotSpec {
  std::vector<PlotSeries> series;
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
};

namespace detail {

struct PlotPoint {
  double x = 0.0;  // axis coordinates (log10 already applied on log axes)
  double y = 0.0;
};

inline std::string svg_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return std::string(buf);
}

inline std::string tick_label(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", value);
  return std::string(buf);
}

/// Rounds the axis range to a tick step of 1, 2, 2.5 or 5 times a power of
/// ten and returns the tick positions covering [lo, hi].
inline std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 4.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double norm = raw / mag;
  double step = 10.0;
  for (double candidate : {1.0, 2.0, 2.5, 5.0}) {
    if (norm <= candidate) {
      step = candidate;
      break;
    }
  }
  step *= mag;
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step)
    ticks.push_back(t);
  return ticks;
}

/// Decade ticks for a log10 axis; falls back to linear ticks in log space
/// when the range covers less than one decade.
inline std::vector<double> log_ticks(double lo_log, double hi_log) {
  std::vector<double> ticks;
  for (double d = std::ceil(lo_log); d <= hi_log + 1e-9; d += 1.0) ticks.push_back(d);
  if (ticks.size() >= 2) return ticks;
  return linear_ticks(lo_log, hi_log);
}

inline const char* series_color(std::size_t index) {
  static const char* kPalette[] = {"#2e7d32", "#1565c0", "#c62828",
                                   "#6a1b9a", "#ef6c00", "#00838f"};
  return kPalette[index % (sizeof(kPalette) / sizeof(kPalette[0]))];
}

}  // namespace detail

/// Renders a PlotSpec to a self-contained SVG file. Columns missing from a CSV
/// throw MissingColumn; if no series contributes a drawable point (empty
/// tables, or only non-positive values on a log axis) throws EmptyData.
inline void emit_plot(const PlotSpec& spec, const std::string& out_path) {
  if (spec.series.empty()) throw EmptyData("plot spec has no series");

  std::vector<std::vector<detail::PlotPoint>> series_points;
  double x_lo = 0.0, x_hi = 0.0, y_lo = 0.0, y_hi = 0.0;
  bool any = false;
  for (const PlotSeries& s : spec.series) {
    const CsvTable table = read_csv(s.csv_path);
    const std::size_t xi = table.column_index(s.x_column);
    const std::size_t yi = table.column_index(s.y_column);
    std::vector<detail::PlotPoint> pts;
    pts.reserve(table.rows.size());
    for (const std::vector<double>& row : table.rows) {
      double x = row[xi];
      double y = row[yi];
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if (spec.log_x) {
        if (!(x > 0.0)) continue;
        x = std::log10(x);
      }
      if (spec.log_y) {
        if (!(y > 0.0)) continue;
        y = std::log10(y);
      }
      if (!any) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
        any = true;
      } else {
        x_lo = std::min(x_lo, x);
        x_hi = std::max(x_hi, x);
        y_lo = std::min(y_lo, y);
        y_hi = std::max(y_hi, y);
      }
      pts.push_back({x, y});
    }
    series_points.push_back(std::move(pts));
  }
  if (!any) throw EmptyData("no drawable points in any series");
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    y_lo -= 0.5;
    y_hi += 0.5;
  }
  // 4% padding keeps extreme points off the frame.
  const double x_pad = 0.04 * (x_hi - x_lo);
  const double y_pad = 0.04 * (y_hi - y_lo);
  x_lo -= x_pad;
  x_hi += x_pad;
  y_lo -= y_pad;
  y_hi += y_pad;

  const double width = 800.0, height = 560.0;
  const double ml = 78.0, mr = 24.0, mt = 40.0, mb = 64.0;
  const double px0 = ml, px1 = width - mr;
  const double py0 = height - mb, py1 = mt;  // y axis grows upward
  auto to_px = [&](double x) { return px0 + (x - x_lo) / (x_hi - x_lo) * (px1 - px0); };
  auto to_py = [&](double y) { return py0 + (y - y_lo) / (y_hi - y_lo) * (py1 - py0); };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"560\" "
         "viewBox=\"0 0 800 560\">\n";
  svg += "<rect width=\"800\" height=\"560\" fill=\"#ffffff\"/>\n";

  // Axis frame.
  svg += "<rect x=\"" + detail::svg_num(px0) + "\" y=\"" + detail::svg_num(py1) +
         "\" width=\"" + detail::svg_num(px1 - px0) + "\" height=\"" +
         detail::svg_num(py0 - py1) + "\" fill=\"none\" stroke=\"#000000\"/>\n";

  // Ticks, grid lines, and labels.
  const std::vector<double> xt =
      spec.log_x ? detail::log_ticks(x_lo, x_hi) : detail::linear_ticks(x_lo, x_hi);
  const std::vector<double> yt =
      spec.log_y ? detail::log_ticks(y_lo, y_hi) : detail::linear_ticks(y_lo, y_hi);
  for (double t : xt) {
    const double px = to_px(t);
    svg += "<line x1=\"" + detail::svg_num(px) + "\" y1=\"" + detail::svg_num(py0) +
           "\" x2=\"" + detail::svg_num(px) + "\" y2=\"" + detail::svg_num(py1) +
           "\" stroke=\"#dddddd\"/>\n";
    const double shown = spec.log_x ? std::pow(10.0, t) : t;
    svg += "<text x=\"" + detail::svg_num(px) + "\" y=\"" + detail::svg_num(py0 + 18.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">" +
           detail::tick_label(shown) + "</text>\n";
  }
  for (double t : yt) {
    const double py = to_py(t);
    svg += "<line x1=\"" + detail::svg_num(px0) + "\" y1=\"" + detail::svg_num(py) +
           "\" x2=\"" + detail::svg_num(px1) + "\" y2=\"" + detail::svg_num(py) +
           "\" stroke=\"#dddddd\"/>\n";
    const double shown = spec.log_y ? std::pow(10.0, t) : t;
    svg += "<text x=\"" + detail::svg_num(px0 - 6.0) + "\" y=\"" + detail::svg_num(py + 4.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">" +
           detail::tick_label(shown) + "</text>\n";
  }

  // Series.
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    const char* color = detail::series_color(k);
    const std::vector<detail::PlotPoint>& pts = series_points[k];
    if (pts.empty()) continue;
    if (spec.series[k].markers) {
      for (const detail::PlotPoint& p : pts)
        svg += "<circle cx=\"" + detail::svg_num(to_px(p.x)) + "\" cy=\"" +
               detail::svg_num(to_py(p.y)) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    } else {
      std::string path = "M";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) path += " L";
        path += detail::svg_num(to_px(pts[i].x)) + " " + detail::svg_num(to_py(pts[i].y));
      }
      svg += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\"/>\n";
    }
  }

  // Legend (top-right inside the frame) and axis titles.
  double legend_y = py1 + 18.0;
  for (std::size_t k = 0; k < spec.series.size(); ++k) {
    if (spec.series[k].label.empty()) continue;
    svg += "<rect x=\"" + detail::svg_num(px1 - 150.0) + "\" y=\"" +
           detail::svg_num(legend_y - 9.0) +
           "\" width=\"12\" height=\"12\" fill=\"" + detail::series_color(k) + "\"/>\n";
    svg += "<text x=\"" + detail::svg_num(px1 - 133.0) + "\" y=\"" +
           detail::svg_num(legend_y + 1.0) +
           "\" font-family=\"sans-serif\" font-size=\"12\">" + spec.series[k].label +
           "</text>\n";
    legend_y += 18.0;
  }
  if (!spec.title.empty())
    svg += "<text x=\"" + detail::svg_num(0.5 * (px0 + px1)) + "\" y=\"24\" "
           "font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">" +
           spec.title + "</text>\n";
  if (!spec.x_label.empty())
    svg += "<text x=\"" + detail::svg_num(0.5 * (px0 + px1)) + "\" y=\"" +
           detail::svg_num(height - 16.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" +
           spec.x_label + "</text>\n";
  if (!spec.y_label.empty())
    svg += "<text x=\"20\" y=\"" + detail::svg_num(0.5 * (py0 + py1)) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 20 " + detail::svg_num(0.5 * (py0 + py1)) + ")\">" +
           spec.y_label + "</text>\n";
  svg += "</svg>\n";

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot open '" + out_path + "' for writing");
  out << svg;
  if (!out) throw ConfigError("write failed for '" + out_path + "'");
}

}  // namespace tibsim

#endif  // TIBSIM_PLOT_HPP
