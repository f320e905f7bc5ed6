#include "platoon_mpc/svg_chart.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace platoon_mpc {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
constexpr int kPaletteSize = static_cast<int>(sizeof(kPalette) / sizeof(kPalette[0]));

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range data_range(const std::vector<ChartSeries>& series, bool horizontal) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const ChartSeries& s : series) {
    for (double v : horizontal ? s.x : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(lo <= hi)) return {0.0, 1.0};
  if (lo == hi) return {lo - 1.0, hi + 1.0};
  const double pad = horizontal ? 0.0 : 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

// Heckbert's "nice numbers": round a span to 1/2/5 * 10^k.
double nice_number(double x, bool round) {
  const double expv = std::floor(std::log10(x));
  const double f = x / std::pow(10.0, expv);
  double nf;
  if (round) {
    nf = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  } else {
    nf = f <= 1.0 ? 1.0 : f <= 2.0 ? 2.0 : f <= 5.0 ? 5.0 : 10.0;
  }
  return nf * std::pow(10.0, expv);
}

std::vector<double> tick_positions(const Range& r, int target) {
  const double span = nice_number(r.hi - r.lo, false);
  const double step = nice_number(span / (target - 1), true);
  const double lo = std::ceil(r.lo / step) * step;
  std::vector<double> ticks;
  for (double v = lo; v <= r.hi + 0.5 * step; v += step) {
    ticks.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return ticks;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string escape(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace

std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series) {
  const int w = spec.width;
  const int h = spec.height;
  const double left = 70.0, right = 24.0, top = 46.0, bottom = 52.0;
  const double plot_w = w - left - right;
  const double plot_h = h - top - bottom;

  const Range xr = data_range(series, true);
  const Range yr = data_range(series, false);
  const auto sx = [&](double v) { return left + (v - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  const auto sy = [&](double v) { return top + plot_h - (v - yr.lo) / (yr.hi - yr.lo) * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
  svg << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"#ffffff\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\" fill=\"#222222\">"
      << escape(spec.title) << "</text>\n";

  // Grid and ticks.
  svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#444444\">\n";
  for (double t : tick_positions(xr, 7)) {
    const double x = sx(t);
    svg << "<line x1=\"" << fmt2(x) << "\" y1=\"" << fmt2(top) << "\" x2=\"" << fmt2(x)
        << "\" y2=\"" << fmt2(top + plot_h) << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(x) << "\" y=\"" << fmt2(top + plot_h + 16)
        << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
  }
  for (double t : tick_positions(yr, 6)) {
    const double y = sy(t);
    svg << "<line x1=\"" << fmt2(left) << "\" y1=\"" << fmt2(y) << "\" x2=\""
        << fmt2(left + plot_w) << "\" y2=\"" << fmt2(y)
        << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    svg << "<text x=\"" << fmt2(left - 8) << "\" y=\"" << fmt2(y + 4)
        << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
  }
  svg << "</g>\n";

  // Axes.
  svg << "<rect x=\"" << fmt2(left) << "\" y=\"" << fmt2(top) << "\" width=\"" << fmt2(plot_w)
      << "\" height=\"" << fmt2(plot_h)
      << "\" fill=\"none\" stroke=\"#222222\" stroke-width=\"1\"/>\n";
  svg << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222222\">"
      << escape(spec.x_label) << "</text>\n";
  svg << "<text x=\"18\" y=\"" << fmt2(top + plot_h / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
         "fill=\"#222222\" transform=\"rotate(-90 18 "
      << fmt2(top + plot_h / 2) << ")\">" << escape(spec.y_label) << "</text>\n";

  // Series.
  for (size_t s = 0; s < series.size(); ++s) {
    const ChartSeries& line = series[s];
    if (line.x.empty()) continue;
    const char* color = kPalette[s % kPaletteSize];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (line.dashed) svg << " stroke-dasharray=\"6 4\"";
    svg << " points=\"";
    for (size_t i = 0; i < line.x.size(); ++i) {
      if (i) svg << ' ';
      svg << fmt2(sx(line.x[i])) << ',' << fmt2(sy(line.y[i]));
    }
    svg << "\"/>\n";
  }

  // Legend, one entry per series, across the top of the plot area.
  double lx = left + 8.0;
  const double ly = top + 14.0;
  svg << "<g font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">\n";
  for (size_t s = 0; s < series.size(); ++s) {
    const char* color = kPalette[s % kPaletteSize];
    svg << "<line x1=\"" << fmt2(lx) << "\" y1=\"" << fmt2(ly - 4) << "\" x2=\""
        << fmt2(lx + 18) << "\" y2=\"" << fmt2(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"" << (series[s].dashed ? " stroke-dasharray=\"6 4\"" : "")
        << "/>\n";
    svg << "<text x=\"" << fmt2(lx + 22) << "\" y=\"" << fmt2(ly) << "\">"
        << escape(series[s].label) << "</text>\n";
    lx += 34.0 + 7.5 * static_cast<double>(series[s].label.size());
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidInput("charts: cannot write file '" + path + "'");
  out << content;
  if (!out.flush()) throw InvalidInput("charts: failed writing '" + path + "'");
}

} // namespace

void write_platoon_charts(const std::string& out_dir, const Scenario& scenario,
                          const Telemetry& telemetry) {
  const Index m = scenario.vehicle_count();
  std::vector<double> t;
  t.reserve(telemetry.records.size());
  for (const auto& rec : telemetry.records) t.push_back(rec.t);

  const auto state_series = [&](Index offset, Index i) {
    std::vector<double> y;
    y.reserve(telemetry.records.size());
    for (const auto& rec : telemetry.records) y.push_back(rec.x(offset + i));
    return y;
  };

  std::vector<ChartSeries> gaps;
  for (Index i = 0; i + 1 < m; ++i) {
    std::vector<double> y;
    y.reserve(telemetry.records.size());
    for (const auto& rec : telemetry.records) y.push_back(rec.x(i) - rec.x(i + 1));
    gaps.push_back({"d" + std::to_string(i + 1) + "," + std::to_string(i + 2), t, std::move(y),
                    false});
  }
  write_file(out_dir + "/distances.svg",
             render_line_chart({"Inter-vehicle distance", "time [s]", "distance [m]"}, gaps));

  std::vector<ChartSeries> velocities;
  for (Index i = 0; i < m; ++i)
    velocities.push_back({"v" + std::to_string(i + 1), t, state_series(m, i), false});
  {
    std::vector<double> y;
    y.reserve(telemetry.records.size());
    for (const auto& rec : telemetry.records) y.push_back(rec.x_ref(m));
    velocities.push_back({"ref", t, std::move(y), true});
  }
  write_file(out_dir + "/velocities.svg",
             render_line_chart({"Velocity", "time [s]", "velocity [m/s]"}, velocities));

  std::vector<ChartSeries> accels;
  for (Index i = 0; i < m; ++i)
    accels.push_back({"a" + std::to_string(i + 1), t, state_series(2 * m, i), false});
  write_file(out_dir + "/accelerations.svg",
             render_line_chart({"Acceleration", "time [s]", "acceleration [m/s^2]"}, accels));
}

} // namespace platoon_mpc
