#pragma once

#include <string>
#include <vector>

#include "platoon_mpc/sim.hpp"

namespace platoon_mpc {

/// One polyline of a chart. x and y must have equal length.
struct ChartSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool dashed = false;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  int width = 960;
  int height = 480;
};

/// Render a self-contained SVG line chart (axes, ticks, grid, legend).
std::string render_line_chart(const ChartSpec& spec, const std::vector<ChartSeries>& series);

/// Write distances.svg (adjacent front-to-front gaps), velocities.svg
/// (per-vehicle velocity plus the reference) and accelerations.svg into
/// `out_dir`.
void write_platoon_charts(const std::string& out_dir, const Scenario& scenario,
                          const Telemetry& telemetry);

} // namespace platoon_mpc
