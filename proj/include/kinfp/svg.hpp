#pragma once

#include <span>
#include <string>
#include <vector>

namespace kinfp {

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool markers = false;
};

struct PlotAxes {
  std::string title;
  std::string xlabel, ylabel;
  bool logx = false;
  bool logy = false;
};

// Line plot of the series; nonpositive values are dropped on log axes.
std::string svg_line_plot(const PlotAxes& axes, std::span<const PlotSeries> series);

// Heatmap of values[i * ny + j] over [x0, x1] x [y0, y1] (x across, y up).
// With log_scale the colour is log10 of the value, floored at max * 1e-8.
std::string svg_heatmap(const std::string& title, std::span<const double> values, std::size_t nx, std::size_t ny,
                        double x0, double x1, double y0, double y1, bool log_scale = false);

}  // namespace kinfp
