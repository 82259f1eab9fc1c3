// Static SVG figures: scatter with least-squares line and 95% band, and
// ranked bar charts.
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace scalarexp {

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  bool fit_line = true;  // needs at least 3 points with spread in x
};

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::pair<std::string, double>> bars;  // drawn in order
  std::optional<std::string> highlight;
};

std::string render_scatter_svg(const ScatterPlot& plot);
std::string render_bar_svg(const BarChart& chart);

}  // namespace scalarexp
