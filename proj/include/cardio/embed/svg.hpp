#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace cardio::embed {

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t group = 0;  // selects the color
};

struct PlotMarker {
  double x = 0.0;
  double y = 0.0;
  std::string label;
};

struct PlotLine {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  std::string color;
  std::string label;
};

struct ScatterPlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotPoint> points;
  std::vector<PlotMarker> markers;  // drawn on top with their labels
  std::vector<PlotLine> lines;      // clipped to the axis box
};

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 600;

/// Renders an 800x600 scatter with one color per group. Axis ranges cover
/// every point, marker and line endpoint.
void write_svg(std::ostream& out, const ScatterPlot& plot);

}  // namespace cardio::embed
