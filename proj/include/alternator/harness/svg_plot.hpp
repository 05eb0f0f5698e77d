#pragma once

#include <string>
#include <vector>

namespace alternator {

struct PlotSeries {
  std::string label;
  std::vector<double> values;  // x is the index (time step or epoch)
  std::string color = "#1f77b4";
  bool dashed = false;
};

struct PlotPanel {
  std::string title;
  std::vector<PlotSeries> series;
};

// Self-contained SVG: panels stacked vertically, shared x axis, one legend.
// Non-finite values break the polyline.
std::string svg_line_plot(const std::vector<PlotPanel>& panels, const std::string& title,
                          const std::string& x_label);

}  // namespace alternator
