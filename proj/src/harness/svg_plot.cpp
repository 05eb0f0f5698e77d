#include "alternator/harness/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace alternator {

namespace {

constexpr double kWidth = 720.0;
constexpr double kPanelHeight = 180.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kGap = 30.0;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string svg_line_plot(const std::vector<PlotPanel>& panels, const std::string& title, const std::string& x_label) {
  const double height = kTop + static_cast<double>(panels.size()) * (kPanelHeight + kGap) + 30.0;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(height) +
                    "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" + escape(title) +
         "</text>\n";

  std::size_t n_max = 1;
  for (const auto& p : panels) {
    for (const auto& s : p.series) n_max = std::max(n_max, s.values.size());
  }
  const double plot_w = kWidth - kLeft - kRight;

  for (std::size_t pi = 0; pi < panels.size(); ++pi) {
    const auto& panel = panels[pi];
    const double top = kTop + static_cast<double>(pi) * (kPanelHeight + kGap);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& s : panel.series) {
      for (double v : s.values) {
        if (std::isfinite(v)) {
          lo = std::min(lo, v);
          hi = std::max(hi, v);
        }
      }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;

    auto px = [&](std::size_t i) {
      return kLeft + (n_max > 1 ? static_cast<double>(i) / static_cast<double>(n_max - 1) : 0.5) * plot_w;
    };
    auto py = [&](double v) { return top + (hi - v) / (hi - lo) * kPanelHeight; };

    svg += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(plot_w) + "\" height=\"" +
           fmt(kPanelHeight) + "\" fill=\"none\" stroke=\"#888\"/>\n";
    svg += "<text x=\"" + fmt(kLeft + 4) + "\" y=\"" + fmt(top + 13) + "\">" + escape(panel.title) + "</text>\n";
    for (int k = 0; k <= 2; ++k) {
      const double v = lo + (hi - lo) * k / 2.0;
      svg += "<text x=\"" + fmt(kLeft - 4) + "\" y=\"" + fmt(py(v) + 4) + "\" text-anchor=\"end\">" + tick(v) +
             "</text>\n";
    }
    for (const auto& s : panel.series) {
      std::string d;
      bool pen_down = false;
      for (std::size_t i = 0; i < s.values.size(); ++i) {
        if (!std::isfinite(s.values[i])) {
          pen_down = false;
          continue;
        }
        d += (pen_down ? " L" : " M") + fmt(px(i)) + " " + fmt(py(s.values[i]));
        pen_down = true;
      }
      svg += "<path d=\"" + d + "\" fill=\"none\" stroke=\"" + s.color + "\" stroke-width=\"1.2\"" +
             (s.dashed ? " stroke-dasharray=\"4 3\"" : "") + "/>\n";
    }
  }

  // Legend from the first panel's series.
  if (!panels.empty()) {
    double x = kLeft;
    const double y = height - 12;
    for (const auto& s : panels.front().series) {
      svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(y - 4) + "\" x2=\"" + fmt(x + 20) + "\" y2=\"" + fmt(y - 4) +
             "\" stroke=\"" + s.color + "\"" + (s.dashed ? " stroke-dasharray=\"4 3\"" : "") + "/>\n";
      svg += "<text x=\"" + fmt(x + 24) + "\" y=\"" + fmt(y) + "\">" + escape(s.label) + "</text>\n";
      x += 40 + 7.0 * static_cast<double>(s.label.size());
    }
    svg += "<text x=\"" + fmt(kWidth - kRight) + "\" y=\"" + fmt(y) + "\" text-anchor=\"end\">" + escape(x_label) +
           "</text>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace alternator
