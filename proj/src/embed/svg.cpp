#include "cardio/embed/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>

namespace cardio::embed {

namespace {

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr double kLeft = 70.0, kRight = 20.0, kTop = 40.0, kBottom = 50.0;

std::string escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo <= 0.0) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

// Liang-Barsky clip of a segment to the box; false when fully outside.
bool clip(double& x0, double& y0, double& x1, double& y1, const Range& xr, const Range& yr) {
  double t0 = 0.0, t1 = 1.0;
  const double dx = x1 - x0, dy = y1 - y0;
  const double p[4] = {-dx, dx, -dy, dy};
  const double q[4] = {x0 - xr.lo, xr.hi - x0, y0 - yr.lo, yr.hi - y0};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;
      continue;
    }
    const double t = q[i] / p[i];
    if (p[i] < 0.0) t0 = std::max(t0, t);
    else t1 = std::min(t1, t);
  }
  if (t0 > t1) return false;
  const double nx0 = x0 + t0 * dx, ny0 = y0 + t0 * dy;
  x1 = x0 + t1 * dx;
  y1 = y0 + t1 * dy;
  x0 = nx0;
  y0 = ny0;
  return true;
}

}  // namespace

void write_svg(std::ostream& out, const ScatterPlot& plot) {
  Range xr, yr;
  for (const auto& p : plot.points) xr.add(p.x), yr.add(p.y);
  for (const auto& m : plot.markers) xr.add(m.x), yr.add(m.y);
  xr.finish();
  yr.finish();

  const double w = kSvgWidth - kLeft - kRight;
  const double h = kSvgHeight - kTop - kBottom;
  const auto sx = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * w; };
  const auto sy = [&](double y) { return kTop + h - (y - yr.lo) / (yr.hi - yr.lo) * h; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSvgWidth << "\" height=\"" << kSvgHeight
      << "\" viewBox=\"0 0 " << kSvgWidth << ' ' << kSvgHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kSvgWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"16\">" << escape(plot.title) << "</text>\n";
  out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double fx = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double fy = yr.lo + (yr.hi - yr.lo) * i / 4.0;
    out << "<text x=\"" << num(sx(fx)) << "\" y=\"" << num(kTop + h + 18)
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << tick(fx) << "</text>\n";
    out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(fy) + 4)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << tick(fy) << "</text>\n";
  }
  out << "<text x=\"" << num(kLeft + w / 2) << "\" y=\"" << kSvgHeight - 10
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(plot.x_label)
      << "</text>\n";
  out << "<text transform=\"translate(16," << num(kTop + h / 2)
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
      << escape(plot.y_label) << "</text>\n";

  out << "<g fill-opacity=\"0.6\">\n";
  for (const auto& p : plot.points) {
    out << "<circle cx=\"" << num(sx(p.x)) << "\" cy=\"" << num(sy(p.y)) << "\" r=\"2\" fill=\""
        << kPalette[p.group % kPalette.size()] << "\"/>\n";
  }
  out << "</g>\n";
  for (auto line : plot.lines) {
    if (!clip(line.x0, line.y0, line.x1, line.y1, xr, yr)) continue;
    out << "<line x1=\"" << num(sx(line.x0)) << "\" y1=\"" << num(sy(line.y0)) << "\" x2=\"" << num(sx(line.x1))
        << "\" y2=\"" << num(sy(line.y1)) << "\" stroke=\"" << escape(line.color) << "\" stroke-width=\"1.5\">"
        << "<title>" << escape(line.label) << "</title></line>\n";
  }
  for (const auto& m : plot.markers) {
    out << "<g><rect x=\"" << num(sx(m.x) - 5) << "\" y=\"" << num(sy(m.y) - 5)
        << "\" width=\"10\" height=\"10\" fill=\"black\"/><text x=\"" << num(sx(m.x) + 7) << "\" y=\""
        << num(sy(m.y) - 7) << "\" font-family=\"sans-serif\" font-size=\"12\">" << escape(m.label)
        << "</text></g>\n";
  }
  out << "</svg>\n";
}

}  // namespace cardio::embed
