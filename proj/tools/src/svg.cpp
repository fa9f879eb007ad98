#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gsindy::cli {

namespace {

constexpr double kWidth = 900, kHeight = 420;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 50;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-9 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0})
    if (raw <= m * mag) return m * mag;
  return 10.0 * mag;
}

}  // namespace

std::string render_trajectory_svg(const TrajectoryRows& rows, const std::string& title) {
  const std::size_t n = rows.time.size();
  if (n < 2) throw std::invalid_argument("a plot needs at least two points");

  double lo = std::min(*std::min_element(rows.predicted.begin(), rows.predicted.end()),
                       *std::min_element(rows.actual.begin(), rows.actual.end()));
  double hi = std::max(*std::max_element(rows.predicted.begin(), rows.predicted.end()),
                       *std::max_element(rows.actual.begin(), rows.actual.end()));
  if (hi - lo < 1.0) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double ystep = nice_step(hi - lo, 6);
  lo = std::floor(lo / ystep) * ystep;
  hi = std::ceil(hi / ystep) * ystep;

  const double t0 = static_cast<double>(rows.time.front().time_since_epoch().count());
  const double hours = (static_cast<double>(rows.time.back().time_since_epoch().count()) - t0) / 3600.0;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto x_of = [&](std::size_t i) {
    const double h = (static_cast<double>(rows.time[i].time_since_epoch().count()) - t0) / 3600.0;
    return kLeft + (hours > 0 ? h / hours : 0.0) * plot_w;
  };
  auto y_of = [&](double v) { return kTop + (hi - v) / (hi - lo) * plot_h; };

  std::string svg;
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(kWidth) + "\" height=\"" + fmt(kHeight) +
         "\" viewBox=\"0 0 " + fmt(kWidth) + " " + fmt(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"" + fmt(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
         "</text>\n";

  // Grid and axes.
  for (int k = 0; lo + k * ystep <= hi + 1e-9 * ystep; ++k) {
    const double v = lo + k * ystep;
    const std::string y = fmt(y_of(v));
    svg += "<line x1=\"" + fmt(kLeft) + "\" y1=\"" + y + "\" x2=\"" + fmt(kLeft + plot_w) + "\" y2=\"" + y +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + fmt(kLeft - 6) + "\" y=\"" + y + "\" text-anchor=\"end\" dy=\"4\">" + label(v) + "</text>\n";
  }
  const double xstep = hours > 0 ? nice_step(hours, 8) : 1.0;
  for (int k = 0; k * xstep <= hours + 1e-9; ++k) {
    const double h = k * xstep;
    const std::string x = fmt(kLeft + (hours > 0 ? h / hours : 0.0) * plot_w);
    svg += "<line x1=\"" + x + "\" y1=\"" + fmt(kTop) + "\" x2=\"" + x + "\" y2=\"" + fmt(kTop + plot_h) +
           "\" stroke=\"#eeeeee\"/>\n";
    svg += "<text x=\"" + x + "\" y=\"" + fmt(kTop + plot_h + 18) + "\" text-anchor=\"middle\">" +
           label(h) + "</text>\n";
  }
  svg += "<rect x=\"" + fmt(kLeft) + "\" y=\"" + fmt(kTop) + "\" width=\"" + fmt(plot_w) + "\" height=\"" +
         fmt(plot_h) + "\" fill=\"none\" stroke=\"black\"/>\n";
  svg += "<text x=\"" + fmt(kLeft + plot_w / 2) + "\" y=\"" + fmt(kHeight - 10) +
         "\" text-anchor=\"middle\">hours</text>\n";
  svg += "<text x=\"16\" y=\"" + fmt(kTop + plot_h / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         fmt(kTop + plot_h / 2) + ")\">glucose (mg/dL)</text>\n";

  auto polyline = [&](const std::vector<double>& v, const char* colour) {
    std::string pts;
    for (std::size_t i = 0; i < n; ++i) {
      if (i) pts += ' ';
      pts += fmt(x_of(i)) + "," + fmt(y_of(v[i]));
    }
    return "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"1.5\" points=\"" + pts +
           "\"/>\n";
  };
  svg += polyline(rows.actual, "#1f77b4");
  svg += polyline(rows.predicted, "#d62728");

  const double lx = kLeft + plot_w - 150, ly = kTop + 12;
  svg += "<rect x=\"" + fmt(lx - 8) + "\" y=\"" + fmt(ly - 12) +
         "\" width=\"150\" height=\"44\" fill=\"white\" stroke=\"#999999\"/>\n";
  svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" + fmt(ly) +
         "\" stroke=\"#1f77b4\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 4) + "\">actual</text>\n";
  svg += "<line x1=\"" + fmt(lx) + "\" y1=\"" + fmt(ly + 20) + "\" x2=\"" + fmt(lx + 24) + "\" y2=\"" +
         fmt(ly + 20) + "\" stroke=\"#d62728\" stroke-width=\"2\"/>\n";
  svg += "<text x=\"" + fmt(lx + 30) + "\" y=\"" + fmt(ly + 24) + "\">predicted</text>\n";
  svg += "</svg>\n";
  return svg;
}

}  // namespace gsindy::cli
