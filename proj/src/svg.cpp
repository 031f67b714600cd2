#include "covhess/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace covhess::svg {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;
constexpr const char* kVersionLine = "<!-- covhess svg writer 1 -->\n";
constexpr const char* kClassColors[] = {"#1f77b4", "#d62728"};
constexpr const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
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
    if (hi - lo < 1e-12) lo -= 0.5, hi += 0.5;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
};

struct Frame {
  Range xr, yr;
  double px(double x) const { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight); }
  double py(double y) const { return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom); }
};

void open_document(std::ostringstream& out, const std::string& title) {
  out << kVersionLine;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << escape(title) << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& xl, const std::string& yl, bool log_y) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  out << "<g stroke=\"black\" stroke-width=\"1\">\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1) << "\" y2=\"" << num(y0) << "\"/>\n";
  out << "<line x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0) << "\" y2=\"" << num(y1) << "\"/>\n";
  out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = f.xr.lo + (f.xr.hi - f.xr.lo) * t / 4.0;
    const double yv = f.yr.lo + (f.yr.hi - f.yr.lo) * t / 4.0;
    char xs[32], ys[32];
    std::snprintf(xs, sizeof xs, "%.3g", xv);
    std::snprintf(ys, sizeof ys, "%.3g", log_y ? std::pow(10.0, yv) : yv);
    out << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(y0 + 16) << "\" text-anchor=\"middle\">" << xs
        << "</text>\n";
    out << "<text x=\"" << num(x0 - 6) << "\" y=\"" << num(f.py(yv) + 4) << "\" text-anchor=\"end\">" << ys
        << "</text>\n";
  }
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 12) << "\" text-anchor=\"middle\">"
      << escape(xl) << "</text>\n";
  out << "<text transform=\"translate(16 " << num((y0 + y1) / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
      << escape(yl) << "</text>\n</g>\n";
}

void legend(std::ostringstream& out, const std::vector<std::string>& entries, std::span<const char* const> colors) {
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double y = kTop + 8 + 16.0 * static_cast<double>(k);
    out << "<rect x=\"" << num(kWidth - kRight - 170) << "\" y=\"" << num(y - 8) << "\" width=\"10\" height=\"10\" "
        << "fill=\"" << colors[k % colors.size()] << "\"/>\n";
    out << "<text x=\"" << num(kWidth - kRight - 155) << "\" y=\"" << num(y + 1) << "\">" << escape(entries[k])
        << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

std::string escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

std::string render(const ScatterPlot& plot) {
  const std::size_t n = plot.points.rows();
  const bool two_d = plot.points.cols() >= 2;
  auto yval = [&](std::size_t r) { return two_d ? plot.points(r, 1) : 0.0; };
  Frame f;
  for (std::size_t r = 0; r < n; ++r) {
    f.xr.add(plot.points(r, 0));
    f.yr.add(yval(r));
  }
  f.xr.finish();
  f.yr.finish();

  std::ostringstream out;
  open_document(out, plot.title);
  axes(out, f, plot.x_label, plot.y_label, false);
  out << "<g fill-opacity=\"0.7\">\n";
  for (std::size_t r = 0; r < n; ++r) {
    const int label = r < plot.labels.size() ? plot.labels[r] : 0;
    out << "<circle cx=\"" << num(f.px(plot.points(r, 0))) << "\" cy=\"" << num(f.py(yval(r))) << "\" r=\"3\" fill=\""
        << kClassColors[label == 1 ? 1 : 0] << "\"/>\n";
  }
  out << "</g>\n";

  if (plot.boundary) {
    const Boundary& b = *plot.boundary;
    double xa, ya, xb, yb;
    if (two_d && std::abs(b.w1) > std::abs(b.w0) * 1e-9 && b.w1 != 0.0) {
      xa = f.xr.lo, xb = f.xr.hi;
      ya = -(b.w0 * xa + b.b) / b.w1;
      yb = -(b.w0 * xb + b.b) / b.w1;
    } else if (b.w0 != 0.0) {
      xa = xb = -b.b / b.w0;
      ya = f.yr.lo, yb = f.yr.hi;
    } else {
      xa = xb = ya = yb = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isfinite(xa) && std::isfinite(ya) && std::isfinite(xb) && std::isfinite(yb)) {
      out << "<clipPath id=\"plot\"><rect x=\"" << num(kLeft) << "\" y=\"" << num(kTop) << "\" width=\""
          << num(kWidth - kLeft - kRight) << "\" height=\"" << num(kHeight - kTop - kBottom) << "\"/></clipPath>\n";
      out << "<line clip-path=\"url(#plot)\" x1=\"" << num(f.px(xa)) << "\" y1=\"" << num(f.py(ya)) << "\" x2=\""
          << num(f.px(xb)) << "\" y2=\"" << num(f.py(yb)) << "\" stroke=\"black\" stroke-width=\"2\" "
          << "stroke-dasharray=\"6 4\"/>\n";
    }
  }
  legend(out, plot.legend, kClassColors);
  out << "</svg>\n";
  return out.str();
}

std::string render(const LineChart& chart) {
  Frame f;
  auto yv = [&](double v) { return chart.log_y ? std::log10(v) : v; };
  auto usable = [&](double v) { return std::isfinite(v) && (!chart.log_y || v > 0.0); };
  std::size_t longest = 0;
  for (const LineSeries& s : chart.series) {
    longest = std::max(longest, s.values.size());
    for (double v : s.values)
      if (usable(v)) f.yr.add(yv(v));
  }
  f.xr.add(1.0);
  f.xr.add(static_cast<double>(std::max<std::size_t>(longest, 1)));
  f.xr.finish();
  f.yr.finish();

  std::ostringstream out;
  open_document(out, chart.title);
  axes(out, f, chart.x_label, chart.y_label + (chart.log_y ? " (log scale)" : ""), chart.log_y);
  std::vector<std::string> names;
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const LineSeries& s = chart.series[k];
    names.push_back(s.name);
    const char* color = kSeriesColors[k % std::size(kSeriesColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!usable(s.values[i])) continue;
      out << (first ? "" : " ") << num(f.px(static_cast<double>(i + 1))) << ',' << num(f.py(yv(s.values[i])));
      first = false;
    }
    out << "\"/>\n";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
      if (!usable(s.values[i])) continue;
      out << "<circle cx=\"" << num(f.px(static_cast<double>(i + 1))) << "\" cy=\"" << num(f.py(yv(s.values[i])))
          << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    }
  }
  legend(out, names, kSeriesColors);
  out << "</svg>\n";
  return out.str();
}

std::string render(const BarChart& chart) {
  const std::size_t n = std::min(chart.names.size(), chart.values.size());
  const double row_h = 16.0;
  const double label_w = 200.0;
  const double height = kTop + row_h * static_cast<double>(n) + 20.0;
  double vmax = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    if (std::isfinite(chart.values[k])) vmax = std::max(vmax, std::abs(chart.values[k]));
  if (vmax == 0.0) vmax = 1.0;

  std::ostringstream out;
  out << kVersionLine;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << kWidth << ' ' << num(height) << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"15\">" << escape(chart.title) << "</text>\n";
  out << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  const double span = kWidth - label_w - 80.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double y = kTop + row_h * static_cast<double>(k);
    const double v = std::isfinite(chart.values[k]) ? std::abs(chart.values[k]) : 0.0;
    char vs[32];
    std::snprintf(vs, sizeof vs, "%.4f", chart.values[k]);
    out << "<text x=\"" << num(label_w - 6) << "\" y=\"" << num(y + 11) << "\" text-anchor=\"end\">"
        << escape(chart.names[k]) << "</text>\n";
    out << "<rect x=\"" << num(label_w) << "\" y=\"" << num(y + 2) << "\" width=\"" << num(v / vmax * span)
        << "\" height=\"" << num(row_h - 4) << "\" fill=\"" << kSeriesColors[0] << "\"/>\n";
    out << "<text x=\"" << num(label_w + v / vmax * span + 4) << "\" y=\"" << num(y + 11) << "\">" << vs
        << "</text>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace covhess::svg
