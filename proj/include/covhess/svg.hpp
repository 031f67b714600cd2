#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "covhess/linalg.hpp"

namespace covhess::svg {

/// Line w0*x + w1*y + b = 0 drawn across the plot.
struct Boundary {
  double w0 = 0.0;
  double w1 = 0.0;
  double b = 0.0;
};

struct ScatterPlot {
  std::string title;
  std::string x_label = "x";
  std::string y_label = "y";
  Matrix points;  // n x 2, or n x 1 (drawn with jitter-free y = 0)
  std::vector<int> labels;
  std::optional<Boundary> boundary;
  std::vector<std::string> legend;
};

struct LineSeries {
  std::string name;
  std::vector<double> values;
};

struct LineChart {
  std::string title;
  std::string x_label = "index";
  std::string y_label = "value";
  bool log_y = false;  // non-positive values are skipped on a log axis
  std::vector<LineSeries> series;
};

struct BarChart {
  std::string title;
  std::vector<std::string> names;
  std::vector<double> values;  // drawn as horizontal bars, top to bottom
};

/// Every document starts with a `<!-- covhess ... -->` line naming the
/// writer version; the rest is a function of the input only.
std::string render(const ScatterPlot& plot);
std::string render(const LineChart& chart);
std::string render(const BarChart& chart);

std::string escape(std::string_view text);

}  // namespace covhess::svg
