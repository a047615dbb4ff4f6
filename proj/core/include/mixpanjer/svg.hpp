#pragma once

#include <string>
#include <vector>

namespace mixpanjer::svg {

struct BarPanel {
  std::string title;
  std::vector<double> values;  // bar heights at x = 0, 1, ...
};

struct Line {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Small-multiples bar chart, one panel per entry, laid out in a row.
std::string bar_chart(const std::vector<BarPanel>& panels, const std::string& x_label);

/// Overlaid line chart with a legend.
std::string line_chart(const std::vector<Line>& lines, const std::string& title, const std::string& x_label,
                       const std::string& y_label);

}  // namespace mixpanjer::svg
