#include "mixpanjer/svg.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace mixpanjer::svg {

namespace {

constexpr double kPanelWidth = 320.0;
constexpr double kPanelHeight = 240.0;
constexpr double kMarginLeft = 56.0;
constexpr double kMarginRight = 16.0;
constexpr double kMarginTop = 32.0;
constexpr double kMarginBottom = 40.0;

constexpr std::array<const char*, 8> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                 "#9467bd", "#8c564b", "#e377c2", "#17becf"};

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

// Rounds up to 1, 2 or 5 times a power of ten.
double nice_ceiling(double v) {
  if (!(v > 0.0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * p >= v * (1.0 - 1e-12)) return m * p;
  return 10.0 * p;
}

std::string tick(double v) { return fmt::format("{:.3g}", v); }

std::string header(double width, double height) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0:.0f}\" height=\"{1:.0f}\" viewBox=\"0 0 {0:.0f} {1:.0f}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
      width, height);
}

struct Frame {
  double x0, y0, w, h;  // plot area
  double xmin, xmax, ymax;

  double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
  double py(double y) const { return y0 + h - y / ymax * h; }
};

void axes(std::string& out, const Frame& f, const std::string& x_label, const std::string& y_label) {
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", f.x0,
                     f.y0 + f.h, f.x0 + f.w, f.y0 + f.h);
  out += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"black\"/>\n", f.x0, f.y0,
                     f.x0, f.y0 + f.h);
  for (int k = 0; k <= 4; ++k) {
    const double y = f.ymax * k / 4.0;
    out += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#ddd\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"end\">{}</text>\n",
        f.x0, f.py(y), f.x0 + f.w, f.py(y), f.x0 - 4, f.py(y) + 4, tick(y));
  }
  for (int k = 0; k <= 5; ++k) {
    const double x = f.xmin + (f.xmax - f.xmin) * k / 5.0;
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.px(x),
                       f.y0 + f.h + 14, tick(x));
  }
  out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", f.x0 + f.w / 2,
                     f.y0 + f.h + 30, escape(x_label));
  if (!y_label.empty())
    out += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\" transform=\"rotate(-90 {:.2f} {:.2f})\">{}</text>\n",
                       f.x0 - 42, f.y0 + f.h / 2, f.x0 - 42, f.y0 + f.h / 2, escape(y_label));
}

}  // namespace

std::string bar_chart(const std::vector<BarPanel>& panels, const std::string& x_label) {
  const double width = std::max<std::size_t>(1, panels.size()) * kPanelWidth;
  std::string out = header(width, kPanelHeight);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const auto& panel = panels[p];
    double ymax = 0.0;
    for (double v : panel.values)
      if (std::isfinite(v)) ymax = std::max(ymax, v);
    const double n = std::max<double>(1.0, static_cast<double>(panel.values.size()));
    Frame f{p * kPanelWidth + kMarginLeft, kMarginTop, kPanelWidth - kMarginLeft - kMarginRight,
            kPanelHeight - kMarginTop - kMarginBottom, -0.5, n - 0.5, nice_ceiling(ymax)};
    out += fmt::format("<text x=\"{:.2f}\" y=\"20\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>\n",
                       f.x0 + f.w / 2, escape(panel.title));
    const double bw = 0.8 * f.w / n;
    for (std::size_t x = 0; x < panel.values.size(); ++x) {
      const double v = panel.values[x];
      if (!std::isfinite(v) || v <= 0.0) continue;
      out += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n",
                         f.px(static_cast<double>(x)) - bw / 2, f.py(v), bw, f.py(0) - f.py(v), kPalette[0]);
    }
    axes(out, f, x_label, p == 0 ? "probability" : "");
  }
  out += "</svg>\n";
  return out;
}

std::string line_chart(const std::vector<Line>& lines, const std::string& title, const std::string& x_label,
                       const std::string& y_label) {
  const double legend = 140.0;
  const double width = 1.4 * kPanelWidth + legend;
  const double height = 1.4 * kPanelHeight;
  double xmin = INFINITY, xmax = -INFINITY, ymax = 0.0;
  for (const auto& l : lines) {
    for (double x : l.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
    for (double y : l.y)
      if (std::isfinite(y)) ymax = std::max(ymax, y);
  }
  if (!(xmax > xmin)) xmin = 0.0, xmax = 1.0;
  Frame f{kMarginLeft, kMarginTop, width - legend - kMarginLeft - kMarginRight, height - kMarginTop - kMarginBottom,
          xmin, xmax, nice_ceiling(ymax)};
  std::string out = header(width, height);
  out += fmt::format("<text x=\"{:.2f}\" y=\"20\" text-anchor=\"middle\" font-weight=\"bold\">{}</text>\n",
                     f.x0 + f.w / 2, escape(title));
  axes(out, f, x_label, y_label);
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& l = lines[k];
    const char* colour = kPalette[k % kPalette.size()];
    std::string points;
    for (std::size_t i = 0; i < l.x.size() && i < l.y.size(); ++i) {
      if (!std::isfinite(l.y[i])) continue;
      points += fmt::format("{:.2f},{:.2f} ", f.px(l.x[i]), f.py(l.y[i]));
    }
    out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, points);
    const double ly = f.y0 + 10 + 16.0 * k;
    out += fmt::format(
        "<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"{}\" stroke-width=\"2\"/>\n"
        "<text x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n",
        f.x0 + f.w + 12, ly, f.x0 + f.w + 30, ly, colour, f.x0 + f.w + 34, ly + 4, escape(l.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace mixpanjer::svg
