#include "scalarexp/plot.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "scalarexp/core.hpp"
#include "scalarexp/distributions.hpp"

namespace scalarexp {

namespace {

constexpr double kWidth = 480, kHeight = 360;
constexpr double kLeft = 60, kRight = 20, kTop = 36, kBottom = 56;

std::string escape(std::string_view s) {
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

struct Range {
  double lo, hi;
  double span() const { return hi - lo; }
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::string header(std::string_view title) {
  return fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"11\">\n"
      "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">{3}</text>\n",
      kWidth, kHeight, kWidth / 2, escape(title));
}

std::string axes(const Range& xr, const Range& yr, std::string_view x_label, std::string_view y_label,
                 bool x_ticks) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string s = fmt::format(
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n"
      "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{3}\" stroke=\"black\"/>\n",
      x0, y0, x1, y1);
  for (int i = 0; i <= 4; ++i) {
    const double f = i / 4.0;
    const double py = y0 - f * (y0 - y1);
    s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", x0 - 4, py + 4,
                     yr.lo + f * yr.span());
    if (x_ticks) {
      const double px = x0 + f * (x1 - x0);
      s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px, y0 + 14,
                       xr.lo + f * xr.span());
    }
  }
  s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", (x0 + x1) / 2,
                   kHeight - 12, escape(x_label));
  s += fmt::format(
      "<text x=\"14\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0:.1f})\">{1}</text>\n",
      (y0 + y1) / 2, escape(y_label));
  return s;
}

}  // namespace

std::string render_scatter_svg(const ScatterPlot& plot) {
  if (plot.x.size() != plot.y.size()) throw Error("scatter: x and y lengths differ");
  const std::size_t n = plot.x.size();
  Range xr{0, 1}, yr{0, 1};
  if (n > 0) {
    const auto [xmin, xmax] = std::minmax_element(plot.x.begin(), plot.x.end());
    const auto [ymin, ymax] = std::minmax_element(plot.y.begin(), plot.y.end());
    xr = padded(*xmin, *xmax);
    yr = padded(*ymin, *ymax);
  }
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  auto px = [&](double v) { return x0 + (v - xr.lo) / xr.span() * (x1 - x0); };
  auto py = [&](double v) { return y0 - (std::clamp(v, yr.lo, yr.hi) - yr.lo) / yr.span() * (y0 - y1); };

  std::string s = header(plot.title);

  double sxx = 0, mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += plot.x[i];
    my += plot.y[i];
  }
  if (n > 0) {
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
  }
  double sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (plot.x[i] - mx) * (plot.x[i] - mx);
    sxy += (plot.x[i] - mx) * (plot.y[i] - my);
  }
  if (plot.fit_line && n >= 3 && sxx > 0) {
    const double slope = sxy / sxx, icpt = my - slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = plot.y[i] - (icpt + slope * plot.x[i]);
      rss += e * e;
    }
    const double df = static_cast<double>(n - 2);
    const double sigma = std::sqrt(rss / df);
    const double tq = dist::student_t_quantile(0.975, df);
    constexpr int kSteps = 40;
    std::string upper, lower;
    for (int k = 0; k <= kSteps; ++k) {
      const double xv = xr.lo + xr.span() * k / kSteps;
      const double half = tq * sigma * std::sqrt(1.0 / static_cast<double>(n) + (xv - mx) * (xv - mx) / sxx);
      const double fit = icpt + slope * xv;
      upper += fmt::format("{:.2f},{:.2f} ", px(xv), py(fit + half));
      lower = fmt::format("{:.2f},{:.2f} ", px(xv), py(fit - half)) + lower;
    }
    s += fmt::format("<polygon points=\"{}{}\" fill=\"#9ecae1\" fill-opacity=\"0.4\" stroke=\"none\"/>\n",
                     upper, lower);
    s += fmt::format("<line x1=\"{:.2f}\" y1=\"{:.2f}\" x2=\"{:.2f}\" y2=\"{:.2f}\" stroke=\"#08519c\"/>\n",
                     px(xr.lo), py(icpt + slope * xr.lo), px(xr.hi), py(icpt + slope * xr.hi));
  }
  for (std::size_t i = 0; i < n; ++i) {
    s += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"#333\"/>\n", px(plot.x[i]),
                     py(plot.y[i]));
  }
  s += axes(xr, yr, plot.x_label, plot.y_label, true);
  s += "</svg>\n";
  return s;
}

std::string render_bar_svg(const BarChart& chart) {
  double top = 0;
  for (const auto& [_, v] : chart.bars) top = std::max(top, v);
  const Range yr{0, top > 0 ? top * 1.05 : 1};
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string s = header(chart.title);
  const double slot = chart.bars.empty() ? 0 : (x1 - x0) / static_cast<double>(chart.bars.size());
  for (std::size_t i = 0; i < chart.bars.size(); ++i) {
    const auto& [label, v] = chart.bars[i];
    const double h = std::max(0.0, v) / yr.span() * (y0 - y1);
    const double bx = x0 + slot * (static_cast<double>(i) + 0.15);
    const bool hot = chart.highlight && *chart.highlight == label;
    s += fmt::format("<rect x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" fill=\"{}\"/>\n", bx,
                     y0 - h, slot * 0.7, h, hot ? "#d94801" : "#6baed6");
    s += fmt::format("<text x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">{}</text>\n", bx + slot * 0.35,
                     y0 + 14, escape(label));
  }
  s += axes(Range{0, 1}, yr, "", chart.y_label, false);
  s += "</svg>\n";
  return s;
}

}  // namespace scalarexp
