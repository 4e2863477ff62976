// SPDX-License-Identifier: Apache-2.0
#include "plots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace slidegraph::app {
namespace {

constexpr double kWidth = 640, kHeight = 400, kLeft = 60, kRight = 160, kTop = 40, kBottom = 50;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string header(const std::string& title, const std::string& comment) {
  std::string s = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  if (!comment.empty()) s += "<!-- " + escape(comment) + " -->\n";
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
       "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<text x=\"" + num(kWidth / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" + escape(title) +
       "</text>\n";
  return s;
}

std::string axes(double y_lo, double y_hi, const std::string& y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string s = "<path d=\"M" + num(x0) + " " + num(y1) + " V" + num(y0) + " H" + num(x1) +
                  "\" stroke=\"black\" fill=\"none\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y_lo + (y_hi - y_lo) * i / 4.0;
    const double y = y0 - (y0 - y1) * i / 4.0;
    char label[32];
    std::snprintf(label, sizeof label, "%.3g", v);
    s += "<text x=\"" + num(x0 - 6) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\">" + label + "</text>\n";
  }
  s += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" transform=\"rotate(-90 16 " + num((y0 + y1) / 2) +
       ")\" text-anchor=\"middle\">" + escape(y_label) + "</text>\n";
  return s;
}

}  // namespace

std::string svg_line_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series,
                           const std::string& comment) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::size_t n_max = 1;
  for (const Series& s : series) {
    for (double v : s.y) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    n_max = std::max(n_max, s.y.size());
  }
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  lo = std::min(lo, 0.0);
  if (hi <= lo) hi = lo + 1;

  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string svg = header(title, comment) + axes(lo, hi, y_label);
  svg += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) + "\" text-anchor=\"middle\">epoch</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* colour = kPalette[k % std::size(kPalette)];
    std::string points;
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double x = n_max > 1 ? x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(n_max - 1) : x0;
      const double y = y0 - (y0 - y1) * (s.y[i] - lo) / (hi - lo);
      points += (i ? " " : "") + num(x) + "," + num(y);
    }
    svg += "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\" points=\"" + points +
           "\"/>\n";
    const double ly = y1 + 18.0 * static_cast<double>(k);
    svg += "<rect x=\"" + num(x1 + 12) + "\" y=\"" + num(ly - 9) + "\" width=\"12\" height=\"3\" fill=\"" + colour +
           "\"/>\n";
    svg += "<text x=\"" + num(x1 + 30) + "\" y=\"" + num(ly - 4) + "\">" + escape(s.name) + "</text>\n";
  }
  return svg + "</svg>\n";
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, double y_max, const std::string& comment) {
  double lo = 0.0;
  for (double v : values) lo = std::min(lo, v);
  const double hi = std::max(y_max, lo + 1e-9);
  const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
  std::string svg = header(title, comment) + axes(lo, hi, "kappa");
  const double slot = (x1 - x0) / static_cast<double>(std::max<std::size_t>(values.size(), 1));
  auto to_y = [&](double v) { return y0 - (y0 - y1) * (v - lo) / (hi - lo); };
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double top = to_y(std::max(values[i], 0.0)), base = to_y(std::min(values[i], 0.0));
    const double x = x0 + slot * static_cast<double>(i) + slot * 0.2;
    svg += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" + num(slot * 0.6) + "\" height=\"" +
           num(base - top) + "\" fill=\"" + kPalette[i % std::size(kPalette)] + "\"/>\n";
    char v[32];
    std::snprintf(v, sizeof v, "%.3f", values[i]);
    svg += "<text x=\"" + num(x + slot * 0.3) + "\" y=\"" + num(top - 4) + "\" text-anchor=\"middle\">" + v +
           "</text>\n";
    svg += "<text x=\"" + num(x + slot * 0.3) + "\" y=\"" + num(y0 + 16) + "\" text-anchor=\"middle\">" +
           escape(labels.at(i)) + "</text>\n";
  }
  return svg + "</svg>\n";
}

}  // namespace slidegraph::app
