// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace slidegraph::app {

struct Series {
  std::string name;
  std::vector<double> y;  // x is the 1-based index
};

/// Minimal standalone SVG documents; deterministic text for identical input.
std::string svg_line_chart(const std::string& title, const std::string& y_label, const std::vector<Series>& series,
                           const std::string& comment = {});
std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, double y_max, const std::string& comment = {});

}  // namespace slidegraph::app
