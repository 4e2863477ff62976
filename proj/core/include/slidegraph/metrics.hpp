// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace slidegraph::metrics {

/// counts[i][j]: slides with actual class i predicted as j.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t classes);

  std::size_t classes() const { return n_; }
  std::uint64_t operator()(std::size_t actual, std::size_t predicted) const { return counts_[actual * n_ + predicted]; }
  void add(std::size_t actual, std::size_t predicted);
  std::uint64_t total() const;
  std::vector<std::uint64_t> row_sums() const;
  std::vector<std::uint64_t> col_sums() const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

/// Validates equal nonzero length and labels in [0, classes).
ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted, std::size_t classes);

/// w[i][j] = (i - j)^2 / (N - 1), row-major N x N. N must be >= 2.
std::vector<double> quadratic_weights(std::size_t classes);

/// 1 - sum(w * O) / sum(w * E), with E the outer product of the actual and
/// predicted marginals scaled to the same total as O. Returns 1 when
/// sum(w * E) is zero (both label vectors constant and equal).
double quadratic_weighted_kappa(std::span<const int> actual, std::span<const int> predicted, std::size_t classes);
/// Same with caller-supplied N x N weights.
double weighted_kappa(const ConfusionMatrix& observed, std::span<const double> weights);

double accuracy(std::span<const int> actual, std::span<const int> predicted);

struct GleasonPair {
  int primary = 0;
  int secondary = 0;
};

/// Gleason total <= 6 -> 1; 3+4 -> 2; 4+3 -> 3; 8 -> 4; 9-10 -> 5.
int isup_from_gleason(GleasonPair g);

/// Line-oriented metrics report.
///
///   # slidegraph metrics report v1
///   # model <name>
///   # config_hash <16 hex digits>
///   # classes <N>
///   slide_id<TAB>actual<TAB>predicted<TAB>p0<TAB>...<TAB>p{N-1}
///   <one line per slide, probabilities printed with 6 decimals>
///   [summary]
///   slides <count>
///   kappa <value, 6 decimals>
///   accuracy <value, 6 decimals>
///   confusion
///   <N lines of N tab-separated counts; row = actual>
struct ReportRow {
  std::string slide_id;
  int actual = 0;
  int predicted = 0;
  std::vector<double> probabilities;
};

struct Report {
  std::string model;
  std::uint64_t config_hash = 0;
  std::size_t classes = 0;
  std::vector<ReportRow> rows;

  double kappa() const;
  double accuracy() const;
  ConfusionMatrix confusion() const;
  std::string format() const;
};

/// Parses what Report::format() wrote (the per-slide rows and header fields).
Report parse_report(const std::string& text);

}  // namespace slidegraph::metrics
