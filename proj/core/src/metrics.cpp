// SPDX-License-Identifier: Apache-2.0
#include "slidegraph/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "slidegraph/error.hpp"

namespace slidegraph::metrics {

ConfusionMatrix::ConfusionMatrix(std::size_t classes) : n_(classes), counts_(classes * classes, 0) {
  require(classes >= 1, "confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted) {
  require(actual < n_ && predicted < n_, "confusion matrix label out of range");
  ++counts_[actual * n_ + predicted];
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::vector<std::uint64_t> ConfusionMatrix::row_sums() const {
  std::vector<std::uint64_t> s(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) s[i] += counts_[i * n_ + j];
  return s;
}

std::vector<std::uint64_t> ConfusionMatrix::col_sums() const {
  std::vector<std::uint64_t> s(n_, 0);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) s[j] += counts_[i * n_ + j];
  return s;
}

ConfusionMatrix confusion(std::span<const int> actual, std::span<const int> predicted, std::size_t classes) {
  require(!actual.empty(), "confusion needs at least one label pair");
  require(actual.size() == predicted.size(), [&] { return "actual and predicted label counts differ: " +
                                                 std::to_string(actual.size()) + " vs " +
                                                 std::to_string(predicted.size()); });
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const int a = actual[i], p = predicted[i];
    require(a >= 0 && static_cast<std::size_t>(a) < classes && p >= 0 && static_cast<std::size_t>(p) < classes,
            [&] { return "label out of range for " + std::to_string(classes) + " classes"; });
    m.add(static_cast<std::size_t>(a), static_cast<std::size_t>(p));
  }
  return m;
}

std::vector<double> quadratic_weights(std::size_t classes) {
  require(classes >= 2, "quadratic weights need at least two classes");
  std::vector<double> w(classes * classes);
  const double denom = static_cast<double>(classes - 1);
  for (std::size_t i = 0; i < classes; ++i)
    for (std::size_t j = 0; j < classes; ++j) {
      const double d = static_cast<double>(i) - static_cast<double>(j);
      w[i * classes + j] = d * d / denom;
    }
  return w;
}

double weighted_kappa(const ConfusionMatrix& observed, std::span<const double> weights) {
  const std::size_t n = observed.classes();
  require(weights.size() == n * n, "weight matrix must be N x N");
  const auto rows = observed.row_sums();
  const auto cols = observed.col_sums();
  const double total = static_cast<double>(observed.total());
  require(total > 0, "kappa of an empty confusion matrix");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double w = weights[i * n + j];
      num += w * static_cast<double>(observed(i, j));
      den += w * static_cast<double>(rows[i]) * static_cast<double>(cols[j]) / total;
    }
  if (den == 0.0) return 1.0;
  return 1.0 - num / den;
}

double quadratic_weighted_kappa(std::span<const int> actual, std::span<const int> predicted, std::size_t classes) {
  const ConfusionMatrix o = confusion(actual, predicted, classes);
  return weighted_kappa(o, quadratic_weights(classes));
}

double accuracy(std::span<const int> actual, std::span<const int> predicted) {
  require(!actual.empty() && actual.size() == predicted.size(), "accuracy needs equal nonempty label vectors");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) hit += actual[i] == predicted[i] ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(actual.size());
}

int isup_from_gleason(GleasonPair g) {
  require(g.primary >= 1 && g.primary <= 5 && g.secondary >= 1 && g.secondary <= 5,
          "Gleason pattern scores must lie in 1..5");
  const int total = g.primary + g.secondary;
  if (total <= 6) return 1;
  if (total == 7) return g.primary == 3 ? 2 : 3;
  if (total == 8) return 4;
  return 5;
}

namespace {

std::vector<int> column(const std::vector<ReportRow>& rows, bool actual) {
  std::vector<int> v;
  for (const auto& r : rows) v.push_back(actual ? r.actual : r.predicted);
  return v;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

double Report::kappa() const {
  return quadratic_weighted_kappa(column(rows, true), column(rows, false), classes);
}

double Report::accuracy() const { return metrics::accuracy(column(rows, true), column(rows, false)); }

ConfusionMatrix Report::confusion() const {
  return metrics::confusion(column(rows, true), column(rows, false), classes);
}

std::string Report::format() const {
  std::ostringstream os;
  char hash[32];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, config_hash);
  os << "# slidegraph metrics report v1\n";
  os << "# model " << model << '\n';
  os << "# config_hash " << hash << '\n';
  os << "# classes " << classes << '\n';
  os << "slide_id\tactual\tpredicted";
  for (std::size_t j = 0; j < classes; ++j) os << "\tp" << j;
  os << '\n';
  for (const auto& r : rows) {
    require(r.probabilities.size() == classes, "report row has the wrong number of probabilities");
    os << r.slide_id << '\t' << r.actual << '\t' << r.predicted;
    for (double p : r.probabilities) os << '\t' << fixed6(p);
    os << '\n';
  }
  os << "[summary]\n";
  os << "slides " << rows.size() << '\n';
  os << "kappa " << fixed6(kappa()) << '\n';
  os << "accuracy " << fixed6(accuracy()) << '\n';
  os << "confusion\n";
  const ConfusionMatrix m = confusion();
  for (std::size_t i = 0; i < classes; ++i) {
    for (std::size_t j = 0; j < classes; ++j) os << (j ? "\t" : "") << m(i, j);
    os << '\n';
  }
  return os.str();
}

Report parse_report(const std::string& text) {
  Report r;
  std::istringstream in(text);
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line == "[summary]") break;
    if (line.rfind("# model ", 0) == 0) {
      r.model = line.substr(8);
    } else if (line.rfind("# config_hash ", 0) == 0) {
      r.config_hash = std::stoull(line.substr(14), nullptr, 16);
    } else if (line.rfind("# classes ", 0) == 0) {
      r.classes = std::stoul(line.substr(10));
    } else if (line.rfind("#", 0) == 0) {
      continue;
    } else if (!header_seen) {
      if (line.rfind("slide_id\t", 0) != 0) throw FormatError("metrics report lacks its column header");
      header_seen = true;
    } else {
      std::istringstream ls(line);
      ReportRow row;
      std::string field;
      std::getline(ls, row.slide_id, '\t');
      std::getline(ls, field, '\t');
      row.actual = std::stoi(field);
      std::getline(ls, field, '\t');
      row.predicted = std::stoi(field);
      while (std::getline(ls, field, '\t')) row.probabilities.push_back(std::stod(field));
      r.rows.push_back(std::move(row));
    }
  }
  if (!header_seen) throw FormatError("not a metrics report");
  return r;
}

}  // namespace slidegraph::metrics
