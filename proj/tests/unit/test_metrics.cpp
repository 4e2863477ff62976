// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "slidegraph/error.hpp"
#include "slidegraph/metrics.hpp"
#include "slidegraph/rng.hpp"

namespace slidegraph::metrics {
namespace {

std::vector<int> random_labels(std::size_t n, int classes, Rng& rng) {
  std::vector<int> v(n);
  for (int& x : v) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return v;
}

TEST(Kappa, Examples) {
  const std::vector<int> a{0, 0, 1, 1}, p{1, 1, 0, 0};
  EXPECT_DOUBLE_EQ(quadratic_weighted_kappa(a, a, 2), 1.0);
  EXPECT_NEAR(quadratic_weighted_kappa(a, p, 2), -1.0, 1e-15);
  const std::vector<int> constant{2, 2, 2};
  EXPECT_EQ(quadratic_weighted_kappa(constant, constant, 4), 1.0);
}

TEST(Kappa, MatchesPairwiseOracle) {
  Rng rng(51);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(100);
    const auto a = random_labels(n, 6, rng);
    const auto p = trial % 3 ? random_labels(n, 6, rng) : a;
    ASSERT_NEAR(quadratic_weighted_kappa(a, p, 6), oracle::quadratic_kappa(a, p, 6), 1e-12);
  }
}

TEST(Kappa, OneOnlyForPerfectAgreement) {
  Rng rng(52);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = random_labels(20, 5, rng);
    a[0] = 0;
    a[1] = 4;
    auto p = a;
    EXPECT_DOUBLE_EQ(quadratic_weighted_kappa(a, p, 5), 1.0);
    p[rng.below(20)] = static_cast<int>(rng.below(5));
    if (p != a) {
      EXPECT_LT(quadratic_weighted_kappa(a, p, 5), 1.0);
    }
  }
}

TEST(Kappa, InvariantToWeightScaleAndRelabeling) {
  Rng rng(53);
  const auto w = quadratic_weights(6);
  EXPECT_EQ(w[0 * 6 + 0], 0.0);
  EXPECT_DOUBLE_EQ(w[0 * 6 + 5], 5.0);
  EXPECT_DOUBLE_EQ(w[2 * 6 + 4], w[4 * 6 + 2]);
  for (int trial = 0; trial < 100; ++trial) {
    const auto a = random_labels(40, 6, rng), p = random_labels(40, 6, rng);
    const ConfusionMatrix o = confusion(a, p, 6);
    const double k = weighted_kappa(o, w);
    for (double c : {1e-3, 0.2, 5.0, 1e4}) {
      std::vector<double> scaled(w);
      for (double& x : scaled) x *= c;
      EXPECT_NEAR(weighted_kappa(o, scaled), k, 1e-12);
    }
    std::vector<double> squared(w);  // (i-j)^2/(N-1)^2
    for (double& x : squared) x /= 5.0;
    EXPECT_NEAR(weighted_kappa(o, squared), k, 1e-12);
    EXPECT_NEAR(quadratic_weighted_kappa(p, a, 6), k, 1e-12);
    std::vector<int> ra(a), rp(p);
    for (int& x : ra) x = 5 - x;
    for (int& x : rp) x = 5 - x;
    EXPECT_NEAR(quadratic_weighted_kappa(ra, rp, 6), k, 1e-12);
  }
}

TEST(Kappa, ShuffledPredictionsAverageToZero) {
  Rng rng(54);
  const auto a = random_labels(500, 6, rng);
  double total = 0.0;
  for (int s = 0; s < 200; ++s) {
    auto p = a;
    for (std::size_t i = p.size(); i > 1; --i) std::swap(p[i - 1], p[rng.below(i)]);
    total += quadratic_weighted_kappa(a, p, 6);
  }
  EXPECT_LT(std::abs(total / 200.0), 0.05);
}

TEST(Kappa, RejectsBadInput) {
  const std::vector<int> a{0, 1}, b{0}, c{0, 2}, e;
  EXPECT_THROW(quadratic_weighted_kappa(a, b, 2), ContractViolation);
  EXPECT_THROW(quadratic_weighted_kappa(a, c, 2), ContractViolation);
  EXPECT_THROW(quadratic_weighted_kappa(e, e, 2), ContractViolation);
  EXPECT_THROW(quadratic_weighted_kappa(a, a, 1), ContractViolation);
  const std::vector<int> neg{-1, 0};
  EXPECT_THROW(quadratic_weighted_kappa(neg, a, 2), ContractViolation);
}

TEST(Confusion, ExamplesAndMarginals) {
  const std::vector<int> a1{2}, p1{3};
  const ConfusionMatrix one = confusion(a1, p1, 6);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(one(i, j), (i == 2 && j == 3) ? 1u : 0u);
  const std::vector<int> ones(5, 1);
  EXPECT_EQ(confusion(ones, ones, 3)(1, 1), 5u);

  Rng rng(55);
  const auto a = random_labels(300, 4, rng), p = random_labels(300, 4, rng);
  const ConfusionMatrix m = confusion(a, p, 4);
  std::vector<std::uint64_t> ha(4, 0), hp(4, 0);
  for (int x : a) ++ha[static_cast<std::size_t>(x)];
  for (int x : p) ++hp[static_cast<std::size_t>(x)];
  EXPECT_EQ(m.row_sums(), ha);
  EXPECT_EQ(m.col_sums(), hp);
  EXPECT_EQ(m.total(), 300u);
}

TEST(Accuracy, Basic) {
  const std::vector<int> a{0, 1, 2, 2}, p{0, 2, 2, 1};
  EXPECT_DOUBLE_EQ(accuracy(a, p), 0.5);
}

TEST(Isup, TableRows) {
  EXPECT_EQ(isup_from_gleason({3, 4}), 2);
  EXPECT_EQ(isup_from_gleason({4, 3}), 3);
  EXPECT_EQ(isup_from_gleason({5, 5}), 5);
  EXPECT_EQ(isup_from_gleason({3, 3}), 1);
  EXPECT_EQ(isup_from_gleason({1, 2}), 1);
  EXPECT_EQ(isup_from_gleason({4, 4}), 4);
  EXPECT_EQ(isup_from_gleason({3, 5}), 4);
  EXPECT_EQ(isup_from_gleason({5, 4}), 5);
  EXPECT_THROW(isup_from_gleason({0, 3}), ContractViolation);
  EXPECT_THROW(isup_from_gleason({3, 6}), ContractViolation);
}

TEST(Report, FormatParseRoundTrip) {
  Report r;
  r.model = "gcn_small";
  r.config_hash = 0x00ab00cd00ef0012ULL;
  r.classes = 3;
  r.rows = {{"slide_0001", 0, 0, {0.7, 0.2, 0.1}}, {"slide_0002", 2, 1, {0.1, 0.5, 0.4}},
            {"slide_0003", 1, 1, {0.25, 0.5, 0.25}}};
  const std::string text = r.format();
  EXPECT_NE(text.find("# config_hash 00ab00cd00ef0012"), std::string::npos);
  EXPECT_NE(text.find("kappa "), std::string::npos);
  const Report back = parse_report(text);
  EXPECT_EQ(back.model, r.model);
  EXPECT_EQ(back.config_hash, r.config_hash);
  EXPECT_EQ(back.classes, 3u);
  ASSERT_EQ(back.rows.size(), 3u);
  EXPECT_EQ(back.rows[1].slide_id, "slide_0002");
  EXPECT_EQ(back.rows[1].predicted, 1);
  EXPECT_NEAR(back.rows[1].probabilities[2], 0.4, 1e-6);
  EXPECT_EQ(back.format(), text);
  EXPECT_NEAR(r.kappa(), quadratic_weighted_kappa(std::vector<int>{0, 2, 1}, std::vector<int>{0, 1, 1}, 3), 1e-15);
  EXPECT_THROW(parse_report("not a report\n"), FormatError);
}

}  // namespace
}  // namespace slidegraph::metrics
