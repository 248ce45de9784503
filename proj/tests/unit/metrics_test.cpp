/*
 * Copyright 2026 The MVMC Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <vector>

#include <gtest/gtest.h>

#include "mvmc/error.hpp"
#include "mvmc/metrics.hpp"
#include "test_util.hpp"

namespace mvmc {
namespace {

const std::vector<int> kToyTruth{1, -1, -1, -1, 1, -1, -1, -1};
const std::vector<double> kToyFirst{0.4, 0.3, 0.2, 0.1, -0.1, -0.2, -0.3, -0.4};
const std::vector<double> kToySecond{-0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4};

TEST(AveragePrecision, ToyRankings) {
  EXPECT_NEAR(average_precision(kToyFirst, kToyTruth), 0.7, 1e-12);
  EXPECT_NEAR(average_precision(kToySecond, kToyTruth), 0.25, 1e-12);
}

TEST(AveragePrecision, PerfectRankingIsOne) {
  const std::vector<double> s{0.9, 0.8, 0.1, 0.05};
  const std::vector<int> y{1, 1, -1, -1};
  EXPECT_EQ(average_precision(s, y), 1.0);
}

TEST(AveragePrecision, NoPositivesIsUndefined) {
  const std::vector<double> s{0.1, 0.2};
  const std::vector<int> y{-1, -1};
  EXPECT_THROW(average_precision(s, y), UndefinedMetricError);
}

TEST(AveragePrecision, TiesBreakByIndex) {
  const std::vector<double> s{0.5, 0.5};
  EXPECT_EQ(average_precision(s, std::vector<int>{1, -1}), 1.0);
  EXPECT_EQ(average_precision(s, std::vector<int>{-1, 1}), 0.5);
}

TEST(AveragePrecision, MatchesPrecAtKEnumeration) {
  testing::Gen g(21);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = g.index(1, 8);
    std::vector<int> y = g.truth(n);
    if (std::none_of(y.begin(), y.end(), [](int v) { return v > 0; })) y[0] = 1;
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = std::round(4.0 * g.normal()) / 4.0;  // frequent ties
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
      return s[static_cast<std::size_t>(a)] > s[static_cast<std::size_t>(b)];
    });
    EXPECT_NEAR(average_precision(s, y), testing::ap_by_enumeration(y, order), 1e-15);
  }
}

TEST(Auc, Examples) {
  const std::vector<int> y{1, 1, -1, -1};
  EXPECT_EQ(auc(std::vector<double>{0.9, 0.8, 0.2, 0.1}, y), 1.0);
  EXPECT_EQ(auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, y), 0.5);
  // Brute force over the 12 positive/negative pairs of the first toy ranking.
  const double oracle = testing::auc_by_pairs(kToyFirst, kToyTruth);
  EXPECT_EQ(oracle, 0.75);
  EXPECT_NEAR(auc(kToyFirst, kToyTruth), oracle, 1e-15);
  EXPECT_THROW(auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), UndefinedMetricError);
}

TEST(Auc, MatchesPairEnumeration) {
  testing::Gen g(22);
  for (int trial = 0; trial < 300; ++trial) {
    const Index n = g.index(2, 12);
    const std::vector<int> y = g.truth(n);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = std::round(3.0 * g.normal()) / 3.0;
    EXPECT_NEAR(auc(s, y), testing::auc_by_pairs(s, y), 1e-14);
  }
}

TEST(RankingMetrics, InvariantUnderIncreasingTransforms) {
  testing::Gen g(23);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = g.index(2, 20);
    const std::vector<int> y = g.truth(n);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = g.normal();
    const double a = g.uniform(0.1, 10.0);
    const double b = g.normal();
    std::vector<double> t(s.size());
    std::transform(s.begin(), s.end(), t.begin(), [&](double v) { return a * v + b + std::pow(v, 3); });
    EXPECT_EQ(average_precision(s, y), average_precision(t, y));
    EXPECT_EQ(auc(s, y), auc(t, y));
    const double ap = average_precision(s, y);
    const double au = auc(s, y);
    EXPECT_GE(ap, 0.0);
    EXPECT_LE(ap, 1.0);
    EXPECT_GE(au, 0.0);
    EXPECT_LE(au, 1.0);
  }
}

LabelMatrix signs(const Matrix& m) { return LabelMatrix::FromDense(m); }

TEST(HammingLoss, Examples) {
  Matrix t(2, 2);
  t << 1, -1, -1, 1;
  EXPECT_EQ(hamming_loss(signs(t), signs(t)), 0.0);
  EXPECT_EQ(hamming_loss(signs(-t), signs(t)), 1.0);
  Matrix p = t;
  p(0, 1) = 1;
  EXPECT_EQ(hamming_loss(signs(p), signs(t)), 0.25);
  EXPECT_THROW(hamming_loss(LabelMatrix(1, 2), signs(t)), DimensionError);
}

TEST(HammingLoss, StaysInUnitInterval) {
  testing::Gen g(24);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix a = g.matrix(3, 5);
    const Matrix b = g.matrix(3, 5);
    const double h = hamming_loss(hard_labels(a, 0.0), hard_labels(b, 0.0));
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, 1.0);
  }
}

TEST(HardLabels, StrictThreshold) {
  Matrix s(1, 3);
  s << 0.5, 0.51, 0.2;
  const LabelMatrix h = hard_labels(s, 0.5);
  EXPECT_EQ(h.at(0, 0), Label::kNegative);
  EXPECT_EQ(h.at(0, 1), Label::kPositive);
  EXPECT_EQ(h.at(0, 2), Label::kNegative);
}

TEST(MeanOverLabels, Examples) {
  const std::vector<std::optional<double>> two{0.7, 0.25};
  EXPECT_NEAR(mean_over_labels(two).mean, 0.475, 1e-15);
  EXPECT_EQ(mean_over_labels(two).skipped, 0);
  const std::vector<std::optional<double>> one{1.0};
  EXPECT_EQ(mean_over_labels(one).mean, 1.0);
  const std::vector<std::optional<double>> gap{0.7, std::nullopt, 0.25};
  const LabelMean m = mean_over_labels(gap);
  EXPECT_NEAR(m.mean, 0.475, 1e-15);
  EXPECT_EQ(m.skipped, 1);
  const std::vector<std::optional<double>> none{std::nullopt};
  EXPECT_THROW(mean_over_labels(none), UndefinedMetricError);
}

TEST(EvaluateColumns, SkipsUndefinedLabelsAndReportsThem) {
  Matrix truth(2, 4);
  truth << 1, -1, 1, -1,  //
      -1, -1, -1, -1;
  Matrix scores(2, 4);
  scores << 0.9, 0.1, 0.8, 0.2,  //
      0.3, 0.4, 0.1, 0.2;
  const std::vector<Index> cols{0, 1, 2, 3};
  const MetricSet m = evaluate_columns(scores, signs(truth), cols, 0.5);
  EXPECT_EQ(m.map, 1.0);
  EXPECT_EQ(m.mauc, 1.0);
  EXPECT_EQ(m.skipped_ap, 1);
  EXPECT_EQ(m.skipped_auc, 1);
  EXPECT_EQ(m.hamming, 0.0);
}

}  // namespace
}  // namespace mvmc
