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

#include "mvmc/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "mvmc/error.hpp"

namespace mvmc {

namespace {

void require_same_size(std::span<const double> scores, std::span<const int> truth) {
  if (scores.size() != truth.size()) {
    throw DimensionError("scores and truth differ in length (" + std::to_string(scores.size()) +
                         " vs " + std::to_string(truth.size()) + ")");
  }
}

}  // namespace

double average_precision(std::span<const double> scores, std::span<const int> truth) {
  require_same_size(scores, truth);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (truth[order[k]] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw UndefinedMetricError("average precision undefined without positives");
  return sum / static_cast<double>(hits);
}

double auc(std::span<const double> scores, std::span<const int> truth) {
  require_same_size(scores, truth);
  // Rank-sum form with midranks for ties.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double pos_rank_sum = 0.0;
  std::size_t pos = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) {
      if (truth[order[k]] > 0) {
        pos_rank_sum += midrank;
        ++pos;
      }
    }
    i = j + 1;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw UndefinedMetricError("AUC undefined on a single-class corpus");
  const double np = static_cast<double>(pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(neg));
}

double hamming_loss(const LabelMatrix& predicted, const LabelMatrix& truth) {
  if (predicted.labels() != truth.labels() || predicted.samples() != truth.samples()) {
    throw DimensionError("hamming_loss: shape mismatch");
  }
  const Index total = truth.labels() * truth.samples();
  if (total == 0) throw UndefinedMetricError("hamming loss over an empty matrix");
  Index wrong = 0;
  for (Index j = 0; j < truth.samples(); ++j) {
    for (Index t = 0; t < truth.labels(); ++t) {
      if (predicted.value(t, j) != truth.value(t, j)) ++wrong;
    }
  }
  return static_cast<double>(wrong) / static_cast<double>(total);
}

LabelMatrix hard_labels(const Matrix& scores, double threshold) {
  LabelMatrix out(scores.rows(), scores.cols());
  for (Index j = 0; j < scores.cols(); ++j) {
    for (Index t = 0; t < scores.rows(); ++t) {
      out.set(t, j, scores(t, j) > threshold ? Label::kPositive : Label::kNegative);
    }
  }
  return out;
}

LabelMean mean_over_labels(std::span<const std::optional<double>> per_label) {
  LabelMean out;
  double sum = 0.0;
  int defined = 0;
  for (const auto& v : per_label) {
    if (v) {
      sum += *v;
      ++defined;
    } else {
      ++out.skipped;
    }
  }
  if (defined == 0) throw UndefinedMetricError("no label has a defined metric");
  out.mean = sum / defined;
  return out;
}

MetricSet evaluate_columns(const Matrix& scores, const LabelMatrix& truth,
                           std::span<const Index> columns, double threshold) {
  if (scores.rows() != truth.labels() || scores.cols() != truth.samples()) {
    throw DimensionError("evaluate: score matrix shape does not match truth");
  }
  if (columns.empty()) throw UndefinedMetricError("evaluate: no samples to evaluate");
  MetricSet out;
  const Index m = truth.labels();
  std::vector<double> s(columns.size());
  std::vector<int> y(columns.size());
  for (Index t = 0; t < m; ++t) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      s[c] = scores(t, columns[c]);
      y[c] = static_cast<int>(truth.value(t, columns[c]));
    }
    const bool any_pos = std::any_of(y.begin(), y.end(), [](int v) { return v > 0; });
    const bool any_neg = std::any_of(y.begin(), y.end(), [](int v) { return v < 0; });
    out.ap_per_label.push_back(any_pos ? std::optional(average_precision(s, y)) : std::nullopt);
    out.auc_per_label.push_back(any_pos && any_neg ? std::optional(auc(s, y)) : std::nullopt);
  }
  const LabelMean ap = mean_over_labels(out.ap_per_label);
  const LabelMean au = mean_over_labels(out.auc_per_label);
  out.map = ap.mean;
  out.skipped_ap = ap.skipped;
  out.mauc = au.mean;
  out.skipped_auc = au.skipped;

  Matrix sub(m, static_cast<Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) sub.col(static_cast<Index>(c)) = scores.col(columns[c]);
  out.hamming = hamming_loss(hard_labels(sub, threshold), truth.columns(columns));
  return out;
}

}  // namespace mvmc
