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

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "mvmc/types.hpp"

namespace mvmc {

/// Average precision of `scores` against truth in {-1, +1}. Samples are
/// ranked by descending score, ties broken by ascending index. Throws
/// UndefinedMetricError when no positive is present.
double average_precision(std::span<const double> scores, std::span<const int> truth);

/// Mann-Whitney AUC; ties count one half. Throws UndefinedMetricError on a
/// single-class corpus.
double auc(std::span<const double> scores, std::span<const int> truth);

/// Fraction of entries where the hard labels disagree. Both matrices must be
/// fully known over the compared entries.
double hamming_loss(const LabelMatrix& predicted, const LabelMatrix& truth);

/// Thresholds a score matrix: score > threshold is +1, otherwise -1.
LabelMatrix hard_labels(const Matrix& scores, double threshold);

struct LabelMean {
  double mean = 0.0;
  int skipped = 0;
};

/// Mean of the defined entries. Throws UndefinedMetricError if none is
/// defined.
LabelMean mean_over_labels(std::span<const std::optional<double>> per_label);

/// Per-label AP and AUC plus hamming loss over a set of sample columns.
struct MetricSet {
  double map = 0.0;
  double mauc = 0.0;
  double hamming = 0.0;
  int skipped_ap = 0;
  int skipped_auc = 0;
  std::vector<std::optional<double>> ap_per_label;
  std::vector<std::optional<double>> auc_per_label;
};

/// `scores` is m x n over all samples; `truth` must be known on `columns`.
MetricSet evaluate_columns(const Matrix& scores, const LabelMatrix& truth,
                           std::span<const Index> columns, double threshold);

}  // namespace mvmc
