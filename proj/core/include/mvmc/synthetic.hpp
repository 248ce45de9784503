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

#include <cstdint>
#include <vector>

#include "mvmc/io.hpp"
#include "mvmc/types.hpp"

namespace mvmc {

/// Low-rank multi-view multi-label generator.
///
/// Latent factors U (rank x n) are standard normal. Label t of sample j is the
/// sign of w_t^T u_j - b_t, with b_t set so roughly `positive_rate` of samples
/// are positive. View v is
///   X_v = s_v A_v U + (1 - s_v) E_v + noise_sigma G_v
/// for informativeness s_v, a random d_v x rank map A_v, and independent
/// standard normal E_v, G_v. Entries are then dropped at `missing_feature_rate`.
struct SyntheticSpec {
  Index views = 4;
  Index samples = 400;
  Index labels = 5;
  Index rank = 5;
  double noise_sigma = 0.0;
  std::vector<double> informativeness;  // length views; empty means all 1
  double missing_feature_rate = 0.0;
  std::uint64_t seed = 0;
  Index view_dim = 20;
  double positive_rate = 0.3;
  double test_fraction = 0.5;
  Index labeled_per_class = 20;

  /// Throws ConfigError for an infeasible spec.
  void validate() const;
};

struct SyntheticData {
  std::vector<FeatureMatrix> views;
  LabelMatrix truth;         // m x n, fully known
  Matrix latent;             // rank x n
  Matrix label_scores;       // m x n, w_t^T u_j - b_t
  std::vector<SampleRole> roles;
  std::uint64_t seed = 0;

  MultiViewDataset dataset() const;
  io::DatasetFiles files() const;
};

SyntheticData generate_synthetic(const SyntheticSpec& spec);

/// Draws `per_class` labeled samples per label from the non-test pool
/// (positives of that label), unlabeled for the rest of the pool.
std::vector<SampleRole> draw_partition(const LabelMatrix& truth, const std::vector<bool>& is_test,
                                       Index per_class, std::uint64_t seed);

}  // namespace mvmc
