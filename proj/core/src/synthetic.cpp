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

#include "mvmc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "mvmc/error.hpp"

namespace mvmc {

void SyntheticSpec::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("synthetic spec: " + what); };
  if (views < 1) fail("views must be >= 1");
  if (samples < 2) fail("samples must be >= 2");
  if (labels < 1) fail("labels must be >= 1");
  if (view_dim < 1) fail("view_dim must be >= 1");
  if (rank < 1 || rank > std::min(labels + view_dim, samples)) {
    fail("rank " + std::to_string(rank) + " is infeasible for " + std::to_string(labels) + " labels, " +
         std::to_string(view_dim) + " features and " + std::to_string(samples) + " samples");
  }
  if (!(noise_sigma >= 0.0)) fail("noise_sigma must be nonnegative");
  if (!informativeness.empty() && static_cast<Index>(informativeness.size()) != views) {
    fail("informativeness must list one value per view");
  }
  for (double s : informativeness) {
    if (!(s >= 0.0 && s <= 1.0)) fail("informativeness values must lie in [0, 1]");
  }
  if (!(missing_feature_rate >= 0.0 && missing_feature_rate < 1.0)) fail("missing_feature_rate must lie in [0, 1)");
  if (!(positive_rate > 0.0 && positive_rate < 1.0)) fail("positive_rate must lie in (0, 1)");
  if (!(test_fraction >= 0.0 && test_fraction < 1.0)) fail("test_fraction must lie in [0, 1)");
  if (labeled_per_class < 0) fail("labeled_per_class must be nonnegative");
}

MultiViewDataset SyntheticData::dataset() const { return mask_to_partition(views, truth, roles, seed); }

io::DatasetFiles SyntheticData::files() const { return io::DatasetFiles{views, truth, roles, seed}; }

std::vector<SampleRole> draw_partition(const LabelMatrix& truth, const std::vector<bool>& is_test,
                                       Index per_class, std::uint64_t seed) {
  const Index n = truth.samples();
  if (static_cast<Index>(is_test.size()) != n) throw DimensionError("draw_partition: test flags size mismatch");
  std::vector<SampleRole> roles(static_cast<std::size_t>(n), SampleRole::kUnlabeled);
  for (Index j = 0; j < n; ++j) {
    if (is_test[static_cast<std::size_t>(j)]) roles[static_cast<std::size_t>(j)] = SampleRole::kTest;
  }
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (Index t = 0; t < truth.labels(); ++t) {
    std::vector<Index> pool;
    Index already = 0;
    for (Index j = 0; j < n; ++j) {
      if (is_test[static_cast<std::size_t>(j)] || truth.at(t, j) != Label::kPositive) continue;
      if (roles[static_cast<std::size_t>(j)] == SampleRole::kLabeled) {
        ++already;
      } else {
        pool.push_back(j);
      }
    }
    std::shuffle(pool.begin(), pool.end(), rng);
    const Index want = std::max<Index>(0, per_class - already);
    for (Index k = 0; k < std::min<Index>(want, static_cast<Index>(pool.size())); ++k) {
      roles[static_cast<std::size_t>(pool[static_cast<std::size_t>(k)])] = SampleRole::kLabeled;
    }
  }
  return roles;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto gaussian = [&](Index r, Index c) {
    Matrix m(r, c);
    for (Index j = 0; j < c; ++j) {
      for (Index i = 0; i < r; ++i) m(i, j) = normal(rng);
    }
    return m;
  };

  const Index n = spec.samples;
  const Index m = spec.labels;
  SyntheticData out;
  out.seed = spec.seed;
  out.latent = gaussian(spec.rank, n);

  // Label readout, thresholded per label at the (1 - positive_rate) quantile.
  const Matrix w = gaussian(m, spec.rank);
  out.label_scores = w * out.latent;
  out.truth = LabelMatrix(m, n);
  for (Index t = 0; t < m; ++t) {
    std::vector<double> row(static_cast<std::size_t>(n));
    for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = out.label_scores(t, j);
    auto q = row.begin() + static_cast<std::ptrdiff_t>(
                               std::floor((1.0 - spec.positive_rate) * static_cast<double>(n)));
    std::nth_element(row.begin(), q, row.end());
    const double bias = *q;
    for (Index j = 0; j < n; ++j) {
      out.label_scores(t, j) -= bias;
      out.truth.set(t, j, out.label_scores(t, j) >= 0.0 ? Label::kPositive : Label::kNegative);
    }
  }

  std::bernoulli_distribution drop(spec.missing_feature_rate);
  for (Index v = 0; v < spec.views; ++v) {
    const double s = spec.informativeness.empty() ? 1.0 : spec.informativeness[static_cast<std::size_t>(v)];
    const Matrix a = gaussian(spec.view_dim, spec.rank) / std::sqrt(static_cast<double>(spec.rank));
    const Matrix e = gaussian(spec.view_dim, n);
    const Matrix g = gaussian(spec.view_dim, n);
    Matrix x = s * (a * out.latent) + (1.0 - s) * e + spec.noise_sigma * g;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing(spec.view_dim, n);
    missing.setConstant(false);
    if (spec.missing_feature_rate > 0.0) {
      for (Index j = 0; j < n; ++j) {
        for (Index i = 0; i < spec.view_dim; ++i) missing(i, j) = drop(rng);
      }
    }
    out.views.emplace_back(std::move(x), std::move(missing));
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_test = static_cast<Index>(std::floor(spec.test_fraction * static_cast<double>(n)));
  std::vector<bool> is_test(static_cast<std::size_t>(n), false);
  for (Index k = 0; k < n_test; ++k) is_test[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
  out.roles = draw_partition(out.truth, is_test, spec.labeled_per_class, spec.seed);
  return out;
}

}  // namespace mvmc
