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

#include "mvmc/cv_generation.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <string>

#include "mvmc/error.hpp"
#include "mvmc/preprocess.hpp"

namespace mvmc {

FoldSplit make_split(const MultiViewDataset& dataset, std::uint64_t seed) {
  const std::vector<Index> labeled = dataset.indices(SampleRole::kLabeled);
  const auto nl = static_cast<Index>(labeled.size());
  if (nl < 2) throw DataError("make_split: need at least 2 labeled samples, have " + std::to_string(nl));
  const LabelMatrix& y = dataset.labels();
  const Index m = y.labels();

  std::vector<Index> shuffled = labeled;
  std::mt19937_64 rng(seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  std::vector<Index> pos_count(static_cast<std::size_t>(m), 0);
  for (Index j : labeled) {
    for (Index t = 0; t < m; ++t) {
      if (y.at(t, j) == Label::kPositive) ++pos_count[static_cast<std::size_t>(t)];
    }
  }
  // Key of a sample: its rarest positive label (samples with no positive last).
  auto rarest = [&](Index j) {
    Index best = -1;
    for (Index t = 0; t < m; ++t) {
      if (y.at(t, j) != Label::kPositive) continue;
      if (best < 0 || pos_count[static_cast<std::size_t>(t)] < pos_count[static_cast<std::size_t>(best)]) {
        best = t;
      }
    }
    return best;
  };
  std::vector<Index> key(shuffled.size());
  for (std::size_t i = 0; i < shuffled.size(); ++i) key[i] = rarest(shuffled[i]);
  std::vector<std::size_t> order(shuffled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const Index ka = key[a];
    const Index kb = key[b];
    if ((ka < 0) != (kb < 0)) return kb < 0;
    if (ka < 0) return false;
    const Index ca = pos_count[static_cast<std::size_t>(ka)];
    const Index cb = pos_count[static_cast<std::size_t>(kb)];
    return ca != cb ? ca < cb : ka < kb;
  });

  const Index cap_a = (nl + 1) / 2;
  const Index cap_b = nl / 2;
  // fold_pos[f][t]: positives of label t already in fold f.
  std::vector<std::vector<Index>> fold_pos(2, std::vector<Index>(static_cast<std::size_t>(m), 0));
  FoldSplit split;
  split.seed = seed;
  for (std::size_t idx : order) {
    const Index j = shuffled[idx];
    const Index t = key[idx];
    const auto na = static_cast<Index>(split.fold_a.size());
    const auto nb = static_cast<Index>(split.fold_b.size());
    bool to_a;
    if (na >= cap_a) {
      to_a = false;
    } else if (nb >= cap_b) {
      to_a = true;
    } else if (t >= 0 && fold_pos[0][static_cast<std::size_t>(t)] != fold_pos[1][static_cast<std::size_t>(t)]) {
      to_a = fold_pos[0][static_cast<std::size_t>(t)] < fold_pos[1][static_cast<std::size_t>(t)];
    } else {
      to_a = na <= nb;
    }
    (to_a ? split.fold_a : split.fold_b).push_back(j);
    for (Index s = 0; s < m; ++s) {
      if (y.at(s, j) == Label::kPositive) ++fold_pos[to_a ? 0 : 1][static_cast<std::size_t>(s)];
    }
  }
  std::sort(split.fold_a.begin(), split.fold_a.end());
  std::sort(split.fold_b.begin(), split.fold_b.end());
  return split;
}

Matrix generate_view_predictions(Index view, const MultiViewDataset& dataset, const FoldSplit& split,
                                 const McParams& params, const CvObserver& observer) {
  const std::vector<Index> labeled = dataset.indices(SampleRole::kLabeled);
  const auto nl = static_cast<Index>(labeled.size());
  if (static_cast<Index>(split.fold_a.size() + split.fold_b.size()) != nl) {
    throw DataError("generate_view_predictions: split does not cover the labeled set");
  }
  // Global sample index -> column in the labeled submatrix.
  std::vector<Index> local(static_cast<std::size_t>(dataset.samples()), -1);
  for (Index c = 0; c < nl; ++c) local[static_cast<std::size_t>(labeled[static_cast<std::size_t>(c)])] = c;
  auto to_local = [&](const std::vector<Index>& fold) {
    std::vector<Index> out;
    out.reserve(fold.size());
    for (Index j : fold) {
      const Index c = local.at(static_cast<std::size_t>(j));
      if (c < 0) throw DataError("generate_view_predictions: fold holds a non-labeled sample");
      out.push_back(c);
    }
    return out;
  };

  const FeatureMatrix features = dataset.view(view).columns(labeled);
  const LabelMatrix labels = dataset.labels().columns(labeled);
  Matrix out = Matrix::Constant(labels.labels(), nl, std::numeric_limits<double>::quiet_NaN());

  const std::vector<Index> folds[2] = {to_local(split.fold_a), to_local(split.fold_b)};
  for (const auto& hidden : folds) {
    if (hidden.empty()) continue;
    const StackedProblem problem = build_stacked(features, labels.hide_columns(hidden));
    if (observer) observer(hidden, problem.omega_y);
    McSolution sol;
    try {
      sol = fpc_solve(problem, params);
    } catch (const SolverError& e) {
      throw SolverError("view " + std::to_string(view) + ", cross-validation fold: " + e.what());
    }
    for (Index c : hidden) out.col(c) = sol.soft_labels.col(c);
  }
  return out;
}

PredictionTensor assemble_tensor(const MultiViewDataset& dataset,
                                 std::span<const Matrix> per_view_predictions) {
  std::vector<Matrix> probs;
  probs.reserve(per_view_predictions.size());
  for (const Matrix& p : per_view_predictions) probs.push_back(sigmoid_scores(p));
  const std::vector<Index> labeled = dataset.indices(SampleRole::kLabeled);
  return vectorize_labeled(probs, dataset.labels().columns(labeled));
}

}  // namespace mvmc
