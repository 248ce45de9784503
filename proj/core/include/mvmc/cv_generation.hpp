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
#include <functional>
#include <span>
#include <vector>

#include "mvmc/mc_solver.hpp"
#include "mvmc/types.hpp"

namespace mvmc {

/// Two disjoint halves of the labeled samples (global sample indices).
struct FoldSplit {
  std::vector<Index> fold_a;
  std::vector<Index> fold_b;
  std::uint64_t seed = 0;
};

/// Seeded shuffle, then a greedy assignment that balances positives of the
/// rarest labels first while keeping fold sizes within one of each other.
FoldSplit make_split(const MultiViewDataset& dataset, std::uint64_t seed);

/// Sees every completion run: the hidden labeled columns (local to the
/// labeled submatrix) and the label mask handed to the solver.
using CvObserver = std::function<void(std::span<const Index> hidden_local, const ObservedMask& omega_y)>;

/// Completes the labeled submatrix of one (already preprocessed) view twice,
/// hiding each fold's labels in turn. Returns m x n_l soft labels whose
/// column order follows dataset.indices(kLabeled).
Matrix generate_view_predictions(Index view, const MultiViewDataset& dataset, const FoldSplit& split,
                                 const McParams& params, const CvObserver& observer = {});

/// Sigmoid-converts each view's predictions and vectorizes them against the
/// labeled truth.
PredictionTensor assemble_tensor(const MultiViewDataset& dataset,
                                 std::span<const Matrix> per_view_predictions);

}  // namespace mvmc
