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

#include <functional>

#include "mvmc/types.hpp"

namespace mvmc {

/// Quadratic form of the least-squares fusion objective:
///   1/2 (theta^T H theta - 2 theta^T h) + eta/2 |theta|^2.
/// Targets are the labeled truth mapped from {-1, +1} to {0, 1}, matching
/// probability-valued predictions.
struct LsProblem {
  Matrix H;  // V x V, (1/N) P P^T
  Vector h;  // V, (1/N) P y
  double eta = 0.0;
  Index N = 0;
  double target_sq_mean = 0.0;  // (1/N) y^T y, the constant dropped from the objective
};

/// Maps a {-1, +1} label to the {0, 1} fusion target.
inline double ls_target(int label) { return label > 0 ? 1.0 : 0.0; }

LsProblem build_ls(const PredictionTensor& tensor, double eta);

double ls_objective(const Vector& theta, const LsProblem& prob);

struct PairUpdate {
  Vector theta;
  bool skipped = false;  // degenerate pair: zero curvature with eta = 0
};

/// Exact minimization over the segment theta_i + theta_j = const, all other
/// weights fixed, with clipping to keep both weights nonnegative.
PairUpdate update_pair(const Vector& theta, Index i, Index j, const LsProblem& prob);

struct LsOptions {
  double tol = 1e-9;
  int max_sweeps = 200;
  /// Called after every pair update.
  std::function<void(const Vector& theta)> on_update;
};

struct LsResult {
  SimplexWeights theta = SimplexWeights::Uniform(1);
  int sweeps = 0;
  double objective = 0.0;
};

/// Cyclic pairwise coordinate descent from the uniform point.
LsResult solve_ls(const PredictionTensor& tensor, double eta, const LsOptions& options = {});
LsResult solve_ls(const LsProblem& prob, const LsOptions& options = {});

}  // namespace mvmc
