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
#include <optional>

#include "mvmc/types.hpp"

namespace mvmc {

struct ThinSvd {
  Matrix u;
  Vector s;  // descending
  Matrix v;
};

/// Replaceable SVD routine used by the shrinkage step. Any routine returning
/// the leading singular triplets may be plugged in; the default is a full
/// dense decomposition.
using SvdRoutine = std::function<ThinSvd(const Matrix&)>;

ThinSvd dense_svd(const Matrix& a);

/// Parameters of the transductive completion problem and its continuation
/// schedule.
struct McParams {
  double lambda = 1.0;      // label-loss weight
  double gamma = 1.0;       // log-loss sharpness
  double mu0_factor = 0.25; // mu_0 = mu0_factor * sigma_1(Z0)
  double mu_decay = 0.25;   // mu_{k+1} = mu_decay * mu_k
  double mu_min = 1e-12;    // last continuation stage
  std::optional<double> tau;  // step size; empty selects auto_tau
  double inner_tol = 1e-5;  // relative Frobenius change of Z
  int max_inner_iters = 100;
  SvdRoutine svd;           // empty selects dense_svd

  /// Throws ConfigError on out-of-range values.
  void validate() const;
};

struct McSolution {
  StackedMatrix z;
  Matrix soft_labels;  // m x n
  int iterations = 0;
  int stages = 0;
  double final_objective = 0.0;
};

/// Per-iteration trace. `objective` is the full composite value
/// smooth_objective + mu * |Z|_* at the iterate after projection.
struct FpcTraceEvent {
  int stage = 0;
  int iteration = 0;
  double mu = 0.0;
  double objective = 0.0;
};
using FpcObserver = std::function<void(const FpcTraceEvent&, const Matrix& z)>;

/// Least-squares feature loss plus generalized log loss on labels,
/// each averaged over its mask.
double smooth_objective(const Matrix& z, const Matrix& z0, const ObservedMask& omega_x,
                        const ObservedMask& omega_y, const McParams& params);

/// Entrywise gradient of smooth_objective. Zero off the masks; the generalized
/// log-loss derivative -y / (1 + exp(gamma * y * z)) reduces to the plain log
/// loss at gamma = 1.
Matrix smooth_gradient(const Matrix& z, const Matrix& z0, const ObservedMask& omega_x,
                       const ObservedMask& omega_y, const McParams& params);

double nuclear_norm(const Matrix& a);

/// Singular-value soft thresholding: U max(S - nu, 0) V^T.
Matrix shrink(const Matrix& a, double nu, const SvdRoutine& svd = {});

/// 1 / L for the Lipschitz constant L = max(1/|Ox|, lambda*gamma/(4|Oy|)).
double auto_tau(const McParams& params, const ObservedMask& omega_x, const ObservedMask& omega_y);

/// Fixed point continuation: gradient step, shrinkage, ones-row projection,
/// repeated over a geometric decreasing mu schedule with warm starts. A step
/// that would raise the composite objective ends its stage.
McSolution fpc_solve(const StackedProblem& problem, const McParams& params,
                     const FpcObserver& observer = {});

}  // namespace mvmc
