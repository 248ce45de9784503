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

#include "mvmc/fusion_ls.hpp"

#include <cmath>

#include "mvmc/error.hpp"

namespace mvmc {

LsProblem build_ls(const PredictionTensor& tensor, double eta) {
  const Index n = tensor.entries();
  if (n < 1 || tensor.views() < 1) throw DimensionError("build_ls: empty prediction tensor");
  if (!(eta >= 0.0)) throw ConfigError("build_ls: eta must be nonnegative");
  Vector y(n);
  for (Index k = 0; k < n; ++k) y(k) = ls_target(tensor.y0(k));

  LsProblem prob;
  const double inv_n = 1.0 / static_cast<double>(n);
  prob.H = inv_n * (tensor.p * tensor.p.transpose());
  prob.H = (0.5 * (prob.H + prob.H.transpose())).eval();
  prob.h = inv_n * (tensor.p * y);
  prob.eta = eta;
  prob.N = n;
  prob.target_sq_mean = inv_n * y.squaredNorm();
  return prob;
}

double ls_objective(const Vector& theta, const LsProblem& prob) {
  return 0.5 * (theta.dot(prob.H * theta) - 2.0 * theta.dot(prob.h)) +
         0.5 * prob.eta * theta.squaredNorm();
}

PairUpdate update_pair(const Vector& theta, Index i, Index j, const LsProblem& prob) {
  if (i == j) throw DimensionError("update_pair: i and j must differ");
  const Matrix& H = prob.H;
  const Vector& h = prob.h;
  const double eta = prob.eta;
  const double curv = H(i, i) - H(i, j) - H(j, i) + H(j, j);
  const double denom = curv + 2.0 * eta;
  if (denom <= 1e-14 && eta == 0.0) return {theta, true};

  const double s = theta(i) + theta(j);
  // eps_ij = curv * theta_i - sum_k (H_ik - H_jk) theta_k
  const double cross = (H.row(i) - H.row(j)).dot(theta);
  const double eps_ij = curv * theta(i) - cross;
  const double eps_ji = curv * theta(j) + cross;
  const double num_i = eta * s + (h(i) - h(j)) + eps_ij;
  const double num_j = eta * s + (h(j) - h(i)) + eps_ji;

  PairUpdate out{theta, false};
  if (num_i <= 0.0 && num_j <= 0.0) {
    // Both clipping rules fire only in degenerate cases; clip the side with
    // the more negative quantity.
    if (num_i <= num_j) {
      out.theta(i) = 0.0;
      out.theta(j) = s;
    } else {
      out.theta(j) = 0.0;
      out.theta(i) = s;
    }
  } else if (num_i <= 0.0) {
    out.theta(i) = 0.0;
    out.theta(j) = s;
  } else if (num_j <= 0.0) {
    out.theta(j) = 0.0;
    out.theta(i) = s;
  } else {
    out.theta(i) = num_i / denom;
    out.theta(j) = s - out.theta(i);
  }
  return out;
}

LsResult solve_ls(const LsProblem& prob, const LsOptions& options) {
  const Index V = prob.H.rows();
  if (V < 1) throw DimensionError("solve_ls: no views");
  LsResult out;
  Vector theta = Vector::Constant(V, 1.0 / static_cast<double>(V));
  double f = ls_objective(theta, prob);
  if (V > 1) {
    for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
      const double before = f;
      for (Index i = 0; i < V; ++i) {
        for (Index j = 0; j < V; ++j) {
          if (i == j) continue;
          PairUpdate u = update_pair(theta, i, j, prob);
          if (u.skipped) continue;
          theta = std::move(u.theta);
          if (options.on_update) options.on_update(theta);
        }
      }
      f = ls_objective(theta, prob);
      out.sweeps = sweep + 1;
      if (std::abs(before - f) < options.tol) break;
    }
  }
  out.theta = SimplexWeights::Normalize(theta);
  out.objective = ls_objective(out.theta.theta(), prob);
  return out;
}

LsResult solve_ls(const PredictionTensor& tensor, double eta, const LsOptions& options) {
  return solve_ls(build_ls(tensor, eta), options);
}

}  // namespace mvmc
