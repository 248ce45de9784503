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

#include "mvmc/mc_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/SVD>

#include "mvmc/error.hpp"

namespace mvmc {

namespace {

// log(1 + exp(x)) without overflow.
double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

void require_some_mask(const ObservedMask& omega_x, const ObservedMask& omega_y) {
  if (omega_x.empty() && omega_y.empty()) {
    throw SolverError("completion problem has no observed entries");
  }
}

}  // namespace

void McParams::validate() const {
  auto fail = [](const std::string& what) { throw ConfigError("mc params: " + what); };
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be nonnegative");
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail("gamma must be positive");
  if (!(mu0_factor > 0.0)) fail("mu0_factor must be positive");
  if (!(mu_decay > 0.0 && mu_decay < 1.0)) fail("mu_decay must lie in (0, 1)");
  if (!(mu_min > 0.0)) fail("mu_min must be positive");
  if (tau && !(*tau > 0.0)) fail("tau must be positive");
  if (!(inner_tol > 0.0)) fail("inner_tol must be positive");
  if (max_inner_iters < 1) fail("max_inner_iters must be at least 1");
}

ThinSvd dense_svd(const Matrix& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

double smooth_objective(const Matrix& z, const Matrix& z0, const ObservedMask& omega_x,
                        const ObservedMask& omega_y, const McParams& params) {
  require_some_mask(omega_x, omega_y);
  double fx = 0.0;
  for (const Entry& e : omega_x.entries()) {
    const double r = z(e.row, e.col) - z0(e.row, e.col);
    fx += 0.5 * r * r;
  }
  double fy = 0.0;
  for (const Entry& e : omega_y.entries()) {
    fy += softplus(-params.gamma * z0(e.row, e.col) * z(e.row, e.col)) / params.gamma;
  }
  double out = 0.0;
  if (!omega_x.empty()) out += fx / static_cast<double>(omega_x.size());
  if (!omega_y.empty()) out += params.lambda * fy / static_cast<double>(omega_y.size());
  return out;
}

Matrix smooth_gradient(const Matrix& z, const Matrix& z0, const ObservedMask& omega_x,
                       const ObservedMask& omega_y, const McParams& params) {
  require_some_mask(omega_x, omega_y);
  Matrix g = Matrix::Zero(z.rows(), z.cols());
  if (!omega_x.empty()) {
    const double w = 1.0 / static_cast<double>(omega_x.size());
    for (const Entry& e : omega_x.entries()) g(e.row, e.col) = w * (z(e.row, e.col) - z0(e.row, e.col));
  }
  if (!omega_y.empty()) {
    const double w = params.lambda / static_cast<double>(omega_y.size());
    for (const Entry& e : omega_y.entries()) {
      const double y = z0(e.row, e.col);
      // -y / (1 + exp(gamma y z)), written via exp(-softplus) for stability.
      const double a = params.gamma * y * z(e.row, e.col);
      g(e.row, e.col) = w * (-y) * std::exp(-softplus(a));
    }
  }
  g.bottomRows(1).setZero();
  return g;
}

double nuclear_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues().sum();
}

Matrix shrink(const Matrix& a, double nu, const SvdRoutine& svd) {
  if (a.size() == 0) return a;
  const ThinSvd d = svd ? svd(a) : dense_svd(a);
  const Vector s = (d.s.array() - nu).cwiseMax(0.0).matrix();
  Index keep = 0;
  while (keep < s.size() && s(keep) > 0.0) ++keep;
  if (keep == 0) return Matrix::Zero(a.rows(), a.cols());
  return d.u.leftCols(keep) * s.head(keep).asDiagonal() * d.v.leftCols(keep).transpose();
}

double auto_tau(const McParams& params, const ObservedMask& omega_x, const ObservedMask& omega_y) {
  require_some_mask(omega_x, omega_y);
  double lip = 0.0;
  if (!omega_x.empty()) lip = std::max(lip, 1.0 / static_cast<double>(omega_x.size()));
  if (!omega_y.empty()) {
    lip = std::max(lip, params.lambda * params.gamma / (4.0 * static_cast<double>(omega_y.size())));
  }
  if (!(lip > 0.0)) throw SolverError("auto_tau: smooth loss has zero curvature");
  return 1.0 / lip;
}

McSolution fpc_solve(const StackedProblem& problem, const McParams& params,
                     const FpcObserver& observer) {
  params.validate();
  const StackedMatrix& s0 = problem.z0;
  const Matrix& z0 = s0.z;
  const ObservedMask& ox = problem.omega_x;
  const ObservedMask& oy = problem.omega_y;
  require_some_mask(ox, oy);

  const double tau = params.tau ? *params.tau : auto_tau(params, ox, oy);
  const double sigma1 = (params.svd ? params.svd(z0) : dense_svd(z0)).s(0);
  if (!std::isfinite(sigma1)) throw SolverError("fpc_solve: non-finite leading singular value of Z0");
  double mu = std::max(params.mu0_factor * sigma1, params.mu_min);

  McSolution out;
  Matrix z = z0;
  for (int stage = 0;; ++stage) {
    double f = smooth_objective(z, z0, ox, oy, params) + mu * nuclear_norm(z);
    for (int it = 0; it < params.max_inner_iters; ++it) {
      const Matrix a = z - tau * smooth_gradient(z, z0, ox, oy, params);
      Matrix next = shrink(a, tau * mu, params.svd);
      next.row(s0.ones_row()).setOnes();
      if (!next.allFinite()) {
        throw SolverError("fpc_solve: non-finite iterate at mu stage " + std::to_string(stage) +
                          ", iteration " + std::to_string(it));
      }
      // The ones-row projection can undo the descent of the proximal step;
      // such a step ends the stage instead of being taken.
      const double f_next = smooth_objective(next, z0, ox, oy, params) + mu * nuclear_norm(next);
      if (f_next > f) break;
      const double change = (next - z).norm() / std::max(1.0, z.norm());
      z = std::move(next);
      f = f_next;
      ++out.iterations;
      if (observer) observer({stage, it, mu, f}, z);
      if (change < params.inner_tol) break;
    }
    out.stages = stage + 1;
    if (mu <= params.mu_min) break;
    mu = std::max(mu * params.mu_decay, params.mu_min);
  }

  out.final_objective = smooth_objective(z, z0, ox, oy, params) + mu * nuclear_norm(z);
  out.soft_labels = z.topRows(s0.m);
  out.z = StackedMatrix{std::move(z), s0.m, s0.d};
  return out;
}

}  // namespace mvmc
