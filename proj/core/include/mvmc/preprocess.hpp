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

#include "mvmc/types.hpp"

namespace mvmc {

struct KernelSpec {
  enum class Kind { kLinear, kRbf };
  Kind kind = Kind::kRbf;
  /// RBF bandwidth sigma in exp(-|x - y|^2 / (2 sigma^2)). A non-positive
  /// value selects the median pairwise distance of the fitting samples.
  double bandwidth = 0.0;

  static KernelSpec Linear() { return {Kind::kLinear, 0.0}; }
  static KernelSpec Rbf(double sigma = 0.0) { return {Kind::kRbf, sigma}; }
};

/// Fitted kernel PCA. Projections of a sample x onto component k are
///   sum_i u_ik / sqrt(lambda_k) * kc(x, x_i)
/// with kc the kernel double-centered against the training samples.
struct KpcaModel {
  KernelSpec kernel;        // bandwidth resolved (> 0 for rbf)
  Matrix training;          // d x n
  Matrix eigvecs;           // n x r, unit-norm eigenvectors of the centered kernel
  Vector eigvals;           // r, descending, all > cutoff
  Vector train_kernel_col_means;  // n, column means of the raw training kernel
  double train_kernel_mean = 0.0;
  Index requested_dim = 0;  // r asked for; output_dim() may be smaller

  Index output_dim() const { return eigvals.size(); }
  Index input_dim() const { return training.rows(); }
  bool reduced() const { return output_dim() < requested_dim; }
};

/// Eigenvalues at or below this fraction of the largest are discarded.
inline constexpr double kKpcaEigenCutoff = 1e-12;

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& a, const Matrix& b);
double median_pairwise_distance(const Matrix& x);

/// Fits on every column of `features`, which must have no missing entries.
/// If fewer than `dim` eigenvalues are numerically positive, the model keeps
/// only those and `reduced()` reports it.
KpcaModel kpca_fit(const FeatureMatrix& features, const KernelSpec& kernel, Index dim);

/// r x n_new projections of new samples.
FeatureMatrix kpca_transform(const KpcaModel& model, const FeatureMatrix& features);

/// Elementwise 1 / (1 + exp(-x)).
Matrix sigmoid_scores(const Matrix& raw);
double sigmoid(double x);

}  // namespace mvmc
