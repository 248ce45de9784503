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

#include "mvmc/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "mvmc/error.hpp"

namespace mvmc {

namespace {

Matrix squared_distances(const Matrix& a, const Matrix& b) {
  const Vector na = a.colwise().squaredNorm().transpose();
  const Vector nb = b.colwise().squaredNorm().transpose();
  Matrix d = -2.0 * a.transpose() * b;
  d.colwise() += na;
  d.rowwise() += nb.transpose();
  return d.cwiseMax(0.0);
}

void require_complete(const FeatureMatrix& f, const char* what) {
  if (f.has_missing()) throw DataError(std::string(what) + ": features contain missing entries");
}

}  // namespace

Matrix kernel_matrix(const KernelSpec& kernel, const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows()) throw DimensionError("kernel inputs differ in dimension");
  if (kernel.kind == KernelSpec::Kind::kLinear) return a.transpose() * b;
  if (!(kernel.bandwidth > 0.0)) throw ConfigError("rbf bandwidth must be positive");
  const double scale = -1.0 / (2.0 * kernel.bandwidth * kernel.bandwidth);
  return (squared_distances(a, b) * scale).array().exp().matrix();
}

double median_pairwise_distance(const Matrix& x) {
  const Index n = x.cols();
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  const Matrix d2 = squared_distances(x, x);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < j; ++i) dist.push_back(std::sqrt(d2(i, j)));
  }
  if (dist.empty()) return 1.0;
  auto mid = dist.begin() + static_cast<std::ptrdiff_t>(dist.size() / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return *mid > 0.0 ? *mid : 1.0;
}

KpcaModel kpca_fit(const FeatureMatrix& features, const KernelSpec& kernel, Index dim) {
  require_complete(features, "kpca_fit");
  const Index n = features.samples();
  if (dim < 1) throw ConfigError("kpca output dimension must be positive");
  if (dim > n) {
    throw ConfigError("kpca output dimension " + std::to_string(dim) + " exceeds sample count " +
                      std::to_string(n));
  }

  KpcaModel model;
  model.kernel = kernel;
  model.training = features.filled();
  model.requested_dim = dim;
  if (kernel.kind == KernelSpec::Kind::kRbf && !(kernel.bandwidth > 0.0)) {
    model.kernel.bandwidth = median_pairwise_distance(model.training);
  }

  const Matrix k = kernel_matrix(model.kernel, model.training, model.training);
  model.train_kernel_col_means = k.colwise().mean().transpose();
  model.train_kernel_mean = model.train_kernel_col_means.mean();

  Matrix kc = k;
  kc.colwise() -= model.train_kernel_col_means;
  kc.rowwise() -= model.train_kernel_col_means.transpose();
  kc.array() += model.train_kernel_mean;
  kc = (0.5 * (kc + kc.transpose())).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(kc);
  if (eig.info() != Eigen::Success) throw SolverError("kpca eigendecomposition failed");
  // Ascending order from Eigen; walk from the top.
  const Vector& values = eig.eigenvalues();
  const double top = values(n - 1);
  Index keep = 0;
  while (keep < dim && top > 0.0 && values(n - 1 - keep) > kKpcaEigenCutoff * top) ++keep;
  if (keep == 0) throw SolverError("kpca: centered kernel has no positive eigenvalue");

  model.eigvals.resize(keep);
  model.eigvecs.resize(n, keep);
  for (Index k2 = 0; k2 < keep; ++k2) {
    model.eigvals(k2) = values(n - 1 - k2);
    Vector u = eig.eigenvectors().col(n - 1 - k2);
    // Deterministic sign: largest-magnitude entry positive.
    Index arg = 0;
    u.cwiseAbs().maxCoeff(&arg);
    if (u(arg) < 0) u = -u;
    model.eigvecs.col(k2) = u;
  }
  return model;
}

FeatureMatrix kpca_transform(const KpcaModel& model, const FeatureMatrix& features) {
  require_complete(features, "kpca_transform");
  if (features.dim() != model.input_dim()) {
    throw DimensionError("kpca_transform: input dimension " + std::to_string(features.dim()) +
                         " does not match training dimension " +
                         std::to_string(model.input_dim()));
  }
  Matrix kx = kernel_matrix(model.kernel, model.training, features.filled());  // n x n_new
  const Vector new_means = kx.colwise().mean().transpose();
  kx.colwise() -= model.train_kernel_col_means;
  kx.rowwise() -= new_means.transpose();
  kx.array() += model.train_kernel_mean;

  const Vector inv_sqrt = model.eigvals.cwiseSqrt().cwiseInverse();
  Matrix out = inv_sqrt.asDiagonal() * (model.eigvecs.transpose() * kx);
  return FeatureMatrix(std::move(out));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix sigmoid_scores(const Matrix& raw) { return raw.unaryExpr([](double x) { return sigmoid(x); }); }

}  // namespace mvmc
