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
#include <span>
#include <vector>

#include "mvmc/types.hpp"

namespace mvmc {

/// A complete ranking of one label's corpus, stored top first. The pairwise
/// signs o_ij over (positive i, negative j) follow from the permutation, so
/// every pair is +1 or -1 and the ordering is consistent with a total order.
class PairwiseOrdering {
 public:
  /// `order` must be a permutation of 0..n-1.
  explicit PairwiseOrdering(std::vector<Index> order);

  /// Descending score, ties broken by ascending index.
  static PairwiseOrdering FromScores(std::span<const double> scores);
  /// Ground truth: every positive ahead of every negative, index order within
  /// each class.
  static PairwiseOrdering Truth(std::span<const int> truth);

  const std::vector<Index>& order() const { return order_; }
  Index size() const { return static_cast<Index>(order_.size()); }
  /// rank[i] = position of sample i (0 = top).
  std::vector<Index> ranks() const;
  /// +1 if sample a is ranked ahead of sample b, -1 otherwise.
  int sign(Index a, Index b) const;

  friend bool operator==(const PairwiseOrdering&, const PairwiseOrdering&) = default;

 private:
  std::vector<Index> order_;
};

/// One label's training corpus: per-sample view predictions and truth.
struct LabelCorpus {
  Index label = 0;
  Matrix features;         // V x n, column d is phi(t, d) = p_d
  std::vector<int> truth;  // n entries in {-1, +1}

  Index positives() const;
  Index negatives() const;
  bool trainable() const { return positives() > 0 && negatives() > 0; }
};

/// Splits a prediction tensor into per-label corpora over the labeled samples.
std::vector<LabelCorpus> label_corpora(const PredictionTensor& tensor);

/// 1 - AP of the candidate ordering against the truth.
double ap_loss(std::span<const int> truth, const PairwiseOrdering& candidate);

/// Normalized pairwise feature map
///   (1 / (|pos| |neg|)) sum_{i pos} sum_{j neg} o_ij (p_i - p_j).
Vector psi(const LabelCorpus& corpus, const PairwiseOrdering& ordering);

struct Violation {
  PairwiseOrdering ordering;
  double loss = 0.0;       // Delta_ap of `ordering`
  double violation = 0.0;  // loss - theta^T (psi(truth) - psi(ordering))
};

/// Loss-augmented inference: the ordering maximizing
///   Delta_ap(o_t, o) + theta^T psi(t, o).
/// Positives and negatives are each sorted by descending score and every
/// negative independently picks the number of positives ranked above it.
Violation find_most_violated(const LabelCorpus& corpus, const Vector& theta);

struct Constraint {
  Index label = 0;
  PairwiseOrdering ordering;
  double loss = 0.0;
  Vector dpsi;  // psi(truth) - psi(ordering)
};

/// Cutting-plane working set, with the Gram matrix of the constraint
/// directions kept up to date.
class WorkingSet {
 public:
  WorkingSet(Index views, Index labels);

  void add(Constraint c);

  Index views() const { return views_; }
  Index labels() const { return labels_; }
  Index size() const { return static_cast<Index>(constraints_.size()); }
  bool empty() const { return constraints_.empty(); }

  const std::vector<Constraint>& constraints() const { return constraints_; }
  /// V x M matrix whose columns are the constraint directions.
  const Matrix& dpsi() const { return dpsi_; }
  const Vector& losses() const { return losses_; }
  /// K = dpsi^T dpsi.
  const Matrix& gram() const { return gram_; }
  /// Constraint indices belonging to one label.
  const std::vector<Index>& members(Index label) const;

 private:
  Index views_;
  Index labels_;
  std::vector<Constraint> constraints_;
  std::vector<std::vector<Index>> members_;
  Matrix dpsi_;
  Vector losses_;
  Matrix gram_;
};

struct AlphaOptions {
  double kkt_tol = 1e-12;
  long max_steps = 1'000'000;
};

/// Maximizes (Delta - dpsi^T zeta)^T alpha - 1/2 alpha^T K alpha subject to
/// alpha >= 0 and sum over each label's constraints <= C. Pairwise ascent
/// within each label block, warm-started from `alpha_init` when it has the
/// right size.
Vector solve_alpha(const WorkingSet& ws, const Vector& zeta, double C,
                   const Vector& alpha_init = {}, const AlphaOptions& options = {});

/// argmax_{zeta >= 0} -(dpsi alpha)^T zeta - 1/2 |zeta|^2, i.e.
/// zeta = max(0, -dpsi alpha).
Vector solve_zeta(const Vector& alpha, const WorkingSet& ws);

/// Delta^T alpha - 1/2 alpha^T K alpha - zeta^T dpsi alpha - 1/2 |zeta|^2.
double dual_objective(const Vector& alpha, const Vector& zeta, const WorkingSet& ws);

/// -[[K, dpsi^T], [dpsi, I]], the Hessian of dual_objective in (alpha, zeta).
Matrix dual_hessian(const WorkingSet& ws);

/// 1/2 |theta|^2 + C sum_t max(0, max_{c in W_t} (Delta_c - theta^T dpsi_c)),
/// the margin-rescaled primal restricted to the working set.
double primal_objective(const Vector& theta, const WorkingSet& ws, double C);

/// theta_raw = dpsi alpha + zeta.
Vector primal_from_dual(const Vector& alpha, const Vector& zeta, const WorkingSet& ws);

struct ApTraceEvent {
  int outer = 0;
  enum class Step { kAlpha, kZeta } step = Step::kAlpha;
  double dual = 0.0;
};

struct ApOptions {
  double cp_tol = 1e-3;         // minimum slack violation to add a constraint
  int max_outer = 100;
  double dual_tol = 1e-6;       // outer stop once no constraint is added
  int max_alternations = 50;    // alpha/zeta rounds per outer iteration
  double alternation_tol = 1e-12;
  AlphaOptions alpha;
  std::function<void(const ApTraceEvent&)> on_step;
};

struct ApResult {
  SimplexWeights theta = SimplexWeights::Uniform(1);
  Vector theta_raw;
  Vector alpha;
  Vector zeta;
  double C = 0.0;
  double dual = 0.0;
  int outer_iterations = 0;
  bool converged = false;
  Index constraints = 0;
  std::vector<Index> excluded_labels;  // single-class labels left out
};

/// Learns simplex weights by the alternating dual cutting-plane method on
/// the AP-loss structural SVM, C = 1 / (2 N eta).
ApResult solve_ap(const PredictionTensor& tensor, double eta, const ApOptions& options = {});

}  // namespace mvmc
