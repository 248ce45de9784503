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

#include "mvmc/fusion_ap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "mvmc/error.hpp"

namespace mvmc {

// ---------------------------------------------------------------------------
// Orderings

PairwiseOrdering::PairwiseOrdering(std::vector<Index> order) : order_(std::move(order)) {
  std::vector<bool> seen(order_.size(), false);
  for (Index i : order_) {
    if (i < 0 || i >= static_cast<Index>(order_.size()) || seen[static_cast<std::size_t>(i)]) {
      throw DimensionError("ordering is not a permutation");
    }
    seen[static_cast<std::size_t>(i)] = true;
  }
}

PairwiseOrdering PairwiseOrdering::FromScores(std::span<const double> scores) {
  std::vector<Index> order(scores.size());
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return PairwiseOrdering(std::move(order));
}

PairwiseOrdering PairwiseOrdering::Truth(std::span<const int> truth) {
  std::vector<Index> order;
  order.reserve(truth.size());
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] > 0) order.push_back(static_cast<Index>(i));
  }
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] <= 0) order.push_back(static_cast<Index>(i));
  }
  return PairwiseOrdering(std::move(order));
}

std::vector<Index> PairwiseOrdering::ranks() const {
  std::vector<Index> r(order_.size());
  for (std::size_t pos = 0; pos < order_.size(); ++pos) {
    r[static_cast<std::size_t>(order_[pos])] = static_cast<Index>(pos);
  }
  return r;
}

int PairwiseOrdering::sign(Index a, Index b) const {
  const auto r = ranks();
  return r[static_cast<std::size_t>(a)] < r[static_cast<std::size_t>(b)] ? 1 : -1;
}

// ---------------------------------------------------------------------------
// Corpora

Index LabelCorpus::positives() const {
  return static_cast<Index>(std::count_if(truth.begin(), truth.end(), [](int y) { return y > 0; }));
}

Index LabelCorpus::negatives() const { return static_cast<Index>(truth.size()) - positives(); }

std::vector<LabelCorpus> label_corpora(const PredictionTensor& tensor) {
  const IndexMap& map = tensor.index_map;
  std::vector<LabelCorpus> out;
  out.reserve(static_cast<std::size_t>(map.labels()));
  for (Index t = 0; t < map.labels(); ++t) {
    LabelCorpus c;
    c.label = t;
    c.features.resize(tensor.views(), map.labeled());
    c.truth.resize(static_cast<std::size_t>(map.labeled()));
    for (Index j = 0; j < map.labeled(); ++j) {
      const Index k = map.to_flat(t, j);
      c.features.col(j) = tensor.p.col(k);
      c.truth[static_cast<std::size_t>(j)] = tensor.y0(k);
    }
    out.push_back(std::move(c));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Loss and feature map

double ap_loss(std::span<const int> truth, const PairwiseOrdering& candidate) {
  if (static_cast<Index>(truth.size()) != candidate.size()) {
    throw DimensionError("ap_loss: ordering and truth differ in size");
  }
  double sum = 0.0;
  Index hits = 0;
  const auto& order = candidate.order();
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (truth[static_cast<std::size_t>(order[k])] > 0) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
  }
  if (hits == 0) throw UndefinedMetricError("ap_loss: corpus has no positives");
  return 1.0 - sum / static_cast<double>(hits);
}

Vector psi(const LabelCorpus& corpus, const PairwiseOrdering& ordering) {
  const Index n_pos = corpus.positives();
  const Index n_neg = corpus.negatives();
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("psi: single-class corpus");
  if (ordering.size() != static_cast<Index>(corpus.truth.size())) {
    throw DimensionError("psi: ordering and corpus differ in size");
  }
  // A positive with b negatives above it contributes p (n_neg - 2b); a
  // negative with a positives above it contributes -p (2a - n_pos).
  Vector out = Vector::Zero(corpus.features.rows());
  Index pos_above = 0;
  Index neg_above = 0;
  for (Index d : ordering.order()) {
    if (corpus.truth[static_cast<std::size_t>(d)] > 0) {
      out += static_cast<double>(n_neg - 2 * neg_above) * corpus.features.col(d);
      ++pos_above;
    } else {
      out -= static_cast<double>(2 * pos_above - n_pos) * corpus.features.col(d);
      ++neg_above;
    }
  }
  return out / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

// ---------------------------------------------------------------------------
// Loss-augmented inference

Violation find_most_violated(const LabelCorpus& corpus, const Vector& theta) {
  const Index n = static_cast<Index>(corpus.truth.size());
  if (theta.size() != corpus.features.rows()) {
    throw DimensionError("find_most_violated: theta has wrong dimension");
  }
  const Vector scores = corpus.features.transpose() * theta;
  std::vector<Index> pos;
  std::vector<Index> neg;
  for (Index d = 0; d < n; ++d) (corpus.truth[static_cast<std::size_t>(d)] > 0 ? pos : neg).push_back(d);
  if (pos.empty() || neg.empty()) throw UndefinedMetricError("find_most_violated: single-class corpus");
  auto by_score = [&](Index a, Index b) { return scores(a) > scores(b); };
  std::stable_sort(pos.begin(), pos.end(), by_score);
  std::stable_sort(neg.begin(), neg.end(), by_score);

  const Index P = static_cast<Index>(pos.size());
  const Index N = static_cast<Index>(neg.size());
  const double inv_p = 1.0 / static_cast<double>(P);
  const double pair_scale = 2.0 / (static_cast<double>(P) * static_cast<double>(N));

  // Moving negative j (1-based among negatives) from above positive i to
  // below it changes the objective by
  //   -(1/P) (i/(i+j-1) - i/(i+j)) + 2 (s_i - s_j) / (P N).
  // The increments grow with j, so per-negative argmaxes are monotone.
  std::vector<Index> slot(static_cast<std::size_t>(N));
  Index prev = 0;
  for (Index jj = 0; jj < N; ++jj) {
    const double j = static_cast<double>(jj + 1);
    const double sj = scores(neg[static_cast<std::size_t>(jj)]);
    double value = 0.0;
    double best = 0.0;
    Index best_i = 0;
    for (Index ii = 1; ii <= P; ++ii) {
      const double i = static_cast<double>(ii);
      value += -inv_p * (i / (i + j - 1.0) - i / (i + j)) +
               pair_scale * (scores(pos[static_cast<std::size_t>(ii - 1)]) - sj);
      if (value > best) {
        best = value;
        best_i = ii;
      }
    }
    best_i = std::max(best_i, prev);
    slot[static_cast<std::size_t>(jj)] = best_i;
    prev = best_i;
  }

  std::vector<Index> order;
  order.reserve(static_cast<std::size_t>(n));
  Index jj = 0;
  for (Index ii = 0; ii <= P; ++ii) {
    while (jj < N && slot[static_cast<std::size_t>(jj)] == ii) {
      order.push_back(neg[static_cast<std::size_t>(jj)]);
      ++jj;
    }
    if (ii < P) order.push_back(pos[static_cast<std::size_t>(ii)]);
  }

  Violation out{PairwiseOrdering(std::move(order)), 0.0, 0.0};
  out.loss = ap_loss(corpus.truth, out.ordering);
  const Vector dpsi = psi(corpus, PairwiseOrdering::Truth(corpus.truth)) - psi(corpus, out.ordering);
  out.violation = out.loss - theta.dot(dpsi);
  return out;
}

// ---------------------------------------------------------------------------
// Working set

WorkingSet::WorkingSet(Index views, Index labels)
    : views_(views), labels_(labels), members_(static_cast<std::size_t>(labels)),
      dpsi_(views, 0), losses_(0), gram_(0, 0) {}

void WorkingSet::add(Constraint c) {
  if (c.dpsi.size() != views_) throw DimensionError("constraint direction has wrong dimension");
  if (c.label < 0 || c.label >= labels_) throw DimensionError("constraint label out of range");
  const Index m = size();
  dpsi_.conservativeResize(Eigen::NoChange, m + 1);
  dpsi_.col(m) = c.dpsi;
  losses_.conservativeResize(m + 1);
  losses_(m) = c.loss;
  gram_.conservativeResize(m + 1, m + 1);
  const Vector k = dpsi_.transpose() * c.dpsi;
  gram_.col(m) = k;
  gram_.row(m) = k.transpose();
  members_[static_cast<std::size_t>(c.label)].push_back(m);
  constraints_.push_back(std::move(c));
}

const std::vector<Index>& WorkingSet::members(Index label) const {
  return members_.at(static_cast<std::size_t>(label));
}

// ---------------------------------------------------------------------------
// Dual subproblems

Vector solve_alpha(const WorkingSet& ws, const Vector& zeta, double C, const Vector& alpha_init,
                   const AlphaOptions& options) {
  if (ws.empty()) throw SolverError("solve_alpha: empty working set");
  if (!(C > 0.0)) throw ConfigError("solve_alpha: C must be positive");
  const Index M = ws.size();
  const Matrix& K = ws.gram();
  const Vector lin = ws.losses() - ws.dpsi().transpose() * zeta;

  Vector alpha = alpha_init.size() == M ? alpha_init : Vector::Zero(M);
  alpha = alpha.cwiseMax(0.0);
  // One slack variable per label turns each block into {sum = C, >= 0}.
  Vector slack(ws.labels());
  for (Index t = 0; t < ws.labels(); ++t) {
    double s = 0.0;
    for (Index c : ws.members(t)) s += alpha(c);
    if (s > C) {
      for (Index c : ws.members(t)) alpha(c) *= C / s;
      s = C;
    }
    slack(t) = C - s;
  }
  Vector grad = lin - K * alpha;

  constexpr Index kSlack = -1;
  long steps = 0;
  bool progress = true;
  while (progress && steps < options.max_steps) {
    progress = false;
    for (Index t = 0; t < ws.labels(); ++t) {
      const auto& mem = ws.members(t);
      if (mem.empty()) continue;
      for (;;) {
        // Most improving direction e_up - e_dn within the block.
        Index up = kSlack;
        double g_up = 0.0;
        Index dn = kSlack;
        double g_dn = slack(t) > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        for (Index c : mem) {
          if (grad(c) > g_up) {
            g_up = grad(c);
            up = c;
          }
          if (alpha(c) > 0.0 && grad(c) < g_dn) {
            g_dn = grad(c);
            dn = c;
          }
        }
        if (!(g_up - g_dn > options.kkt_tol) || up == dn) break;

        double q = 0.0;
        if (up != kSlack) q += K(up, up);
        if (dn != kSlack) q += K(dn, dn);
        if (up != kSlack && dn != kSlack) q -= 2.0 * K(up, dn);
        if (q < -1e-8) throw SolverError("solve_alpha: constraint Gram matrix is not PSD");
        const double room = dn == kSlack ? slack(t) : alpha(dn);
        double step = q > 1e-15 ? (g_up - g_dn) / q : room;
        step = std::min(step, room);
        if (!(step > 0.0)) break;

        if (up == kSlack) {
          slack(t) += step;
        } else {
          alpha(up) += step;
          grad -= step * K.col(up);
        }
        if (dn == kSlack) {
          slack(t) -= step;
          if (slack(t) < 0.0) slack(t) = 0.0;
        } else {
          alpha(dn) -= step;
          if (alpha(dn) < 0.0) alpha(dn) = 0.0;
          grad += step * K.col(dn);
        }
        progress = true;
        if (++steps >= options.max_steps) break;
      }
    }
  }
  return alpha;
}

Vector solve_zeta(const Vector& alpha, const WorkingSet& ws) {
  if (alpha.size() == 0) return Vector::Zero(ws.views());
  return (-(ws.dpsi() * alpha)).cwiseMax(0.0);
}

double dual_objective(const Vector& alpha, const Vector& zeta, const WorkingSet& ws) {
  if (alpha.size() == 0) return -0.5 * zeta.squaredNorm();
  return ws.losses().dot(alpha) - 0.5 * alpha.dot(ws.gram() * alpha) -
         zeta.dot(ws.dpsi() * alpha) - 0.5 * zeta.squaredNorm();
}

Matrix dual_hessian(const WorkingSet& ws) {
  const Index M = ws.size();
  const Index V = ws.views();
  Matrix h(M + V, M + V);
  h.topLeftCorner(M, M) = ws.gram();
  h.topRightCorner(M, V) = ws.dpsi().transpose();
  h.bottomLeftCorner(V, M) = ws.dpsi();
  h.bottomRightCorner(V, V).setIdentity();
  return -h;
}

double primal_objective(const Vector& theta, const WorkingSet& ws, double C) {
  std::vector<double> slack(static_cast<std::size_t>(ws.labels()), 0.0);
  for (Index c = 0; c < ws.size(); ++c) {
    const auto t = static_cast<std::size_t>(ws.constraints()[static_cast<std::size_t>(c)].label);
    slack[t] = std::max(slack[t], ws.losses()(c) - theta.dot(ws.dpsi().col(c)));
  }
  double xi = 0.0;
  for (double s : slack) xi += s;
  return 0.5 * theta.squaredNorm() + C * xi;
}

Vector primal_from_dual(const Vector& alpha, const Vector& zeta, const WorkingSet& ws) {
  if (alpha.size() == 0) return zeta;
  return ws.dpsi() * alpha + zeta;
}

// ---------------------------------------------------------------------------
// Solver

ApResult solve_ap(const PredictionTensor& tensor, double eta, const ApOptions& options) {
  if (!(eta > 0.0)) throw ConfigError("solve_ap: eta must be positive");
  const Index V = tensor.views();
  if (V < 1 || tensor.entries() < 1) throw DimensionError("solve_ap: empty prediction tensor");

  ApResult out;
  std::vector<LabelCorpus> corpora;
  for (auto& c : label_corpora(tensor)) {
    if (c.trainable()) {
      corpora.push_back(std::move(c));
    } else {
      out.excluded_labels.push_back(c.label);
    }
  }
  if (corpora.empty()) throw DataError("solve_ap: every label is single-class on the labeled set");

  out.C = 1.0 / (2.0 * static_cast<double>(tensor.entries()) * eta);
  if (V == 1) {
    out.theta = SimplexWeights::Uniform(1);
    out.theta_raw = Vector::Ones(1);
    out.converged = true;
    return out;
  }

  const Index L = tensor.index_map.labels();
  WorkingSet ws(V, L);
  std::vector<Vector> truth_psi(static_cast<std::size_t>(L));
  for (const auto& c : corpora) {
    truth_psi[static_cast<std::size_t>(c.label)] = psi(c, PairwiseOrdering::Truth(c.truth));
  }

  Vector alpha(0);
  Vector zeta = Vector::Zero(V);
  Vector theta = Vector::Zero(V);
  double dual = dual_objective(alpha, zeta, ws);

  for (int outer = 1; outer <= options.max_outer; ++outer) {
    out.outer_iterations = outer;
    int added = 0;
    for (const auto& c : corpora) {
      double xi = 0.0;
      for (Index k : ws.members(c.label)) {
        xi = std::max(xi, ws.losses()(k) - theta.dot(ws.dpsi().col(k)));
      }
      Violation v = find_most_violated(c, theta);
      if (v.violation > xi + options.cp_tol) {
        Vector d = truth_psi[static_cast<std::size_t>(c.label)] - psi(c, v.ordering);
        ws.add(Constraint{c.label, std::move(v.ordering), v.loss, std::move(d)});
        ++added;
      }
    }
    if (added > 0) {
      alpha.conservativeResize(ws.size());
      alpha.tail(added).setZero();
    }
    if (ws.empty()) {
      out.converged = true;
      break;
    }

    const double before = dual;
    for (int round = 0; round < options.max_alternations; ++round) {
      const double start = dual;
      alpha = solve_alpha(ws, zeta, out.C, alpha, options.alpha);
      dual = dual_objective(alpha, zeta, ws);
      if (options.on_step) options.on_step({outer, ApTraceEvent::Step::kAlpha, dual});
      zeta = solve_zeta(alpha, ws);
      dual = dual_objective(alpha, zeta, ws);
      if (options.on_step) options.on_step({outer, ApTraceEvent::Step::kZeta, dual});
      if (dual - start <= options.alternation_tol * std::max(1.0, std::abs(dual))) break;
    }
    theta = primal_from_dual(alpha, zeta, ws);

    if (added == 0 && dual - before < options.dual_tol) {
      out.converged = true;
      break;
    }
  }

  out.alpha = alpha;
  out.zeta = zeta;
  out.dual = dual;
  out.constraints = ws.size();
  out.theta_raw = theta;
  // The zeta step makes theta_raw nonnegative up to rounding.
  out.theta = SimplexWeights::Normalize(theta, 0.0);
  return out;
}

}  // namespace mvmc
