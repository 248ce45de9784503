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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "mvmc/error.hpp"
#include "mvmc/fusion_ap.hpp"
#include "mvmc/metrics.hpp"
#include "test_util.hpp"

namespace mvmc {
namespace {

LabelCorpus make_corpus(const Matrix& features, std::vector<int> truth) {
  LabelCorpus c;
  c.features = features;
  c.truth = std::move(truth);
  return c;
}

std::vector<int> truth_of(Index pos, Index neg) {
  std::vector<int> y(static_cast<std::size_t>(pos), 1);
  y.resize(static_cast<std::size_t>(pos + neg), -1);
  return y;
}

// Delta_ap + theta^T psi for an explicit ranking, from first principles.
double augmented_value(const LabelCorpus& c, const Vector& theta, const std::vector<Index>& order) {
  std::vector<Index> rank(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) rank[static_cast<std::size_t>(order[k])] = static_cast<Index>(k);
  double pairs = 0.0;
  double count_pos = 0.0;
  double count_neg = 0.0;
  for (std::size_t i = 0; i < c.truth.size(); ++i) {
    if (c.truth[i] > 0) count_pos += 1.0;
    if (c.truth[i] < 0) count_neg += 1.0;
  }
  for (std::size_t i = 0; i < c.truth.size(); ++i) {
    for (std::size_t j = 0; j < c.truth.size(); ++j) {
      if (c.truth[i] > 0 && c.truth[j] < 0) {
        const double o = rank[i] < rank[j] ? 1.0 : -1.0;
        pairs += o * theta.dot(c.features.col(static_cast<Index>(i)) - c.features.col(static_cast<Index>(j)));
      }
    }
  }
  return 1.0 - testing::ap_by_enumeration(c.truth, order) + pairs / (count_pos * count_neg);
}

double brute_force_max(const LabelCorpus& c, const Vector& theta) {
  std::vector<Index> perm(c.truth.size());
  std::iota(perm.begin(), perm.end(), Index{0});
  double best = -std::numeric_limits<double>::infinity();
  do {
    best = std::max(best, augmented_value(c, theta, perm));
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

TEST(PairwiseOrdering, ValidatesPermutations) {
  EXPECT_THROW(PairwiseOrdering({0, 0, 1}), DimensionError);
  EXPECT_THROW(PairwiseOrdering({0, 3, 1}), DimensionError);
  const PairwiseOrdering o({2, 0, 1});
  EXPECT_EQ(o.ranks(), (std::vector<Index>{1, 2, 0}));
  EXPECT_EQ(o.sign(2, 0), 1);
  EXPECT_EQ(o.sign(1, 0), -1);
}

TEST(PairwiseOrdering, EveryPairIsSignedAndAntisymmetric) {
  testing::Gen g(51);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = g.index(2, 9);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = g.normal();
    const PairwiseOrdering o = PairwiseOrdering::FromScores(s);
    for (Index a = 0; a < n; ++a) {
      for (Index b = 0; b < n; ++b) {
        if (a == b) continue;
        ASSERT_NE(o.sign(a, b), 0);
        ASSERT_EQ(o.sign(a, b), -o.sign(b, a));
      }
    }
  }
}

TEST(ApLoss, Examples) {
  const std::vector<int> truth{1, -1, -1, -1, 1, -1, -1, -1};
  EXPECT_EQ(ap_loss(truth, PairwiseOrdering::Truth(truth)), 0.0);
  const std::vector<double> first{0.4, 0.3, 0.2, 0.1, -0.1, -0.2, -0.3, -0.4};
  const std::vector<double> second{-0.4, -0.3, -0.2, -0.1, 0.1, 0.2, 0.3, 0.4};
  EXPECT_NEAR(ap_loss(truth, PairwiseOrdering::FromScores(first)), 0.3, 1e-12);
  EXPECT_NEAR(ap_loss(truth, PairwiseOrdering::FromScores(second)), 0.75, 1e-12);
  EXPECT_THROW(ap_loss(std::vector<int>{-1, -1}, PairwiseOrdering({0, 1})), UndefinedMetricError);
}

TEST(ApLoss, EqualsOneMinusAveragePrecision) {
  testing::Gen g(52);
  for (int trial = 0; trial < 200; ++trial) {
    const Index n = g.index(2, 8);
    const std::vector<int> y = g.truth(n);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& v : s) v = g.normal();
    EXPECT_NEAR(ap_loss(y, PairwiseOrdering::FromScores(s)), 1.0 - average_precision(s, y), 1e-15);
  }
}

TEST(Psi, SinglePair) {
  Matrix f(2, 2);
  f << 0.9, 0.2,  //
      0.4, 0.7;
  const LabelCorpus c = make_corpus(f, {1, -1});
  const Vector got = psi(c, PairwiseOrdering({0, 1}));
  EXPECT_LT((got - (f.col(0) - f.col(1))).norm(), 1e-15);
}

TEST(Psi, ReversingEveryPairNegates) {
  testing::Gen g(53);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = g.index(2, 9);
    const LabelCorpus c = make_corpus(g.uniform_matrix(3, n), g.truth(n));
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), g.rng());
    std::vector<Index> reversed(order.rbegin(), order.rend());
    EXPECT_LT((psi(c, PairwiseOrdering(order)) + psi(c, PairwiseOrdering(reversed))).norm(), 1e-14);
  }
}

TEST(Psi, MatchesPairEnumeration) {
  testing::Gen g(54);
  const LabelCorpus c = make_corpus(g.uniform_matrix(3, 4), {1, -1, 1, -1});
  const PairwiseOrdering o({1, 0, 3, 2});  // neg1, pos0, neg3, pos2
  // o_ij over (0,1), (0,3), (2,1), (2,3).
  const Vector expect =
      (-(c.features.col(0) - c.features.col(1)) + (c.features.col(0) - c.features.col(3)) -
       (c.features.col(2) - c.features.col(1)) - (c.features.col(2) - c.features.col(3))) /
      4.0;
  EXPECT_LT((psi(c, o) - expect).norm(), 1e-15);
  EXPECT_THROW(psi(make_corpus(g.uniform_matrix(3, 2), {1, 1}), PairwiseOrdering({0, 1})), UndefinedMetricError);
}

TEST(FindMostViolated, SeparableCaseReturnsTheTruthRanking) {
  Matrix f(1, 5);
  f << 10.0, 9.0, -9.0, -10.0, -11.0;
  const LabelCorpus c = make_corpus(f, {1, 1, -1, -1, -1});
  const Violation v = find_most_violated(c, Vector::Ones(1));
  EXPECT_EQ(v.loss, 0.0);
  for (Index i = 0; i < 2; ++i) {
    for (Index j = 2; j < 5; ++j) EXPECT_EQ(v.ordering.sign(i, j), 1);
  }
  EXPECT_LE(v.violation, 1e-12);
}

TEST(FindMostViolated, ZeroScoresPutTheNegativeFirst) {
  const LabelCorpus c = make_corpus(Matrix::Zero(2, 2), {1, -1});
  const Violation v = find_most_violated(c, Vector::Ones(2));
  EXPECT_EQ(v.ordering.order(), (std::vector<Index>{1, 0}));
  EXPECT_EQ(v.loss, 0.5);
  EXPECT_EQ(v.violation, 0.5);
}

TEST(FindMostViolated, MatchesExhaustiveSearchTwoByFour) {
  testing::Gen g(55);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> y = truth_of(2, 4);
    std::shuffle(y.begin(), y.end(), g.rng());
    const LabelCorpus c = make_corpus(g.uniform_matrix(3, 6), y);
    Vector theta(3);
    for (Index v = 0; v < 3; ++v) theta(v) = g.normal();
    const Violation v = find_most_violated(c, theta);
    EXPECT_NEAR(augmented_value(c, theta, v.ordering.order()), brute_force_max(c, theta), 1e-12);
  }
}

TEST(FindMostViolated, MatchesExhaustiveSearchOnSmallCorpora) {
  testing::Gen g(56);
  for (int trial = 0; trial < 200; ++trial) {
    const Index pos = g.index(1, 2);
    const Index neg = g.index(1, 5);
    std::vector<int> y = truth_of(pos, neg);
    std::shuffle(y.begin(), y.end(), g.rng());
    const Index V = g.index(1, 3);
    const LabelCorpus c = make_corpus(g.uniform_matrix(V, pos + neg), y);
    Vector theta(V);
    for (Index v = 0; v < V; ++v) theta(v) = g.coin(0.2) ? 0.0 : 3.0 * g.normal();
    const Violation v = find_most_violated(c, theta);
    const double best = brute_force_max(c, theta);
    EXPECT_NEAR(augmented_value(c, theta, v.ordering.order()), best, 1e-12);
    // violation = best - theta^T psi(truth).
    const double truth_value = augmented_value(c, theta, PairwiseOrdering::Truth(y).order());
    EXPECT_NEAR(v.violation, best - truth_value, 1e-12);
    EXPECT_NEAR(v.loss, ap_loss(y, v.ordering), 0.0);
  }
}

WorkingSet random_working_set(testing::Gen& g, Index V, Index labels, Index per_label) {
  WorkingSet ws(V, labels);
  for (Index t = 0; t < labels; ++t) {
    const Index n = g.index(3, 7);
    const LabelCorpus c = make_corpus(g.uniform_matrix(V, n), g.truth(n));
    const Vector truth_psi = psi(c, PairwiseOrdering::Truth(c.truth));
    for (Index k = 0; k < per_label; ++k) {
      Vector theta(V);
      for (Index v = 0; v < V; ++v) theta(v) = g.normal();
      Violation viol = find_most_violated(c, theta);
      Vector d = truth_psi - psi(c, viol.ordering);
      ws.add(Constraint{t, std::move(viol.ordering), viol.loss, std::move(d)});
    }
  }
  return ws;
}

TEST(WorkingSet, GramTracksDirections) {
  testing::Gen g(57);
  const WorkingSet ws = random_working_set(g, 3, 2, 3);
  EXPECT_EQ(ws.size(), 6);
  EXPECT_LT((ws.gram() - ws.dpsi().transpose() * ws.dpsi()).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(ws.members(1), (std::vector<Index>{3, 4, 5}));
  WorkingSet bad(3, 1);
  EXPECT_THROW(bad.add(Constraint{0, PairwiseOrdering({0}), 0.0, Vector::Zero(2)}), DimensionError);
}

TEST(SolveAlpha, DegenerateDirectionSaturatesTheBox) {
  WorkingSet ws(2, 1);
  ws.add(Constraint{0, PairwiseOrdering({0, 1}), 0.5, Vector::Zero(2)});
  const Vector a = solve_alpha(ws, Vector::Zero(2), 0.3);
  EXPECT_NEAR(a(0), 0.3, 1e-15);
}

TEST(SolveAlpha, OneDimensionalClosedForm) {
  for (double k : {0.5, 2.0, 8.0}) {
    for (double C : {0.01, 0.2, 5.0}) {
      WorkingSet ws(1, 1);
      Vector d(1);
      d << std::sqrt(k);
      ws.add(Constraint{0, PairwiseOrdering({0, 1}), 0.6, d});
      const Vector a = solve_alpha(ws, Vector::Zero(1), C);
      EXPECT_NEAR(a(0), std::clamp(0.6 / k, 0.0, C), 1e-12) << "k " << k << " C " << C;
    }
  }
}

TEST(SolveAlpha, MatchesGridOracle) {
  testing::Gen g(58);
  for (int trial = 0; trial < 5; ++trial) {
    // Constraints 0 and 1 share a label; constraint 2 has its own.
    WorkingSet ws(3, 2);
    for (Index k = 0; k < 3; ++k) {
      Vector d(3);
      for (Index v = 0; v < 3; ++v) d(v) = 0.5 * g.normal();
      ws.add(Constraint{k < 2 ? 0 : 1, PairwiseOrdering({0, 1}), g.uniform(0.1, 1.0), d});
    }
    Vector zeta(3);
    for (Index v = 0; v < 3; ++v) zeta(v) = std::max(0.0, 0.3 * g.normal());
    const double C = g.uniform(0.2, 2.0);
    const Vector a = solve_alpha(ws, zeta, C);
    auto objective = [&](const Vector& al) {
      const Vector lin = ws.losses() - ws.dpsi().transpose() * zeta;
      return lin.dot(al) - 0.5 * al.dot(ws.gram() * al);
    };
    const int steps = 200;
    double best = -std::numeric_limits<double>::infinity();
    Vector al(3);
    for (int i = 0; i <= steps; ++i) {
      for (int j = 0; i + j <= steps; ++j) {
        for (int k = 0; k <= steps; ++k) {
          al << C * i / steps, C * j / steps, C * k / steps;
          best = std::max(best, objective(al));
        }
      }
    }
    EXPECT_NEAR(objective(a), best, 1e-4);
    EXPECT_GE(objective(a), best - 1e-12);
    EXPECT_GE(a.minCoeff(), 0.0);
    EXPECT_LE(a(0) + a(1), C * (1.0 + 1e-12));
    EXPECT_LE(a(2), C * (1.0 + 1e-12));
  }
}

TEST(SolveAlpha, RejectsEmptyWorkingSet) {
  EXPECT_THROW(solve_alpha(WorkingSet(2, 1), Vector::Zero(2), 1.0), SolverError);
}

TEST(SolveZeta, ClosedForm) {
  WorkingSet ws(3, 1);
  Vector d(3);
  d << 1.0, -2.0, 0.0;
  ws.add(Constraint{0, PairwiseOrdering({0, 1}), 0.5, d});
  const Vector z = solve_zeta(Vector::Ones(1), ws);
  EXPECT_EQ(z, (Vector(3) << 0.0, 2.0, 0.0).finished());
  EXPECT_TRUE(solve_zeta(Vector::Zero(1), ws).isZero(0.0));
}

TEST(SolveZeta, SatisfiesKkt) {
  testing::Gen g(59);
  for (int trial = 0; trial < 50; ++trial) {
    const WorkingSet ws = random_working_set(g, 4, 2, 3);
    Vector alpha(ws.size());
    for (Index k = 0; k < ws.size(); ++k) alpha(k) = g.uniform(0.0, 1.0);
    const Vector z = solve_zeta(alpha, ws);
    const Vector b = ws.dpsi() * alpha;
    for (Index v = 0; v < z.size(); ++v) {
      EXPECT_GE(z(v), 0.0);
      EXPECT_LE(std::abs(z(v) * (z(v) + b(v))), 1e-10);
      // Multiplier of zeta >= 0 is nonnegative: -(b + zeta) <= 0.
      EXPECT_GE(z(v) + b(v), -1e-10);
    }
  }
}

TEST(DualObjective, OriginIsZero) {
  testing::Gen g(60);
  const WorkingSet ws = random_working_set(g, 3, 2, 2);
  EXPECT_EQ(dual_objective(Vector::Zero(ws.size()), Vector::Zero(3), ws), 0.0);
}

TEST(DualHessian, IsNegativeSemidefinite) {
  testing::Gen g(61);
  for (int trial = 0; trial < 20; ++trial) {
    const WorkingSet ws = random_working_set(g, g.index(2, 5), g.index(1, 3), g.index(1, 4));
    const Matrix h = dual_hessian(ws);
    EXPECT_LE(Eigen::SelfAdjointEigenSolver<Matrix>(h).eigenvalues().maxCoeff(), 1e-8);
  }
}

double primal_by_hand(const Vector& theta, const WorkingSet& ws, double C) {
  double xi = 0.0;
  for (Index t = 0; t < ws.labels(); ++t) {
    double s = 0.0;
    for (Index c : ws.members(t)) s = std::max(s, ws.losses()(c) - theta.dot(ws.dpsi().col(c)));
    xi += s;
  }
  return 0.5 * theta.squaredNorm() + C * xi;
}

// Convex primal over theta >= 0 in two dimensions: zooming grid.
double primal_min_2d(const WorkingSet& ws, double C) {
  double lo0 = 0.0, hi0 = 4.0, lo1 = 0.0, hi1 = 4.0;
  double best = std::numeric_limits<double>::infinity();
  Vector arg = Vector::Zero(2);
  for (int level = 0; level < 40; ++level) {
    const int n = 40;
    for (int i = 0; i <= n; ++i) {
      for (int j = 0; j <= n; ++j) {
        Vector th(2);
        th << lo0 + (hi0 - lo0) * i / n, lo1 + (hi1 - lo1) * j / n;
        const double f = primal_by_hand(th, ws, C);
        if (f < best) {
          best = f;
          arg = th;
        }
      }
    }
    const double w0 = (hi0 - lo0) / 4.0;
    const double w1 = (hi1 - lo1) / 4.0;
    lo0 = std::max(0.0, arg(0) - w0);
    hi0 = arg(0) + w0;
    lo1 = std::max(0.0, arg(1) - w1);
    hi1 = arg(1) + w1;
  }
  return best;
}

TEST(DualObjective, DualityGapVanishesAtTheOptimum) {
  testing::Gen g(62);
  for (int trial = 0; trial < 5; ++trial) {
    const WorkingSet ws = random_working_set(g, 2, 2, 3);
    const double C = g.uniform(0.1, 2.0);
    Vector alpha = Vector::Zero(ws.size());
    Vector zeta = Vector::Zero(2);
    for (int round = 0; round < 2000; ++round) {
      alpha = solve_alpha(ws, zeta, C, alpha);
      zeta = solve_zeta(alpha, ws);
    }
    const double dual = dual_objective(alpha, zeta, ws);
    const double primal = primal_min_2d(ws, C);
    EXPECT_LT(primal - dual, 1e-5);
    EXPECT_GT(primal - dual, -1e-9);
    const Vector theta = primal_from_dual(alpha, zeta, ws);
    EXPECT_NEAR(primal_objective(theta, ws, C), primal_by_hand(theta, ws, C), 1e-15);
    EXPECT_LT(primal_objective(theta, ws, C) - dual, 1e-5);
  }
}

PredictionTensor perfect_and_noise(testing::Gen& g, Index labels, Index labeled) {
  PredictionTensor t = testing::random_tensor(g, 2, labels, labeled);
  for (Index k = 0; k < t.entries(); ++k) {
    t.p(0, k) = t.y0(k) > 0 ? 1.0 : 0.0;
    t.p(1, k) = g.uniform();
  }
  return t;
}

double fused_training_map(const PredictionTensor& t, const Vector& theta) {
  std::vector<std::optional<double>> per;
  for (const LabelCorpus& c : label_corpora(t)) {
    const Vector s = c.features.transpose() * theta;
    per.push_back(average_precision(std::vector<double>(s.data(), s.data() + s.size()), c.truth));
  }
  return mean_over_labels(per).mean;
}

TEST(SolveAp, PerfectViewDominates) {
  testing::Gen g(63);
  const PredictionTensor t = perfect_and_noise(g, 3, 12);
  const ApResult r = solve_ap(t, 1e-2);
  EXPECT_GT(r.theta[0], 0.5);
  EXPECT_EQ(fused_training_map(t, r.theta.theta()), 1.0);
  EXPECT_TRUE(r.converged);
}

TEST(SolveAp, SingleViewAndDegenerateInputs) {
  testing::Gen g(64);
  EXPECT_EQ(solve_ap(testing::random_tensor(g, 1, 2, 5), 1.0).theta.theta(), Vector::Ones(1));
  EXPECT_THROW(solve_ap(testing::random_tensor(g, 2, 2, 5), 0.0), ConfigError);
  PredictionTensor one_class = testing::random_tensor(g, 2, 1, 4);
  one_class.y0.setConstant(1);
  EXPECT_THROW(solve_ap(one_class, 1.0), DataError);
}

TEST(SolveAp, SingleClassLabelsAreExcluded) {
  testing::Gen g(65);
  PredictionTensor t = testing::random_tensor(g, 2, 2, 5);
  for (Index j = 0; j < 5; ++j) t.y0(t.index_map.to_flat(1, j)) = -1;
  const ApResult r = solve_ap(t, 1.0);
  EXPECT_EQ(r.excluded_labels, std::vector<Index>{1});
}

TEST(SolveAp, PermutingViewsPermutesTheta) {
  testing::Gen g(66);
  for (int trial = 0; trial < 5; ++trial) {
    const PredictionTensor t = testing::random_tensor(g, 3, 3, 8);
    PredictionTensor u = t;
    u.p.row(0) = t.p.row(2);
    u.p.row(1) = t.p.row(0);
    u.p.row(2) = t.p.row(1);
    const Vector a = solve_ap(t, 0.1).theta.theta();
    const Vector b = solve_ap(u, 0.1).theta.theta();
    EXPECT_NEAR(a(2), b(0), 1e-9);
    EXPECT_NEAR(a(0), b(1), 1e-9);
    EXPECT_NEAR(a(1), b(2), 1e-9);
  }
}

TEST(SolveAp, DualAscendsAndTheCuttingPlaneTerminates) {
  testing::Gen g(67);
  for (int trial = 0; trial < 20; ++trial) {
    const PredictionTensor t = testing::random_tensor(g, g.index(2, 5), g.index(1, 4), g.index(4, 10));
    double last = 0.0;
    ApOptions opts;
    opts.on_step = [&](const ApTraceEvent& e) {
      EXPECT_GE(e.dual, last - 1e-9) << "outer " << e.outer;
      last = e.dual;
    };
    const double eta = std::pow(10.0, g.uniform(-2.0, 2.0));
    const ApResult r = solve_ap(t, eta, opts);
    EXPECT_TRUE(r.converged);
    EXPECT_LE(r.outer_iterations, opts.max_outer);
    EXPECT_GE(r.theta_raw.minCoeff(), -1e-9);
    EXPECT_TRUE(SimplexWeights::on_simplex(r.theta.theta()));
    EXPECT_NEAR(r.C, 1.0 / (2.0 * static_cast<double>(t.entries()) * eta), 1e-15);
    // Normalization is a positive rescaling, so fused rankings agree.
    if (r.theta_raw.sum() > 0.0) {
      EXPECT_NEAR(fused_training_map(t, r.theta.theta()), fused_training_map(t, r.theta_raw), 1e-12);
    }
  }
}

TEST(SolveAp, Deterministic) {
  testing::Gen g(68);
  const PredictionTensor t = testing::random_tensor(g, 4, 3, 10);
  EXPECT_EQ(solve_ap(t, 0.5).theta.theta(), solve_ap(t, 0.5).theta.theta());
}

}  // namespace
}  // namespace mvmc
