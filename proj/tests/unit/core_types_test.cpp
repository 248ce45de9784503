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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "mvmc/error.hpp"
#include "mvmc/types.hpp"
#include "test_util.hpp"

namespace mvmc {
namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

TEST(LabelMatrix, UnknownIsDistinctFromEveryNumber) {
  LabelMatrix y(2, 3);
  EXPECT_FALSE(y.known(0, 0));
  EXPECT_THROW(y.value(0, 0), DataError);
  y.set(1, 2, Label::kNegative);
  EXPECT_EQ(y.value(1, 2), -1.0);
  EXPECT_EQ(y.known_count(), 1u);
}

TEST(LabelMatrix, FromDenseRejectsNonSignValues) {
  Matrix m(1, 2);
  m << 1.0, 0.5;
  EXPECT_THROW(LabelMatrix::FromDense(m), DataError);
  m << 1.0, kNan;
  const LabelMatrix y = LabelMatrix::FromDense(m);
  EXPECT_TRUE(y.known(0, 0));
  EXPECT_FALSE(y.known(0, 1));
}

TEST(FeatureMatrix, MissingEntriesAreNeverRead) {
  Matrix m(2, 2);
  m << 1.0, kNan, 3.0, 4.0;
  const FeatureMatrix x = FeatureMatrix::FromDense(m);
  EXPECT_TRUE(x.missing(0, 1));
  EXPECT_THROW(x.value(0, 1), DataError);
  EXPECT_EQ(x.value(1, 0), 3.0);
  EXPECT_EQ(x.filled(-7.0)(0, 1), -7.0);
  EXPECT_FALSE(x.column_complete(1));
  EXPECT_TRUE(x.column_complete(0));
}

TEST(ObservedMask, RejectsOutOfBoundsAndDuplicates) {
  EXPECT_THROW(ObservedMask({{0, 0}, {2, 0}}, 2, 2), DimensionError);
  EXPECT_THROW(ObservedMask({{0, 1}, {0, 1}}, 2, 2), DimensionError);
  const ObservedMask ok({{1, 1}, {0, 0}}, 2, 2);
  EXPECT_TRUE(ok.contains(1, 1));
  EXPECT_FALSE(ok.contains(0, 1));
}

TEST(BuildStacked, SmallExample) {
  Matrix xv(1, 2);
  xv << 2.0, 3.0;
  LabelMatrix y(1, 2);
  y.set(0, 0, Label::kPositive);
  const StackedProblem p = build_stacked(FeatureMatrix(xv), y);
  Matrix expected(3, 2);
  expected << 1, 0, 2, 3, 1, 1;
  EXPECT_EQ(p.z0.z, expected);
  ASSERT_EQ(p.omega_y.size(), 1u);
  EXPECT_TRUE(p.omega_y.contains(0, 0));
  EXPECT_EQ(p.omega_x.size(), 2u);
  EXPECT_TRUE(p.omega_x.contains(1, 0));
  EXPECT_TRUE(p.omega_x.contains(1, 1));
}

TEST(BuildStacked, AllLabelsUnknown) {
  testing::Gen g(1);
  const StackedProblem p = build_stacked(FeatureMatrix(g.matrix(3, 4)), LabelMatrix(2, 4));
  EXPECT_TRUE(p.omega_y.empty());
  EXPECT_TRUE(p.z0.labels_block().isZero(0.0));
}

TEST(BuildStacked, EmptyOrMismatchedSamplesThrow) {
  EXPECT_THROW(build_stacked(FeatureMatrix(Matrix(1, 0)), LabelMatrix(1, 0)), DimensionError);
  EXPECT_THROW(build_stacked(FeatureMatrix(Matrix::Zero(1, 3)), LabelMatrix(1, 2)), DimensionError);
}

TEST(BuildStacked, MissingFeaturesStartAtZeroAndStayOffMask) {
  Matrix m(2, 2);
  m << 1.0, kNan, 3.0, 4.0;
  const StackedProblem p = build_stacked(FeatureMatrix::FromDense(m), LabelMatrix(1, 2));
  EXPECT_EQ(p.z0.z(1, 1), 0.0);
  EXPECT_FALSE(p.omega_x.contains(1, 1));
  EXPECT_EQ(p.omega_x.size(), 3u);
}

TEST(BuildStacked, RoundTripProperty) {
  testing::Gen g(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Index m = g.index(0, 3);
    const Index d = g.index(1, 4);
    const Index n = g.index(1, 6);
    Matrix xv = g.matrix(d, n);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < d; ++i) {
        if (g.coin(0.2)) xv(i, j) = kNan;
      }
    }
    LabelMatrix y(m, n);
    for (Index j = 0; j < n; ++j) {
      for (Index t = 0; t < m; ++t) {
        const double u = g.uniform();
        if (u < 0.3) y.set(t, j, Label::kPositive);
        if (u > 0.7) y.set(t, j, Label::kNegative);
      }
    }
    const FeatureMatrix x = FeatureMatrix::FromDense(xv);
    const StackedProblem p = build_stacked(x, y);
    EXPECT_TRUE(p.z0.z.row(p.z0.ones_row()).isOnes(0.0));
    const auto [x2, y2] = split_stacked(p);
    EXPECT_EQ(y2, y);
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < d; ++i) {
        ASSERT_EQ(x2.missing(i, j), x.missing(i, j));
        if (!x.missing(i, j)) ASSERT_EQ(x2.value(i, j), x.value(i, j));
      }
    }
  }
}

TEST(VectorizeLabeled, SingleView) {
  Matrix pred(2, 1);
  pred << 0.3, -0.2;
  LabelMatrix y(2, 1);
  y.set(0, 0, Label::kPositive);
  y.set(1, 0, Label::kNegative);
  const std::vector<Matrix> views{pred};
  const PredictionTensor t = vectorize_labeled(views, y);
  ASSERT_EQ(t.p.rows(), 1);
  ASSERT_EQ(t.p.cols(), 2);
  EXPECT_EQ(t.p(0, 0), 0.3);
  EXPECT_EQ(t.p(0, 1), -0.2);
  EXPECT_EQ(t.y0(0), 1);
  EXPECT_EQ(t.y0(1), -1);
}

TEST(VectorizeLabeled, IdenticalViewsGiveIdenticalRows) {
  testing::Gen g(2);
  const Matrix pred = g.matrix(3, 4);
  LabelMatrix y(3, 4);
  for (Index j = 0; j < 4; ++j) {
    for (Index t = 0; t < 3; ++t) y.set(t, j, g.coin() ? Label::kPositive : Label::kNegative);
  }
  const std::vector<Matrix> views{pred, pred};
  const PredictionTensor t = vectorize_labeled(views, y);
  EXPECT_EQ(t.p.row(0), t.p.row(1));
}

TEST(VectorizeLabeled, MismatchedShapesThrow) {
  LabelMatrix y(2, 2);
  for (Index j = 0; j < 2; ++j) {
    for (Index t = 0; t < 2; ++t) y.set(t, j, Label::kPositive);
  }
  const std::vector<Matrix> views{Matrix::Zero(2, 2), Matrix::Zero(3, 2)};
  EXPECT_THROW(vectorize_labeled(views, y), DimensionError);
}

TEST(IndexMap, IsABijection) {
  for (Index m = 1; m <= 4; ++m) {
    for (Index nl = 1; nl <= 5; ++nl) {
      const IndexMap map(m, nl);
      std::vector<bool> hit(static_cast<std::size_t>(map.size()), false);
      for (Index t = 0; t < m; ++t) {
        for (Index j = 0; j < nl; ++j) {
          const Index k = map.to_flat(t, j);
          ASSERT_FALSE(hit[static_cast<std::size_t>(k)]);
          hit[static_cast<std::size_t>(k)] = true;
          EXPECT_EQ(map.from_flat(k), std::make_pair(t, j));
        }
      }
    }
  }
}

TEST(IndexMap, UnflattenInvertsVectorization) {
  testing::Gen g(3);
  const Matrix a = g.matrix(3, 5);
  LabelMatrix y(3, 5);
  for (Index j = 0; j < 5; ++j) {
    for (Index t = 0; t < 3; ++t) y.set(t, j, Label::kNegative);
  }
  const std::vector<Matrix> views{a};
  EXPECT_EQ(vectorize_labeled(views, y).unflatten(0), a);
}

TEST(SimplexWeights, Invariants) {
  EXPECT_NO_THROW(SimplexWeights(Vector::Constant(4, 0.25)));
  Vector bad(2);
  bad << 0.7, 0.4;
  EXPECT_THROW(SimplexWeights{bad}, SolverError);
  bad << 1.1, -0.1;
  EXPECT_THROW(SimplexWeights{bad}, SolverError);
  const SimplexWeights hot = SimplexWeights::OneHot(3, 1);
  EXPECT_EQ(hot[1], 1.0);
  Vector raw(3);
  raw << 2.0, -1.0, 6.0;
  const SimplexWeights n = SimplexWeights::Normalize(raw);
  EXPECT_DOUBLE_EQ(n[0], 0.25);
  EXPECT_EQ(n[1], 0.0);
  EXPECT_DOUBLE_EQ(n[2], 0.75);
  EXPECT_EQ(SimplexWeights::Normalize(Vector::Zero(2)).theta(), SimplexWeights::Uniform(2).theta());
}

TEST(MultiViewDataset, ValidatesPartitionAgainstLabels) {
  LabelMatrix truth(1, 3);
  truth.set(0, 0, Label::kPositive);
  truth.set(0, 1, Label::kNegative);
  truth.set(0, 2, Label::kPositive);
  const std::vector<FeatureMatrix> views{FeatureMatrix(Matrix::Zero(2, 3))};
  const std::vector<SampleRole> roles{SampleRole::kLabeled, SampleRole::kUnlabeled, SampleRole::kTest};
  // Unlabeled samples must not carry labels.
  EXPECT_THROW(MultiViewDataset(views, truth, roles), DataError);
  const MultiViewDataset ds = mask_to_partition(views, truth, roles);
  EXPECT_TRUE(ds.labels().known(0, 0));
  EXPECT_FALSE(ds.labels().known(0, 1));
  EXPECT_FALSE(ds.labels().known(0, 2));
  EXPECT_EQ(ds.indices(SampleRole::kTest), std::vector<Index>{2});
  // Views must share n.
  const std::vector<FeatureMatrix> bad{FeatureMatrix(Matrix::Zero(2, 3)), FeatureMatrix(Matrix::Zero(2, 4))};
  EXPECT_THROW(mask_to_partition(bad, truth, roles), DimensionError);
}

TEST(SampleRole, NamesRoundTrip) {
  for (SampleRole r : {SampleRole::kLabeled, SampleRole::kUnlabeled, SampleRole::kTest}) {
    EXPECT_EQ(parse_role(to_string(r)), r);
  }
  EXPECT_FALSE(parse_role("validation").has_value());
}

}  // namespace
}  // namespace mvmc
