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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace mvmc {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

/// Tri-state label entry. Unknown is a distinct state, never a number.
enum class Label : std::int8_t { kNegative = -1, kUnknown = 0, kPositive = 1 };

/// m x n matrix of labels in {-1, +1, unknown}.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  /// All entries start unknown.
  LabelMatrix(Index labels, Index samples);

  /// Builds from a dense matrix where NaN marks unknown and every other entry
  /// must be exactly -1 or +1.
  static LabelMatrix FromDense(const Matrix& values);

  Index labels() const { return m_; }
  Index samples() const { return n_; }

  Label at(Index label, Index sample) const;
  void set(Index label, Index sample, Label value);
  bool known(Index label, Index sample) const {
    return at(label, sample) != Label::kUnknown;
  }
  /// Numeric value of a known entry. Throws on unknown entries.
  double value(Index label, Index sample) const;

  std::size_t known_count() const;
  /// True if every entry of the given sample column is known.
  bool column_known(Index sample) const;
  /// True if every entry of the given sample column is unknown.
  bool column_unknown(Index sample) const;

  /// Column subset in the given order.
  LabelMatrix columns(std::span<const Index> samples) const;
  /// Copy with the given sample columns set to unknown.
  LabelMatrix hide_columns(std::span<const Index> samples) const;

  /// Dense copy; unknown entries become NaN.
  Matrix to_dense() const;

  friend bool operator==(const LabelMatrix&, const LabelMatrix&) = default;

 private:
  std::size_t offset(Index label, Index sample) const;

  Index m_ = 0;
  Index n_ = 0;
  std::vector<Label> data_;
};

// ---------------------------------------------------------------------------
// Features
// ---------------------------------------------------------------------------

/// d x n real feature matrix with an optional per-entry missing flag.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  /// Fully observed features.
  explicit FeatureMatrix(Matrix values);
  /// `missing(i, j)` marks entries that must never be read as numbers.
  FeatureMatrix(Matrix values, Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing);

  /// NaN entries become missing.
  static FeatureMatrix FromDense(const Matrix& values);

  Index dim() const { return values_.rows(); }
  Index samples() const { return values_.cols(); }

  bool missing(Index row, Index col) const {
    return has_missing_ && missing_(row, col);
  }
  bool has_missing() const { return has_missing_; }
  bool column_complete(Index col) const;
  std::size_t missing_count() const;

  /// Value of an observed entry. Throws if the entry is missing.
  double value(Index row, Index col) const;

  /// Values with missing entries replaced by `fill`.
  Matrix filled(double fill = 0.0) const;

  FeatureMatrix columns(std::span<const Index> samples) const;

 private:
  Matrix values_;
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing_;
  bool has_missing_ = false;
};

// ---------------------------------------------------------------------------
// Masks and the stacked matrix
// ---------------------------------------------------------------------------

struct Entry {
  Index row = 0;
  Index col = 0;
  friend auto operator<=>(const Entry&, const Entry&) = default;
};

/// Set of observed (row, col) positions, sorted column-major.
class ObservedMask {
 public:
  ObservedMask() = default;
  /// Validates bounds and rejects duplicates.
  ObservedMask(std::vector<Entry> entries, Index rows, Index cols);

  std::span<const Entry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(Index row, Index col) const;

 private:
  std::vector<Entry> entries_;
};

/// Z = [Y; X; 1^T] of shape (m + d + 1) x n.
struct StackedMatrix {
  Matrix z;
  Index m = 0;
  Index d = 0;

  Index samples() const { return z.cols(); }
  Index rows() const { return m + d + 1; }
  Index ones_row() const { return m + d; }

  auto labels_block() const { return z.topRows(m); }
  auto features_block() const { return z.middleRows(m, d); }
};

struct StackedProblem {
  StackedMatrix z0;
  ObservedMask omega_x;
  ObservedMask omega_y;
};

/// Stacks labels over features over a ones row. Unknown labels and missing
/// features start at 0.
StackedProblem build_stacked(const FeatureMatrix& features, const LabelMatrix& labels);

/// Inverse read of build_stacked: label rows and feature rows, with entries
/// outside the masks restored to unknown / missing.
std::pair<FeatureMatrix, LabelMatrix> split_stacked(const StackedProblem& problem);

// ---------------------------------------------------------------------------
// Fusion data
// ---------------------------------------------------------------------------

/// Nonnegative weights summing to one.
class SimplexWeights {
 public:
  static constexpr double kNonnegTol = 1e-12;
  static constexpr double kSumTol = 1e-10;

  /// Throws if `theta` is off the simplex.
  explicit SimplexWeights(Vector theta);

  static SimplexWeights Uniform(Index views);
  static SimplexWeights OneHot(Index views, Index hot);
  /// Clips entries below `floor` to zero and rescales to sum one.
  static SimplexWeights Normalize(const Vector& raw, double floor = 0.0);

  const Vector& theta() const { return theta_; }
  Index size() const { return theta_.size(); }
  double operator[](Index v) const { return theta_(v); }

  static bool on_simplex(const Vector& theta);

 private:
  Vector theta_;
};

/// Row-major bijection (label t, labeled sample j) <-> k = t * n_l + j.
class IndexMap {
 public:
  IndexMap() = default;
  IndexMap(Index labels, Index labeled) : m_(labels), nl_(labeled) {}

  Index size() const { return m_ * nl_; }
  Index labels() const { return m_; }
  Index labeled() const { return nl_; }
  Index to_flat(Index label, Index sample) const { return label * nl_ + sample; }
  std::pair<Index, Index> from_flat(Index k) const { return {k / nl_, k % nl_}; }

 private:
  Index m_ = 0;
  Index nl_ = 0;
};

/// V x N per-view predictions on the labeled entries, with the matching truth.
struct PredictionTensor {
  Matrix p;             // V x N
  Eigen::VectorXi y0;   // length N, entries in {-1, +1}
  IndexMap index_map;

  Index views() const { return p.rows(); }
  Index entries() const { return p.cols(); }

  /// Reverses the vectorization for one view: m x n_l.
  Matrix unflatten(Index view) const;
};

PredictionTensor vectorize_labeled(std::span<const Matrix> view_predictions,
                                   const LabelMatrix& labeled_truth);

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

enum class SampleRole : std::uint8_t { kLabeled, kUnlabeled, kTest };

const char* to_string(SampleRole role);
std::optional<SampleRole> parse_role(std::string_view text);

/// V views over the same n samples plus one partially observed label matrix.
class MultiViewDataset {
 public:
  MultiViewDataset() = default;
  /// Validates view shapes and that labels are known exactly on labeled
  /// samples.
  MultiViewDataset(std::vector<FeatureMatrix> views, LabelMatrix labels,
                   std::vector<SampleRole> roles, std::uint64_t seed = 0);

  Index num_views() const { return static_cast<Index>(views_.size()); }
  Index samples() const { return labels_.samples(); }
  Index labels_count() const { return labels_.labels(); }

  const std::vector<FeatureMatrix>& views() const { return views_; }
  const FeatureMatrix& view(Index v) const { return views_.at(static_cast<std::size_t>(v)); }
  const LabelMatrix& labels() const { return labels_; }
  const std::vector<SampleRole>& roles() const { return roles_; }
  std::uint64_t seed() const { return seed_; }

  /// Sample indices with the given role, ascending.
  std::vector<Index> indices(SampleRole role) const;
  /// Unlabeled and test samples, ascending.
  std::vector<Index> unlabeled_and_test() const;

  /// Same labels and roles over a different set of views.
  MultiViewDataset with_views(std::vector<FeatureMatrix> views) const;

 private:
  std::vector<FeatureMatrix> views_;
  LabelMatrix labels_;
  std::vector<SampleRole> roles_;
  std::uint64_t seed_ = 0;
};

/// Builds a dataset from full ground truth, revealing labels only for samples
/// marked labeled.
MultiViewDataset mask_to_partition(std::vector<FeatureMatrix> views, const LabelMatrix& truth,
                                   std::vector<SampleRole> roles, std::uint64_t seed = 0);

}  // namespace mvmc
