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

#include "mvmc/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvmc/error.hpp"

namespace mvmc {

// ---------------------------------------------------------------------------
// LabelMatrix

LabelMatrix::LabelMatrix(Index labels, Index samples)
    : m_(labels), n_(samples) {
  if (labels < 0 || samples < 0) throw DimensionError("negative label matrix shape");
  data_.assign(static_cast<std::size_t>(labels * samples), Label::kUnknown);
}

LabelMatrix LabelMatrix::FromDense(const Matrix& values) {
  LabelMatrix out(values.rows(), values.cols());
  for (Index j = 0; j < values.cols(); ++j) {
    for (Index i = 0; i < values.rows(); ++i) {
      const double x = values(i, j);
      if (std::isnan(x)) continue;
      if (x == 1.0) {
        out.set(i, j, Label::kPositive);
      } else if (x == -1.0) {
        out.set(i, j, Label::kNegative);
      } else {
        throw DataError("label entry (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is neither -1, +1 nor unknown");
      }
    }
  }
  return out;
}

std::size_t LabelMatrix::offset(Index label, Index sample) const {
  if (label < 0 || label >= m_ || sample < 0 || sample >= n_) {
    throw DimensionError("label index (" + std::to_string(label) + ", " +
                         std::to_string(sample) + ") out of range");
  }
  return static_cast<std::size_t>(sample * m_ + label);
}

Label LabelMatrix::at(Index label, Index sample) const { return data_[offset(label, sample)]; }

void LabelMatrix::set(Index label, Index sample, Label value) {
  data_[offset(label, sample)] = value;
}

double LabelMatrix::value(Index label, Index sample) const {
  const Label l = at(label, sample);
  if (l == Label::kUnknown) {
    throw DataError("read of unknown label (" + std::to_string(label) + ", " +
                    std::to_string(sample) + ")");
  }
  return static_cast<double>(static_cast<int>(l));
}

std::size_t LabelMatrix::known_count() const {
  return static_cast<std::size_t>(
      std::count_if(data_.begin(), data_.end(), [](Label l) { return l != Label::kUnknown; }));
}

bool LabelMatrix::column_known(Index sample) const {
  for (Index t = 0; t < m_; ++t) {
    if (!known(t, sample)) return false;
  }
  return true;
}

bool LabelMatrix::column_unknown(Index sample) const {
  for (Index t = 0; t < m_; ++t) {
    if (known(t, sample)) return false;
  }
  return true;
}

LabelMatrix LabelMatrix::columns(std::span<const Index> samples) const {
  LabelMatrix out(m_, static_cast<Index>(samples.size()));
  for (std::size_t c = 0; c < samples.size(); ++c) {
    for (Index t = 0; t < m_; ++t) out.set(t, static_cast<Index>(c), at(t, samples[c]));
  }
  return out;
}

LabelMatrix LabelMatrix::hide_columns(std::span<const Index> samples) const {
  LabelMatrix out = *this;
  for (Index j : samples) {
    for (Index t = 0; t < m_; ++t) out.set(t, j, Label::kUnknown);
  }
  return out;
}

Matrix LabelMatrix::to_dense() const {
  Matrix out(m_, n_);
  for (Index j = 0; j < n_; ++j) {
    for (Index t = 0; t < m_; ++t) {
      out(t, j) = known(t, j) ? value(t, j) : std::nan("");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// FeatureMatrix

FeatureMatrix::FeatureMatrix(Matrix values) : values_(std::move(values)) {}

FeatureMatrix::FeatureMatrix(Matrix values,
                             Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing)
    : values_(std::move(values)), missing_(std::move(missing)) {
  if (missing_.rows() != values_.rows() || missing_.cols() != values_.cols()) {
    throw DimensionError("missing-flag shape does not match feature shape");
  }
  has_missing_ = missing_.any();
  if (!has_missing_) missing_.resize(0, 0);
}

FeatureMatrix FeatureMatrix::FromDense(const Matrix& values) {
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing = values.array().isNaN();
  return FeatureMatrix(values, std::move(missing));
}

bool FeatureMatrix::column_complete(Index col) const {
  return !has_missing_ || !missing_.col(col).any();
}

std::size_t FeatureMatrix::missing_count() const {
  return has_missing_ ? static_cast<std::size_t>(missing_.count()) : 0;
}

double FeatureMatrix::value(Index row, Index col) const {
  if (missing(row, col)) {
    throw DataError("read of missing feature (" + std::to_string(row) + ", " +
                    std::to_string(col) + ")");
  }
  return values_(row, col);
}

Matrix FeatureMatrix::filled(double fill) const {
  if (!has_missing_) return values_;
  return missing_.select(Matrix::Constant(values_.rows(), values_.cols(), fill), values_);
}

FeatureMatrix FeatureMatrix::columns(std::span<const Index> samples) const {
  Matrix v(values_.rows(), static_cast<Index>(samples.size()));
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> miss(values_.rows(), v.cols());
  miss.setConstant(false);
  for (std::size_t c = 0; c < samples.size(); ++c) {
    const auto cc = static_cast<Index>(c);
    v.col(cc) = values_.col(samples[c]);
    if (has_missing_) miss.col(cc) = missing_.col(samples[c]);
  }
  return FeatureMatrix(std::move(v), std::move(miss));
}

// ---------------------------------------------------------------------------
// ObservedMask

ObservedMask::ObservedMask(std::vector<Entry> entries, Index rows, Index cols)
    : entries_(std::move(entries)) {
  for (const Entry& e : entries_) {
    if (e.row < 0 || e.row >= rows || e.col < 0 || e.col >= cols) {
      throw DimensionError("mask entry (" + std::to_string(e.row) + ", " + std::to_string(e.col) +
                           ") out of bounds");
    }
  }
  std::sort(entries_.begin(), entries_.end(), [](const Entry& a, const Entry& b) {
    return a.col != b.col ? a.col < b.col : a.row < b.row;
  });
  if (std::adjacent_find(entries_.begin(), entries_.end()) != entries_.end()) {
    throw DimensionError("duplicate mask entry");
  }
}

bool ObservedMask::contains(Index row, Index col) const {
  return std::binary_search(entries_.begin(), entries_.end(), Entry{row, col},
                            [](const Entry& a, const Entry& b) {
                              return a.col != b.col ? a.col < b.col : a.row < b.row;
                            });
}

// ---------------------------------------------------------------------------
// Stacking

StackedProblem build_stacked(const FeatureMatrix& features, const LabelMatrix& labels) {
  const Index n = features.samples();
  if (n == 0 || labels.samples() != n) {
    throw DimensionError("features have " + std::to_string(n) + " samples, labels have " +
                         std::to_string(labels.samples()));
  }
  const Index m = labels.labels();
  const Index d = features.dim();

  StackedProblem out;
  out.z0.m = m;
  out.z0.d = d;
  out.z0.z = Matrix::Zero(m + d + 1, n);
  out.z0.z.row(m + d).setOnes();

  std::vector<Entry> ey;
  std::vector<Entry> ex;
  ey.reserve(labels.known_count());
  ex.reserve(static_cast<std::size_t>(d * n) - features.missing_count());
  for (Index j = 0; j < n; ++j) {
    for (Index t = 0; t < m; ++t) {
      if (labels.known(t, j)) {
        out.z0.z(t, j) = labels.value(t, j);
        ey.push_back({t, j});
      }
    }
    for (Index i = 0; i < d; ++i) {
      if (!features.missing(i, j)) {
        out.z0.z(m + i, j) = features.value(i, j);
        ex.push_back({m + i, j});
      }
    }
  }
  out.omega_y = ObservedMask(std::move(ey), m + d + 1, n);
  out.omega_x = ObservedMask(std::move(ex), m + d + 1, n);
  return out;
}

std::pair<FeatureMatrix, LabelMatrix> split_stacked(const StackedProblem& problem) {
  const auto& s = problem.z0;
  const Index n = s.samples();
  LabelMatrix labels(s.m, n);
  for (const Entry& e : problem.omega_y.entries()) {
    labels.set(e.row, e.col, s.z(e.row, e.col) > 0 ? Label::kPositive : Label::kNegative);
  }
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing(s.d, n);
  missing.setConstant(true);
  for (const Entry& e : problem.omega_x.entries()) missing(e.row - s.m, e.col) = false;
  return {FeatureMatrix(s.features_block(), std::move(missing)), std::move(labels)};
}

// ---------------------------------------------------------------------------
// SimplexWeights

SimplexWeights::SimplexWeights(Vector theta) : theta_(std::move(theta)) {
  if (!on_simplex(theta_)) throw SolverError("weights are not on the probability simplex");
}

bool SimplexWeights::on_simplex(const Vector& theta) {
  if (theta.size() == 0 || !theta.allFinite()) return false;
  if (theta.minCoeff() < -kNonnegTol) return false;
  return std::abs(theta.sum() - 1.0) <= kSumTol;
}

SimplexWeights SimplexWeights::Uniform(Index views) {
  if (views < 1) throw DimensionError("simplex needs at least one view");
  return SimplexWeights(Vector::Constant(views, 1.0 / static_cast<double>(views)));
}

SimplexWeights SimplexWeights::OneHot(Index views, Index hot) {
  if (hot < 0 || hot >= views) throw DimensionError("one-hot index out of range");
  Vector t = Vector::Zero(views);
  t(hot) = 1.0;
  return SimplexWeights(std::move(t));
}

SimplexWeights SimplexWeights::Normalize(const Vector& raw, double floor) {
  Vector t = raw;
  for (Index v = 0; v < t.size(); ++v) {
    if (t(v) < floor || t(v) < 0.0) t(v) = 0.0;
  }
  const double s = t.sum();
  if (!(s > 0.0) || !std::isfinite(s)) return Uniform(raw.size());
  t /= s;
  return SimplexWeights(std::move(t));
}

// ---------------------------------------------------------------------------
// PredictionTensor

Matrix PredictionTensor::unflatten(Index view) const {
  Matrix out(index_map.labels(), index_map.labeled());
  for (Index k = 0; k < p.cols(); ++k) {
    const auto [t, j] = index_map.from_flat(k);
    out(t, j) = p(view, k);
  }
  return out;
}

PredictionTensor vectorize_labeled(std::span<const Matrix> view_predictions,
                                   const LabelMatrix& labeled_truth) {
  if (view_predictions.empty()) throw DimensionError("no view predictions");
  const Index m = labeled_truth.labels();
  const Index nl = labeled_truth.samples();
  for (std::size_t v = 0; v < view_predictions.size(); ++v) {
    const Matrix& y = view_predictions[v];
    if (y.rows() != m || y.cols() != nl) {
      throw DimensionError("view " + std::to_string(v) + " predictions are " +
                           std::to_string(y.rows()) + "x" + std::to_string(y.cols()) +
                           ", expected " + std::to_string(m) + "x" + std::to_string(nl));
    }
  }
  PredictionTensor out;
  out.index_map = IndexMap(m, nl);
  const Index n_entries = out.index_map.size();
  out.p.resize(static_cast<Index>(view_predictions.size()), n_entries);
  out.y0.resize(n_entries);
  for (Index t = 0; t < m; ++t) {
    for (Index j = 0; j < nl; ++j) {
      const Index k = out.index_map.to_flat(t, j);
      out.y0(k) = static_cast<int>(labeled_truth.value(t, j));
      for (std::size_t v = 0; v < view_predictions.size(); ++v) {
        out.p(static_cast<Index>(v), k) = view_predictions[v](t, j);
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset

const char* to_string(SampleRole role) {
  switch (role) {
    case SampleRole::kLabeled: return "labeled";
    case SampleRole::kUnlabeled: return "unlabeled";
    case SampleRole::kTest: return "test";
  }
  return "?";
}

std::optional<SampleRole> parse_role(std::string_view text) {
  if (text == "labeled") return SampleRole::kLabeled;
  if (text == "unlabeled") return SampleRole::kUnlabeled;
  if (text == "test") return SampleRole::kTest;
  return std::nullopt;
}

MultiViewDataset::MultiViewDataset(std::vector<FeatureMatrix> views, LabelMatrix labels,
                                   std::vector<SampleRole> roles, std::uint64_t seed)
    : views_(std::move(views)), labels_(std::move(labels)), roles_(std::move(roles)), seed_(seed) {
  const Index n = labels_.samples();
  if (views_.empty()) throw DimensionError("dataset has no views");
  for (std::size_t v = 0; v < views_.size(); ++v) {
    if (views_[v].samples() != n) {
      throw DimensionError("view " + std::to_string(v) + " has " +
                           std::to_string(views_[v].samples()) + " samples, labels have " +
                           std::to_string(n));
    }
  }
  if (static_cast<Index>(roles_.size()) != n) {
    throw DimensionError("partition covers " + std::to_string(roles_.size()) +
                         " samples, expected " + std::to_string(n));
  }
  for (Index j = 0; j < n; ++j) {
    const bool is_labeled = roles_[static_cast<std::size_t>(j)] == SampleRole::kLabeled;
    if (is_labeled && !labels_.column_known(j)) {
      throw DataError("labeled sample " + std::to_string(j) + " has unknown label entries");
    }
    if (!is_labeled && !labels_.column_unknown(j)) {
      throw DataError("non-labeled sample " + std::to_string(j) + " exposes label entries");
    }
  }
}

std::vector<Index> MultiViewDataset::indices(SampleRole role) const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < roles_.size(); ++j) {
    if (roles_[j] == role) out.push_back(static_cast<Index>(j));
  }
  return out;
}

std::vector<Index> MultiViewDataset::unlabeled_and_test() const {
  std::vector<Index> out;
  for (std::size_t j = 0; j < roles_.size(); ++j) {
    if (roles_[j] != SampleRole::kLabeled) out.push_back(static_cast<Index>(j));
  }
  return out;
}

MultiViewDataset MultiViewDataset::with_views(std::vector<FeatureMatrix> views) const {
  return MultiViewDataset(std::move(views), labels_, roles_, seed_);
}

MultiViewDataset mask_to_partition(std::vector<FeatureMatrix> views, const LabelMatrix& truth,
                                   std::vector<SampleRole> roles, std::uint64_t seed) {
  if (static_cast<Index>(roles.size()) != truth.samples()) {
    throw DimensionError("partition size does not match label columns");
  }
  std::vector<Index> hidden;
  for (std::size_t j = 0; j < roles.size(); ++j) {
    if (roles[j] != SampleRole::kLabeled) hidden.push_back(static_cast<Index>(j));
  }
  return MultiViewDataset(std::move(views), truth.hide_columns(hidden), std::move(roles), seed);
}

}  // namespace mvmc
