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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mvmc/cv_generation.hpp"
#include "mvmc/fusion_ap.hpp"
#include "mvmc/fusion_ls.hpp"
#include "mvmc/mc_solver.hpp"
#include "mvmc/metrics.hpp"
#include "mvmc/preprocess.hpp"
#include "mvmc/types.hpp"

namespace mvmc {

enum class Method { kLs, kAp, kBmc, kCmc, kAmc };

const char* to_string(Method method);
std::optional<Method> parse_method(std::string_view text);

struct PipelineConfig {
  Method method = Method::kAp;
  bool use_kpca = true;
  KernelSpec kernel = KernelSpec::Rbf();
  Index kpca_dim = 50;
  McParams mc;
  double eta = 1.0;
  LsOptions ls;
  ApOptions ap;
  std::uint64_t seed = 0;
  double threshold = 0.5;  // hard labels from fused probabilities
  int workers = 1;         // concurrent per-view completions
};

/// Held-out ground truth used only for model selection. `truth` spans all n
/// samples but is read only on `samples`.
struct ValidationSet {
  std::vector<Index> samples;
  LabelMatrix truth;
};

// ---------------------------------------------------------------------------
// Building blocks

/// KPCA-reduced copy of the dataset (or the dataset unchanged when KPCA is
/// disabled), plus the fitted models.
struct PreparedViews {
  MultiViewDataset reduced;
  std::vector<KpcaModel> kpca;
};

/// Fits KPCA per view on every sample without missing features; samples with
/// missing entries are transformed after filling them with the feature mean.
PreparedViews prepare_views(const MultiViewDataset& dataset, const PipelineConfig& config);

/// Concatenation of per-view features, each view scaled to unit RMS entry so
/// no view dominates by scale. Missing flags are carried over.
FeatureMatrix concatenate_views(const MultiViewDataset& dataset);

/// Per-view completion of the full stacked matrix with all labeled entries
/// observed; returns the sigmoid of the soft labels (m x n).
Matrix complete_view(const FeatureMatrix& features, const LabelMatrix& labels, const McParams& params);

/// Convex combination of per-view probability matrices.
Matrix fuse(const SimplexWeights& theta, std::span<const Matrix> view_probabilities);

/// Everything the fusion methods need from one set of MC parameters.
struct ViewStage {
  McParams mc;
  FoldSplit split;
  std::vector<Matrix> cv_predictions;  // raw soft labels, m x n_l per view
  PredictionTensor tensor;              // sigmoid scores, vectorized
  std::vector<Matrix> full_probabilities;  // per view, m x n
};

ViewStage run_view_stage(const MultiViewDataset& reduced, const McParams& mc, std::uint64_t seed,
                         int workers = 1);

/// Mean AP over labels of a score matrix restricted to `samples`.
double mean_ap(const Matrix& scores, const LabelMatrix& truth, std::span<const Index> samples);

/// Selects the weights a method assigns given a completed stage.
/// BMC ranks views by validation mAP when a validation set is given and by
/// cross-validated mAP on the labeled set otherwise. Returns nullopt for CMC.
std::optional<SimplexWeights> fit_weights(Method method, const ViewStage& stage,
                                          const MultiViewDataset& reduced, double eta,
                                          const PipelineConfig& config,
                                          const ValidationSet* validation);

// ---------------------------------------------------------------------------
// Train / predict / evaluate

struct MvmcModel {
  Method method = Method::kAp;
  std::vector<KpcaModel> kpca;
  McParams mc;
  std::optional<SimplexWeights> theta;  // absent for CMC
  std::uint64_t seed = 0;
  PipelineConfig config;
  std::optional<PredictionTensor> tensor;  // cross-validated predictions, when computed
};

MvmcModel train(const MultiViewDataset& dataset, const PipelineConfig& config,
                const ValidationSet* validation = nullptr);

/// m x n fused probability scores; the unlabeled and test columns are the
/// predictions, labeled columns hold the fitted values.
Matrix predict(const MvmcModel& model, const MultiViewDataset& dataset);

/// Per-label AP / AUC means and hamming loss over `samples`.
MetricSet evaluate(const Matrix& predictions, const LabelMatrix& truth, std::span<const Index> samples,
                   double threshold);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation; 0 for a single seed
};

Summary summarize(std::span<const double> values);

/// Per-seed record of one method.
struct SeedResult {
  std::uint64_t seed = 0;
  MetricSet test;
  std::optional<MetricSet> validation;
  std::optional<Vector> theta;
  double lambda = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
  std::vector<Index> test_samples;        // columns behind `test`
  std::vector<Index> validation_samples;  // columns behind `validation`
  std::string predictions_file;
};

struct MethodReport {
  Method method = Method::kAp;
  std::vector<SeedResult> seeds;
  Summary map;
  Summary mauc;
  Summary hamming;
};

struct RunReport {
  std::vector<MethodReport> methods;
  double seconds = 0.0;  // wall time, kept out of the deterministic report file
};

/// Fills the summaries of a method report from its per-seed results.
void aggregate(MethodReport& report);

// ---------------------------------------------------------------------------
// Model selection

struct HyperGrid {
  std::vector<double> lambda{1.0};
  std::vector<double> gamma{1.0};
  std::vector<double> eta{1.0};
};

struct GridPoint {
  double lambda = 0.0;
  double gamma = 0.0;
  double eta = 0.0;
};

/// Lazily computed completions of one prepared dataset, keyed by (lambda,
/// gamma). Not thread-safe; use one cache per worker.
class StageCache {
 public:
  StageCache(const MultiViewDataset& reduced, const PipelineConfig& base);

  const ViewStage& views(double lambda, double gamma);
  /// Probabilities of the concatenated single view (CMC).
  const Matrix& concatenated(double lambda, double gamma);
  const MultiViewDataset& reduced() const { return reduced_; }

 private:
  McParams mc_for(double lambda, double gamma) const;

  const MultiViewDataset& reduced_;
  PipelineConfig base_;
  std::map<std::pair<double, double>, ViewStage> stages_;
  std::map<std::pair<double, double>, Matrix> concatenated_;
};

/// Fused m x n probabilities of `method` at one grid point. `theta` receives
/// the weights (left empty for CMC).
Matrix method_scores(Method method, StageCache& cache, const GridPoint& point, const PipelineConfig& base,
                     const ValidationSet* validation, std::optional<SimplexWeights>* theta = nullptr);

/// Exhaustive argmax of `score`; ties go to the smaller lambda, then the
/// smaller eta, then the smaller gamma.
GridPoint select_best(const HyperGrid& grid, const std::function<double(const GridPoint&)>& score);

/// Grid search on validation mAP. Returns `base` with the chosen lambda, gamma
/// and eta filled in.
PipelineConfig hyperparam_search(const MultiViewDataset& dataset, const HyperGrid& grid,
                                 const PipelineConfig& base, const ValidationSet& validation);

}  // namespace mvmc
