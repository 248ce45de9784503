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

#include "mvmc/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>

#include "mvmc/error.hpp"
#include "parallel.hpp"

namespace mvmc {

namespace {

using detail::parallel_for;

std::string stage_error(const char* stage, const std::exception& e) {
  return std::string(stage) + ": " + e.what();
}

template <typename F>
auto with_stage(const char* stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const SolverError& e) {
    throw SolverError(stage_error(stage, e));
  } catch (const DataError& e) {
    throw DataError(stage_error(stage, e));
  } catch (const DimensionError& e) {
    throw DimensionError(stage_error(stage, e));
  }
}

}  // namespace

const char* to_string(Method method) {
  switch (method) {
    case Method::kLs: return "ls";
    case Method::kAp: return "ap";
    case Method::kBmc: return "bmc";
    case Method::kCmc: return "cmc";
    case Method::kAmc: return "amc";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view text) {
  for (Method m : {Method::kLs, Method::kAp, Method::kBmc, Method::kCmc, Method::kAmc}) {
    if (text == to_string(m)) return m;
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Building blocks

PreparedViews prepare_views(const MultiViewDataset& dataset, const PipelineConfig& config) {
  PreparedViews out{dataset, {}};
  if (!config.use_kpca) return out;
  return with_stage("kpca", [&] {
    std::vector<FeatureMatrix> reduced;
    for (Index v = 0; v < dataset.num_views(); ++v) {
      const FeatureMatrix& f = dataset.view(v);
      std::vector<Index> complete;
      for (Index j = 0; j < f.samples(); ++j) {
        if (f.column_complete(j)) complete.push_back(j);
      }
      if (complete.size() < 2) throw DataError("view " + std::to_string(v) + " has fewer than 2 complete samples");
      const FeatureMatrix fit_cols = f.columns(complete);
      const Index dim = std::min<Index>(config.kpca_dim, static_cast<Index>(complete.size()));
      KpcaModel model = kpca_fit(fit_cols, config.kernel, dim);

      // Mean of observed entries per feature, for columns with missing values.
      const Vector means = fit_cols.filled().rowwise().mean();
      Matrix filled = f.filled();
      if (f.has_missing()) {
        for (Index j = 0; j < f.samples(); ++j) {
          for (Index i = 0; i < f.dim(); ++i) {
            if (f.missing(i, j)) filled(i, j) = means(i);
          }
        }
      }
      reduced.push_back(kpca_transform(model, FeatureMatrix(std::move(filled))));
      out.kpca.push_back(std::move(model));
    }
    out.reduced = dataset.with_views(std::move(reduced));
    return out;
  });
}

FeatureMatrix concatenate_views(const MultiViewDataset& dataset) {
  Index rows = 0;
  for (const auto& v : dataset.views()) rows += v.dim();
  const Index n = dataset.samples();
  Matrix values(rows, n);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> missing(rows, n);
  missing.setConstant(false);
  Index r = 0;
  for (const auto& v : dataset.views()) {
    const Matrix filled = v.filled();
    const std::size_t observed = static_cast<std::size_t>(v.dim() * n) - v.missing_count();
    const double rms = observed > 0 ? std::sqrt(filled.squaredNorm() / static_cast<double>(observed)) : 0.0;
    values.middleRows(r, v.dim()) = rms > 0.0 ? Matrix(filled / rms) : filled;
    for (Index j = 0; j < n; ++j) {
      for (Index i = 0; i < v.dim(); ++i) missing(r + i, j) = v.missing(i, j);
    }
    r += v.dim();
  }
  return FeatureMatrix(std::move(values), std::move(missing));
}

Matrix complete_view(const FeatureMatrix& features, const LabelMatrix& labels, const McParams& params) {
  const McSolution sol = fpc_solve(build_stacked(features, labels), params);
  return sigmoid_scores(sol.soft_labels);
}

Matrix fuse(const SimplexWeights& theta, std::span<const Matrix> view_probabilities) {
  if (static_cast<Index>(view_probabilities.size()) != theta.size()) {
    throw DimensionError("fuse: weight count does not match view count");
  }
  Matrix out = Matrix::Zero(view_probabilities.front().rows(), view_probabilities.front().cols());
  for (std::size_t v = 0; v < view_probabilities.size(); ++v) {
    const double w = theta[static_cast<Index>(v)];
    if (w != 0.0) out += w * view_probabilities[v];
  }
  return out;
}

ViewStage run_view_stage(const MultiViewDataset& reduced, const McParams& mc, std::uint64_t seed,
                         int workers) {
  ViewStage stage;
  stage.mc = mc;
  stage.split = with_stage("cv split", [&] { return make_split(reduced, seed); });
  const Index V = reduced.num_views();
  stage.cv_predictions.resize(static_cast<std::size_t>(V));
  stage.full_probabilities.resize(static_cast<std::size_t>(V));
  with_stage("view completion", [&] {
    parallel_for(V, workers, [&](Index v) {
      stage.cv_predictions[static_cast<std::size_t>(v)] =
          generate_view_predictions(v, reduced, stage.split, mc);
      try {
        stage.full_probabilities[static_cast<std::size_t>(v)] =
            complete_view(reduced.view(v), reduced.labels(), mc);
      } catch (const SolverError& e) {
        throw SolverError("view " + std::to_string(v) + ", full completion: " + e.what());
      }
    });
    return 0;
  });
  stage.tensor = assemble_tensor(reduced, stage.cv_predictions);
  return stage;
}

double mean_ap(const Matrix& scores, const LabelMatrix& truth, std::span<const Index> samples) {
  std::vector<std::optional<double>> per_label;
  std::vector<double> s(samples.size());
  std::vector<int> y(samples.size());
  for (Index t = 0; t < truth.labels(); ++t) {
    bool any_pos = false;
    for (std::size_t c = 0; c < samples.size(); ++c) {
      s[c] = scores(t, samples[c]);
      y[c] = static_cast<int>(truth.value(t, samples[c]));
      any_pos = any_pos || y[c] > 0;
    }
    per_label.push_back(any_pos ? std::optional(average_precision(s, y)) : std::nullopt);
  }
  return mean_over_labels(per_label).mean;
}

std::optional<SimplexWeights> fit_weights(Method method, const ViewStage& stage,
                                          const MultiViewDataset& reduced, double eta,
                                          const PipelineConfig& config,
                                          const ValidationSet* validation) {
  const Index V = reduced.num_views();
  switch (method) {
    case Method::kCmc:
      return std::nullopt;
    case Method::kAmc:
      return SimplexWeights::Uniform(V);
    case Method::kLs:
      return with_stage("ls fusion", [&] { return solve_ls(stage.tensor, eta, config.ls).theta; });
    case Method::kAp:
      return with_stage("ap fusion", [&] { return solve_ap(stage.tensor, eta, config.ap).theta; });
    case Method::kBmc: {
      Index best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (Index v = 0; v < V; ++v) {
        double score;
        if (validation) {
          score = mean_ap(stage.full_probabilities[static_cast<std::size_t>(v)], validation->truth,
                          validation->samples);
        } else {
          const Matrix cv = stage.tensor.unflatten(v);
          const std::vector<Index> labeled = reduced.indices(SampleRole::kLabeled);
          const LabelMatrix truth = reduced.labels().columns(labeled);
          std::vector<Index> cols(labeled.size());
          for (std::size_t c = 0; c < cols.size(); ++c) cols[c] = static_cast<Index>(c);
          score = mean_ap(cv, truth, cols);
        }
        if (score > best_score) {
          best_score = score;
          best = v;
        }
      }
      return SimplexWeights::OneHot(V, best);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Train / predict

MvmcModel train(const MultiViewDataset& dataset, const PipelineConfig& config,
                const ValidationSet* validation) {
  config.mc.validate();
  MvmcModel model;
  model.method = config.method;
  model.mc = config.mc;
  model.seed = config.seed;
  model.config = config;

  PreparedViews prep = prepare_views(dataset, config);
  model.kpca = std::move(prep.kpca);
  const Index V = dataset.num_views();

  switch (config.method) {
    case Method::kCmc:
      break;
    case Method::kAmc:
      model.theta = SimplexWeights::Uniform(V);
      break;
    case Method::kBmc:
    case Method::kLs:
    case Method::kAp: {
      const ViewStage stage = run_view_stage(prep.reduced, config.mc, config.seed, config.workers);
      model.theta = fit_weights(config.method, stage, prep.reduced, config.eta, config, validation);
      model.tensor = stage.tensor;
      break;
    }
  }
  return model;
}

Matrix predict(const MvmcModel& model, const MultiViewDataset& dataset) {
  PipelineConfig config = model.config;
  PreparedViews prep = prepare_views(dataset, config);
  const MultiViewDataset& reduced = prep.reduced;
  if (model.method == Method::kCmc) {
    return with_stage("cmc completion", [&] {
      return complete_view(concatenate_views(reduced), reduced.labels(), model.mc);
    });
  }
  const SimplexWeights& theta = model.theta.value();
  const Index V = reduced.num_views();
  std::vector<Matrix> probs(static_cast<std::size_t>(V));
  with_stage("view completion", [&] {
    parallel_for(V, config.workers, [&](Index v) {
      if (theta[v] == 0.0) {
        probs[static_cast<std::size_t>(v)] = Matrix::Zero(reduced.labels_count(), reduced.samples());
        return;
      }
      probs[static_cast<std::size_t>(v)] = complete_view(reduced.view(v), reduced.labels(), model.mc);
    });
    return 0;
  });
  return fuse(theta, probs);
}

MetricSet evaluate(const Matrix& predictions, const LabelMatrix& truth, std::span<const Index> samples,
                   double threshold) {
  return evaluate_columns(predictions, truth, samples, threshold);
}

Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

void aggregate(MethodReport& report) {
  std::vector<double> map;
  std::vector<double> mauc;
  std::vector<double> hl;
  for (const SeedResult& r : report.seeds) {
    map.push_back(r.test.map);
    mauc.push_back(r.test.mauc);
    hl.push_back(r.test.hamming);
  }
  report.map = summarize(map);
  report.mauc = summarize(mauc);
  report.hamming = summarize(hl);
}

// ---------------------------------------------------------------------------
// Model selection

GridPoint select_best(const HyperGrid& grid, const std::function<double(const GridPoint&)>& score) {
  if (grid.lambda.empty() || grid.gamma.empty() || grid.eta.empty()) {
    throw ConfigError("hyperparameter grid is empty");
  }
  auto sorted = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  };
  const auto lambdas = sorted(grid.lambda);
  const auto gammas = sorted(grid.gamma);
  const auto etas = sorted(grid.eta);
  // Visiting in (lambda, eta, gamma) order and keeping only strict
  // improvements implements the tie rule.
  GridPoint best{};
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double l : lambdas) {
    for (double e : etas) {
      for (double g : gammas) {
        const GridPoint p{l, g, e};
        const double s = score(p);
        if (first || s > best_score) {
          best = p;
          best_score = s;
          first = false;
        }
      }
    }
  }
  return best;
}

StageCache::StageCache(const MultiViewDataset& reduced, const PipelineConfig& base)
    : reduced_(reduced), base_(base) {}

McParams StageCache::mc_for(double lambda, double gamma) const {
  McParams mc = base_.mc;
  mc.lambda = lambda;
  mc.gamma = gamma;
  return mc;
}

const ViewStage& StageCache::views(double lambda, double gamma) {
  const auto key = std::make_pair(lambda, gamma);
  auto it = stages_.find(key);
  if (it == stages_.end()) {
    it = stages_.emplace(key, run_view_stage(reduced_, mc_for(lambda, gamma), base_.seed, base_.workers)).first;
  }
  return it->second;
}

const Matrix& StageCache::concatenated(double lambda, double gamma) {
  const auto key = std::make_pair(lambda, gamma);
  auto it = concatenated_.find(key);
  if (it == concatenated_.end()) {
    Matrix probs = with_stage("cmc completion", [&] {
      return complete_view(concatenate_views(reduced_), reduced_.labels(), mc_for(lambda, gamma));
    });
    it = concatenated_.emplace(key, std::move(probs)).first;
  }
  return it->second;
}

Matrix method_scores(Method method, StageCache& cache, const GridPoint& point, const PipelineConfig& base,
                     const ValidationSet* validation, std::optional<SimplexWeights>* theta) {
  if (method == Method::kCmc) {
    if (theta) theta->reset();
    return cache.concatenated(point.lambda, point.gamma);
  }
  const ViewStage& stage = cache.views(point.lambda, point.gamma);
  auto weights = fit_weights(method, stage, cache.reduced(), point.eta, base, validation);
  Matrix fused = fuse(*weights, stage.full_probabilities);
  if (theta) *theta = std::move(weights);
  return fused;
}

PipelineConfig hyperparam_search(const MultiViewDataset& dataset, const HyperGrid& grid,
                                 const PipelineConfig& base, const ValidationSet& validation) {
  if (validation.samples.empty()) throw ConfigError("hyperparam_search: empty validation set");
  const PreparedViews prep = prepare_views(dataset, base);
  StageCache cache(prep.reduced, base);
  const GridPoint best = select_best(grid, [&](const GridPoint& p) {
    return mean_ap(method_scores(base.method, cache, p, base, &validation), validation.truth, validation.samples);
  });

  PipelineConfig out = base;
  out.mc.lambda = best.lambda;
  out.mc.gamma = best.gamma;
  out.eta = best.eta;
  return out;
}

}  // namespace mvmc
