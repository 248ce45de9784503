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
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "mvmc/io.hpp"
#include "mvmc/pipeline.hpp"
#include "mvmc/synthetic.hpp"

namespace mvmc {

/// Everything one `run` needs. Parsed from a JSON document whose keys mirror
/// the field names; see README for the layout.
struct ExperimentConfig {
  std::optional<std::filesystem::path> dataset;  // dataset directory
  std::optional<SyntheticSpec> synthetic;        // used when no dataset is given
  std::vector<Method> methods{Method::kAp, Method::kLs, Method::kBmc, Method::kCmc, Method::kAmc};
  /// When set, the labeled set is redrawn per seed from the non-test samples.
  std::optional<Index> labeled_per_class;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  HyperGrid grid{{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0},
                 {1.0, 3.0, 30.0},
                 {1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4, 1e5}};
  double validation_fraction = 0.2;  // share of test samples held out for selection
  PipelineConfig pipeline;           // KPCA, solver and threshold settings
  std::filesystem::path output{"mvmc-output"};
  int workers = 1;
  bool write_predictions = true;

  void validate() const;
};

/// Throws ConfigError on malformed input or unknown keys. Relative dataset
/// paths resolve against `base_dir`.
ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

/// MVMC_OUTPUT replaces the output directory, MVMC_WORKERS the worker count.
void apply_env_overrides(ExperimentConfig& config);

/// Settings that influence results, as JSON (output path and workers omitted).
std::string config_to_json(const ExperimentConfig& config);

/// Ground truth, per-seed partitions and validation split of an experiment.
struct SeedData {
  std::uint64_t seed = 0;
  MultiViewDataset dataset;
  LabelMatrix truth;
  std::vector<Index> test_samples;
  std::vector<Index> validation_samples;
};

io::DatasetFiles load_experiment_data(const ExperimentConfig& config);
SeedData make_seed_data(const io::DatasetFiles& data, const ExperimentConfig& config, std::uint64_t seed);

/// Trains, predicts and evaluates every (method, seed) pair and writes
/// report.json, report.txt, timing.json and predictions/ under the output
/// directory. Progress lines go to `log` when given.
RunReport run_experiment(const ExperimentConfig& config, std::ostream* log = nullptr);

std::string report_to_json(const RunReport& report, const ExperimentConfig& config);
std::string report_to_table(const RunReport& report);
/// Reads back the per-seed records of a report.json; summaries are
/// recomputed with aggregate().
RunReport parse_report(std::string_view json_text);
/// The summaries exactly as stored in a report.json, per method.
std::vector<MethodReport> stored_summaries(std::string_view json_text);

std::string metrics_to_json(const MetricSet& metrics);

}  // namespace mvmc
