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
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvmc/error.hpp"
#include "mvmc/experiment.hpp"
#include "mvmc/io.hpp"
#include "mvmc/mc_solver.hpp"
#include "mvmc/metrics.hpp"
#include "mvmc/synthetic.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSolver = 4;

int run_synth(const mvmc::SyntheticSpec& spec, const std::string& out) {
  const mvmc::SyntheticData data = mvmc::generate_synthetic(spec);
  mvmc::io::write_dataset(out, data.files());
  std::cout << "wrote " << spec.views << " views, " << spec.samples << " samples, " << spec.labels << " labels to "
            << out << "\n";
  return 0;
}

int run_run(const std::string& config_path, const std::string& output, int workers) {
  mvmc::ExperimentConfig config = mvmc::load_config(config_path);
  mvmc::apply_env_overrides(config);
  if (!output.empty()) config.output = output;
  if (workers > 0) config.workers = workers;
  mvmc::run_experiment(config, &std::cout);
  std::cout << "report written to " << config.output.string() << "\n";
  return 0;
}

int run_eval(const std::string& predictions, const std::string& truth_path, const std::string& partition,
             double threshold) {
  const mvmc::Matrix scores = mvmc::io::read_matrix(predictions);
  const mvmc::LabelMatrix truth = mvmc::LabelMatrix::FromDense(mvmc::io::read_matrix(truth_path));
  if (scores.rows() != truth.labels() || scores.cols() != truth.samples()) {
    throw mvmc::DimensionError("predictions are " + std::to_string(scores.rows()) + "x" +
                               std::to_string(scores.cols()) + ", truth is " + std::to_string(truth.labels()) + "x" +
                               std::to_string(truth.samples()));
  }
  std::vector<mvmc::Index> columns;
  if (partition.empty()) {
    for (mvmc::Index j = 0; j < truth.samples(); ++j) columns.push_back(j);
  } else {
    const auto roles = mvmc::io::read_partition(partition);
    for (std::size_t j = 0; j < roles.size(); ++j) {
      if (roles[j] == mvmc::SampleRole::kTest) columns.push_back(static_cast<mvmc::Index>(j));
    }
  }
  std::cout << mvmc::metrics_to_json(mvmc::evaluate_columns(scores, truth, columns, threshold)) << "\n";
  return 0;
}

int run_complete(const std::string& input, mvmc::Index labels, const mvmc::McParams& params,
                 const std::string& output) {
  const mvmc::Matrix stacked = mvmc::io::read_matrix(input);
  if (labels < 0 || labels > stacked.rows()) {
    throw mvmc::ConfigError("--labels must lie in [0, " + std::to_string(stacked.rows()) + "]");
  }
  const mvmc::LabelMatrix y = mvmc::LabelMatrix::FromDense(stacked.topRows(labels));
  const mvmc::FeatureMatrix x = mvmc::FeatureMatrix::FromDense(stacked.bottomRows(stacked.rows() - labels));
  const mvmc::McSolution sol = mvmc::fpc_solve(mvmc::build_stacked(x, y), params);
  const mvmc::Matrix completed = sol.z.z.topRows(sol.z.ones_row());
  if (output.empty()) {
    std::cout << mvmc::io::format_matrix(completed);
  } else {
    mvmc::io::write_matrix(output, completed);
  }
  std::cerr << "fpc: " << sol.stages << " stages, " << sol.iterations << " iterations, objective "
            << sol.final_objective << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-view matrix completion toolkit"};
  app.require_subcommand(1);

  mvmc::SyntheticSpec spec;
  std::string spec_file;
  std::string synth_out;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic multi-view dataset directory");
  synth->add_option("--out", synth_out, "Output dataset directory")->required();
  synth->add_option("--spec", spec_file, "JSON file with the generator settings (the 'synthetic' section of a run config)");
  synth->add_option("--views", spec.views, "Number of views");
  synth->add_option("--samples", spec.samples, "Number of samples");
  synth->add_option("--labels", spec.labels, "Number of labels");
  synth->add_option("--rank", spec.rank, "Latent rank");
  synth->add_option("--noise", spec.noise_sigma, "Additive noise standard deviation");
  synth->add_option("--informativeness", spec.informativeness, "Per-view informativeness in [0, 1]");
  synth->add_option("--missing-rate", spec.missing_feature_rate, "Fraction of feature entries dropped");
  synth->add_option("--seed", spec.seed, "Random seed");
  synth->add_option("--view-dim", spec.view_dim, "Features per view");
  synth->add_option("--positive-rate", spec.positive_rate, "Approximate positive rate per label");
  synth->add_option("--test-fraction", spec.test_fraction, "Fraction of samples marked test");
  synth->add_option("--labeled-per-class", spec.labeled_per_class, "Labeled positives drawn per label");

  std::string config_path;
  std::string run_output;
  int run_workers = 0;
  auto* run = app.add_subcommand("run", "Run an experiment described by a JSON config");
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--output", run_output, "Output directory (overrides config and MVMC_OUTPUT)");
  run->add_option("--workers", run_workers, "Concurrent seeds (overrides config and MVMC_WORKERS)");

  std::string predictions;
  std::string truth;
  std::string partition;
  double threshold = 0.5;
  auto* eval = app.add_subcommand("eval", "Score a prediction matrix against ground truth");
  eval->add_option("--predictions", predictions, "m x n score matrix")->required();
  eval->add_option("--truth", truth, "m x n label matrix")->required();
  eval->add_option("--partition", partition, "Partition file; only test samples are scored");
  eval->add_option("--threshold", threshold, "Hard-label threshold");

  std::string input;
  std::string complete_out;
  mvmc::Index labels = 0;
  mvmc::McParams params;
  auto* complete = app.add_subcommand("complete", "Complete one stacked [labels; features] matrix");
  complete->add_option("input", input, "Matrix file; the first --labels rows hold +1/-1/nan")->required();
  complete->add_option("--labels", labels, "Number of label rows")->required();
  complete->add_option("--lambda", params.lambda, "Label-loss weight");
  complete->add_option("--gamma", params.gamma, "Log-loss sharpness");
  complete->add_option("--output", complete_out, "Output file (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*synth) {
      if (!spec_file.empty()) {
        mvmc::ExperimentConfig c = mvmc::parse_config(
            "{\"synthetic\": " + mvmc::io::read_text(spec_file) + ", \"grid\": {\"lambda\": [1], \"gamma\": [1], \"eta\": [1]}}");
        spec = *c.synthetic;
      }
      return run_synth(spec, synth_out);
    }
    if (*run) return run_run(config_path, run_output, run_workers);
    if (*eval) return run_eval(predictions, truth, partition, threshold);
    params.validate();
    return run_complete(input, labels, params, complete_out);
  } catch (const mvmc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const mvmc::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  } catch (const mvmc::Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
}
