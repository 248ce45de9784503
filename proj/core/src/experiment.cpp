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

#include "mvmc/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvmc/error.hpp"
#include "parallel.hpp"

namespace mvmc {

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

// Typed access to one JSON object; finish() rejects keys nobody asked for.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) throw ConfigError(where() + "must be an object");
  }

  bool has(const std::string& key) const { return node_.contains(key); }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_.contains(key)) return;
    try {
      out = node_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where() + "'" + key + "' has the wrong type");
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    return Section(node_.at(key), path_.empty() ? key : path_ + "." + key);
  }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  void finish() const {
    for (const auto& item : node_.items()) {
      if (!seen_.count(item.key())) throw ConfigError(where() + "unknown key '" + item.key() + "'");
    }
  }

 private:
  std::string where() const { return path_.empty() ? "config: " : "config." + path_ + ": "; }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

SyntheticSpec parse_synthetic(Section s) {
  SyntheticSpec spec;
  s.read("views", spec.views);
  s.read("samples", spec.samples);
  s.read("labels", spec.labels);
  s.read("rank", spec.rank);
  s.read("noise_sigma", spec.noise_sigma);
  s.read("informativeness", spec.informativeness);
  s.read("missing_feature_rate", spec.missing_feature_rate);
  s.read("seed", spec.seed);
  s.read("view_dim", spec.view_dim);
  s.read("positive_rate", spec.positive_rate);
  s.read("test_fraction", spec.test_fraction);
  s.read("labeled_per_class", spec.labeled_per_class);
  s.finish();
  return spec;
}

ojson synthetic_to_json(const SyntheticSpec& spec) {
  ojson j;
  j["views"] = spec.views;
  j["samples"] = spec.samples;
  j["labels"] = spec.labels;
  j["rank"] = spec.rank;
  j["noise_sigma"] = spec.noise_sigma;
  j["informativeness"] = spec.informativeness;
  j["missing_feature_rate"] = spec.missing_feature_rate;
  j["seed"] = spec.seed;
  j["view_dim"] = spec.view_dim;
  j["positive_rate"] = spec.positive_rate;
  j["test_fraction"] = spec.test_fraction;
  j["labeled_per_class"] = spec.labeled_per_class;
  return j;
}

ojson optional_array(const std::vector<std::optional<double>>& values) {
  ojson a = ojson::array();
  for (const auto& v : values) {
    if (v) {
      a.push_back(*v);
    } else {
      a.push_back(nullptr);
    }
  }
  return a;
}

ojson metrics_json(const MetricSet& m) {
  ojson j;
  j["map"] = m.map;
  j["mauc"] = m.mauc;
  j["hamming"] = m.hamming;
  j["skipped_ap"] = m.skipped_ap;
  j["skipped_auc"] = m.skipped_auc;
  j["ap_per_label"] = optional_array(m.ap_per_label);
  j["auc_per_label"] = optional_array(m.auc_per_label);
  return j;
}

MetricSet metrics_from_json(const json& j) {
  MetricSet m;
  m.map = j.at("map").get<double>();
  m.mauc = j.at("mauc").get<double>();
  m.hamming = j.at("hamming").get<double>();
  m.skipped_ap = j.at("skipped_ap").get<int>();
  m.skipped_auc = j.at("skipped_auc").get<int>();
  for (const auto& v : j.at("ap_per_label")) {
    m.ap_per_label.push_back(v.is_null() ? std::nullopt : std::optional(v.get<double>()));
  }
  for (const auto& v : j.at("auc_per_label")) {
    m.auc_per_label.push_back(v.is_null() ? std::nullopt : std::optional(v.get<double>()));
  }
  return m;
}

ojson summary_json(const Summary& s) {
  ojson j;
  j["mean"] = s.mean;
  j["stddev"] = s.stddev;
  return j;
}

std::string prediction_name(Method method, std::uint64_t seed) {
  return std::string("predictions/") + to_string(method) + "_seed" + std::to_string(seed) + ".txt";
}

bool singleton(const HyperGrid& g) {
  auto one = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return std::unique(v.begin(), v.end()) - v.begin() == 1;
  };
  return one(g.lambda) && one(g.gamma) && one(g.eta);
}

struct SeedOutcome {
  std::vector<SeedResult> per_method;  // in config.methods order
  std::vector<Matrix> predictions;
  double seconds = 0.0;
};

SeedOutcome run_seed(const io::DatasetFiles& data, const ExperimentConfig& config, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const SeedData sd = make_seed_data(data, config, seed);
  PipelineConfig base = config.pipeline;
  base.seed = seed;
  const PreparedViews prep = prepare_views(sd.dataset, base);
  StageCache cache(prep.reduced, base);
  const ValidationSet validation{sd.validation_samples, sd.truth};
  const ValidationSet* val = sd.validation_samples.empty() ? nullptr : &validation;
  const bool search = !singleton(config.grid);
  if (search && !val) throw ConfigError("a hyperparameter grid with several points needs a validation split");

  SeedOutcome out;
  for (Method method : config.methods) {
    base.method = method;
    GridPoint point{config.grid.lambda.front(), config.grid.gamma.front(), config.grid.eta.front()};
    if (search) {
      point = select_best(config.grid, [&](const GridPoint& p) {
        return mean_ap(method_scores(method, cache, p, base, val), sd.truth, sd.validation_samples);
      });
    }
    std::optional<SimplexWeights> theta;
    Matrix scores = method_scores(method, cache, point, base, val, &theta);

    SeedResult r;
    r.seed = seed;
    r.lambda = point.lambda;
    r.gamma = point.gamma;
    r.eta = point.eta;
    if (theta) r.theta = theta->theta();
    r.test_samples = sd.test_samples;
    r.validation_samples = sd.validation_samples;
    r.test = evaluate(scores, sd.truth, sd.test_samples, base.threshold);
    if (val) r.validation = evaluate(scores, sd.truth, sd.validation_samples, base.threshold);
    if (config.write_predictions) r.predictions_file = prediction_name(method, seed);
    out.per_method.push_back(std::move(r));
    out.predictions.push_back(std::move(scores));
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (!dataset && !synthetic) throw ConfigError("config: either 'dataset' or 'synthetic' is required");
  if (dataset && synthetic) throw ConfigError("config: 'dataset' and 'synthetic' are mutually exclusive");
  if (synthetic) synthetic->validate();
  if (methods.empty()) throw ConfigError("config: 'methods' is empty");
  if (seeds.empty()) throw ConfigError("config: 'seeds' is empty");
  if (labeled_per_class && *labeled_per_class < 1) throw ConfigError("config: 'labeled_per_class' must be >= 1");
  auto positive = [](const std::vector<double>& v, const char* name) {
    if (v.empty()) throw ConfigError(std::string("config: grid '") + name + "' is empty");
    for (double x : v) {
      if (!(x > 0.0)) throw ConfigError(std::string("config: grid '") + name + "' values must be positive");
    }
  };
  positive(grid.lambda, "lambda");
  positive(grid.gamma, "gamma");
  positive(grid.eta, "eta");
  if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
    throw ConfigError("config: 'validation_fraction' must lie in [0, 1)");
  }
  if (workers < 1) throw ConfigError("config: 'workers' must be >= 1");
  if (pipeline.kpca_dim < 1) throw ConfigError("config: 'kpca.dim' must be >= 1");
  pipeline.mc.validate();
}

ExperimentConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  ExperimentConfig c;
  Section s(root, "");
  if (s.has("dataset")) {
    std::string path;
    s.read("dataset", path);
    std::filesystem::path p(path);
    c.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  if (s.has("synthetic")) c.synthetic = parse_synthetic(s.child("synthetic"));
  if (s.has("methods")) {
    c.methods.clear();
    std::vector<std::string> names;
    s.read("methods", names);
    for (const auto& name : names) {
      const auto m = parse_method(name);
      if (!m) throw ConfigError("config: unknown method '" + name + "'");
      c.methods.push_back(*m);
    }
  }
  if (s.has("labeled_per_class")) {
    Index n = 0;
    s.read("labeled_per_class", n);
    c.labeled_per_class = n;
  }
  s.read("seeds", c.seeds);
  if (s.has("grid")) {
    Section g = s.child("grid");
    g.read("lambda", c.grid.lambda);
    g.read("gamma", c.grid.gamma);
    g.read("eta", c.grid.eta);
    g.finish();
  }
  s.read("validation_fraction", c.validation_fraction);
  if (s.has("kpca")) {
    Section k = s.child("kpca");
    k.read("enabled", c.pipeline.use_kpca);
    std::string kernel = "rbf";
    k.read("kernel", kernel);
    if (kernel == "rbf") {
      c.pipeline.kernel.kind = KernelSpec::Kind::kRbf;
    } else if (kernel == "linear") {
      c.pipeline.kernel.kind = KernelSpec::Kind::kLinear;
    } else {
      throw ConfigError("config.kpca: unknown kernel '" + kernel + "'");
    }
    k.read("bandwidth", c.pipeline.kernel.bandwidth);
    k.read("dim", c.pipeline.kpca_dim);
    k.finish();
  }
  if (s.has("mc")) {
    Section m = s.child("mc");
    m.read("mu0_factor", c.pipeline.mc.mu0_factor);
    m.read("mu_decay", c.pipeline.mc.mu_decay);
    m.read("mu_min", c.pipeline.mc.mu_min);
    m.read("inner_tol", c.pipeline.mc.inner_tol);
    m.read("max_inner_iters", c.pipeline.mc.max_inner_iters);
    if (m.has("tau") && !m.raw("tau").is_null()) {
      double tau = 0.0;
      m.read("tau", tau);
      c.pipeline.mc.tau = tau;
    }
    m.finish();
  }
  if (s.has("ls")) {
    Section l = s.child("ls");
    l.read("tol", c.pipeline.ls.tol);
    l.read("max_sweeps", c.pipeline.ls.max_sweeps);
    l.finish();
  }
  if (s.has("ap")) {
    Section a = s.child("ap");
    a.read("cp_tol", c.pipeline.ap.cp_tol);
    a.read("max_outer", c.pipeline.ap.max_outer);
    a.read("dual_tol", c.pipeline.ap.dual_tol);
    a.read("max_alternations", c.pipeline.ap.max_alternations);
    a.finish();
  }
  s.read("threshold", c.pipeline.threshold);
  if (s.has("output")) {
    std::string out;
    s.read("output", out);
    c.output = out;
  }
  s.read("workers", c.workers);
  s.read("write_predictions", c.write_predictions);
  s.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = io::read_text(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path.parent_path());
}

void apply_env_overrides(ExperimentConfig& config) {
  if (const char* out = std::getenv("MVMC_OUTPUT"); out && *out) config.output = out;
  if (const char* w = std::getenv("MVMC_WORKERS"); w && *w) {
    char* end = nullptr;
    const long n = std::strtol(w, &end, 10);
    if (*end != '\0' || n < 1) throw ConfigError(std::string("MVMC_WORKERS must be a positive integer, got '") + w + "'");
    config.workers = static_cast<int>(n);
  }
}

std::string config_to_json(const ExperimentConfig& c) {
  ojson j;
  if (c.dataset) j["dataset"] = c.dataset->generic_string();
  if (c.synthetic) j["synthetic"] = synthetic_to_json(*c.synthetic);
  ojson methods = ojson::array();
  for (Method m : c.methods) methods.push_back(to_string(m));
  j["methods"] = methods;
  if (c.labeled_per_class) j["labeled_per_class"] = *c.labeled_per_class;
  j["seeds"] = c.seeds;
  j["grid"] = {{"lambda", c.grid.lambda}, {"gamma", c.grid.gamma}, {"eta", c.grid.eta}};
  j["validation_fraction"] = c.validation_fraction;
  const PipelineConfig& p = c.pipeline;
  j["kpca"] = {{"enabled", p.use_kpca},
               {"kernel", p.kernel.kind == KernelSpec::Kind::kRbf ? "rbf" : "linear"},
               {"bandwidth", p.kernel.bandwidth},
               {"dim", p.kpca_dim}};
  ojson mc = {{"mu0_factor", p.mc.mu0_factor}, {"mu_decay", p.mc.mu_decay}, {"mu_min", p.mc.mu_min},
              {"inner_tol", p.mc.inner_tol}, {"max_inner_iters", p.mc.max_inner_iters}};
  mc["tau"] = p.mc.tau ? ojson(*p.mc.tau) : ojson(nullptr);
  j["mc"] = mc;
  j["ls"] = {{"tol", p.ls.tol}, {"max_sweeps", p.ls.max_sweeps}};
  j["ap"] = {{"cp_tol", p.ap.cp_tol}, {"max_outer", p.ap.max_outer}, {"dual_tol", p.ap.dual_tol},
             {"max_alternations", p.ap.max_alternations}};
  j["threshold"] = p.threshold;
  j["write_predictions"] = c.write_predictions;
  return j.dump(2);
}

io::DatasetFiles load_experiment_data(const ExperimentConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic).files();
  io::DatasetFiles files = io::read_dataset(*config.dataset);
  if (!files.has_full_truth()) {
    throw DataError("dataset " + config.dataset->string() + ": evaluation needs ground truth for every sample");
  }
  return files;
}

SeedData make_seed_data(const io::DatasetFiles& data, const ExperimentConfig& config, std::uint64_t seed) {
  SeedData sd;
  sd.seed = seed;
  sd.truth = data.labels;
  std::vector<SampleRole> roles = data.roles;
  std::optional<Index> per_class = config.labeled_per_class;
  if (!per_class && config.synthetic) per_class = config.synthetic->labeled_per_class;
  if (per_class) {
    std::vector<bool> is_test(roles.size());
    for (std::size_t j = 0; j < roles.size(); ++j) is_test[j] = roles[j] == SampleRole::kTest;
    roles = draw_partition(data.labels, is_test, *per_class, seed);
  }
  sd.dataset = mask_to_partition(data.views, data.labels, roles, seed);

  std::vector<Index> test = sd.dataset.indices(SampleRole::kTest);
  if (test.empty()) throw DataError("partition has no test samples");
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::shuffle(test.begin(), test.end(), rng);
  const auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(test.size())));
  if (n_val >= test.size() && n_val > 0) throw DataError("validation split would leave no test samples");
  sd.validation_samples.assign(test.begin(), test.begin() + static_cast<std::ptrdiff_t>(n_val));
  sd.test_samples.assign(test.begin() + static_cast<std::ptrdiff_t>(n_val), test.end());
  std::sort(sd.validation_samples.begin(), sd.validation_samples.end());
  std::sort(sd.test_samples.begin(), sd.test_samples.end());
  return sd;
}

RunReport run_experiment(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  const io::DatasetFiles data = load_experiment_data(config);

  const std::size_t S = config.seeds.size();
  std::vector<SeedOutcome> outcomes(S);
  ExperimentConfig inner = config;
  // Seeds run concurrently; each seed completes its views sequentially.
  inner.pipeline.workers = S > 1 ? 1 : config.workers;
  detail::parallel_for(static_cast<Index>(S), config.workers, [&](Index i) {
    outcomes[static_cast<std::size_t>(i)] = run_seed(data, inner, config.seeds[static_cast<std::size_t>(i)]);
  });

  RunReport report;
  for (std::size_t k = 0; k < config.methods.size(); ++k) {
    MethodReport mr;
    mr.method = config.methods[k];
    for (const SeedOutcome& o : outcomes) mr.seeds.push_back(o.per_method[k]);
    aggregate(mr);
    report.methods.push_back(std::move(mr));
  }
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::filesystem::create_directories(config.output);
  if (config.write_predictions) {
    for (const SeedOutcome& o : outcomes) {
      for (std::size_t k = 0; k < o.per_method.size(); ++k) {
        io::write_matrix(config.output / o.per_method[k].predictions_file, o.predictions[k]);
      }
    }
  }
  io::write_text(config.output / "report.json", report_to_json(report, config) + "\n");
  io::write_text(config.output / "report.txt", report_to_table(report));
  ojson timing;
  timing["seconds"] = report.seconds;
  ojson per_seed = ojson::array();
  for (std::size_t i = 0; i < S; ++i) {
    per_seed.push_back({{"seed", config.seeds[i]}, {"seconds", outcomes[i].seconds}});
  }
  timing["seeds"] = per_seed;
  io::write_text(config.output / "timing.json", timing.dump(2) + "\n");
  if (log) *log << report_to_table(report);
  return report;
}

std::string report_to_json(const RunReport& report, const ExperimentConfig& config) {
  ojson root;
  root["format"] = "mvmc-report-1";
  root["config"] = ojson::parse(config_to_json(config));
  ojson methods = ojson::array();
  for (const MethodReport& mr : report.methods) {
    ojson m;
    m["method"] = to_string(mr.method);
    m["map"] = summary_json(mr.map);
    m["mauc"] = summary_json(mr.mauc);
    m["hamming"] = summary_json(mr.hamming);
    ojson seeds = ojson::array();
    for (const SeedResult& r : mr.seeds) {
      ojson s;
      s["seed"] = r.seed;
      s["lambda"] = r.lambda;
      s["gamma"] = r.gamma;
      s["eta"] = r.eta;
      if (r.theta) {
        s["theta"] = std::vector<double>(r.theta->data(), r.theta->data() + r.theta->size());
      } else {
        s["theta"] = nullptr;
      }
      s["test"] = metrics_json(r.test);
      s["validation"] = r.validation ? metrics_json(*r.validation) : ojson(nullptr);
      s["test_samples"] = r.test_samples;
      s["validation_samples"] = r.validation_samples;
      s["predictions"] = r.predictions_file.empty() ? ojson(nullptr) : ojson(r.predictions_file);
      seeds.push_back(std::move(s));
    }
    m["seeds"] = std::move(seeds);
    methods.push_back(std::move(m));
  }
  root["methods"] = std::move(methods);
  return root.dump(2);
}

std::string report_to_table(const RunReport& report) {
  std::ostringstream os;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %-22s %-22s %-22s\n", "method", "mAP", "mAUC", "HL");
  os << line;
  for (const MethodReport& mr : report.methods) {
    auto cell = [](const Summary& s) {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.4f +/- %.4f", s.mean, s.stddev);
      return std::string(buf);
    };
    std::snprintf(line, sizeof line, "%-8s %-22s %-22s %-22s\n", to_string(mr.method), cell(mr.map).c_str(),
                  cell(mr.mauc).c_str(), cell(mr.hamming).c_str());
    os << line;
  }
  for (const MethodReport& mr : report.methods) {
    for (const SeedResult& r : mr.seeds) {
      if (!r.theta) continue;
      os << to_string(mr.method) << " seed " << r.seed << " theta:";
      for (Index v = 0; v < r.theta->size(); ++v) {
        std::snprintf(line, sizeof line, " %.4f", (*r.theta)(v));
        os << line;
      }
      os << '\n';
    }
  }
  return os.str();
}

RunReport parse_report(std::string_view json_text) {
  RunReport report;
  try {
    const json root = json::parse(json_text);
    for (const auto& m : root.at("methods")) {
      MethodReport mr;
      const auto method = parse_method(m.at("method").get<std::string>());
      if (!method) throw DataError("report: unknown method");
      mr.method = *method;
      for (const auto& s : m.at("seeds")) {
        SeedResult r;
        r.seed = s.at("seed").get<std::uint64_t>();
        r.lambda = s.at("lambda").get<double>();
        r.gamma = s.at("gamma").get<double>();
        r.eta = s.at("eta").get<double>();
        if (!s.at("theta").is_null()) {
          const auto t = s.at("theta").get<std::vector<double>>();
          r.theta = Eigen::Map<const Vector>(t.data(), static_cast<Index>(t.size()));
        }
        r.test = metrics_from_json(s.at("test"));
        if (!s.at("validation").is_null()) r.validation = metrics_from_json(s.at("validation"));
        r.test_samples = s.at("test_samples").get<std::vector<Index>>();
        r.validation_samples = s.at("validation_samples").get<std::vector<Index>>();
        if (!s.at("predictions").is_null()) r.predictions_file = s.at("predictions").get<std::string>();
        mr.seeds.push_back(std::move(r));
      }
      aggregate(mr);
      report.methods.push_back(std::move(mr));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return report;
}

std::vector<MethodReport> stored_summaries(std::string_view json_text) {
  std::vector<MethodReport> out;
  try {
    const json root = json::parse(json_text);
    auto summary = [](const json& j) { return Summary{j.at("mean").get<double>(), j.at("stddev").get<double>()}; };
    for (const auto& m : root.at("methods")) {
      MethodReport mr;
      mr.method = parse_method(m.at("method").get<std::string>()).value_or(Method::kAp);
      mr.map = summary(m.at("map"));
      mr.mauc = summary(m.at("mauc"));
      mr.hamming = summary(m.at("hamming"));
      out.push_back(std::move(mr));
    }
  } catch (const json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return out;
}

std::string metrics_to_json(const MetricSet& metrics) { return metrics_json(metrics).dump(2); }

}  // namespace mvmc
