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

#include "mvmc/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvmc/error.hpp"

namespace mvmc::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token == "nan" || token == "NaN" || token == "?") return std::nan("");
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw DataError("line " + std::to_string(line) + ": cannot parse number '" + std::string(token) + "'");
  }
  return v;
}

Index parse_index(std::string_view token, const char* what) {
  long long v = 0;
  token = trim(token);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || v < 0) {
    throw DataError(std::string("bad ") + what + " '" + std::string(token) + "'");
  }
  return static_cast<Index>(v);
}

}  // namespace

std::string format_matrix(const Matrix& m) {
  std::string out = std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  char buf[40];
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out += ',';
      const double x = m(i, j);
      if (std::isnan(x)) {
        out += "nan";
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", x);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

Matrix parse_matrix(std::string_view text) {
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::string_view {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    return trim(line);
  };
  const std::string_view header = next_line();
  const std::size_t sp = header.find(' ');
  if (sp == std::string_view::npos) throw DataError("matrix header must be '<rows> <cols>'");
  const Index rows = parse_index(header.substr(0, sp), "row count");
  const Index cols = parse_index(header.substr(sp + 1), "column count");
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    if (text.empty()) throw DataError("matrix ends after " + std::to_string(i) + " of " + std::to_string(rows) + " rows");
    std::string_view line = next_line();
    for (Index j = 0; j < cols; ++j) {
      const std::size_t comma = line.find(',');
      if ((comma == std::string_view::npos) != (j == cols - 1)) {
        throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(cols) + " entries");
      }
      m(i, j) = parse_double(line.substr(0, comma), line_no);
      line = comma == std::string_view::npos ? std::string_view{} : line.substr(comma + 1);
    }
  }
  return m;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

void write_matrix(const std::filesystem::path& path, const Matrix& m) { write_text(path, format_matrix(m)); }

Matrix read_matrix(const std::filesystem::path& path) {
  try {
    return parse_matrix(read_text(path));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_partition(const std::filesystem::path& path, const std::vector<SampleRole>& roles) {
  std::string out;
  for (SampleRole r : roles) {
    out += to_string(r);
    out += '\n';
  }
  write_text(path, out);
}

std::vector<SampleRole> read_partition(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  std::vector<SampleRole> roles;
  std::istringstream in(text);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string_view t = trim(line);
    if (t.empty()) continue;
    const auto role = parse_role(t);
    if (!role) throw DataError(path.string() + ":" + std::to_string(n) + ": unknown role '" + std::string(t) + "'");
    roles.push_back(*role);
  }
  return roles;
}

MultiViewDataset DatasetFiles::dataset() const {
  std::vector<Index> hidden;
  for (std::size_t j = 0; j < roles.size(); ++j) {
    if (roles[j] != SampleRole::kLabeled) hidden.push_back(static_cast<Index>(j));
  }
  return MultiViewDataset(views, labels.hide_columns(hidden), roles, seed);
}

void write_dataset(const std::filesystem::path& dir, const DatasetFiles& files) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format"] = "mvmc-dataset-1";
  manifest["samples"] = files.labels.samples();
  manifest["labels"] = files.labels.labels();
  manifest["seed"] = files.seed;
  manifest["label_file"] = "labels.txt";
  manifest["partition_file"] = "partition.txt";
  nlohmann::ordered_json views = nlohmann::ordered_json::array();
  for (std::size_t v = 0; v < files.views.size(); ++v) {
    const std::string name = "view_" + std::to_string(v) + ".txt";
    views.push_back(name);
    Matrix dense = files.views[v].filled(std::nan(""));
    write_matrix(dir / name, dense);
  }
  manifest["views"] = views;
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_matrix(dir / "labels.txt", files.labels.to_dense());
  write_partition(dir / "partition.txt", files.roles);
}

DatasetFiles read_dataset(const std::filesystem::path& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_text(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  DatasetFiles out;
  try {
    out.seed = manifest.value("seed", std::uint64_t{0});
    for (const auto& name : manifest.at("views")) {
      out.views.push_back(FeatureMatrix::FromDense(read_matrix(dir / name.get<std::string>())));
    }
    out.labels = LabelMatrix::FromDense(read_matrix(dir / manifest.value("label_file", std::string("labels.txt"))));
    out.roles = read_partition(dir / manifest.value("partition_file", std::string("partition.txt")));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  if (static_cast<Index>(out.roles.size()) != out.labels.samples()) {
    throw DataError("partition lists " + std::to_string(out.roles.size()) + " samples, labels have " +
                    std::to_string(out.labels.samples()));
  }
  return out;
}

}  // namespace mvmc::io
