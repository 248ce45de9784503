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
#include <string>
#include <string_view>
#include <vector>

#include "mvmc/types.hpp"

namespace mvmc::io {

// Dense matrix text format:
//   line 1: "<rows> <cols>"
//   then one line per row, entries separated by ',', each written with 17
//   significant digits ("%.17g", '.' as decimal separator); unknown or
//   missing entries are written as "nan".

std::string format_matrix(const Matrix& m);
Matrix parse_matrix(std::string_view text);

void write_matrix(const std::filesystem::path& path, const Matrix& m);
Matrix read_matrix(const std::filesystem::path& path);

/// One role name per line: labeled | unlabeled | test.
void write_partition(const std::filesystem::path& path, const std::vector<SampleRole>& roles);
std::vector<SampleRole> read_partition(const std::filesystem::path& path);

/// On-disk dataset: manifest.json, view_<v>.txt (d_v x n), labels.txt (m x n,
/// ground truth where known) and partition.txt.
struct DatasetFiles {
  std::vector<FeatureMatrix> views;
  LabelMatrix labels;
  std::vector<SampleRole> roles;
  std::uint64_t seed = 0;

  /// True if every label entry is known (full ground truth is available).
  bool has_full_truth() const { return labels.known_count() == static_cast<std::size_t>(labels.labels() * labels.samples()); }
  /// The dataset as seen by training: labels revealed on labeled samples only.
  MultiViewDataset dataset() const;
};

void write_dataset(const std::filesystem::path& dir, const DatasetFiles& files);
DatasetFiles read_dataset(const std::filesystem::path& dir);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace mvmc::io
