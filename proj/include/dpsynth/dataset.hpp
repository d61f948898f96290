//
// Copyright 2026 The dpsynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef DPSYNTH_DATASET_HPP_
#define DPSYNTH_DATASET_HPP_

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace dpsynth {

// CSV problem with its location; maps to exit code 2 in the CLI.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Per-column min-max scaling to [-1, 1]. A constant column maps to 0
// everywhere and inverts back to its constant.
struct ColumnScaler {
  std::vector<double> mins;
  std::vector<double> maxs;

  double Scale(int column, double value) const;
  double Unscale(int column, double value) const;

  nlohmann::ordered_json ToJson(const std::vector<std::string>& feature_names,
                                const std::string& label_name) const;
};

struct TabularDataset {
  std::vector<std::string> feature_names;
  std::string label_name;  // empty when unlabeled
  // Features scaled to [-1, 1]; one row per record.
  std::vector<std::vector<double>> features;
  std::vector<int> labels;  // empty when unlabeled
  int num_classes = 0;
  ColumnScaler scaler;

  std::size_t Size() const { return features.size(); }
  int Dim() const { return static_cast<int>(feature_names.size()); }
  bool Labeled() const { return !label_name.empty(); }

  // Row in original units (inverse of the scaling).
  std::vector<double> RawRow(std::size_t row) const;
};

// Loads an RFC-4180-style CSV with a mandatory header row. All cells must be
// numeric; the label column (when named) must hold integer classes 0..C-1.
// Pass an empty label_column for unlabeled data.
TabularDataset LoadCsv(const std::filesystem::path& path,
                       const std::string& label_column);

// Writes rows given in scaled space back to CSV in original units, followed
// by the label column when labels are present.
void WriteSyntheticCsv(const std::filesystem::path& path,
                       const std::vector<std::string>& feature_names,
                       const std::string& label_name,
                       const ColumnScaler& scaler,
                       const std::vector<std::vector<double>>& scaled_rows,
                       const std::vector<int>& labels);

void SaveScaler(const std::filesystem::path& path, const ColumnScaler& scaler,
                const std::vector<std::string>& feature_names,
                const std::string& label_name, int num_classes);
struct ScalerFile {
  ColumnScaler scaler;
  std::vector<std::string> feature_names;
  std::string label_name;
  int num_classes = 0;
};
ScalerFile LoadScaler(const std::filesystem::path& path);

}  // namespace dpsynth

#endif  // DPSYNTH_DATASET_HPP_
