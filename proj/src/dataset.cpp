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

#include "dpsynth/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace dpsynth {

namespace {

// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> SplitCsvLine(const std::string& line, int row) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"' && field.empty()) {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // tolerate CRLF
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw ParseError("row " + std::to_string(row) + ": unterminated quote");
  }
  fields.push_back(std::move(field));
  return fields;
}

double ParseNumber(const std::string& cell, int row, int column) {
  std::string trimmed = cell;
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  trimmed.erase(trimmed.begin(),
                std::find_if_not(trimmed.begin(), trimmed.end(), is_space));
  trimmed.erase(std::find_if_not(trimmed.rbegin(), trimmed.rend(), is_space).base(),
                trimmed.end());
  if (trimmed.empty()) {
    throw ParseError("row " + std::to_string(row) + ", column " +
                     std::to_string(column) + ": empty cell");
  }
  double value = 0.0;
  const char* begin = trimmed.data();
  const char* end = begin + trimmed.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError("row " + std::to_string(row) + ", column " +
                     std::to_string(column) + ": not a finite number: '" +
                     cell + "'");
  }
  return value;
}

// Shortest decimal form that parses back to the same double.
std::string FormatDouble(double value) {
  char buffer[40];
  for (int precision = 1; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    double back = 0.0;
    std::from_chars(buffer, buffer + std::char_traits<char>::length(buffer),
                    back);
    if (back == value) break;
  }
  return buffer;
}

}  // namespace

double ColumnScaler::Scale(int column, double value) const {
  const double lo = mins[column];
  const double hi = maxs[column];
  if (hi == lo) return 0.0;
  return 2.0 * (value - lo) / (hi - lo) - 1.0;
}

double ColumnScaler::Unscale(int column, double value) const {
  const double lo = mins[column];
  const double hi = maxs[column];
  if (hi == lo) return lo;
  return (value + 1.0) / 2.0 * (hi - lo) + lo;
}

nlohmann::ordered_json ColumnScaler::ToJson(
    const std::vector<std::string>& feature_names,
    const std::string& label_name) const {
  nlohmann::ordered_json doc;
  doc["format_version"] = 1;
  doc["feature_names"] = feature_names;
  doc["label_name"] = label_name;
  doc["mins"] = mins;
  doc["maxs"] = maxs;
  return doc;
}

std::vector<double> TabularDataset::RawRow(std::size_t row) const {
  std::vector<double> raw(feature_names.size());
  for (std::size_t c = 0; c < raw.size(); ++c) {
    raw[c] = scaler.Unscale(static_cast<int>(c), features[row][c]);
  }
  return raw;
}

TabularDataset LoadCsv(const std::filesystem::path& path,
                       const std::string& label_column) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open CSV file: " + path.string());
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("missing header row in " + path.string());
  }
  const std::vector<std::string> header = SplitCsvLine(line, 1);
  int label_index = -1;
  TabularDataset data;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!label_column.empty() && header[c] == label_column) {
      if (label_index != -1) {
        throw ParseError("duplicate label column '" + label_column + "'");
      }
      label_index = static_cast<int>(c);
    } else {
      data.feature_names.push_back(header[c]);
    }
  }
  if (!label_column.empty() && label_index == -1) {
    throw ParseError("label column '" + label_column + "' not in header");
  }
  if (data.feature_names.empty()) {
    throw ParseError("no feature columns in " + path.string());
  }
  // Header rows that are actually data (all numeric) are a strong sign the
  // header is missing.
  bool header_numeric = true;
  for (const std::string& name : header) {
    double ignored = 0.0;
    const auto [ptr, ec] =
        std::from_chars(name.data(), name.data() + name.size(), ignored);
    if (ec != std::errc() || ptr != name.data() + name.size()) {
      header_numeric = false;
      break;
    }
  }
  if (header_numeric) {
    throw ParseError("first row of " + path.string() +
                     " is numeric; a header row is required");
  }
  data.label_name = label_column;

  std::vector<std::vector<double>> raw_rows;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() && in.eof()) break;
    const std::vector<std::string> cells = SplitCsvLine(line, row);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(row) + ": expected " +
                       std::to_string(header.size()) + " cells, got " +
                       std::to_string(cells.size()));
    }
    std::vector<double> features;
    features.reserve(data.feature_names.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const double value = ParseNumber(cells[c], row, static_cast<int>(c) + 1);
      if (static_cast<int>(c) == label_index) {
        const int label = static_cast<int>(std::llround(value));
        if (value != static_cast<double>(label) || label < 0) {
          throw ParseError("row " + std::to_string(row) + ", column " +
                           std::to_string(c + 1) +
                           ": labels must be nonnegative integers");
        }
        data.labels.push_back(label);
      } else {
        features.push_back(value);
      }
    }
    raw_rows.push_back(std::move(features));
  }
  if (raw_rows.empty()) {
    throw ParseError("no data rows in " + path.string());
  }

  const int dim = data.Dim();
  data.scaler.mins.assign(dim, std::numeric_limits<double>::infinity());
  data.scaler.maxs.assign(dim, -std::numeric_limits<double>::infinity());
  for (const std::vector<double>& r : raw_rows) {
    for (int c = 0; c < dim; ++c) {
      data.scaler.mins[c] = std::min(data.scaler.mins[c], r[c]);
      data.scaler.maxs[c] = std::max(data.scaler.maxs[c], r[c]);
    }
  }
  data.features.reserve(raw_rows.size());
  for (const std::vector<double>& r : raw_rows) {
    std::vector<double> scaled(dim);
    for (int c = 0; c < dim; ++c) scaled[c] = data.scaler.Scale(c, r[c]);
    data.features.push_back(std::move(scaled));
  }
  if (label_index != -1) {
    data.num_classes = *std::max_element(data.labels.begin(), data.labels.end()) + 1;
  }
  return data;
}

void WriteSyntheticCsv(const std::filesystem::path& path,
                       const std::vector<std::string>& feature_names,
                       const std::string& label_name,
                       const ColumnScaler& scaler,
                       const std::vector<std::vector<double>>& scaled_rows,
                       const std::vector<int>& labels) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open output CSV: " + path.string());
  }
  for (std::size_t c = 0; c < feature_names.size(); ++c) {
    out << (c == 0 ? "" : ",") << feature_names[c];
  }
  if (!label_name.empty()) out << ',' << label_name;
  out << '\n';
  for (std::size_t r = 0; r < scaled_rows.size(); ++r) {
    for (std::size_t c = 0; c < feature_names.size(); ++c) {
      const double raw = scaler.Unscale(static_cast<int>(c), scaled_rows[r][c]);
      out << (c == 0 ? "" : ",") << FormatDouble(raw);
    }
    if (!label_name.empty()) out << ',' << labels[r];
    out << '\n';
  }
}

void SaveScaler(const std::filesystem::path& path, const ColumnScaler& scaler,
                const std::vector<std::string>& feature_names,
                const std::string& label_name, int num_classes) {
  nlohmann::ordered_json doc = scaler.ToJson(feature_names, label_name);
  doc["num_classes"] = num_classes;
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open scaler file: " + path.string());
  }
  out << doc.dump(2) << '\n';
}

ScalerFile LoadScaler(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot read scaler file: " + path.string());
  }
  nlohmann::json doc;
  in >> doc;
  ScalerFile file;
  file.feature_names = doc.at("feature_names").get<std::vector<std::string>>();
  file.label_name = doc.at("label_name").get<std::string>();
  file.scaler.mins = doc.at("mins").get<std::vector<double>>();
  file.scaler.maxs = doc.at("maxs").get<std::vector<double>>();
  file.num_classes = doc.value("num_classes", 0);
  return file;
}

}  // namespace dpsynth
