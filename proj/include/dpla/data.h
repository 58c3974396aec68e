// Copyright 2026 The dp-la Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPLA_DATA_H_
#define DPLA_DATA_H_

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "dpla/csv.h"
#include "dpla/matrix.h"
#include "dpla/rng.h"
#include "dpla/status_macros.h"
#include "json.hpp"

namespace dpla {

enum class ColumnKind { kNumeric, kCategorical, kTarget, kDrop };

inline std::string_view ColumnKindName(ColumnKind kind) {
  switch (kind) {
    case ColumnKind::kNumeric: return "numeric";
    case ColumnKind::kCategorical: return "categorical";
    case ColumnKind::kTarget: return "target";
    case ColumnKind::kDrop: return "drop";
  }
  return "unknown";
}

inline absl::StatusOr<ColumnKind> ParseColumnKind(std::string_view name) {
  for (ColumnKind kind : {ColumnKind::kNumeric, ColumnKind::kCategorical,
                          ColumnKind::kTarget, ColumnKind::kDrop}) {
    if (ColumnKindName(kind) == name) return kind;
  }
  return absl::InvalidArgumentError("unknown column kind '" +
                                    std::string(name) + "'");
}

struct ColumnSpec {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
};

// Which columns to read and how, plus the target categories that map to 1.
// `negative_labels` is optional; when non-empty, target values outside both
// sets are rejected at load time.
struct TabularSchema {
  std::vector<ColumnSpec> columns;
  std::set<std::string> positive_labels;
  std::set<std::string> negative_labels;

  absl::Status Validate() const {
    int targets = 0;
    std::set<std::string> names;
    for (const ColumnSpec& c : columns) {
      if (c.kind == ColumnKind::kTarget) ++targets;
      if (!names.insert(c.name).second) {
        return absl::InvalidArgumentError("duplicate column '" + c.name + "'");
      }
    }
    if (targets != 1) {
      return absl::InvalidArgumentError(
          "schema needs exactly one target column, found " +
          std::to_string(targets));
    }
    if (positive_labels.empty()) {
      return absl::InvalidArgumentError("positive_labels must be non-empty");
    }
    for (const std::string& label : negative_labels) {
      if (positive_labels.contains(label)) {
        return absl::InvalidArgumentError("label '" + label +
                                          "' is both positive and negative");
      }
    }
    return absl::OkStatus();
  }

  const ColumnSpec& target() const {
    return *std::find_if(columns.begin(), columns.end(), [](const auto& c) {
      return c.kind == ColumnKind::kTarget;
    });
  }

  nlohmann::json ToJson() const {
    nlohmann::json cols = nlohmann::json::array();
    for (const ColumnSpec& c : columns) {
      cols.push_back({{"name", c.name}, {"kind", ColumnKindName(c.kind)}});
    }
    nlohmann::json out = {{"columns", cols},
                          {"positive_labels", positive_labels}};
    if (!negative_labels.empty()) out["negative_labels"] = negative_labels;
    return out;
  }

  static absl::StatusOr<TabularSchema> FromJson(const nlohmann::json& j) {
    TabularSchema schema;
    try {
      for (const auto& c : j.at("columns")) {
        DPLA_ASSIGN_OR_RETURN(ColumnKind kind,
                              ParseColumnKind(c.at("kind").get<std::string>()));
        schema.columns.push_back({c.at("name").get<std::string>(), kind});
      }
      for (const auto& l : j.at("positive_labels")) {
        schema.positive_labels.insert(l.get<std::string>());
      }
      if (j.contains("negative_labels")) {
        for (const auto& l : j.at("negative_labels")) {
          schema.negative_labels.insert(l.get<std::string>());
        }
      }
    } catch (const nlohmann::json::exception& e) {
      return absl::InvalidArgumentError(std::string("malformed schema: ") +
                                        e.what());
    }
    DPLA_RETURN_IF_ERROR(schema.Validate());
    return schema;
  }

  static absl::StatusOr<TabularSchema> Load(const std::string& path) {
    DPLA_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError("schema " + path + " is not JSON");
    }
    return FromJson(j);
  }
};

// One typed column. Numeric cells that were empty in the source are NaN.
struct RawColumn {
  std::string name;
  ColumnKind kind = ColumnKind::kNumeric;
  std::vector<double> numeric;
  std::vector<std::string> text;
};

// Typed columns for every non-dropped schema column, in schema order.
struct RawTable {
  std::vector<RawColumn> columns;
  size_t num_rows = 0;

  const RawColumn* Find(std::string_view name) const {
    for (const RawColumn& c : columns) {
      if (c.name == name) return &c;
    }
    return nullptr;
  }

  // Emits the table as CSV with a header row. Numbers use 17 significant
  // digits so re-ingestion is exact.
  std::string ToCsv() const {
    std::string out;
    std::vector<std::string> fields;
    for (const RawColumn& c : columns) fields.push_back(c.name);
    out += JoinCsvRecord(fields) + "\n";
    for (size_t r = 0; r < num_rows; ++r) {
      fields.clear();
      for (const RawColumn& c : columns) {
        if (c.kind == ColumnKind::kNumeric) {
          fields.push_back(std::isnan(c.numeric[r])
                               ? std::string()
                               : FormatDouble(c.numeric[r], 17));
        } else {
          fields.push_back(c.text[r]);
        }
      }
      out += JoinCsvRecord(fields) + "\n";
    }
    return out;
  }
};

namespace internal {

inline std::string_view Trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> ParseNumber(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

}  // namespace internal

// Builds a typed table from CSV text. Row numbers in errors count data rows
// from 1 (the header is row 0).
inline absl::StatusOr<RawTable> ParseCsvTable(std::string_view text,
                                              const TabularSchema& schema) {
  DPLA_RETURN_IF_ERROR(schema.Validate());
  DPLA_ASSIGN_OR_RETURN(auto records, ParseCsv(text));
  if (records.empty()) return absl::InvalidArgumentError("CSV is empty");
  const std::vector<std::string>& header = records.front();

  RawTable table;
  std::vector<size_t> source_index;
  for (const ColumnSpec& spec : schema.columns) {
    auto it = std::find_if(header.begin(), header.end(), [&](const auto& h) {
      return internal::Trim(h) == spec.name;
    });
    if (it == header.end()) {
      return absl::InvalidArgumentError("CSV is missing column '" + spec.name +
                                        "'");
    }
    if (spec.kind == ColumnKind::kDrop) continue;
    table.columns.push_back({spec.name, spec.kind, {}, {}});
    source_index.push_back(static_cast<size_t>(it - header.begin()));
  }

  for (size_t r = 1; r < records.size(); ++r) {
    const std::vector<std::string>& record = records[r];
    if (record.size() != header.size()) {
      return absl::InvalidArgumentError(
          "row " + std::to_string(r) + ": expected " +
          std::to_string(header.size()) + " fields, got " +
          std::to_string(record.size()));
    }
    for (size_t c = 0; c < table.columns.size(); ++c) {
      RawColumn& column = table.columns[c];
      const std::string& cell = record[source_index[c]];
      switch (column.kind) {
        case ColumnKind::kNumeric: {
          if (internal::Trim(cell).empty()) {
            column.numeric.push_back(std::numeric_limits<double>::quiet_NaN());
            break;
          }
          std::optional<double> value = internal::ParseNumber(cell);
          if (!value || !std::isfinite(*value)) {
            return absl::InvalidArgumentError(
                "row " + std::to_string(r) + ": column '" + column.name +
                "': cannot parse '" + cell + "' as a number");
          }
          column.numeric.push_back(*value);
          break;
        }
        case ColumnKind::kTarget: {
          std::string label(internal::Trim(cell));
          if (!schema.negative_labels.empty() &&
              !schema.positive_labels.contains(label) &&
              !schema.negative_labels.contains(label)) {
            return absl::InvalidArgumentError(
                "row " + std::to_string(r) + ": unseen target category '" +
                label + "'");
          }
          column.text.push_back(std::move(label));
          break;
        }
        default:
          column.text.emplace_back(internal::Trim(cell));
      }
    }
    ++table.num_rows;
  }
  if (table.num_rows == 0) {
    return absl::InvalidArgumentError("CSV has a header but no data rows");
  }
  return table;
}

inline absl::StatusOr<RawTable> LoadCsv(const std::string& path,
                                        const TabularSchema& schema) {
  DPLA_ASSIGN_OR_RETURN(std::string text, ReadFile(path));
  auto table = ParseCsvTable(text, schema);
  if (!table.ok()) {
    return absl::Status(table.status().code(),
                        path + ": " + std::string(table.status().message()));
  }
  return table;
}

struct NumericBounds {
  std::string column;
  double min = 0.0;
  double max = 0.0;

  // Min-max scaling; constant columns and missing cells map to 0.
  double Scale(double value) const {
    if (std::isnan(value) || !(max > min)) return 0.0;
    return (value - min) / (max - min);
  }
};

struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::vector<std::string> feature_names;
  std::vector<NumericBounds> normalization_bounds;

  size_t size() const { return labels.size(); }
  size_t dim() const { return feature_names.size(); }

  // Features and labels as a plain numeric CSV: one column per feature plus
  // a trailing "label" column.
  std::string ToCsv() const {
    std::vector<std::string> fields = feature_names;
    fields.push_back("label");
    std::string out = JoinCsvRecord(fields) + "\n";
    for (size_t r = 0; r < size(); ++r) {
      fields.clear();
      for (double v : features.Row(r)) fields.push_back(FormatDouble(v, 17));
      fields.push_back(std::to_string(labels[r]));
      out += JoinCsvRecord(fields) + "\n";
    }
    return out;
  }
};

// Fitted preprocessing state: min-max bounds for numeric columns and the
// sorted category list for each categorical column. Applying it to a table
// that contains categories not seen while fitting yields an all-zero
// one-hot block for those cells.
class Preprocessor {
 public:
  static absl::StatusOr<Preprocessor> Fit(const RawTable& table,
                                          const TabularSchema& schema) {
    DPLA_RETURN_IF_ERROR(schema.Validate());
    Preprocessor p;
    p.schema_ = schema;
    for (const RawColumn& column : table.columns) {
      switch (column.kind) {
        case ColumnKind::kNumeric: {
          NumericBounds bounds{column.name,
                               std::numeric_limits<double>::infinity(),
                               -std::numeric_limits<double>::infinity()};
          for (double v : column.numeric) {
            if (std::isnan(v)) continue;
            bounds.min = std::min(bounds.min, v);
            bounds.max = std::max(bounds.max, v);
          }
          if (bounds.min > bounds.max) {
            return absl::InvalidArgumentError("column '" + column.name +
                                              "' has only missing values");
          }
          p.bounds_.push_back(bounds);
          break;
        }
        case ColumnKind::kCategorical: {
          std::set<std::string> categories(column.text.begin(),
                                           column.text.end());
          p.categories_.emplace_back(categories.begin(), categories.end());
          break;
        }
        case ColumnKind::kTarget: {
          std::set<std::string> observed(column.text.begin(),
                                         column.text.end());
          for (const std::string& label : schema.positive_labels) {
            if (!observed.contains(label)) {
              return absl::InvalidArgumentError(
                  "positive label '" + label + "' never occurs in '" +
                  column.name + "'");
            }
          }
          if (observed.size() <= schema.positive_labels.size()) {
            return absl::InvalidArgumentError(
                "positive_labels must be a strict subset of the observed "
                "target categories");
          }
          break;
        }
        case ColumnKind::kDrop:
          break;
      }
    }
    return p;
  }

  absl::StatusOr<Dataset> Transform(const RawTable& table) const {
    Dataset out;
    out.normalization_bounds = bounds_;
    size_t numeric_index = 0, categorical_index = 0;
    for (const RawColumn& column : table.columns) {
      if (column.kind == ColumnKind::kNumeric) {
        out.feature_names.push_back(column.name);
        ++numeric_index;
      } else if (column.kind == ColumnKind::kCategorical) {
        for (const std::string& category : categories_[categorical_index]) {
          out.feature_names.push_back(column.name + "=" + category);
        }
        ++categorical_index;
      }
    }
    if (numeric_index != bounds_.size() ||
        categorical_index != categories_.size()) {
      return absl::InvalidArgumentError(
          "table layout does not match the fitted preprocessor");
    }

    out.features = Matrix(table.num_rows, out.feature_names.size());
    out.labels.resize(table.num_rows);
    size_t offset = 0;
    numeric_index = categorical_index = 0;
    for (const RawColumn& column : table.columns) {
      switch (column.kind) {
        case ColumnKind::kNumeric: {
          const NumericBounds& b = bounds_[numeric_index++];
          for (size_t r = 0; r < table.num_rows; ++r) {
            out.features(r, offset) = b.Scale(column.numeric[r]);
          }
          ++offset;
          break;
        }
        case ColumnKind::kCategorical: {
          const auto& categories = categories_[categorical_index++];
          for (size_t r = 0; r < table.num_rows; ++r) {
            auto it = std::lower_bound(categories.begin(), categories.end(),
                                       column.text[r]);
            if (it != categories.end() && *it == column.text[r]) {
              out.features(r, offset + (it - categories.begin())) = 1.0;
            }
          }
          offset += categories.size();
          break;
        }
        case ColumnKind::kTarget:
          for (size_t r = 0; r < table.num_rows; ++r) {
            out.labels[r] = schema_.positive_labels.contains(column.text[r]);
          }
          break;
        case ColumnKind::kDrop:
          break;
      }
    }
    return out;
  }

  const std::vector<NumericBounds>& bounds() const { return bounds_; }

 private:
  TabularSchema schema_;
  std::vector<NumericBounds> bounds_;
  std::vector<std::vector<std::string>> categories_;
};

inline absl::StatusOr<Dataset> Preprocess(const RawTable& table,
                                          const TabularSchema& schema) {
  DPLA_ASSIGN_OR_RETURN(Preprocessor p, Preprocessor::Fit(table, schema));
  return p.Transform(table);
}

// Row partition: the first half of a stratified shuffle belongs to the
// victim (its train/test), the second half to the attacker.
struct FourWaySplit {
  std::vector<size_t> victim_train;
  std::vector<size_t> victim_test;
  std::vector<size_t> attack_train;
  std::vector<size_t> attack_test;

  friend bool operator==(const FourWaySplit&, const FourWaySplit&) = default;
};

namespace internal {

// ceil(fraction * size), robust to representation error in the product.
inline size_t LeadingShare(double fraction, size_t size) {
  const double exact = fraction * static_cast<double>(size);
  const double floor = std::floor(exact);
  size_t share = static_cast<size_t>(floor);
  if (exact - floor > 1e-9) ++share;
  return std::min(share, size);
}

}  // namespace internal

inline constexpr size_t kMinSplitRows = 8;

// Stratified four-way split. Rows of each class are shuffled and spread
// evenly through one combined ordering, which is then cut into contiguous
// parts, so every part keeps the global class ratio to within one row per
// class. Odd sizes give the surplus row to the earlier part (victim before
// attack, train before test).
inline absl::StatusOr<FourWaySplit> MakeFourWaySplit(
    std::span<const int> labels, uint64_t seed,
    double inner_train_fraction = 0.5) {
  const size_t n = labels.size();
  if (n < kMinSplitRows) {
    return absl::InvalidArgumentError("need at least 8 rows to split, got " +
                                      std::to_string(n));
  }
  if (!(inner_train_fraction > 0.0 && inner_train_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        "inner_train_fraction must lie in (0, 1)");
  }
  Rng rng(DeriveSeed(seed, {0x5b117}));
  std::vector<size_t> by_class[2];
  for (size_t i = 0; i < n; ++i) by_class[labels[i] != 0].push_back(i);

  struct Slot {
    double key;
    int label;
    size_t row;
  };
  std::vector<Slot> order;
  order.reserve(n);
  for (int c = 0; c < 2; ++c) {
    Shuffle(by_class[c], rng);
    const double count = static_cast<double>(by_class[c].size());
    for (size_t k = 0; k < by_class[c].size(); ++k) {
      order.push_back({(static_cast<double>(k) + 0.5) / count, c,
                       by_class[c][k]});
    }
  }
  std::sort(order.begin(), order.end(), [](const Slot& a, const Slot& b) {
    return a.key != b.key ? a.key < b.key : a.label < b.label;
  });

  const size_t victim_size = (n + 1) / 2;
  const size_t attack_size = n - victim_size;
  const size_t victim_train = internal::LeadingShare(inner_train_fraction,
                                                     victim_size);
  const size_t attack_train = internal::LeadingShare(inner_train_fraction,
                                                     attack_size);
  FourWaySplit split;
  const size_t cuts[] = {0, victim_train, victim_size,
                         victim_size + attack_train, n};
  std::vector<size_t>* parts[] = {&split.victim_train, &split.victim_test,
                                  &split.attack_train, &split.attack_test};
  const char* names[] = {"victim_train", "victim_test", "attack_train",
                         "attack_test"};
  for (int p = 0; p < 4; ++p) {
    bool has[2] = {false, false};
    for (size_t i = cuts[p]; i < cuts[p + 1]; ++i) {
      parts[p]->push_back(order[i].row);
      has[order[i].label] = true;
    }
    if (!has[0] || !has[1]) {
      return absl::FailedPreconditionError(
          std::string("dataset too small: part ") + names[p] +
          " does not contain both classes");
    }
  }
  return split;
}

struct SynthOptions {
  int64_t n = 1000;
  int d_numeric = 5;
  int d_categorical = 2;
  double class_separation = 2.0;
  uint64_t seed = 1;
};

struct SynthData {
  RawTable table;
  TabularSchema schema;
};

inline constexpr const char* kSynthTargetColumn = "final_result";

// Two Gaussian clusters: numeric feature j is N(+-separation/2, 1) shifted
// and scaled per column, so each coordinate's class means differ by
// `class_separation` standard deviations. Categorical columns take values
// {a, b, c} with class-tilted frequencies (uniform at separation 0). The
// target is Pass/Distinction for class 1 and Fail/Withdrawn for class 0,
// with exactly floor(n/2) rows in class 1.
// Outcome categories within a class carry no extra signal.
inline absl::StatusOr<SynthData> SynthGenerate(const SynthOptions& options) {
  if (options.n < static_cast<int64_t>(kMinSplitRows)) {
    return absl::InvalidArgumentError("synth needs n >= 8");
  }
  if (options.d_numeric < 1) {
    return absl::InvalidArgumentError("synth needs at least one numeric column");
  }
  if (options.d_categorical < 0) {
    return absl::InvalidArgumentError("categorical column count is negative");
  }
  if (!std::isfinite(options.class_separation)) {
    return absl::InvalidArgumentError("class separation must be finite");
  }
  const size_t n = static_cast<size_t>(options.n);
  Rng rng(DeriveSeed(options.seed, {0x5e7}));

  std::vector<int> labels(n);
  for (size_t i = 0; i < n; ++i) labels[i] = i < n / 2 ? 1 : 0;
  Shuffle(labels, rng);

  SynthData out;
  out.table.num_rows = n;
  for (int j = 0; j < options.d_numeric; ++j) {
    RawColumn column{"num_" + std::to_string(j), ColumnKind::kNumeric, {}, {}};
    const double spread = 1.0 + j;
    const double center = 10.0 * j;
    for (size_t i = 0; i < n; ++i) {
      const double mean = (labels[i] ? 0.5 : -0.5) * options.class_separation;
      column.numeric.push_back(center + spread * (mean + rng.Gaussian()));
    }
    out.schema.columns.push_back({column.name, column.kind});
    out.table.columns.push_back(std::move(column));
  }
  const double tilt = 0.25 * std::tanh(options.class_separation / 2.0);
  for (int j = 0; j < options.d_categorical; ++j) {
    RawColumn column{"cat_" + std::to_string(j), ColumnKind::kCategorical, {},
                     {}};
    for (size_t i = 0; i < n; ++i) {
      const double shift = labels[i] ? tilt : -tilt;
      const double u = rng.Uniform();
      const double p_a = 1.0 / 3.0 + shift;
      column.text.push_back(u < p_a ? "a" : (u < p_a + 1.0 / 3.0 ? "b" : "c"));
    }
    out.schema.columns.push_back({column.name, column.kind});
    out.table.columns.push_back(std::move(column));
  }
  RawColumn target{kSynthTargetColumn, ColumnKind::kTarget, {}, {}};
  size_t seen[2] = {0, 0};
  for (size_t i = 0; i < n; ++i) {
    // Every fourth row of a class gets the "high" outcome.
    const bool high = seen[labels[i]]++ % 4 == 0;
    target.text.push_back(labels[i] ? (high ? "Distinction" : "Pass")
                                    : (high ? "Withdrawn" : "Fail"));
  }
  out.schema.columns.push_back({target.name, target.kind});
  out.table.columns.push_back(std::move(target));
  out.schema.positive_labels = {"Distinction", "Pass"};
  return out;
}

}  // namespace dpla

#endif  // DPLA_DATA_H_
