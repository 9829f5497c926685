// Copyright 2026 The RecZilla Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment sweeps and the meta-dataset they produce.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "reczilla/algorithms.hpp"
#include "reczilla/dataset.hpp"
#include "reczilla/metafeatures.hpp"
#include "reczilla/metrics.hpp"

namespace reczilla {

enum class ExperimentStatus { ok, timeout, fit_error, resource_error };
std::string_view status_name(ExperimentStatus status);
ExperimentStatus parse_status(std::string_view text);

/// One (dataset, algorithm, hyperparameter set) attempt.
struct ExperimentRecord {
  std::string dataset_id;
  std::string family;
  std::string algorithm;
  int hp_index = 0;  // 0 = defaults
  std::string hp_params;
  ExperimentStatus status = ExperimentStatus::ok;
  double train_time_s = 0.0;
  double eval_time_s = 0.0;
  MetricVector metrics;  // empty unless ok

  bool operator==(const ExperimentRecord&) const = default;
};

struct MetaDataset {
  std::vector<ExperimentRecord> records;
  MetaFeatureTable features;                    // dataset_id -> vector
  std::map<std::string, std::string> families;  // dataset_id -> family

  bool operator==(const MetaDataset&) const = default;

  /// Sorted dataset ids appearing in records or features.
  std::vector<std::string> dataset_ids() const;
  /// Throws schema when a record refers to a dataset without features or
  /// with an inconsistent family.
  void check_consistency() const;
};

struct SweepOptions {
  int max_hp_sets = 100;
  /// Wall-clock budget of the whole (algorithm, dataset) sweep. Checked
  /// between hyperparameter sets and at the cooperative checkpoints of a fit.
  double budget_s = 36000.0;
  std::uint64_t seed = 0;
  std::vector<MetricSpec> metrics;
  /// Worker threads over hyperparameter sets.
  int jobs = 1;
  /// Passed to every fit; budget_s and validation are overridden.
  FitOptions fit;
  /// Use the split's validation part for early stopping.
  bool early_stopping = true;
};

/// Evaluates hyperparameter sets in sample order (defaults first) on the
/// test part of `split`. Every attempt yields one record.
std::vector<ExperimentRecord> run_sweep(const DatasetSplit& split, const std::string& dataset_id,
                                        const std::string& family, const std::string& algorithm,
                                        const SweepOptions& options);

/// 100 (v - p_min) / (p_max - p_min); 100 when p_max == p_min.
double normalize_performance(double value, double p_min, double p_max);

struct BestEntry {
  double value = 0.0;
  int hp_index = 0;
  std::string hp_params;
  bool operator==(const BestEntry&) const = default;
};
/// (dataset, algorithm) -> best ok value; ties keep the lowest hp_index.
std::map<std::pair<std::string, std::string>, BestEntry> best_per_pair(const MetaDataset& metadataset,
                                                                       const MetricSpec& metric);

// ---------------------------------------------------------------------------
// Persistence: results.tsv, metafeatures.tsv and datasets.tsv in a directory.

std::string results_text(const std::vector<ExperimentRecord>& records);
std::vector<ExperimentRecord> parse_results_text(const std::string& text);

void persist(const MetaDataset& metadataset, const std::filesystem::path& dir);
MetaDataset load(const std::filesystem::path& dir);

/// Equality with doubles compared bitwise, so NaN features match.
bool identical(const MetaDataset& a, const MetaDataset& b);

}  // namespace reczilla
