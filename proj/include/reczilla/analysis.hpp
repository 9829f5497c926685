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

// Study reports over a meta-dataset, emitted as TSV tables.

#pragma once

#include <Eigen/Dense>

#include <map>
#include <span>
#include <string>
#include <vector>

#include "reczilla/metadataset.hpp"
#include "reczilla/pipeline.hpp"

namespace reczilla {

struct RankStats {
  int min_rank = 0;
  int max_rank = 0;
  double mean_rank = 0.0;
  int datasets = 0;
};
/// metric -> algorithm -> rank statistics over qualifying datasets.
using RankTable = std::map<MetricSpec, std::map<std::string, RankStats>>;

/// Competition ranks (1 = largest value; ties share the minimum rank).
std::vector<int> competition_ranks(std::span<const double> values);

/// Ranks algorithms per dataset by their best hyperparameter value; datasets
/// with fewer than `min_algorithms` participants are skipped.
RankTable rank_table(const MetaDataset& metadataset, const std::vector<MetricSpec>& metrics, int min_algorithms);
std::string rank_table_text(const RankTable& table);

enum class HpFilter { defaults_only, best_per_pair };
HpFilter parse_hp_filter(std::string_view text);

struct CorrelationEntry {
  std::string algorithm;
  std::string feature;
  double correlation = 0.0;  // signed
  int datasets = 0;
};

/// Family-weighted correlations between each meta-feature and each
/// algorithm's target, top_k by absolute value.
std::vector<CorrelationEntry> correlation_report(const MetaDataset& metadataset, const PerformanceTarget& target,
                                                 int top_k, HpFilter filter);
std::string correlation_report_text(const std::vector<CorrelationEntry>& entries);

/// dataset -> negative best value over ok records.
std::map<std::string, double> dataset_hardness(const MetaDataset& metadataset, const MetricSpec& metric);
std::string hardness_text(const std::map<std::string, double>& hardness);

struct TransferMatrix {
  std::vector<std::string> datasets;
  Eigen::MatrixXd values;  // NaN = missing
};

/// Entry (i, j): performance on j, min-max scaled over the hyperparameter
/// sets completed on both, of the set that is best on i.
TransferMatrix transfer_matrix(const MetaDataset& metadataset, const std::string& algorithm, const MetricSpec& metric);
/// Mean of the defined entries over all algorithms.
TransferMatrix average_transfer_matrix(const MetaDataset& metadataset, const MetricSpec& metric);
std::string transfer_matrix_text(const TransferMatrix& matrix);

}  // namespace reczilla
