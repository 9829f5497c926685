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

// Dataset meta-features: size, rating distribution and landmarker scores.

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reczilla/metrics.hpp"
#include "reczilla/sparse.hpp"

namespace reczilla {

/// Ordered (name, value) pairs; NaN marks a missing value.
using MetaFeatureVector = std::vector<std::pair<std::string, double>>;

inline constexpr int kNumGeneralFeatures = 5;
inline constexpr int kNumDistributionFeatures = 70;
inline constexpr int kNumLandmarkFeatures = 308;
inline constexpr int kNumMetaFeatures = 383;
inline constexpr std::uint64_t kDefaultLandmarkSeed = 0;

/// Canonical order of all 383 names.
const std::vector<std::string>& metafeature_names();

/// Landmarker names and their evaluated metric names (22, including the
/// ITEMS_IN_EVAL_SET and USERS_IN_EVAL_SET descriptors).
const std::vector<std::string>& landmarker_names();
const std::vector<std::string>& landmark_metric_names();
inline const std::array<int, 2> kLandmarkCutoffs{1, 5};

// ---------------------------------------------------------------------------
// Statistics

/// mean, max, min, std, median, mode, gini, skewness, kurtosis, entropy.
inline constexpr int kNumStatistics = 10;
const std::array<std::string_view, kNumStatistics>& statistic_names();
std::array<double, kNumStatistics> describe(std::span<const double> values);

double gini_index(std::span<const double> values);
/// Entropy of the weight distribution v / sum(v) over positive entries.
double weight_entropy(std::span<const double> values);

// ---------------------------------------------------------------------------
// Feature groups

MetaFeatureVector general_features(const CsrMatrix& train);
MetaFeatureVector distribution_features(const CsrMatrix& train);

struct LandmarkSubsample {
  CsrMatrix train;       // selected users x selected items
  CsrMatrix validation;  // exactly one entry per user
  std::vector<int> users;
  std::vector<int> items;
};

/// Staged subsample of users (at most 100) and items (at most 250, at least
/// 6) for the landmarkers. nullopt when no user has two ratings.
std::optional<LandmarkSubsample> landmark_subsample(const CsrMatrix& train, std::uint64_t seed);

/// Landmarkers evaluated on the subsample; missing values when subsampling
/// or a landmarker fails.
MetaFeatureVector landmark_features(const CsrMatrix& train, std::uint64_t seed);

/// All 383 features in canonical order, computed on the canonical relabeling
/// of `train` so that the result does not depend on user or item ids.
MetaFeatureVector all_features(const CsrMatrix& train, std::uint64_t seed = kDefaultLandmarkSeed);

/// Rows and columns reordered by a structural signature that ignores the
/// original indices.
CsrMatrix canonical_relabel(const CsrMatrix& m);

// ---------------------------------------------------------------------------
// Persistence: `#schema=reczilla/1`, header, dataset_id<TAB>feature_name<TAB>value.

using MetaFeatureTable = std::map<std::string, MetaFeatureVector>;

std::string metafeature_text(const MetaFeatureTable& table);
MetaFeatureTable parse_metafeature_text(const std::string& text);
void write_metafeatures(const std::filesystem::path& path, const MetaFeatureTable& table);
MetaFeatureTable read_metafeatures(const std::filesystem::path& path);

/// Value of a named feature; NaN when absent.
double feature_value(const MetaFeatureVector& features, const std::string& name);

}  // namespace reczilla
