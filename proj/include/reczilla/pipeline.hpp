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

// Algorithm selection: coverage-based algorithm subset, correlation-based
// meta-feature selection, multi-output meta-learner, and family-level
// cross-validation.

#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "reczilla/metadataset.hpp"
#include "reczilla/metafeatures.hpp"
#include "reczilla/metrics.hpp"
#include "reczilla/regressors.hpp"

namespace reczilla {

/// An algorithm with one concrete hyperparameter assignment.
struct ParameterizedAlgorithm {
  std::string algorithm;
  int hp_index = 0;
  std::string hp_params;

  auto operator<=>(const ParameterizedAlgorithm&) const = default;
  std::string label() const;  // "<algorithm>#<hp_index>"
};

/// A metric (maximized) or TRAIN_TIME (minimized).
struct PerformanceTarget {
  bool train_time = false;
  MetricSpec metric;

  bool maximize() const { return !train_time; }
  std::string name() const;
  /// Accepts TRAIN_TIME or BASE@CUTOFF; unknown bases raise unknown_metric.
  static PerformanceTarget parse(std::string_view text);
  bool operator==(const PerformanceTarget&) const = default;
};

/// Reports which datasets each pipeline stage reads. Used to prove that
/// cross-validation never touches held-out families: loocv announces each
/// task with a "held_out" stage before the training stages of that task.
class PipelineObserver {
 public:
  virtual ~PipelineObserver() = default;
  virtual void touched(std::string_view stage, const std::vector<std::string>& dataset_ids) = 0;
};

/// datasets x parameterized algorithms; NaN where no ok record exists.
struct PerformanceMatrix {
  std::vector<std::string> datasets;
  std::vector<std::string> families;  // per dataset
  std::vector<ParameterizedAlgorithm> algorithms;
  Eigen::MatrixXd values;
  bool maximize = true;

  /// Per-dataset min-max scaling to [0, 100], oriented so that 100 is best.
  Eigen::MatrixXd normalized() const;
  /// Best value per dataset (NaN when the row is empty).
  std::vector<double> best() const;
  int column_of(const ParameterizedAlgorithm& a) const;  // -1 when absent
};

PerformanceMatrix performance_matrix(const MetaDataset& metadataset, const PerformanceTarget& target);

/// Mean over rows of the best entry among `subset` columns; NaN counts as 0.
double coverage(const Eigen::MatrixXd& normalized, std::span<const int> subset);
/// Greedy coverage maximization; ties go to the lower column.
std::vector<int> select_algorithms(const Eigen::MatrixXd& normalized, int n);

/// Weighted Pearson correlation; 0 when either weighted variance is 0.
double weighted_correlation(std::span<const double> x, std::span<const double> y, std::span<const double> w);
/// 1 / (number of datasets sharing the family).
std::vector<double> family_weights(const std::vector<std::string>& families);
/// Greedy improvement of the per-algorithm best absolute correlation.
/// `abs_corr` is algorithms x features; ties go to the lower feature.
std::vector<int> select_features(const Eigen::MatrixXd& abs_corr, int m);

struct MetaModel {
  PerformanceTarget target;
  std::vector<ParameterizedAlgorithm> algorithms;
  std::vector<std::string> features;
  std::vector<double> feature_means;
  std::vector<double> feature_stds;
  RegressorKind kind = RegressorKind::knn;
  std::shared_ptr<Regressor> regressor;
  std::vector<std::string> training_families;
  std::uint64_t seed = 0;

  std::string to_text() const;
  static MetaModel from_text(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static MetaModel load(const std::filesystem::path& path);
};

struct TrainOptions {
  int n = 10;
  int m = 10;
  RegressorKind kind = RegressorKind::knn;
  RegressorOptions regressor;
  std::uint64_t seed = 0;
  PipelineObserver* observer = nullptr;
  /// When nonempty, these are predicted instead of the greedy subset (used
  /// to pair a TRAIN_TIME model with a performance model).
  std::vector<ParameterizedAlgorithm> algorithms;
};

MetaModel train_metamodel(const MetaDataset& metadataset, const PerformanceTarget& target,
                          const TrainOptions& options);

struct Prediction {
  int index = 0;
  ParameterizedAlgorithm chosen;
  std::vector<double> predicted;  // one per selected algorithm
};

/// Throws missing_features listing absent names; NaN values are imputed
/// with the training means.
Prediction predict_best(const MetaModel& model, const MetaFeatureVector& features);
std::vector<double> predict_values(const MetaModel& model, const MetaFeatureVector& features);

/// 100 (y* - achieved) / y* when maximizing, 100 (achieved - y*) / achieved
/// when minimizing.
double percent_diff(double y_star, double achieved, bool maximize = true);

struct LoocvOptions {
  TrainOptions train;
  int trials = 1;
  /// When positive, each trial trains on this many randomly chosen
  /// remaining families.
  int max_train_families = 0;
  /// Worker threads over (fold, trial) tasks. With jobs > 1 the train
  /// observer must be thread-safe.
  int jobs = 1;
};

struct LoocvRow {
  int trial = 0;
  std::string family;
  std::string dataset;
  std::string selected;
  double predicted = 0.0;
  double achieved = 0.0;
  double y_star = 0.0;
  double percent_diff = 0.0;
  double mae = 0.0;
  int train_families = 0;
};

struct LoocvFold {
  int trial = 0;
  std::string family;
  double percent_diff = 0.0;  // mean over the family's datasets
  double mae = 0.0;
  int train_families = 0;
};

struct Quantiles {
  double p40 = 0.0;
  double median = 0.0;
  double p60 = 0.0;
};

struct LoocvResult {
  std::vector<LoocvRow> rows;
  std::vector<LoocvFold> folds;
  Quantiles percent_diff;
  Quantiles mae;
};

LoocvResult loocv(const MetaDataset& metadataset, const PerformanceTarget& target, const LoocvOptions& options);

/// Linear-interpolation quantile, q in [0, 1].
double quantile(std::vector<double> values, double q);

/// Members not dominated in (predicted performance, predicted train time),
/// sorted by performance descending (stable).
std::vector<int> pareto_front(std::span<const double> performance, std::span<const double> time,
                              bool maximize_performance = true);
std::vector<int> pareto_front(const MetaModel& performance_model, const MetaModel& time_model,
                              const MetaFeatureVector& features);

}  // namespace reczilla
