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

// Multi-output regressors used as meta-learners.

#pragma once

#include <Eigen/Dense>

#include <map>
#include <memory>
#include <string>
#include <vector>

namespace reczilla {

enum class RegressorKind { knn, linear, gbt_chain, random };
std::string_view regressor_kind_name(RegressorKind kind);
RegressorKind parse_regressor_kind(std::string_view name);

struct RegressorOptions {
  int knn_k = 5;
  int trees = 200;
  int depth = 3;
  double learning_rate = 0.1;
};

/// Flattened parameters, one `key=value` line each.
using RegressorState = std::map<std::string, std::string>;

class Regressor {
 public:
  virtual ~Regressor() = default;
  virtual RegressorKind kind() const = 0;
  /// x: samples x features, y: samples x outputs.
  virtual void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) = 0;
  virtual Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const = 0;
  virtual RegressorState save() const = 0;
  virtual void load(const RegressorState& state) = 0;
};

std::unique_ptr<Regressor> make_regressor(RegressorKind kind, const RegressorOptions& options = {});

/// k nearest training points under L2 distance; mean of their targets.
/// Distance ties go to the earlier training point.
class KnnRegressor : public Regressor {
 public:
  explicit KnnRegressor(int k = 5) : k_(k) {}
  RegressorKind kind() const override { return RegressorKind::knn; }
  void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) override;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override;
  RegressorState save() const override;
  void load(const RegressorState& state) override;
  void set_k(int k) { k_ = k; }

 private:
  int k_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd y_;
};

/// Independent least squares per output with an intercept (minimum-norm
/// solution when underdetermined).
class LinearRegressor : public Regressor {
 public:
  RegressorKind kind() const override { return RegressorKind::linear; }
  void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) override;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override;
  RegressorState save() const override;
  void load(const RegressorState& state) override;
  const Eigen::MatrixXd& coefficients() const { return coef_; }  // (1 + features) x outputs

 private:
  Eigen::MatrixXd coef_;
};

/// Depth-limited squared-error regression tree stored as a flat node array.
struct RegressionTree {
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  /// Fits `target` on the rows of x; leaves hold the mean target.
  static RegressionTree fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, int max_depth);
};

/// Gradient-boosted trees chained across outputs: stage t sees the features
/// plus the predictions of stages 0..t-1.
class GbtChainRegressor : public Regressor {
 public:
  explicit GbtChainRegressor(const RegressorOptions& options = {}) : options_(options) {}
  RegressorKind kind() const override { return RegressorKind::gbt_chain; }
  void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) override;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override;
  RegressorState save() const override;
  void load(const RegressorState& state) override;
  /// Training MSE of stage `output` after each boosting round.
  const std::vector<double>& loss_history(int output) const { return history_.at(static_cast<std::size_t>(output)); }

 private:
  struct Stage {
    double init = 0.0;
    std::vector<RegressionTree> trees;
  };
  double predict_stage(const Stage& stage, const Eigen::Ref<const Eigen::RowVectorXd>& x) const;

  RegressorOptions options_;
  std::vector<Stage> stages_;
  std::vector<std::vector<double>> history_;
};

/// Predicts the training mean of every output; the selection itself is
/// randomized by the pipeline.
class MeanRegressor : public Regressor {
 public:
  RegressorKind kind() const override { return RegressorKind::random; }
  void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) override;
  Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const override;
  RegressorState save() const override;
  void load(const RegressorState& state) override;

 private:
  Eigen::RowVectorXd mean_;
};

}  // namespace reczilla
