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

#pragma once

#include <Eigen/Dense>

#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reczilla/hyperparams.hpp"
#include "reczilla/sparse.hpp"

namespace reczilla {

/// Score given to excluded (already seen) items. Items carrying it never
/// enter a recommendation list.
inline constexpr double kExcludedScore = std::numeric_limits<double>::lowest();

struct FitOptions {
  double budget_s = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
  /// Optional held-out interactions (same shape as train) for early stopping
  /// of the SGD-trained models.
  const CsrMatrix* validation = nullptr;
  int max_epochs = 300;
  int patience = 5;
  int eval_every = 5;
  int ials_iterations = 15;
  int nmf_iterations = 200;
  /// Dense item x item (and user x item) state is refused above this size.
  int dense_item_cap = 20000;
  /// Called after every factor update of iterative factorizations with the
  /// factor name ("W", "H", ...) and its current value.
  std::function<void(std::string_view, const Eigen::MatrixXd&)> observer;
};

/// Learned state of one fitted algorithm.
class Recommender {
 public:
  virtual ~Recommender() = default;
  /// Writes one score per item for a known user.
  virtual void score(int user, std::span<double> out) const = 0;
  /// Named pieces of learned state for inspection; nullptr when absent.
  virtual const Eigen::MatrixXd* dense_state(std::string_view /*name*/) const { return nullptr; }
  virtual const CsrMatrix* sparse_state(std::string_view /*name*/) const { return nullptr; }
};

class FittedModel {
 public:
  FittedModel(std::string algorithm, ParamMap params, std::shared_ptr<const CsrMatrix> train,
              std::shared_ptr<const Recommender> impl, double train_time_s);

  const std::string& algorithm() const { return algorithm_; }
  const ParamMap& params() const { return params_; }
  double train_time_s() const { return train_time_s_; }
  int num_users() const { return train_->rows(); }
  int num_items() const { return train_->cols(); }
  const Recommender& impl() const { return *impl_; }

  /// Throws not_found for users outside the training index space.
  std::vector<double> score(int user, bool exclude_seen) const;
  void score_into(int user, bool exclude_seen, std::span<double> out) const;
  /// Top-k items by score (ties to the lower index), never containing
  /// excluded items; may be shorter than k.
  std::vector<int> recommend(int user, int k, bool exclude_seen = true) const;

 private:
  std::string algorithm_;
  ParamMap params_;
  std::shared_ptr<const CsrMatrix> train_;
  std::shared_ptr<const Recommender> impl_;
  double train_time_s_;
};

/// Fits a catalog algorithm. Parameters missing from `params` take their
/// defaults; out-of-space values are rejected. Throws TimeoutError when the
/// budget expires, Error(fit) for numerically invalid fits and
/// Error(resource) when dense state would exceed the configured cap.
FittedModel fit(const std::string& algorithm, const ParamMap& params, const CsrMatrix& train,
                const FitOptions& options = {});

/// Ranks the top-k entries of a score row, skipping kExcludedScore.
std::vector<int> top_k_items(std::span<const double> scores, int k);

}  // namespace reczilla
