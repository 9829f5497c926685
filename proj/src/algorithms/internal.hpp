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

#include <functional>
#include <memory>

#include "reczilla/algorithms.hpp"
#include "reczilla/common.hpp"
#include "reczilla/hyperparams.hpp"
#include "reczilla/kernels.hpp"
#include "reczilla/sparse.hpp"

namespace reczilla::detail {

using RecommenderPtr = std::shared_ptr<const Recommender>;

struct FitContext {
  const ParamMap& params;
  const CsrMatrix& train;
  const FitOptions& options;
  const Deadline& deadline;
  const std::string& algorithm;
};

RecommenderPtr fit_top_pop(const FitContext& ctx);
RecommenderPtr fit_random(const FitContext& ctx);
RecommenderPtr fit_global_effects(const FitContext& ctx);
RecommenderPtr fit_slope_one(const FitContext& ctx);
RecommenderPtr fit_co_clustering(const FitContext& ctx);
RecommenderPtr fit_knn(const FitContext& ctx, Axis axis, SimilarityKind kind);
RecommenderPtr fit_graph(const FitContext& ctx, GraphVariant variant);
RecommenderPtr fit_pure_svd(const FitContext& ctx);
RecommenderPtr fit_nmf(const FitContext& ctx);
RecommenderPtr fit_ials(const FitContext& ctx);
RecommenderPtr fit_funk_svd(const FitContext& ctx);
RecommenderPtr fit_asy_svd(const FitContext& ctx);
RecommenderPtr fit_mf_bpr(const FitContext& ctx);
RecommenderPtr fit_slim_bpr(const FitContext& ctx);
RecommenderPtr fit_slim_elastic_net(const FitContext& ctx);
RecommenderPtr fit_ease_r_model(const FitContext& ctx);

/// Throws Error(fit) when any entry is NaN or infinite.
void require_finite(const Eigen::MatrixXd& m, std::string_view what);
/// Throws Error(resource) when a dense rows x cols allocation exceeds the cap
/// (cap is expressed in items, applied as cap^2 cells).
void require_dense_fits(std::int64_t rows, std::int64_t cols, int item_cap, std::string_view what);

/// Scores X_u W where W is stored with one row per source item.
class ItemToItemModel : public Recommender {
 public:
  ItemToItemModel(CsrMatrix ratings, CsrMatrix weights_by_source, std::string state_name)
      : ratings_(std::move(ratings)), weights_(std::move(weights_by_source)), name_(std::move(state_name)) {}
  void score(int user, std::span<double> out) const override;
  const CsrMatrix* sparse_state(std::string_view name) const override {
    return name == name_ ? &weights_ : nullptr;
  }

 private:
  CsrMatrix ratings_;
  CsrMatrix weights_;
  std::string name_;
};

/// Precision@k of a model against held-out interactions, seen items excluded.
double validation_precision(const Recommender& model, const CsrMatrix& train,
                            const CsrMatrix& validation, int k);

/// Early stopping on validation precision@10 evaluated every eval_every
/// epochs; inactive without validation data.
class EarlyStopping {
 public:
  EarlyStopping(const FitOptions& options, const CsrMatrix& train);
  bool active() const { return options_.validation != nullptr && options_.validation->nnz() > 0; }
  /// Returns true when training should stop. `snapshot` builds a model from
  /// the current state; `keep_best` is invoked whenever it improves.
  bool after_epoch(int epoch, const std::function<RecommenderPtr()>& snapshot,
                   const std::function<void()>& keep_best);

 private:
  const FitOptions& options_;
  const CsrMatrix& train_;
  double best_ = -1.0;
  int evaluations_since_best_ = 0;
};

/// Seeded N(0, std^2) matrix.
Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);

}  // namespace reczilla::detail
