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

#include <algorithm>
#include <chrono>
#include <cmath>

#include "internal.hpp"

namespace reczilla {

FittedModel::FittedModel(std::string algorithm, ParamMap params, std::shared_ptr<const CsrMatrix> train,
                         std::shared_ptr<const Recommender> impl, double train_time_s)
    : algorithm_(std::move(algorithm)),
      params_(std::move(params)),
      train_(std::move(train)),
      impl_(std::move(impl)),
      train_time_s_(train_time_s) {}

void FittedModel::score_into(int user, bool exclude_seen, std::span<double> out) const {
  if (user < 0 || user >= num_users()) {
    fail(ErrorCode::not_found, "user index " + std::to_string(user) + " outside the training users");
  }
  if (static_cast<int>(out.size()) != num_items()) fail(ErrorCode::invalid_argument, "score buffer size");
  std::fill(out.begin(), out.end(), 0.0);
  impl_->score(user, out);
  if (exclude_seen) {
    for (int item : train_->row_indices(user)) out[static_cast<std::size_t>(item)] = kExcludedScore;
  }
}

std::vector<double> FittedModel::score(int user, bool exclude_seen) const {
  std::vector<double> out(static_cast<std::size_t>(num_items()));
  score_into(user, exclude_seen, out);
  return out;
}

std::vector<int> FittedModel::recommend(int user, int k, bool exclude_seen) const {
  return top_k_items(score(user, exclude_seen), k);
}

std::vector<int> top_k_items(std::span<const double> scores, int k) {
  std::vector<int> idx;
  idx.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] != kExcludedScore) idx.push_back(static_cast<int>(i));
  }
  auto better = [&](int a, int b) {
    const double sa = scores[static_cast<std::size_t>(a)];
    const double sb = scores[static_cast<std::size_t>(b)];
    return sa != sb ? sa > sb : a < b;
  };
  const std::size_t take = std::min(idx.size(), static_cast<std::size_t>(std::max(k, 0)));
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), better);
  idx.resize(take);
  return idx;
}

namespace {

detail::RecommenderPtr dispatch(const detail::FitContext& ctx) {
  const std::string& name = ctx.algorithm;
  if (name == "TopPop") return detail::fit_top_pop(ctx);
  if (name == "Random") return detail::fit_random(ctx);
  if (name == "GlobalEffects") return detail::fit_global_effects(ctx);
  if (name == "SlopeOne") return detail::fit_slope_one(ctx);
  if (name == "CoClustering") return detail::fit_co_clustering(ctx);
  for (const auto& [prefix, axis] : {std::pair<std::string, Axis>{"ItemKNN-", Axis::item},
                                     std::pair<std::string, Axis>{"UserKNN-", Axis::user}}) {
    if (name.rfind(prefix, 0) == 0) {
      return detail::fit_knn(ctx, axis, parse_similarity_kind(name.substr(prefix.size())));
    }
  }
  if (name == "P3alpha") return detail::fit_graph(ctx, GraphVariant::p3alpha);
  if (name == "RP3beta") return detail::fit_graph(ctx, GraphVariant::rp3beta);
  if (name == "PureSVD") return detail::fit_pure_svd(ctx);
  if (name == "NMF") return detail::fit_nmf(ctx);
  if (name == "iALS") return detail::fit_ials(ctx);
  if (name == "MF-FunkSVD") return detail::fit_funk_svd(ctx);
  if (name == "MF-AsySVD") return detail::fit_asy_svd(ctx);
  if (name == "MF-BPR") return detail::fit_mf_bpr(ctx);
  if (name == "SLIM-BPR") return detail::fit_slim_bpr(ctx);
  if (name == "SLIM-ElasticNet") return detail::fit_slim_elastic_net(ctx);
  if (name == "EASE-R") return detail::fit_ease_r_model(ctx);
  fail(ErrorCode::not_found, "no implementation for algorithm " + name);
}

}  // namespace

FittedModel fit(const std::string& algorithm, const ParamMap& params, const CsrMatrix& train,
                const FitOptions& options) {
  const AlgorithmInfo& info = find_algorithm(algorithm);
  if (train.nnz() == 0) fail(ErrorCode::empty_dataset, "cannot fit on an empty training matrix");
  if (!(options.budget_s > 0)) fail(ErrorCode::invalid_argument, "fit budget must be positive");
  if (options.validation != nullptr &&
      (options.validation->rows() != train.rows() || options.validation->cols() != train.cols())) {
    fail(ErrorCode::invalid_argument, "validation matrix shape differs from train");
  }
  ParamMap full = info.space.defaults();
  for (const auto& [k, v] : params) full[k] = v;
  info.space.validate(full);

  const auto start = std::chrono::steady_clock::now();
  const Deadline deadline(options.budget_s);
  auto train_copy = std::make_shared<const CsrMatrix>(train);
  detail::FitContext ctx{full, *train_copy, options, deadline, algorithm};
  detail::RecommenderPtr impl = dispatch(ctx);
  return FittedModel(algorithm, std::move(full), std::move(train_copy), std::move(impl),
                     seconds_since(start));
}

namespace detail {

void require_finite(const Eigen::MatrixXd& m, std::string_view what) {
  if (!m.allFinite()) fail(ErrorCode::fit, std::string(what) + " contains non-finite values");
}

void require_dense_fits(std::int64_t rows, std::int64_t cols, int item_cap, std::string_view what) {
  const std::int64_t cap = static_cast<std::int64_t>(item_cap) * item_cap;
  if (rows * cols > cap) {
    fail(ErrorCode::resource, std::string(what) + " needs a dense " + std::to_string(rows) + "x" +
                                  std::to_string(cols) + " matrix, above the configured cap of " +
                                  std::to_string(item_cap) + " items");
  }
}

void ItemToItemModel::score(int user, std::span<double> out) const {
  auto items = ratings_.row_indices(user);
  auto values = ratings_.row_values(user);
  for (std::size_t k = 0; k < items.size(); ++k) {
    const double r = values[k];
    auto targets = weights_.row_indices(items[k]);
    auto w = weights_.row_values(items[k]);
    for (std::size_t t = 0; t < targets.size(); ++t) out[static_cast<std::size_t>(targets[t])] += r * w[t];
  }
}

double validation_precision(const Recommender& model, const CsrMatrix& train,
                            const CsrMatrix& validation, int k) {
  std::vector<double> scores(static_cast<std::size_t>(train.cols()));
  double total = 0.0;
  int users = 0;
  for (int u = 0; u < validation.rows(); ++u) {
    if (validation.row_nnz(u) == 0) continue;
    std::fill(scores.begin(), scores.end(), 0.0);
    model.score(u, scores);
    for (int item : train.row_indices(u)) scores[static_cast<std::size_t>(item)] = kExcludedScore;
    int hits = 0;
    for (int item : top_k_items(scores, k)) hits += validation.contains(u, item) ? 1 : 0;
    total += static_cast<double>(hits) / k;
    ++users;
  }
  return users > 0 ? total / users : 0.0;
}

EarlyStopping::EarlyStopping(const FitOptions& options, const CsrMatrix& train)
    : options_(options), train_(train) {}

bool EarlyStopping::after_epoch(int epoch, const std::function<RecommenderPtr()>& snapshot,
                                const std::function<void()>& keep_best) {
  if (!active()) return false;
  if ((epoch + 1) % std::max(1, options_.eval_every) != 0) return false;
  const double value = validation_precision(*snapshot(), train_, *options_.validation, 10);
  if (value > best_) {
    best_ = value;
    evaluations_since_best_ = 0;
    keep_best();
    return false;
  }
  return ++evaluations_since_best_ >= options_.patience;
}

Eigen::MatrixXd random_normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = stddev * rng.normal();
  }
  return m;
}

}  // namespace detail
}  // namespace reczilla
