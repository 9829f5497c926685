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
#include <cmath>
#include <map>

#include "internal.hpp"

namespace reczilla {

Eigen::MatrixXd fit_ease_r(const CsrMatrix& ratings, double l2, int item_cap) {
  const int n = ratings.cols();
  detail::require_dense_fits(n, n, item_cap, "EASE-R");
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  for (int u = 0; u < ratings.rows(); ++u) {
    auto idx = ratings.row_indices(u);
    auto val = ratings.row_values(u);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      for (std::size_t b = 0; b < idx.size(); ++b) gram(idx[a], idx[b]) += val[a] * val[b];
    }
  }
  gram.diagonal().array() += l2;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) fail(ErrorCode::fit, "EASE-R gram matrix is not positive definite");
  const Eigen::MatrixXd p = llt.solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd b(n, n);
  for (int j = 0; j < n; ++j) b.col(j) = -p.col(j) / p(j, j);
  b.diagonal().setZero();
  detail::require_finite(b, "EASE-R");
  return b;
}

Eigen::VectorXd slim_elastic_net_column(const CsrMatrix& ratings, const CsrMatrix& item_major, int target,
                                        double alpha, double l1_ratio, int max_iter, double tol) {
  const int n_items = ratings.cols();
  const double n = std::max(1, ratings.rows());
  const double l1 = alpha * l1_ratio;
  const double l2 = alpha * (1.0 - l1_ratio);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_items);

  // Residual r = y - X w over users; starts at y.
  Eigen::VectorXd residual = Eigen::VectorXd::Zero(ratings.rows());
  {
    auto users = item_major.row_indices(target);
    auto vals = item_major.row_values(target);
    for (std::size_t k = 0; k < users.size(); ++k) residual(users[k]) = vals[k];
  }

  // With nonnegative data and weights, features never co-rated with the
  // target keep rho <= 0 from a zero start, so they can be skipped.
  const bool nonnegative =
      std::all_of(ratings.values().begin(), ratings.values().end(), [](double v) { return v >= 0.0; });
  std::vector<int> candidates;
  if (nonnegative) {
    std::vector<char> seen(static_cast<std::size_t>(n_items), 0);
    for (int u : item_major.row_indices(target)) {
      for (int j : ratings.row_indices(u)) {
        if (j != target && !seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          candidates.push_back(j);
        }
      }
    }
    std::sort(candidates.begin(), candidates.end());
  } else {
    for (int j = 0; j < n_items; ++j) {
      if (j != target) candidates.push_back(j);
    }
  }

  std::vector<double> z(static_cast<std::size_t>(n_items), 0.0);
  for (int j : candidates) {
    for (double v : item_major.row_values(j)) z[static_cast<std::size_t>(j)] += v * v;
    z[static_cast<std::size_t>(j)] /= n;
  }

  for (int iter = 0; iter < max_iter; ++iter) {
    double max_delta = 0.0, max_w = 0.0;
    for (int j : candidates) {
      const double zj = z[static_cast<std::size_t>(j)];
      if (zj == 0.0) continue;
      auto users = item_major.row_indices(j);
      auto vals = item_major.row_values(j);
      const double old = w(j);
      double rho = 0.0;
      for (std::size_t k = 0; k < users.size(); ++k) rho += vals[k] * residual(users[k]);
      rho = rho / n + zj * old;
      const double updated = std::max(0.0, rho - l1) / (zj + l2);
      if (updated != old) {
        const double diff = updated - old;
        for (std::size_t k = 0; k < users.size(); ++k) residual(users[k]) -= vals[k] * diff;
        w(j) = updated;
      }
      max_delta = std::max(max_delta, std::abs(updated - old));
      max_w = std::max(max_w, std::abs(updated));
    }
    if (max_w == 0.0 || max_delta <= tol * max_w) break;
  }
  return w;
}

namespace detail {

namespace {

class EaseModel : public Recommender {
 public:
  EaseModel(CsrMatrix ratings, Eigen::MatrixXd weights) : ratings_(std::move(ratings)), b_(std::move(weights)) {}

  void score(int user, std::span<double> out) const override {
    Eigen::Map<Eigen::RowVectorXd> s(out.data(), static_cast<Eigen::Index>(out.size()));
    auto idx = ratings_.row_indices(user);
    auto val = ratings_.row_values(user);
    for (std::size_t k = 0; k < idx.size(); ++k) s += val[k] * b_.row(idx[k]);
  }
  const Eigen::MatrixXd* dense_state(std::string_view name) const override {
    return name == "weights" ? &b_ : nullptr;
  }

 private:
  CsrMatrix ratings_;
  Eigen::MatrixXd b_;
};

}  // namespace

RecommenderPtr fit_ease_r_model(const FitContext& ctx) {
  Eigen::MatrixXd b = fit_ease_r(ctx.train, param_real(ctx.params, "l2-norm"), ctx.options.dense_item_cap);
  return std::make_shared<EaseModel>(ctx.train, std::move(b));
}

RecommenderPtr fit_slim_elastic_net(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const int top_k = static_cast<int>(param_int(ctx.params, "top-K"));
  const bool symmetric = param_bool(ctx.params, "symmetric");
  const double l1_ratio = param_real(ctx.params, "l1-ratio");
  const double alpha = param_real(ctx.params, "alpha");
  const CsrMatrix item_major = x.transpose();

  // (source, target) -> weight
  std::map<std::pair<int, int>, double> weights;
  for (int t = 0; t < x.cols(); ++t) {
    ctx.deadline.check("SLIM-ElasticNet", t > 0);
    const Eigen::VectorXd w = slim_elastic_net_column(x, item_major, t, alpha, l1_ratio);
    for (const auto& [s, v] : top_k_nonzero(std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                                            top_k, t)) {
      weights[{s, t}] = v;
    }
  }
  if (symmetric) {
    std::map<std::pair<int, int>, double> averaged;
    for (const auto& [key, v] : weights) {
      averaged[key] += 0.5 * v;
      averaged[{key.second, key.first}] += 0.5 * v;
    }
    weights.swap(averaged);
  }
  std::vector<Triplet> triplets;
  triplets.reserve(weights.size());
  for (const auto& [key, v] : weights) triplets.push_back({key.first, key.second, v});
  return std::make_shared<ItemToItemModel>(x, CsrMatrix::from_triplets(x.cols(), x.cols(), std::move(triplets)),
                                           "weights");
}

}  // namespace detail
}  // namespace reczilla
