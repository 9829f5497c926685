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
#include <numeric>

#include "internal.hpp"

namespace reczilla::detail {

namespace {

class TopPopModel : public Recommender {
 public:
  explicit TopPopModel(std::vector<double> counts)
      : counts_(Eigen::Map<const Eigen::VectorXd>(counts.data(), static_cast<Eigen::Index>(counts.size()))) {}
  void score(int /*user*/, std::span<double> out) const override {
    std::copy(counts_.data(), counts_.data() + counts_.size(), out.begin());
  }
  const Eigen::MatrixXd* dense_state(std::string_view name) const override {
    return name == "popularity" ? &counts_ : nullptr;
  }

 private:
  Eigen::MatrixXd counts_;
};

class RandomModel : public Recommender {
 public:
  explicit RandomModel(std::uint64_t seed) : seed_(seed) {}
  void score(int user, std::span<double> out) const override {
    Rng rng(mix_seed(seed_, static_cast<std::uint64_t>(user)));
    for (double& v : out) v = rng.uniform();
  }

 private:
  std::uint64_t seed_;
};

class GlobalEffectsModel : public Recommender {
 public:
  GlobalEffectsModel(double mu, Eigen::VectorXd item_bias, Eigen::VectorXd user_bias)
      : mu_(mu), item_bias_(std::move(item_bias)), user_bias_(std::move(user_bias)) {}
  void score(int user, std::span<double> out) const override {
    for (std::size_t i = 0; i < out.size(); ++i) {
      out[i] = mu_ + item_bias_(static_cast<Eigen::Index>(i)) + user_bias_(user);
    }
  }
  const Eigen::MatrixXd* dense_state(std::string_view name) const override {
    if (name == "item_bias") return &item_bias_;
    if (name == "user_bias") return &user_bias_;
    return nullptr;
  }

 private:
  double mu_;
  Eigen::MatrixXd item_bias_;
  Eigen::MatrixXd user_bias_;
};

class SlopeOneModel : public Recommender {
 public:
  SlopeOneModel(CsrMatrix ratings, Eigen::MatrixXd dev, Eigen::MatrixXd support, Eigen::VectorXd user_mean)
      : ratings_(std::move(ratings)), dev_(std::move(dev)), support_(std::move(support)),
        user_mean_(std::move(user_mean)) {}

  void score(int user, std::span<double> out) const override {
    auto rated = ratings_.row_indices(user);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      double total = 0.0;
      int count = 0;
      for (int j : rated) {
        if (support_(ii, j) > 0) {
          total += dev_(ii, j);
          ++count;
        }
      }
      out[i] = user_mean_(user) + (count > 0 ? total / count : 0.0);
    }
  }
  const Eigen::MatrixXd* dense_state(std::string_view name) const override {
    if (name == "deviation") return &dev_;
    if (name == "support") return &support_;
    return nullptr;
  }

 private:
  CsrMatrix ratings_;
  Eigen::MatrixXd dev_;
  Eigen::MatrixXd support_;
  Eigen::VectorXd user_mean_;
};

class CoClusteringModel : public Recommender {
 public:
  CoClusteringModel(std::vector<int> user_cluster, std::vector<int> item_cluster, Eigen::MatrixXd cocluster_mean,
                    Eigen::VectorXd user_cluster_mean, Eigen::VectorXd item_cluster_mean,
                    Eigen::VectorXd user_mean, Eigen::VectorXd item_mean)
      : user_cluster_(std::move(user_cluster)), item_cluster_(std::move(item_cluster)),
        cocluster_mean_(std::move(cocluster_mean)), user_cluster_mean_(std::move(user_cluster_mean)),
        item_cluster_mean_(std::move(item_cluster_mean)), user_mean_(std::move(user_mean)),
        item_mean_(std::move(item_mean)) {}

  void score(int user, std::span<double> out) const override {
    const int cu = user_cluster_[static_cast<std::size_t>(user)];
    for (std::size_t i = 0; i < out.size(); ++i) {
      const int ci = item_cluster_[i];
      out[i] = cocluster_mean_(cu, ci) + (user_mean_(user) - user_cluster_mean_(cu)) +
               (item_mean_(static_cast<Eigen::Index>(i)) - item_cluster_mean_(ci));
    }
  }

 private:
  std::vector<int> user_cluster_;
  std::vector<int> item_cluster_;
  Eigen::MatrixXd cocluster_mean_;
  Eigen::VectorXd user_cluster_mean_;
  Eigen::VectorXd item_cluster_mean_;
  Eigen::VectorXd user_mean_;
  Eigen::VectorXd item_mean_;
};

double global_mean(const CsrMatrix& m) {
  const auto& v = m.values();
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

RecommenderPtr fit_top_pop(const FitContext& ctx) {
  std::vector<int> counts = ctx.train.col_counts();
  return std::make_shared<TopPopModel>(std::vector<double>(counts.begin(), counts.end()));
}

RecommenderPtr fit_random(const FitContext& ctx) {
  return std::make_shared<RandomModel>(mix_seed(ctx.options.seed, hash_string("Random")));
}

RecommenderPtr fit_global_effects(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const double mu = global_mean(x);
  Eigen::VectorXd item_sum = Eigen::VectorXd::Zero(x.cols());
  Eigen::VectorXd item_n = Eigen::VectorXd::Zero(x.cols());
  for (int u = 0; u < x.rows(); ++u) {
    auto idx = x.row_indices(u);
    auto val = x.row_values(u);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      item_sum(idx[k]) += val[k] - mu;
      item_n(idx[k]) += 1.0;
    }
  }
  Eigen::VectorXd item_bias = Eigen::VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    if (item_n(i) > 0) item_bias(i) = item_sum(i) / item_n(i);
  }
  Eigen::VectorXd user_bias = Eigen::VectorXd::Zero(x.rows());
  for (int u = 0; u < x.rows(); ++u) {
    auto idx = x.row_indices(u);
    auto val = x.row_values(u);
    if (idx.empty()) continue;
    double s = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) s += val[k] - mu - item_bias(idx[k]);
    user_bias(u) = s / static_cast<double>(idx.size());
  }
  return std::make_shared<GlobalEffectsModel>(mu, std::move(item_bias), std::move(user_bias));
}

RecommenderPtr fit_slope_one(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const int n_items = x.cols();
  require_dense_fits(n_items, n_items, ctx.options.dense_item_cap, "SlopeOne");
  Eigen::MatrixXd dev = Eigen::MatrixXd::Zero(n_items, n_items);
  Eigen::MatrixXd support = Eigen::MatrixXd::Zero(n_items, n_items);
  Eigen::VectorXd user_mean = Eigen::VectorXd::Zero(x.rows());
  for (int u = 0; u < x.rows(); ++u) {
    ctx.deadline.check("SlopeOne", false);
    auto idx = x.row_indices(u);
    auto val = x.row_values(u);
    double s = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      s += val[a];
      for (std::size_t b = 0; b < idx.size(); ++b) {
        if (a == b) continue;
        dev(idx[a], idx[b]) += val[a] - val[b];
        support(idx[a], idx[b]) += 1.0;
      }
    }
    if (!idx.empty()) user_mean(u) = s / static_cast<double>(idx.size());
  }
  for (Eigen::Index i = 0; i < n_items; ++i) {
    for (Eigen::Index j = 0; j < n_items; ++j) {
      if (support(i, j) > 0) dev(i, j) /= support(i, j);
    }
  }
  return std::make_shared<SlopeOneModel>(x, std::move(dev), std::move(support), std::move(user_mean));
}

RecommenderPtr fit_co_clustering(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const CsrMatrix xt = x.transpose();
  const int n_users = x.rows();
  const int n_items = x.cols();
  const int ku = static_cast<int>(std::min<std::int64_t>(param_int(ctx.params, "num-control-users"), n_users));
  const int ki = static_cast<int>(std::min<std::int64_t>(param_int(ctx.params, "num-control-items"), n_items));
  const double mu = global_mean(x);

  Eigen::VectorXd user_mean = Eigen::VectorXd::Constant(n_users, mu);
  Eigen::VectorXd item_mean = Eigen::VectorXd::Constant(n_items, mu);
  for (int u = 0; u < n_users; ++u) {
    auto v = x.row_values(u);
    if (!v.empty()) user_mean(u) = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }
  for (int i = 0; i < n_items; ++i) {
    auto v = xt.row_values(i);
    if (!v.empty()) item_mean(i) = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  }

  Rng rng(mix_seed(ctx.options.seed, hash_string("CoClustering")));
  std::vector<int> cu(static_cast<std::size_t>(n_users));
  std::vector<int> ci(static_cast<std::size_t>(n_items));
  for (auto& c : cu) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(ku)));
  for (auto& c : ci) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(ki)));

  Eigen::MatrixXd co_mean(ku, ki);
  Eigen::VectorXd ucl_mean(ku);
  Eigen::VectorXd icl_mean(ki);
  auto recompute = [&] {
    Eigen::MatrixXd co_sum = Eigen::MatrixXd::Zero(ku, ki);
    Eigen::MatrixXd co_n = Eigen::MatrixXd::Zero(ku, ki);
    Eigen::VectorXd u_sum = Eigen::VectorXd::Zero(ku), u_n = Eigen::VectorXd::Zero(ku);
    Eigen::VectorXd i_sum = Eigen::VectorXd::Zero(ki), i_n = Eigen::VectorXd::Zero(ki);
    for (int u = 0; u < n_users; ++u) {
      auto idx = x.row_indices(u);
      auto val = x.row_values(u);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const int a = cu[static_cast<std::size_t>(u)];
        const int b = ci[static_cast<std::size_t>(idx[k])];
        co_sum(a, b) += val[k];
        co_n(a, b) += 1;
        u_sum(a) += val[k];
        u_n(a) += 1;
        i_sum(b) += val[k];
        i_n(b) += 1;
      }
    }
    for (int a = 0; a < ku; ++a) {
      ucl_mean(a) = u_n(a) > 0 ? u_sum(a) / u_n(a) : mu;
      for (int b = 0; b < ki; ++b) co_mean(a, b) = co_n(a, b) > 0 ? co_sum(a, b) / co_n(a, b) : mu;
    }
    for (int b = 0; b < ki; ++b) icl_mean(b) = i_n(b) > 0 ? i_sum(b) / i_n(b) : mu;
  };

  constexpr int kMaxIterations = 50;
  for (int iter = 0; iter < kMaxIterations; ++iter) {
    ctx.deadline.check("CoClustering", iter > 0);
    bool changed = false;
    recompute();
    for (int u = 0; u < n_users; ++u) {
      auto idx = x.row_indices(u);
      auto val = x.row_values(u);
      int best = cu[static_cast<std::size_t>(u)];
      double best_err = std::numeric_limits<double>::infinity();
      for (int a = 0; a < ku; ++a) {
        double err = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const int b = ci[static_cast<std::size_t>(idx[k])];
          const double pred = co_mean(a, b) + (user_mean(u) - ucl_mean(a)) + (item_mean(idx[k]) - icl_mean(b));
          err += (val[k] - pred) * (val[k] - pred);
        }
        if (err < best_err) {
          best_err = err;
          best = a;
        }
      }
      if (best != cu[static_cast<std::size_t>(u)]) changed = true;
      cu[static_cast<std::size_t>(u)] = best;
    }
    recompute();
    for (int i = 0; i < n_items; ++i) {
      auto idx = xt.row_indices(i);
      auto val = xt.row_values(i);
      int best = ci[static_cast<std::size_t>(i)];
      double best_err = std::numeric_limits<double>::infinity();
      for (int b = 0; b < ki; ++b) {
        double err = 0.0;
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const int a = cu[static_cast<std::size_t>(idx[k])];
          const double pred = co_mean(a, b) + (user_mean(idx[k]) - ucl_mean(a)) + (item_mean(i) - icl_mean(b));
          err += (val[k] - pred) * (val[k] - pred);
        }
        if (err < best_err) {
          best_err = err;
          best = b;
        }
      }
      if (best != ci[static_cast<std::size_t>(i)]) changed = true;
      ci[static_cast<std::size_t>(i)] = best;
    }
    if (!changed) break;
  }
  recompute();
  return std::make_shared<CoClusteringModel>(std::move(cu), std::move(ci), co_mean, ucl_mean, icl_mean,
                                             std::move(user_mean), std::move(item_mean));
}

}  // namespace reczilla::detail
