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
#include <numeric>

#include "factor_model.hpp"
#include "internal.hpp"

namespace reczilla {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kOptimizerEps = 1e-8;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -ln sigmoid(x) without overflow.
double softplus_neg(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }

}  // namespace

SgdMode parse_sgd_mode(std::string_view name) {
  if (name == "sgd") return SgdMode::sgd;
  if (name == "adagrad") return SgdMode::adagrad;
  if (name == "adam") return SgdMode::adam;
  fail(ErrorCode::invalid_argument, "unknown sgd-mode '" + std::string(name) + "'");
}

RowOptimizer::RowOptimizer(SgdMode mode, double learning_rate, Eigen::Index rows, Eigen::Index cols)
    : mode_(mode), lr_(learning_rate) {
  if (mode_ != SgdMode::sgd) first_ = Eigen::MatrixXd::Zero(rows, cols);
  if (mode_ == SgdMode::adam) {
    second_ = Eigen::MatrixXd::Zero(rows, cols);
    steps_ = Eigen::VectorXi::Zero(rows);
  }
}

void RowOptimizer::step(Eigen::MatrixXd& param, Eigen::Index row, const Eigen::RowVectorXd& grad) {
  switch (mode_) {
    case SgdMode::sgd:
      param.row(row) -= lr_ * grad;
      break;
    case SgdMode::adagrad:
      first_.row(row).array() += grad.array().square();
      param.row(row).array() -= lr_ * grad.array() / (first_.row(row).array().sqrt() + kOptimizerEps);
      break;
    case SgdMode::adam: {
      const int t = ++steps_(row);
      first_.row(row) = kAdamBeta1 * first_.row(row) + (1.0 - kAdamBeta1) * grad;
      second_.row(row).array() = kAdamBeta2 * second_.row(row).array() + (1.0 - kAdamBeta2) * grad.array().square();
      const double c1 = 1.0 - std::pow(kAdamBeta1, t);
      const double c2 = 1.0 - std::pow(kAdamBeta2, t);
      param.row(row).array() -=
          lr_ * (first_.row(row).array() / c1) / ((second_.row(row).array() / c2).sqrt() + kOptimizerEps);
      break;
    }
  }
}

void RowOptimizer::step(Eigen::MatrixXd& param, Eigen::Index row, Eigen::Index col, double grad) {
  switch (mode_) {
    case SgdMode::sgd:
      param(row, col) -= lr_ * grad;
      break;
    case SgdMode::adagrad:
      first_(row, col) += grad * grad;
      param(row, col) -= lr_ * grad / (std::sqrt(first_(row, col)) + kOptimizerEps);
      break;
    case SgdMode::adam: {
      // Element-wise use keeps one step counter per row; the bias correction
      // uses the row counter advanced once per element update.
      const int t = ++steps_(row);
      first_(row, col) = kAdamBeta1 * first_(row, col) + (1.0 - kAdamBeta1) * grad;
      second_(row, col) = kAdamBeta2 * second_(row, col) + (1.0 - kAdamBeta2) * grad * grad;
      const double m = first_(row, col) / (1.0 - std::pow(kAdamBeta1, t));
      const double v = second_(row, col) / (1.0 - std::pow(kAdamBeta2, t));
      param(row, col) -= lr_ * m / (std::sqrt(v) + kOptimizerEps);
      break;
    }
  }
}

void RowOptimizer::step(Eigen::VectorXd& param, Eigen::Index index, double grad) {
  Eigen::Map<Eigen::MatrixXd> as_matrix(param.data(), param.size(), 1);
  Eigen::MatrixXd tmp = as_matrix;
  step(tmp, index, 0, grad);
  param(index) = tmp(index, 0);
}

double bpr_loss(const BprState& state, int u, int i, int j, double pos_reg, double neg_reg) {
  const double x = state.user.row(u).dot(state.item.row(i) - state.item.row(j));
  return softplus_neg(x) +
         0.5 * pos_reg * (state.user.row(u).squaredNorm() + state.item.row(i).squaredNorm()) +
         0.5 * neg_reg * state.item.row(j).squaredNorm();
}

BprGradient bpr_gradient(const BprState& state, int u, int i, int j, double pos_reg, double neg_reg) {
  const auto pu = state.user.row(u);
  const auto qi = state.item.row(i);
  const auto qj = state.item.row(j);
  const double x = pu.dot(qi - qj);
  const double s = sigmoid(-x);
  BprGradient g;
  g.user = -s * (qi - qj) + pos_reg * pu;
  g.positive = -s * pu + pos_reg * qi;
  g.negative = s * pu + neg_reg * qj;
  return g;
}

void bpr_step(BprState& state, BprOptimizers& optimizers, int u, int i, int j, double pos_reg,
              double neg_reg) {
  const BprGradient g = bpr_gradient(state, u, i, j, pos_reg, neg_reg);
  optimizers.user.step(state.user, u, g.user);
  optimizers.item.step(state.item, i, g.positive);
  optimizers.item.step(state.item, j, g.negative);
}

namespace detail {

namespace {

struct EntryIndex {
  std::vector<int> user;
  explicit EntryIndex(const CsrMatrix& x) : user(static_cast<std::size_t>(x.nnz())) {
    for (int u = 0; u < x.rows(); ++u) {
      for (int k = x.indptr()[u]; k < x.indptr()[u + 1]; ++k) user[static_cast<std::size_t>(k)] = u;
    }
  }
};

// Uniform unseen item of `user`, or -1 when rejection keeps failing.
int sample_negative(const CsrMatrix& x, int user, Rng& rng) {
  if (x.row_nnz(user) >= x.cols()) return -1;
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const int j = static_cast<int>(rng.below(static_cast<std::uint64_t>(x.cols())));
    if (!x.contains(user, j)) return j;
  }
  return -1;
}

using RowGrads = std::map<int, Eigen::RowVectorXd>;

void accumulate(RowGrads& grads, int row, const Eigen::RowVectorXd& g) {
  auto [it, inserted] = grads.try_emplace(row, g);
  if (!inserted) it->second += g;
}

}  // namespace

RecommenderPtr fit_funk_svd(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const ParamMap& p = ctx.params;
  const Eigen::Index f = param_int(p, "num-factors");
  const SgdMode mode = parse_sgd_mode(param_string(p, "sgd-mode"));
  const bool use_bias = param_bool(p, "use-bias");
  const auto batch = std::get<std::int64_t>(p.at("batch-size"));
  const double item_reg = param_real(p, "item-reg");
  const double user_reg = param_real(p, "user-reg");
  const double lr = param_real(p, "learning-rate");
  const double quota = param_real(p, "negative-interactions-quota");

  Rng rng(mix_seed(ctx.options.seed, hash_string("MF-FunkSVD")));
  Eigen::MatrixXd user = random_normal(x.rows(), f, 0.1, rng);
  Eigen::MatrixXd item = random_normal(x.cols(), f, 0.1, rng);
  Eigen::VectorXd user_bias = Eigen::VectorXd::Zero(x.rows());
  Eigen::VectorXd item_bias = Eigen::VectorXd::Zero(x.cols());
  const double mu = use_bias ? std::accumulate(x.values().begin(), x.values().end(), 0.0) / x.nnz() : 0.0;
  RowOptimizer user_opt(mode, lr, x.rows(), f), item_opt(mode, lr, x.cols(), f);
  RowOptimizer user_bias_opt(mode, lr, x.rows(), 1), item_bias_opt(mode, lr, x.cols(), 1);
  const EntryIndex entries(x);

  auto make_model = [&](const Eigen::MatrixXd& pu, const Eigen::MatrixXd& qi, const Eigen::VectorXd& bu,
                        const Eigen::VectorXd& bi) -> RecommenderPtr {
    if (!use_bias) return std::make_shared<FactorModel>(pu, qi);
    return std::make_shared<FactorModel>(pu, qi, mu, bu, bi);
  };
  Eigen::MatrixXd best_user, best_item;
  Eigen::VectorXd best_ub, best_ib;
  EarlyStopping stopper(ctx.options, x);

  const auto samples = static_cast<std::int64_t>(std::llround(x.nnz() / (1.0 - quota)));
  for (int epoch = 0; epoch < ctx.options.max_epochs; ++epoch) {
    ctx.deadline.check("MF-FunkSVD", epoch > 0);
    for (std::int64_t start = 0; start < samples; start += batch) {
      RowGrads gu, gi;
      std::map<int, double> gbu, gbi;
      const std::int64_t end = std::min(samples, start + batch);
      for (std::int64_t s = start; s < end; ++s) {
        int u, i;
        double r;
        if (quota > 0 && rng.uniform() < quota) {
          u = static_cast<int>(rng.below(static_cast<std::uint64_t>(x.rows())));
          i = sample_negative(x, u, rng);
          if (i < 0) continue;
          r = 0.0;
        } else {
          const auto k = static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(x.nnz())));
          u = entries.user[k];
          i = x.indices()[k];
          r = x.values()[k];
        }
        double pred = user.row(u).dot(item.row(i));
        if (use_bias) pred += mu + user_bias(u) + item_bias(i);
        const double e = r - pred;
        accumulate(gu, u, -e * item.row(i) + user_reg * user.row(u));
        accumulate(gi, i, -e * user.row(u) + item_reg * item.row(i));
        if (use_bias) {
          gbu[u] += -e + user_reg * user_bias(u);
          gbi[i] += -e + item_reg * item_bias(i);
        }
      }
      for (const auto& [row, g] : gu) user_opt.step(user, row, g);
      for (const auto& [row, g] : gi) item_opt.step(item, row, g);
      for (const auto& [row, g] : gbu) user_bias_opt.step(user_bias, row, g);
      for (const auto& [row, g] : gbi) item_bias_opt.step(item_bias, row, g);
    }
    if (!user.allFinite() || !item.allFinite() || !user_bias.allFinite() || !item_bias.allFinite()) {
      fail(ErrorCode::fit, "MF-FunkSVD diverged");
    }
    const bool stop = stopper.after_epoch(
        epoch, [&] { return make_model(user, item, user_bias, item_bias); },
        [&] {
          best_user = user;
          best_item = item;
          best_ub = user_bias;
          best_ib = item_bias;
        });
    if (stop) break;
  }
  if (stopper.active() && best_user.size() > 0) return make_model(best_user, best_item, best_ub, best_ib);
  return make_model(user, item, user_bias, item_bias);
}

namespace {

class AsySvdModel : public Recommender {
 public:
  AsySvdModel(CsrMatrix ratings, Eigen::MatrixXd implicit, Eigen::MatrixXd item, double mu,
              Eigen::VectorXd user_bias, Eigen::VectorXd item_bias, bool use_bias)
      : ratings_(std::move(ratings)), implicit_(std::move(implicit)), item_(std::move(item)), mu_(mu),
        user_bias_(std::move(user_bias)), item_bias_(std::move(item_bias)), use_bias_(use_bias) {}

  static Eigen::RowVectorXd user_vector(const CsrMatrix& x, const Eigen::MatrixXd& implicit, int u) {
    Eigen::RowVectorXd pu = Eigen::RowVectorXd::Zero(implicit.cols());
    auto idx = x.row_indices(u);
    auto val = x.row_values(u);
    if (idx.empty()) return pu;
    for (std::size_t k = 0; k < idx.size(); ++k) pu += val[k] * implicit.row(idx[k]);
    return pu / std::sqrt(static_cast<double>(idx.size()));
  }

  void score(int user, std::span<double> out) const override {
    const Eigen::RowVectorXd pu = user_vector(ratings_, implicit_, user);
    Eigen::Map<Eigen::VectorXd> s(out.data(), static_cast<Eigen::Index>(out.size()));
    s.noalias() = item_ * pu.transpose();
    if (use_bias_) s.array() += item_bias_.array() + mu_ + user_bias_(user);
  }
  const Eigen::MatrixXd* dense_state(std::string_view name) const override {
    if (name == "item_factors") return &item_;
    if (name == "implicit_factors") return &implicit_;
    return nullptr;
  }

 private:
  CsrMatrix ratings_;
  Eigen::MatrixXd implicit_;
  Eigen::MatrixXd item_;
  double mu_;
  Eigen::VectorXd user_bias_;
  Eigen::VectorXd item_bias_;
  bool use_bias_;
};

}  // namespace

RecommenderPtr fit_asy_svd(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const ParamMap& p = ctx.params;
  const Eigen::Index f = param_int(p, "num-factors");
  const SgdMode mode = parse_sgd_mode(param_string(p, "sgd-mode"));
  const bool use_bias = param_bool(p, "use-bias");
  const double item_reg = param_real(p, "item-reg");
  const double user_reg = param_real(p, "user-reg");
  const double lr = param_real(p, "learning-rate");
  const double quota = param_real(p, "negative-interactions-quota");

  Rng rng(mix_seed(ctx.options.seed, hash_string("MF-AsySVD")));
  Eigen::MatrixXd implicit = random_normal(x.cols(), f, 0.1, rng);
  Eigen::MatrixXd item = random_normal(x.cols(), f, 0.1, rng);
  Eigen::VectorXd user_bias = Eigen::VectorXd::Zero(x.rows());
  Eigen::VectorXd item_bias = Eigen::VectorXd::Zero(x.cols());
  const double mu = use_bias ? std::accumulate(x.values().begin(), x.values().end(), 0.0) / x.nnz() : 0.0;
  RowOptimizer implicit_opt(mode, lr, x.cols(), f), item_opt(mode, lr, x.cols(), f);
  RowOptimizer user_bias_opt(mode, lr, x.rows(), 1), item_bias_opt(mode, lr, x.cols(), 1);

  auto make_model = [&](const Eigen::MatrixXd& y, const Eigen::MatrixXd& q, const Eigen::VectorXd& bu,
                        const Eigen::VectorXd& bi) -> RecommenderPtr {
    return std::make_shared<AsySvdModel>(x, y, q, mu, bu, bi, use_bias);
  };
  Eigen::MatrixXd best_implicit, best_item;
  Eigen::VectorXd best_ub, best_ib;
  EarlyStopping stopper(ctx.options, x);

  std::vector<int> users(static_cast<std::size_t>(x.rows()));
  std::iota(users.begin(), users.end(), 0);
  for (int epoch = 0; epoch < ctx.options.max_epochs; ++epoch) {
    ctx.deadline.check("MF-AsySVD", epoch > 0);
    rng.shuffle(users);
    for (int u : users) {
      auto idx = x.row_indices(u);
      auto val = x.row_values(u);
      if (idx.empty()) continue;
      std::vector<std::pair<int, double>> samples;
      for (std::size_t k = 0; k < idx.size(); ++k) samples.emplace_back(idx[k], val[k]);
      const auto negatives = static_cast<std::size_t>(std::llround(quota / (1.0 - quota) * idx.size()));
      for (std::size_t k = 0; k < negatives; ++k) {
        const int j = sample_negative(x, u, rng);
        if (j >= 0) samples.emplace_back(j, 0.0);
      }
      rng.shuffle(samples);
      const double norm = 1.0 / std::sqrt(static_cast<double>(idx.size()));
      const Eigen::RowVectorXd pu = AsySvdModel::user_vector(x, implicit, u);
      Eigen::RowVectorXd grad_pu = Eigen::RowVectorXd::Zero(f);
      for (const auto& [i, r] : samples) {
        double pred = pu.dot(item.row(i));
        if (use_bias) pred += mu + user_bias(u) + item_bias(i);
        const double e = r - pred;
        grad_pu += -e * item.row(i);
        const Eigen::RowVectorXd gq = -e * pu + item_reg * item.row(i);
        item_opt.step(item, i, gq);
        if (use_bias) {
          item_bias_opt.step(item_bias, i, -e + item_reg * item_bias(i));
          user_bias_opt.step(user_bias, u, -e + user_reg * user_bias(u));
        }
      }
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const Eigen::RowVectorXd gy = norm * val[k] * grad_pu + user_reg * implicit.row(idx[k]);
        implicit_opt.step(implicit, idx[k], gy);
      }
    }
    if (!implicit.allFinite() || !item.allFinite() || !user_bias.allFinite() || !item_bias.allFinite()) {
      fail(ErrorCode::fit, "MF-AsySVD diverged");
    }
    const bool stop = stopper.after_epoch(
        epoch, [&] { return make_model(implicit, item, user_bias, item_bias); },
        [&] {
          best_implicit = implicit;
          best_item = item;
          best_ub = user_bias;
          best_ib = item_bias;
        });
    if (stop) break;
  }
  if (stopper.active() && best_item.size() > 0) return make_model(best_implicit, best_item, best_ub, best_ib);
  return make_model(implicit, item, user_bias, item_bias);
}

RecommenderPtr fit_mf_bpr(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const ParamMap& p = ctx.params;
  const Eigen::Index f = param_int(p, "num-factors");
  const SgdMode mode = parse_sgd_mode(param_string(p, "sgd-mode"));
  const auto batch = std::get<std::int64_t>(p.at("batch-size"));
  const double pos_reg = param_real(p, "positive-reg");
  const double neg_reg = param_real(p, "negative-reg");
  const double lr = param_real(p, "learning-rate");

  std::vector<int> eligible;
  for (int u = 0; u < x.rows(); ++u) {
    if (x.row_nnz(u) > 0 && x.row_nnz(u) < x.cols()) eligible.push_back(u);
  }
  Rng rng(mix_seed(ctx.options.seed, hash_string("MF-BPR")));
  BprState state{random_normal(x.rows(), f, 0.1, rng), random_normal(x.cols(), f, 0.1, rng)};
  if (eligible.empty()) return std::make_shared<FactorModel>(state.user, state.item);
  BprOptimizers opt{RowOptimizer(mode, lr, x.rows(), f), RowOptimizer(mode, lr, x.cols(), f)};

  BprState best;
  EarlyStopping stopper(ctx.options, x);
  for (int epoch = 0; epoch < ctx.options.max_epochs; ++epoch) {
    ctx.deadline.check("MF-BPR", epoch > 0);
    for (std::int64_t start = 0; start < x.nnz(); start += batch) {
      const std::int64_t end = std::min<std::int64_t>(x.nnz(), start + batch);
      if (batch == 1) {
        const int u = eligible[rng.below(eligible.size())];
        auto pos = x.row_indices(u);
        const int i = pos[rng.below(pos.size())];
        const int j = sample_negative(x, u, rng);
        if (j >= 0) bpr_step(state, opt, u, i, j, pos_reg, neg_reg);
        continue;
      }
      RowGrads gu, gi;
      for (std::int64_t s = start; s < end; ++s) {
        const int u = eligible[rng.below(eligible.size())];
        auto pos = x.row_indices(u);
        const int i = pos[rng.below(pos.size())];
        const int j = sample_negative(x, u, rng);
        if (j < 0) continue;
        const BprGradient g = bpr_gradient(state, u, i, j, pos_reg, neg_reg);
        accumulate(gu, u, g.user);
        accumulate(gi, i, g.positive);
        accumulate(gi, j, g.negative);
      }
      for (const auto& [row, g] : gu) opt.user.step(state.user, row, g);
      for (const auto& [row, g] : gi) opt.item.step(state.item, row, g);
    }
    if (!state.user.allFinite() || !state.item.allFinite()) fail(ErrorCode::fit, "MF-BPR diverged");
    const bool stop = stopper.after_epoch(
        epoch, [&] { return std::make_shared<FactorModel>(state.user, state.item); }, [&] { best = state; });
    if (stop) break;
  }
  if (stopper.active() && best.user.size() > 0) return std::make_shared<FactorModel>(best.user, best.item);
  return std::make_shared<FactorModel>(state.user, state.item);
}

namespace {

// Keeps the top_k largest weights of every target column of a dense
// source x target matrix; returns it source-major.
CsrMatrix truncate_targets(const Eigen::MatrixXd& weights, int top_k) {
  const Eigen::Index n = weights.rows();
  std::vector<Triplet> triplets;
  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index s = 0; s < n; ++s) column[static_cast<std::size_t>(s)] = weights(s, t);
    for (const auto& [s, w] : top_k_nonzero(column, top_k, static_cast<int>(t))) {
      triplets.push_back({s, static_cast<int>(t), w});
    }
  }
  return CsrMatrix::from_triplets(static_cast<int>(n), static_cast<int>(n), std::move(triplets));
}

}  // namespace

RecommenderPtr fit_slim_bpr(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  const ParamMap& p = ctx.params;
  const int n_items = x.cols();
  require_dense_fits(n_items, n_items, ctx.options.dense_item_cap, "SLIM-BPR");
  const int top_k = static_cast<int>(param_int(p, "top-K"));
  const bool symmetric = param_bool(p, "symmetric");
  const SgdMode mode = parse_sgd_mode(param_string(p, "sgd-mode"));
  const double lambda_i = param_real(p, "lambda-i");
  const double lambda_j = param_real(p, "lambda-j");
  const double lr = param_real(p, "learning-rate");

  std::vector<int> eligible;
  for (int u = 0; u < x.rows(); ++u) {
    if (x.row_nnz(u) > 0 && x.row_nnz(u) < x.cols()) eligible.push_back(u);
  }
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n_items, n_items);
  if (eligible.empty()) return std::make_shared<ItemToItemModel>(x, truncate_targets(s, top_k), "weights");
  RowOptimizer opt(mode, lr, n_items, n_items);
  Rng rng(mix_seed(ctx.options.seed, hash_string("SLIM-BPR")));

  Eigen::MatrixXd best;
  EarlyStopping stopper(ctx.options, x);
  for (int epoch = 0; epoch < ctx.options.max_epochs; ++epoch) {
    ctx.deadline.check("SLIM-BPR", epoch > 0);
    for (int sample = 0; sample < x.nnz(); ++sample) {
      const int u = eligible[rng.below(eligible.size())];
      auto pos = x.row_indices(u);
      const int i = pos[rng.below(pos.size())];
      const int j = sample_negative(x, u, rng);
      if (j < 0) continue;
      double xuij = 0.0;
      for (int k : pos) xuij += s(k, i) - s(k, j);
      const double g = sigmoid(-xuij);
      for (int k : pos) {
        if (k != i) {
          opt.step(s, k, i, -g + lambda_i * s(k, i));
          if (symmetric) s(i, k) = s(k, i);
        }
        opt.step(s, k, j, g + lambda_j * s(k, j));
        if (symmetric) s(j, k) = s(k, j);
      }
    }
    if (!s.allFinite()) fail(ErrorCode::fit, "SLIM-BPR diverged");
    const bool stop = stopper.after_epoch(
        epoch, [&] { return std::make_shared<ItemToItemModel>(x, truncate_targets(s, top_k), "weights"); },
        [&] { best = s; });
    if (stop) break;
  }
  const Eigen::MatrixXd& final_weights = stopper.active() && best.size() > 0 ? best : s;
  return std::make_shared<ItemToItemModel>(x, truncate_targets(final_weights, top_k), "weights");
}

}  // namespace detail
}  // namespace reczilla
