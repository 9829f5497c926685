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

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "factor_model.hpp"
#include "internal.hpp"

namespace reczilla {

double ials_confidence(double rating, const IalsParams& params) {
  if (params.scaling == ConfidenceScaling::linear) return 1.0 + params.alpha * rating;
  return 1.0 + params.alpha * std::log(1.0 + rating / params.epsilon);
}

double ials_objective(const CsrMatrix& ratings, const Eigen::MatrixXd& user_factors,
                      const Eigen::MatrixXd& item_factors, const IalsParams& params) {
  // Unobserved cells have p = 0 and c = 1; observed cells are corrected below.
  const Eigen::MatrixXd gram_u = user_factors.transpose() * user_factors;
  const Eigen::MatrixXd gram_i = item_factors.transpose() * item_factors;
  double total = (gram_u.array() * gram_i.array()).sum();
  for (int u = 0; u < ratings.rows(); ++u) {
    auto idx = ratings.row_indices(u);
    auto val = ratings.row_values(u);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double pred = user_factors.row(u).dot(item_factors.row(idx[k]));
      const double c = ials_confidence(val[k], params);
      total += c * (1.0 - pred) * (1.0 - pred) - pred * pred;
    }
  }
  return total + params.reg * (user_factors.squaredNorm() + item_factors.squaredNorm());
}

void ials_update(const CsrMatrix& by_row, const Eigen::MatrixXd& fixed, Eigen::MatrixXd& solve_for,
                 const IalsParams& params, const Deadline& deadline) {
  const Eigen::Index f = fixed.cols();
  const Eigen::MatrixXd gram = fixed.transpose() * fixed;
  Eigen::MatrixXd a(f, f);
  Eigen::VectorXd b(f);
  for (int r = 0; r < by_row.rows(); ++r) {
    if ((r & 255) == 0) deadline.check("iALS", true);
    a = gram;
    a.diagonal().array() += params.reg;
    b.setZero();
    auto idx = by_row.row_indices(r);
    auto val = by_row.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const double c = ials_confidence(val[k], params);
      const auto y = fixed.row(idx[k]).transpose();
      a.noalias() += (c - 1.0) * y * y.transpose();
      b.noalias() += c * y;
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) fail(ErrorCode::fit, "iALS normal equations are singular");
    solve_for.row(r) = ldlt.solve(b).transpose();
  }
  detail::require_finite(solve_for, "iALS factors");
}

namespace detail {

void FactorModel::score(int user, std::span<double> out) const {
  Eigen::Map<Eigen::VectorXd> s(out.data(), static_cast<Eigen::Index>(out.size()));
  s.noalias() = item_ * user_.row(user).transpose();
  if (item_bias_.size() > 0) s += item_bias_;
  if (user_bias_.size() > 0) s.array() += user_bias_(user) + global_bias_;
}

const Eigen::MatrixXd* FactorModel::dense_state(std::string_view name) const {
  if (name == "user_factors") return &user_;
  if (name == "item_factors") return &item_;
  return nullptr;
}

RecommenderPtr fit_pure_svd(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  require_dense_fits(x.rows(), x.cols(), ctx.options.dense_item_cap, "PureSVD");
  const Eigen::MatrixXd dense = x.to_dense();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index f = std::min<Eigen::Index>(param_int(ctx.params, "num-factors"), svd.singularValues().size());
  Eigen::MatrixXd user = svd.matrixU().leftCols(f) * svd.singularValues().head(f).asDiagonal();
  Eigen::MatrixXd item = svd.matrixV().leftCols(f);
  require_finite(user, "PureSVD factors");
  return std::make_shared<FactorModel>(std::move(user), std::move(item));
}

namespace {

constexpr double kNmfEps = std::numeric_limits<double>::epsilon();

void nndsvda_init(const Eigen::MatrixXd& x, Eigen::Index f, Eigen::MatrixXd& w, Eigen::MatrixXd& h) {
  const double avg = x.mean();
  w = Eigen::MatrixXd::Constant(x.rows(), f, avg);
  h = Eigen::MatrixXd::Constant(f, x.cols(), avg);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::Index r = std::min<Eigen::Index>(f, svd.singularValues().size());
  const Eigen::MatrixXd& u = svd.matrixU();
  const Eigen::MatrixXd& v = svd.matrixV();
  const Eigen::VectorXd& s = svd.singularValues();
  for (Eigen::Index j = 0; j < r; ++j) {
    if (j == 0) {
      w.col(0) = std::sqrt(s(0)) * u.col(0).cwiseAbs();
      h.row(0) = std::sqrt(s(0)) * v.col(0).cwiseAbs().transpose();
      continue;
    }
    const Eigen::VectorXd xp = u.col(j).cwiseMax(0.0), xn = (-u.col(j)).cwiseMax(0.0);
    const Eigen::VectorXd yp = v.col(j).cwiseMax(0.0), yn = (-v.col(j)).cwiseMax(0.0);
    const double xpn = xp.norm(), ypn = yp.norm(), xnn = xn.norm(), ynn = yn.norm();
    const double mp = xpn * ypn, mn = xnn * ynn;
    Eigen::VectorXd uu, vv;
    double sigma;
    if (mp > mn) {
      uu = xpn > 0 ? Eigen::VectorXd(xp / xpn) : xp;
      vv = ypn > 0 ? Eigen::VectorXd(yp / ypn) : yp;
      sigma = mp;
    } else {
      uu = xnn > 0 ? Eigen::VectorXd(xn / xnn) : xn;
      vv = ynn > 0 ? Eigen::VectorXd(yn / ynn) : yn;
      sigma = mn;
    }
    const double lbd = std::sqrt(s(j) * sigma);
    w.col(j) = lbd * uu;
    h.row(j) = lbd * vv.transpose();
  }
  // Zeros of the SVD-based start are filled with the data mean.
  w = (w.array() < 1e-6).select(avg, w);
  h = (h.array() < 1e-6).select(avg, h);
}

double frobenius_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  return (x - w * h).squaredNorm();
}

double kl_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w, const Eigen::MatrixXd& h) {
  const Eigen::MatrixXd wh = (w * h).cwiseMax(kNmfEps);
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double a = x.data()[i];
    const double b = wh.data()[i];
    total += (a > 0 ? a * std::log(a / b) : 0.0) - a + b;
  }
  return total;
}

}  // namespace

RecommenderPtr fit_nmf(const FitContext& ctx) {
  const CsrMatrix& xs = ctx.train;
  require_dense_fits(xs.rows(), xs.cols(), ctx.options.dense_item_cap, "NMF");
  const Eigen::MatrixXd x = xs.to_dense();
  if ((x.array() < 0).any()) fail(ErrorCode::fit, "NMF requires nonnegative ratings");
  const Eigen::Index f = param_int(ctx.params, "num-factors");
  const std::string solver = param_string(ctx.params, "solver");
  const std::string init = param_string(ctx.params, "init-type");
  const bool kl = param_string(ctx.params, "beta-loss") == "kullback-leibler";
  if (solver == "coordinate-descent" && kl) {
    fail(ErrorCode::fit, "coordinate-descent NMF supports only the frobenius loss");
  }

  Eigen::MatrixXd w, h;
  if (init == "nndsvda") {
    nndsvda_init(x, f, w, h);
  } else {
    Rng rng(mix_seed(ctx.options.seed, hash_string("NMF")));
    const double avg = std::sqrt(std::max(x.mean(), 0.0) / static_cast<double>(f));
    w = random_normal(x.rows(), f, 1.0, rng).cwiseAbs() * avg;
    h = random_normal(f, x.cols(), 1.0, rng).cwiseAbs() * avg;
  }
  auto observe = [&](std::string_view name, const Eigen::MatrixXd& m) {
    if (ctx.options.observer) ctx.options.observer(name, m);
  };
  observe("W", w);
  observe("H", h);

  auto error = [&] { return kl ? kl_error(x, w, h) : frobenius_error(x, w, h); };
  const double initial = error();
  double previous = initial;
  for (int iter = 0; iter < ctx.options.nmf_iterations; ++iter) {
    ctx.deadline.check("NMF", iter > 0);
    if (solver == "coordinate-descent") {
      const Eigen::MatrixXd a = x * h.transpose();
      const Eigen::MatrixXd b = h * h.transpose();
      for (Eigen::Index k = 0; k < f; ++k) {
        if (b(k, k) <= 0) continue;
        w.col(k) = (w.col(k) + (a.col(k) - w * b.col(k)) / b(k, k)).cwiseMax(0.0);
      }
      observe("W", w);
      const Eigen::MatrixXd c = w.transpose() * x;
      const Eigen::MatrixXd d = w.transpose() * w;
      for (Eigen::Index k = 0; k < f; ++k) {
        if (d(k, k) <= 0) continue;
        h.row(k) = (h.row(k) + (c.row(k) - d.row(k) * h) / d(k, k)).cwiseMax(0.0);
      }
      observe("H", h);
    } else if (!kl) {
      const Eigen::MatrixXd num_w = x * h.transpose();
      const Eigen::MatrixXd den_w = (w * (h * h.transpose())).cwiseMax(kNmfEps);
      w = w.cwiseProduct(num_w.cwiseQuotient(den_w));
      observe("W", w);
      const Eigen::MatrixXd num_h = w.transpose() * x;
      const Eigen::MatrixXd den_h = ((w.transpose() * w) * h).cwiseMax(kNmfEps);
      h = h.cwiseProduct(num_h.cwiseQuotient(den_h));
      observe("H", h);
    } else {
      Eigen::MatrixXd ratio = x.cwiseQuotient((w * h).cwiseMax(kNmfEps));
      const Eigen::RowVectorXd h_sums = h.rowwise().sum().transpose().cwiseMax(kNmfEps);
      w = (w.array() * ((ratio * h.transpose()).array().rowwise() / h_sums.array())).matrix();
      observe("W", w);
      ratio = x.cwiseQuotient((w * h).cwiseMax(kNmfEps));
      const Eigen::VectorXd w_sums = w.colwise().sum().transpose().cwiseMax(kNmfEps);
      h = h.cwiseProduct(((w.transpose() * ratio).array().colwise() / w_sums.array()).matrix());
      observe("H", h);
    }
    if (!w.allFinite() || !h.allFinite()) fail(ErrorCode::fit, "NMF diverged");
    if ((iter + 1) % 10 == 0) {
      const double err = error();
      if (initial > 0 && (previous - err) / initial < 1e-4) break;
      previous = err;
    }
  }
  return std::make_shared<FactorModel>(std::move(w), h.transpose());
}

RecommenderPtr fit_ials(const FitContext& ctx) {
  const CsrMatrix& x = ctx.train;
  IalsParams p;
  p.alpha = param_real(ctx.params, "alpha");
  p.epsilon = param_real(ctx.params, "epsilon");
  p.reg = param_real(ctx.params, "reg");
  p.scaling = param_string(ctx.params, "confidence-scaling") == "log" ? ConfidenceScaling::log
                                                                      : ConfidenceScaling::linear;
  const Eigen::Index f = param_int(ctx.params, "num-factors");
  Rng rng(mix_seed(ctx.options.seed, hash_string("iALS")));
  Eigen::MatrixXd user = random_normal(x.rows(), f, 0.01, rng);
  Eigen::MatrixXd item = random_normal(x.cols(), f, 0.01, rng);
  const CsrMatrix xt = x.transpose();
  for (int iter = 0; iter < ctx.options.ials_iterations; ++iter) {
    ials_update(x, item, user, p, ctx.deadline);
    ials_update(xt, user, item, p, ctx.deadline);
  }
  return std::make_shared<FactorModel>(std::move(user), std::move(item));
}

}  // namespace detail
}  // namespace reczilla
