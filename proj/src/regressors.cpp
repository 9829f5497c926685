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

#include "reczilla/regressors.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "reczilla/common.hpp"

namespace reczilla {

std::string_view regressor_kind_name(RegressorKind kind) {
  switch (kind) {
    case RegressorKind::knn: return "knn";
    case RegressorKind::linear: return "linear";
    case RegressorKind::gbt_chain: return "gbt-chain";
    case RegressorKind::random: return "random";
  }
  return "?";
}

RegressorKind parse_regressor_kind(std::string_view name) {
  for (auto k : {RegressorKind::knn, RegressorKind::linear, RegressorKind::gbt_chain, RegressorKind::random}) {
    if (regressor_kind_name(k) == name) return k;
  }
  fail(ErrorCode::invalid_argument,
       "unknown regressor '" + std::string(name) + "' (expected knn, linear, gbt-chain or random)");
}

std::unique_ptr<Regressor> make_regressor(RegressorKind kind, const RegressorOptions& options) {
  switch (kind) {
    case RegressorKind::knn: return std::make_unique<KnnRegressor>(options.knn_k);
    case RegressorKind::linear: return std::make_unique<LinearRegressor>();
    case RegressorKind::gbt_chain: return std::make_unique<GbtChainRegressor>(options);
    case RegressorKind::random: return std::make_unique<MeanRegressor>();
  }
  fail(ErrorCode::invalid_argument, "unknown regressor kind");
}

namespace {

std::string encode_numbers(const std::vector<double>& values) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += ' ';
    out += format_double(values[k]);
  }
  return out;
}

std::vector<double> decode_numbers(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string token;
  while (in >> token) out.push_back(parse_double(token));
  return out;
}

std::string encode_matrix(const Eigen::MatrixXd& m) {
  std::vector<double> v{static_cast<double>(m.rows()), static_cast<double>(m.cols())};
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v.push_back(m(r, c));
  }
  return encode_numbers(v);
}

Eigen::MatrixXd decode_matrix(const std::string& text) {
  const std::vector<double> v = decode_numbers(text);
  if (v.size() < 2) fail(ErrorCode::parse, "regressor state: truncated matrix");
  const auto rows = static_cast<Eigen::Index>(v[0]);
  const auto cols = static_cast<Eigen::Index>(v[1]);
  if (rows < 0 || cols < 0 || v.size() != static_cast<std::size_t>(2 + rows * cols)) {
    fail(ErrorCode::parse, "regressor state: matrix size mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 2;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v[k++];
  }
  return m;
}

const std::string& field(const RegressorState& state, const std::string& key) {
  auto it = state.find(key);
  if (it == state.end()) fail(ErrorCode::parse, "regressor state: missing '" + key + "'");
  return it->second;
}

}  // namespace

// ---------------------------------------------------------------------------
// knn

void KnnRegressor::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.rows() == 0) fail(ErrorCode::invalid_argument, "knn: bad training shapes");
  x_ = x;
  y_ = y;
}

Eigen::MatrixXd KnnRegressor::predict(const Eigen::MatrixXd& x) const {
  const Eigen::Index n = x_.rows();
  const Eigen::Index k = std::min<Eigen::Index>(std::max(1, k_), n);
  Eigen::MatrixXd out(x.rows(), y_.cols());
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::vector<double> dist(static_cast<std::size_t>(n));
  for (Eigen::Index q = 0; q < x.rows(); ++q) {
    for (Eigen::Index r = 0; r < n; ++r) dist[static_cast<std::size_t>(r)] = (x_.row(r) - x.row(q)).squaredNorm();
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return dist[static_cast<std::size_t>(a)] < dist[static_cast<std::size_t>(b)];
    });
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(y_.cols());
    for (Eigen::Index j = 0; j < k; ++j) acc += y_.row(order[static_cast<std::size_t>(j)]);
    out.row(q) = acc / static_cast<double>(k);
  }
  return out;
}

RegressorState KnnRegressor::save() const {
  return {{"k", std::to_string(k_)}, {"x", encode_matrix(x_)}, {"y", encode_matrix(y_)}};
}

void KnnRegressor::load(const RegressorState& state) {
  auto k = try_parse_int(field(state, "k"));
  if (!k) fail(ErrorCode::parse, "knn: bad k");
  k_ = static_cast<int>(*k);
  x_ = decode_matrix(field(state, "x"));
  y_ = decode_matrix(field(state, "y"));
}

// ---------------------------------------------------------------------------
// linear

void LinearRegressor::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.rows() == 0) fail(ErrorCode::invalid_argument, "linear: bad training shapes");
  Eigen::MatrixXd a(x.rows(), x.cols() + 1);
  a.col(0).setOnes();
  a.rightCols(x.cols()) = x;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  coef_ = cod.solve(y);
}

Eigen::MatrixXd LinearRegressor::predict(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd out = x * coef_.bottomRows(coef_.rows() - 1);
  out.rowwise() += coef_.row(0);
  return out;
}

RegressorState LinearRegressor::save() const { return {{"coef", encode_matrix(coef_)}}; }

void LinearRegressor::load(const RegressorState& state) { coef_ = decode_matrix(field(state, "coef")); }

// ---------------------------------------------------------------------------
// Trees

double RegressionTree::predict(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  int k = 0;
  while (nodes[static_cast<std::size_t>(k)].feature >= 0) {
    const Node& n = nodes[static_cast<std::size_t>(k)];
    k = x(n.feature) <= n.threshold ? n.left : n.right;
  }
  return nodes[static_cast<std::size_t>(k)].value;
}

namespace {

int grow(RegressionTree& tree, const Eigen::MatrixXd& x, const Eigen::VectorXd& t, std::vector<int> rows,
         int depth) {
  const int id = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  double total = 0.0;
  for (int r : rows) total += t(r);
  const double n = static_cast<double>(rows.size());
  tree.nodes[static_cast<std::size_t>(id)].value = total / n;
  if (depth == 0 || rows.size() < 2) return id;

  const double base = total * total / n;
  double best_gain = 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  std::vector<int> sorted = rows;
  for (Eigen::Index f = 0; f < x.cols(); ++f) {
    std::stable_sort(sorted.begin(), sorted.end(), [&](int a, int b) { return x(a, f) < x(b, f); });
    double left = 0.0;
    for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
      left += t(sorted[k]);
      const double xa = x(sorted[k], f), xb = x(sorted[k + 1], f);
      if (xa == xb) continue;
      const double nl = static_cast<double>(k + 1), nr = n - nl;
      const double right = total - left;
      const double gain = left * left / nl + right * right / nr - base;
      if (gain > best_gain) {
        best_gain = gain;
        best_feature = static_cast<int>(f);
        best_threshold = xa + 0.5 * (xb - xa);
      }
    }
  }
  if (best_feature < 0) return id;
  std::vector<int> lrows, rrows;
  for (int r : rows) (x(r, best_feature) <= best_threshold ? lrows : rrows).push_back(r);
  const int l = grow(tree, x, t, std::move(lrows), depth - 1);
  const int r = grow(tree, x, t, std::move(rrows), depth - 1);
  auto& node = tree.nodes[static_cast<std::size_t>(id)];
  node.feature = best_feature;
  node.threshold = best_threshold;
  node.left = l;
  node.right = r;
  return id;
}

}  // namespace

RegressionTree RegressionTree::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& target, int max_depth) {
  RegressionTree tree;
  std::vector<int> rows(static_cast<std::size_t>(x.rows()));
  std::iota(rows.begin(), rows.end(), 0);
  grow(tree, x, target, std::move(rows), max_depth);
  return tree;
}

// ---------------------------------------------------------------------------
// gbt-chain

double GbtChainRegressor::predict_stage(const Stage& stage, const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  double v = stage.init;
  for (const auto& tree : stage.trees) v += options_.learning_rate * tree.predict(x);
  return v;
}

void GbtChainRegressor::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.rows() == 0) fail(ErrorCode::invalid_argument, "gbt-chain: bad training shapes");
  stages_.assign(static_cast<std::size_t>(y.cols()), Stage{});
  history_.assign(static_cast<std::size_t>(y.cols()), {});
  Eigen::MatrixXd input(x.rows(), x.cols() + y.cols());
  input.leftCols(x.cols()) = x;
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    const Eigen::MatrixXd stage_input = input.leftCols(x.cols() + t);
    Stage& stage = stages_[static_cast<std::size_t>(t)];
    stage.init = y.col(t).mean();
    Eigen::VectorXd pred = Eigen::VectorXd::Constant(x.rows(), stage.init);
    for (int round = 0; round < options_.trees; ++round) {
      const Eigen::VectorXd residual = y.col(t) - pred;
      RegressionTree tree = RegressionTree::fit(stage_input, residual, options_.depth);
      for (Eigen::Index r = 0; r < x.rows(); ++r) pred(r) += options_.learning_rate * tree.predict(stage_input.row(r));
      stage.trees.push_back(std::move(tree));
      history_[static_cast<std::size_t>(t)].push_back((y.col(t) - pred).squaredNorm() / static_cast<double>(x.rows()));
    }
    input.col(x.cols() + t) = pred;
  }
}

Eigen::MatrixXd GbtChainRegressor::predict(const Eigen::MatrixXd& x) const {
  const Eigen::Index outputs = static_cast<Eigen::Index>(stages_.size());
  Eigen::MatrixXd input(x.rows(), x.cols() + outputs);
  input.leftCols(x.cols()) = x;
  for (Eigen::Index t = 0; t < outputs; ++t) {
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      input(r, x.cols() + t) = predict_stage(stages_[static_cast<std::size_t>(t)], input.row(r).head(x.cols() + t));
    }
  }
  return input.rightCols(outputs);
}

RegressorState GbtChainRegressor::save() const {
  RegressorState s;
  s["learning_rate"] = format_double(options_.learning_rate);
  s["depth"] = std::to_string(options_.depth);
  s["trees"] = std::to_string(options_.trees);
  s["stages"] = std::to_string(stages_.size());
  for (std::size_t t = 0; t < stages_.size(); ++t) {
    // init, tree count, then per tree: node count and (feature, threshold, left, right, value) per node.
    std::vector<double> v{stages_[t].init, static_cast<double>(stages_[t].trees.size())};
    for (const auto& tree : stages_[t].trees) {
      v.push_back(static_cast<double>(tree.nodes.size()));
      for (const auto& n : tree.nodes) {
        v.insert(v.end(), {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                           static_cast<double>(n.right), n.value});
      }
    }
    s["stage." + std::to_string(t)] = encode_numbers(v);
  }
  return s;
}

void GbtChainRegressor::load(const RegressorState& state) {
  options_.learning_rate = parse_double(field(state, "learning_rate"));
  options_.depth = static_cast<int>(parse_double(field(state, "depth")));
  options_.trees = static_cast<int>(parse_double(field(state, "trees")));
  const auto count = static_cast<std::size_t>(parse_double(field(state, "stages")));
  stages_.assign(count, Stage{});
  history_.assign(count, {});
  for (std::size_t t = 0; t < count; ++t) {
    const std::vector<double> v = decode_numbers(field(state, "stage." + std::to_string(t)));
    std::size_t k = 0;
    auto next = [&] {
      if (k >= v.size()) fail(ErrorCode::parse, "gbt-chain: truncated stage");
      return v[k++];
    };
    Stage& stage = stages_[t];
    stage.init = next();
    const auto trees = static_cast<std::size_t>(next());
    for (std::size_t j = 0; j < trees; ++j) {
      RegressionTree tree;
      const auto nodes = static_cast<std::size_t>(next());
      for (std::size_t q = 0; q < nodes; ++q) {
        RegressionTree::Node n;
        n.feature = static_cast<int>(next());
        n.threshold = next();
        n.left = static_cast<int>(next());
        n.right = static_cast<int>(next());
        n.value = next();
        tree.nodes.push_back(n);
      }
      stage.trees.push_back(std::move(tree));
    }
    if (k != v.size()) fail(ErrorCode::parse, "gbt-chain: trailing stage data");
  }
}

// ---------------------------------------------------------------------------
// mean

void MeanRegressor::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() != y.rows() || x.rows() == 0) fail(ErrorCode::invalid_argument, "random: bad training shapes");
  mean_ = y.colwise().mean();
}

Eigen::MatrixXd MeanRegressor::predict(const Eigen::MatrixXd& x) const {
  return mean_.replicate(x.rows(), 1);
}

RegressorState MeanRegressor::save() const { return {{"mean", encode_matrix(mean_)}}; }

void MeanRegressor::load(const RegressorState& state) { mean_ = decode_matrix(field(state, "mean")); }

}  // namespace reczilla
