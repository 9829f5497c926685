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

// Numerical building blocks of the algorithm zoo, exposed for reuse and
// direct testing.

#pragma once

#include <Eigen/Dense>

#include <string>

#include "reczilla/common.hpp"
#include "reczilla/sparse.hpp"

namespace reczilla {

// ---------------------------------------------------------------------------
// Neighborhood similarities

enum class SimilarityKind { cosine, asymmetric, dice, jaccard, tversky, euclidean };
enum class Axis { user, item };

SimilarityKind parse_similarity_kind(std::string_view name);

struct SimilarityParams {
  int top_k = 50;
  double shrink = 0.0;
  bool normalize = true;
  std::string feature_weighting = "none";  // none | BM25 | TF-IDF
  double alpha = 0.5;                       // asymmetric exponent / tversky alpha
  double beta = 0.5;                        // tversky beta
  bool normalize_avg_row = false;
  std::string from_distance = "lin";  // lin | log | exp
};

/// Similarity between the entities of `axis` (rows for user, columns for
/// item). Row e of the result holds the top-k most similar other entities of
/// e; the diagonal is zero and only nonzero similarities are stored. In the
/// asymmetric and tversky kinds, the row entity plays the role of x.
CsrMatrix build_similarity(const CsrMatrix& ratings, Axis axis, SimilarityKind kind,
                           const SimilarityParams& params, const Deadline& deadline = Deadline());

/// Entity-by-feature matrix after TF-IDF or BM25 reweighting (rows are the
/// entities being compared).
CsrMatrix apply_feature_weighting(const CsrMatrix& entity_by_feature, const std::string& scheme);

enum class GraphVariant { p3alpha, rp3beta };

/// Item-item random-walk weights W with row j = source item j, so that
/// scores of user u are X_u W. Diagonal zeroed, rows truncated to top_k, then
/// optionally l1-normalized.
CsrMatrix graph_similarity(const CsrMatrix& ratings, GraphVariant variant, int top_k, double alpha,
                           double beta, bool normalize_similarity,
                           const Deadline& deadline = Deadline());

// ---------------------------------------------------------------------------
// Closed-form and regression models

/// B = I - P diag(1 / diag P) with P = (X^T X + l2 I)^-1.
Eigen::MatrixXd fit_ease_r(const CsrMatrix& ratings, double l2, int item_cap = 20000);

/// Nonnegative elastic-net weights predicting item column `target` from the
/// other item columns, minimizing
///   1/(2 n) ||x_t - X w||^2 + alpha l1_ratio ||w||_1 + alpha (1 - l1_ratio)/2 ||w||^2
/// with w_target fixed at zero. `item_major` is X^T.
Eigen::VectorXd slim_elastic_net_column(const CsrMatrix& ratings, const CsrMatrix& item_major,
                                        int target, double alpha, double l1_ratio,
                                        int max_iter = 100, double tol = 1e-4);

// ---------------------------------------------------------------------------
// Stochastic optimizers

enum class SgdMode { sgd, adagrad, adam };
SgdMode parse_sgd_mode(std::string_view name);

/// Per-row update rule with the optimizer state of one parameter matrix.
class RowOptimizer {
 public:
  RowOptimizer(SgdMode mode, double learning_rate, Eigen::Index rows, Eigen::Index cols);
  /// Descends along `grad` for row `row` of `param`.
  void step(Eigen::MatrixXd& param, Eigen::Index row, const Eigen::RowVectorXd& grad);
  /// Single scalar parameter variants (bias vectors, dense weight matrices).
  void step(Eigen::VectorXd& param, Eigen::Index index, double grad);
  void step(Eigen::MatrixXd& param, Eigen::Index row, Eigen::Index col, double grad);

 private:
  SgdMode mode_;
  double lr_;
  Eigen::MatrixXd first_;
  Eigen::MatrixXd second_;
  Eigen::VectorXi steps_;
};

// ---------------------------------------------------------------------------
// BPR matrix factorization

struct BprState {
  Eigen::MatrixXd user;  // U x f
  Eigen::MatrixXd item;  // I x f
};

struct BprGradient {
  Eigen::RowVectorXd user;
  Eigen::RowVectorXd positive;
  Eigen::RowVectorXd negative;
};

/// L = -ln sigmoid(x_uij) + pos_reg/2 (|p_u|^2 + |q_i|^2) + neg_reg/2 |q_j|^2.
double bpr_loss(const BprState& state, int u, int i, int j, double pos_reg, double neg_reg);
/// Gradient of bpr_loss; the data term carries the factor sigmoid(-x_uij).
BprGradient bpr_gradient(const BprState& state, int u, int i, int j, double pos_reg,
                         double neg_reg);

struct BprOptimizers {
  RowOptimizer user;
  RowOptimizer item;
};
/// One descent step on (u, i, j).
void bpr_step(BprState& state, BprOptimizers& optimizers, int u, int i, int j, double pos_reg,
              double neg_reg);

// ---------------------------------------------------------------------------
// Implicit ALS

enum class ConfidenceScaling { linear, log };

struct IalsParams {
  double alpha = 1.0;
  double epsilon = 1.0;
  double reg = 1e-3;
  ConfidenceScaling scaling = ConfidenceScaling::linear;
};

/// c = 1 + alpha r (linear) or 1 + alpha log(1 + r / epsilon) (log).
double ials_confidence(double rating, const IalsParams& params);

/// sum_{u,i} c_ui (p_ui - x_u . y_i)^2 + reg (|X|^2 + |Y|^2), with p_ui = 1 on
/// stored entries and c_ui = 1 elsewhere.
double ials_objective(const CsrMatrix& ratings, const Eigen::MatrixXd& user_factors,
                      const Eigen::MatrixXd& item_factors, const IalsParams& params);

/// Exact ridge solve of every row of `solve_for` given `fixed`. `by_row` has
/// one row per entity being solved for.
void ials_update(const CsrMatrix& by_row, const Eigen::MatrixXd& fixed, Eigen::MatrixXd& solve_for,
                 const IalsParams& params, const Deadline& deadline = Deadline());

}  // namespace reczilla
