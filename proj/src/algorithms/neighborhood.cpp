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

#include "internal.hpp"

namespace reczilla::detail {

namespace {

class UserKnnModel : public Recommender {
 public:
  UserKnnModel(CsrMatrix ratings, CsrMatrix similarity)
      : ratings_(std::move(ratings)), similarity_(std::move(similarity)) {}

  void score(int user, std::span<double> out) const override {
    auto neighbors = similarity_.row_indices(user);
    auto weights = similarity_.row_values(user);
    for (std::size_t k = 0; k < neighbors.size(); ++k) {
      auto items = ratings_.row_indices(neighbors[k]);
      auto values = ratings_.row_values(neighbors[k]);
      for (std::size_t t = 0; t < items.size(); ++t) {
        out[static_cast<std::size_t>(items[t])] += weights[k] * values[t];
      }
    }
  }
  const CsrMatrix* sparse_state(std::string_view name) const override {
    return name == "similarity" ? &similarity_ : nullptr;
  }

 private:
  CsrMatrix ratings_;
  CsrMatrix similarity_;
};

template <typename T, typename F>
T param_or(const ParamMap& params, const std::string& name, T fallback, F getter) {
  return params.count(name) ? getter(params, name) : fallback;
}

}  // namespace

RecommenderPtr fit_knn(const FitContext& ctx, Axis axis, SimilarityKind kind) {
  const ParamMap& p = ctx.params;
  SimilarityParams sp;
  sp.top_k = static_cast<int>(param_int(p, "top-K"));
  sp.shrink = static_cast<double>(param_int(p, "shrink"));
  sp.normalize = param_or(p, "normalize", kind != SimilarityKind::euclidean, param_bool);
  sp.feature_weighting = param_or<std::string>(p, "feature-weighting", "none", param_string);
  sp.normalize_avg_row = param_or(p, "normalize-avg-row", false, param_bool);
  sp.from_distance = param_or<std::string>(p, "similarity-from-distance", "lin", param_string);
  if (kind == SimilarityKind::asymmetric) sp.alpha = param_real(p, "alpha");
  if (kind == SimilarityKind::tversky) {
    sp.alpha = param_real(p, "alpha");
    sp.beta = param_real(p, "beta");
  }
  CsrMatrix sim = build_similarity(ctx.train, axis, kind, sp, ctx.deadline);
  if (axis == Axis::user) return std::make_shared<UserKnnModel>(ctx.train, std::move(sim));
  // Row i of sim lists the neighbors of target item i; scoring walks from
  // the user's items, so store it source-major.
  return std::make_shared<ItemToItemModel>(ctx.train, sim.transpose(), "weights");
}

RecommenderPtr fit_graph(const FitContext& ctx, GraphVariant variant) {
  const ParamMap& p = ctx.params;
  const double beta = variant == GraphVariant::rp3beta ? param_real(p, "beta") : 0.0;
  CsrMatrix w = graph_similarity(ctx.train, variant, static_cast<int>(param_int(p, "top-K")),
                                 param_real(p, "alpha"), beta, param_bool(p, "normalize-similarity"),
                                 ctx.deadline);
  return std::make_shared<ItemToItemModel>(ctx.train, std::move(w), "weights");
}

}  // namespace reczilla::detail
