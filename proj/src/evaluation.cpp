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

#include "reczilla/evaluation.hpp"

#include <algorithm>

#include "reczilla/common.hpp"

namespace reczilla {

EvaluationContext build_evaluation_context(const FittedModel& model, const CsrMatrix& train,
                                           const CsrMatrix& heldout, int list_length) {
  if (train.rows() != heldout.rows() || train.cols() != heldout.cols()) {
    fail(ErrorCode::invalid_argument, "train and held-out shapes differ");
  }
  EvaluationContext ctx;
  ctx.num_items = train.cols();
  ctx.num_users = train.rows();
  ctx.list_length = list_length;
  ctx.item_popularity.assign(static_cast<std::size_t>(train.cols()), 0.0);
  for (int item : train.indices()) ctx.item_popularity[static_cast<std::size_t>(item)] += 1.0;

  std::vector<double> scores(static_cast<std::size_t>(train.cols()));
  for (int u = 0; u < heldout.rows(); ++u) {
    if (heldout.row_nnz(u) == 0) continue;
    model.score_into(u, true, scores);
    ctx.recommendations.push_back(top_k_items(scores, list_length));
    auto rel = heldout.row_indices(u);
    ctx.relevant.emplace_back(rel.begin(), rel.end());
  }
  return ctx;
}

int max_cutoff(const std::vector<MetricSpec>& specs) {
  int k = 0;
  for (const auto& s : specs) k = std::max(k, s.cutoff);
  return k;
}

MetricVector evaluate_model(const FittedModel& model, const CsrMatrix& train, const CsrMatrix& heldout,
                            const std::vector<MetricSpec>& specs) {
  return evaluate(build_evaluation_context(model, train, heldout, max_cutoff(specs)), specs);
}

}  // namespace reczilla
