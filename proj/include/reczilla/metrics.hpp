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

#include <compare>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace reczilla {

enum class BaseMetric {
  precision,
  precision_recall_min_den,
  recall,
  map,
  map_min_den,
  mrr,
  ndcg,
  f1,
  hit_rate,
  arhr,
  novelty,
  average_popularity,
  diversity_similarity,
  diversity_mean_inter_list,
  diversity_herfindahl,
  diversity_gini,
  shannon_entropy,
  item_coverage,
  item_hit_coverage,
  user_coverage,
  user_hit_coverage,
};

inline constexpr int kNumBaseMetrics = 21;

const std::vector<BaseMetric>& all_base_metrics();
std::string_view base_metric_name(BaseMetric metric);
/// Case-insensitive.
std::optional<BaseMetric> find_base_metric(std::string_view name);

/// {1..10, 15, 20, 30, 40, 50}.
const std::vector<int>& standard_cutoffs();

struct MetricSpec {
  BaseMetric base = BaseMetric::precision;
  int cutoff = 10;

  std::string name() const;
  auto operator<=>(const MetricSpec&) const = default;
};

/// Parses `BASE@CUTOFF` case-insensitively. Unknown bases raise unknown_metric;
/// cutoffs outside the standard set are rejected unless allow_any_cutoff.
MetricSpec parse_metric_spec(std::string_view text, bool allow_any_cutoff = false);
/// Comma-separated list of the base names, for error messages.
std::string base_metric_list();

std::vector<MetricSpec> metric_specs(const std::vector<BaseMetric>& bases, const std::vector<int>& cutoffs);

using MetricVector = std::map<MetricSpec, double>;

/// Inputs of one evaluation. Row u of `recommendations` and `relevant`
/// belongs to the same evaluated user.
struct EvaluationContext {
  std::vector<std::vector<int>> recommendations;  // ranked, no duplicates
  std::vector<std::vector<int>> relevant;         // nonempty per evaluated user
  std::vector<double> item_popularity;            // training counts, one per item
  int num_items = 0;
  int num_users = 0;  // users of the dataset, evaluated or not
  int list_length = 0;  // length the lists were requested at
};

/// All 21 base metrics at every cutoff.
MetricVector evaluate(const EvaluationContext& context, const std::vector<int>& cutoffs);
MetricVector evaluate(const EvaluationContext& context, const std::vector<MetricSpec>& specs);

struct NoveltyPopularity {
  double novelty = 0.0;
  double average_popularity = 0.0;
};
NoveltyPopularity novelty_and_popularity(const EvaluationContext& context, int cutoff);

struct GlobalDiversity {
  double gini = 0.0;
  double herfindahl = 0.0;
  double shannon = 0.0;
};
/// counts[i] = number of lists item i appears in; zero total is an error.
GlobalDiversity global_diversity(std::span<const double> counts, int num_items);

/// Mean over user pairs of 1 - |L_u and L_v| / cutoff, for lists truncated at
/// the cutoff. Fewer than two lists is an error.
double inter_list_diversity(const std::vector<std::vector<int>>& lists, int cutoff);

/// Dataset descriptors used by the landmark features.
double items_in_evaluation_set(const EvaluationContext& context);
double users_in_evaluation_set(const EvaluationContext& context);

}  // namespace reczilla
