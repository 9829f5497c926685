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

#include "reczilla/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "reczilla/common.hpp"

namespace reczilla {

namespace {

struct BaseEntry {
  BaseMetric metric;
  std::string_view name;
};

constexpr BaseEntry kBases[] = {
    {BaseMetric::precision, "PRECISION"},
    {BaseMetric::precision_recall_min_den, "PRECISION_RECALL_MIN_DEN"},
    {BaseMetric::recall, "RECALL"},
    {BaseMetric::map, "MAP"},
    {BaseMetric::map_min_den, "MAP_MIN_DEN"},
    {BaseMetric::mrr, "MRR"},
    {BaseMetric::ndcg, "NDCG"},
    {BaseMetric::f1, "F1"},
    {BaseMetric::hit_rate, "HIT_RATE"},
    {BaseMetric::arhr, "ARHR"},
    {BaseMetric::novelty, "NOVELTY"},
    {BaseMetric::average_popularity, "AVERAGE_POPULARITY"},
    {BaseMetric::diversity_similarity, "DIVERSITY_SIMILARITY"},
    {BaseMetric::diversity_mean_inter_list, "DIVERSITY_MEAN_INTER_LIST"},
    {BaseMetric::diversity_herfindahl, "DIVERSITY_HERFINDAHL"},
    {BaseMetric::diversity_gini, "DIVERSITY_GINI"},
    {BaseMetric::shannon_entropy, "SHANNON_ENTROPY"},
    {BaseMetric::item_coverage, "ITEM_COVERAGE"},
    {BaseMetric::item_hit_coverage, "ITEM_HIT_COVERAGE"},
    {BaseMetric::user_coverage, "USER_COVERAGE"},
    {BaseMetric::user_hit_coverage, "USER_HIT_COVERAGE"},
};

}  // namespace

const std::vector<BaseMetric>& all_base_metrics() {
  static const std::vector<BaseMetric> bases = [] {
    std::vector<BaseMetric> out;
    for (const auto& b : kBases) out.push_back(b.metric);
    return out;
  }();
  return bases;
}

std::string_view base_metric_name(BaseMetric metric) {
  for (const auto& b : kBases) {
    if (b.metric == metric) return b.name;
  }
  return "UNKNOWN";
}

std::optional<BaseMetric> find_base_metric(std::string_view name) {
  const std::string upper = to_upper(trim(name));
  for (const auto& b : kBases) {
    if (b.name == upper) return b.metric;
  }
  return std::nullopt;
}

const std::vector<int>& standard_cutoffs() {
  static const std::vector<int> cutoffs{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 30, 40, 50};
  return cutoffs;
}

std::string MetricSpec::name() const {
  return std::string(base_metric_name(base)) + "@" + std::to_string(cutoff);
}

std::string base_metric_list() {
  std::string out;
  for (const auto& b : kBases) {
    if (!out.empty()) out += ", ";
    out += b.name;
  }
  return out;
}

MetricSpec parse_metric_spec(std::string_view text, bool allow_any_cutoff) {
  const std::string_view t = trim(text);
  const auto at = t.find('@');
  if (at == std::string_view::npos) {
    fail(ErrorCode::unknown_metric, "metric '" + std::string(t) + "' must have the form BASE@CUTOFF; valid bases: " +
                                        base_metric_list());
  }
  auto base = find_base_metric(t.substr(0, at));
  if (!base) {
    fail(ErrorCode::unknown_metric, "unknown metric base '" + std::string(t.substr(0, at)) +
                                        "'; valid bases: " + base_metric_list());
  }
  auto cutoff = try_parse_int(t.substr(at + 1));
  if (!cutoff || *cutoff < 1) {
    fail(ErrorCode::unknown_metric, "invalid cutoff in '" + std::string(t) + "'");
  }
  const auto& std_cutoffs = standard_cutoffs();
  if (!allow_any_cutoff &&
      std::find(std_cutoffs.begin(), std_cutoffs.end(), static_cast<int>(*cutoff)) == std_cutoffs.end()) {
    fail(ErrorCode::unknown_metric, "cutoff " + std::to_string(*cutoff) + " is not a standard cutoff");
  }
  return {*base, static_cast<int>(*cutoff)};
}

std::vector<MetricSpec> metric_specs(const std::vector<BaseMetric>& bases, const std::vector<int>& cutoffs) {
  std::vector<MetricSpec> out;
  for (BaseMetric b : bases) {
    for (int k : cutoffs) out.push_back({b, k});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Global pieces

GlobalDiversity global_diversity(std::span<const double> counts, int num_items) {
  if (num_items < 1 || static_cast<int>(counts.size()) > num_items) {
    fail(ErrorCode::invalid_argument, "global_diversity: inconsistent item count");
  }
  double total = 0.0;
  for (double c : counts) {
    if (c < 0) fail(ErrorCode::invalid_argument, "global_diversity: negative count");
    total += c;
  }
  if (!(total > 0.0)) fail(ErrorCode::invalid_argument, "global_diversity: zero total count");

  GlobalDiversity out;
  std::vector<double> shares(static_cast<std::size_t>(num_items), 0.0);
  for (std::size_t i = 0; i < counts.size(); ++i) shares[i] = counts[i] / total;
  double sum_sq = 0.0;
  for (double p : shares) {
    sum_sq += p * p;
    if (p > 0) out.shannon -= p * std::log2(p);
  }
  out.herfindahl = 1.0 - sum_sq;
  // sum_{i,j} |p_i - p_j| = 2 sum_k (2k - n - 1) p_(k) over ascending order.
  std::vector<double> sorted = shares;
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(num_items);
  double abs_diff = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    abs_diff += (2.0 * static_cast<double>(k + 1) - n - 1.0) * sorted[k];
  }
  // Shares sum to one, so the 2 * I * sum(p) denominator reduces to 2 * I.
  out.gini = 2.0 * abs_diff / (2.0 * n);
  return out;
}

double inter_list_diversity(const std::vector<std::vector<int>>& lists, int cutoff) {
  if (lists.size() < 2) fail(ErrorCode::invalid_argument, "inter-list diversity needs at least two users");
  if (cutoff < 1) fail(ErrorCode::invalid_argument, "cutoff must be positive");
  std::map<int, double> counts;
  for (const auto& list : lists) {
    const std::size_t k = std::min<std::size_t>(list.size(), static_cast<std::size_t>(cutoff));
    for (std::size_t j = 0; j < k; ++j) counts[list[j]] += 1.0;
  }
  // Pairs sharing item i: c_i (c_i - 1) / 2.
  double shared = 0.0;
  for (const auto& [item, c] : counts) shared += c * (c - 1.0) / 2.0;
  const double n = static_cast<double>(lists.size());
  const double pairs = n * (n - 1.0) / 2.0;
  return 1.0 - shared / (static_cast<double>(cutoff) * pairs);
}

NoveltyPopularity novelty_and_popularity(const EvaluationContext& context, int cutoff) {
  NoveltyPopularity out;
  const auto& pop = context.item_popularity;
  double total = 0.0;
  double max_pop = 0.0;
  for (double c : pop) {
    total += c;
    max_pop = std::max(max_pop, c);
  }
  const std::size_t n_users = context.recommendations.size();
  if (n_users == 0) return out;
  const double n_items = static_cast<double>(context.num_items);
  for (const auto& list : context.recommendations) {
    const std::size_t k = std::min<std::size_t>(list.size(), static_cast<std::size_t>(cutoff));
    double nov = 0.0;
    double avg = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double c = pop[static_cast<std::size_t>(list[j])];
      const double p = std::max(c, 1.0) / std::max(total, 1.0);
      nov += -std::log(p) / n_items;
      avg += max_pop > 0 ? c / max_pop : 0.0;
    }
    out.novelty += nov;
    out.average_popularity += k > 0 ? avg / static_cast<double>(k) : 0.0;
  }
  out.novelty /= static_cast<double>(n_users);
  out.average_popularity /= static_cast<double>(n_users);
  return out;
}

double items_in_evaluation_set(const EvaluationContext& context) {
  std::set<int> items;
  for (const auto& rel : context.relevant) items.insert(rel.begin(), rel.end());
  return context.num_items > 0 ? static_cast<double>(items.size()) / context.num_items : 0.0;
}

double users_in_evaluation_set(const EvaluationContext& context) {
  return context.num_users > 0
             ? static_cast<double>(context.relevant.size()) / context.num_users
             : 0.0;
}

// ---------------------------------------------------------------------------
// Full evaluation

namespace {

struct PerCutoff {
  double precision = 0, prec_min_den = 0, recall = 0, map = 0, map_min_den = 0, mrr = 0, ndcg = 0,
         hit_rate = 0, arhr = 0;
};

}  // namespace

MetricVector evaluate(const EvaluationContext& context, const std::vector<MetricSpec>& specs) {
  if (context.recommendations.size() != context.relevant.size()) {
    fail(ErrorCode::invalid_argument, "recommendations and relevant sets differ in user count");
  }
  if (static_cast<int>(context.item_popularity.size()) != context.num_items) {
    fail(ErrorCode::invalid_argument, "item popularity must have one entry per item");
  }
  std::set<int> cutoff_set;
  for (const auto& s : specs) {
    if (s.cutoff < 1) fail(ErrorCode::invalid_argument, "cutoff must be positive");
    if (s.cutoff > context.list_length) {
      fail(ErrorCode::invalid_argument, "cutoff " + std::to_string(s.cutoff) +
                                            " exceeds recommendation list length " +
                                            std::to_string(context.list_length));
    }
    cutoff_set.insert(s.cutoff);
  }
  const std::size_t n_users = context.recommendations.size();
  const double n = static_cast<double>(n_users);

  std::vector<std::vector<int>> relevant_sorted(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    relevant_sorted[u] = context.relevant[u];
    std::sort(relevant_sorted[u].begin(), relevant_sorted[u].end());
  }
  std::set<int> all_relevant;
  for (const auto& rel : relevant_sorted) all_relevant.insert(rel.begin(), rel.end());

  MetricVector out;
  for (int cutoff : cutoff_set) {
    PerCutoff sum;
    std::vector<double> pooled(static_cast<std::size_t>(context.num_items), 0.0);
    std::set<int> hit_items;
    std::size_t users_with_list = 0;
    std::vector<std::vector<int>> truncated;
    truncated.reserve(n_users);
    for (std::size_t u = 0; u < n_users; ++u) {
      const auto& list = context.recommendations[u];
      const auto& rel = relevant_sorted[u];
      const std::size_t k = std::min<std::size_t>(list.size(), static_cast<std::size_t>(cutoff));
      truncated.emplace_back(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k));
      if (k > 0) ++users_with_list;
      const double num_rel = static_cast<double>(rel.size());
      const double min_den = std::min(static_cast<double>(cutoff), num_rel);
      double hits = 0, ap = 0, rr = 0, arhr = 0, dcg = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const int item = list[j];
        pooled[static_cast<std::size_t>(item)] += 1.0;
        if (!std::binary_search(rel.begin(), rel.end(), item)) continue;
        hits += 1.0;
        hit_items.insert(item);
        const double rank = static_cast<double>(j + 1);
        ap += hits / rank;
        if (rr == 0) rr = 1.0 / rank;
        arhr += 1.0 / rank;
        dcg += 1.0 / std::log2(rank + 1.0);
      }
      double idcg = 0;
      for (int j = 1; j <= static_cast<int>(min_den); ++j) idcg += 1.0 / std::log2(j + 1.0);
      sum.precision += hits / cutoff;
      sum.prec_min_den += min_den > 0 ? hits / min_den : 0.0;
      sum.recall += num_rel > 0 ? hits / num_rel : 0.0;
      sum.map += ap / cutoff;
      sum.map_min_den += min_den > 0 ? ap / min_den : 0.0;
      sum.mrr += rr;
      sum.ndcg += idcg > 0 ? dcg / idcg : 0.0;
      sum.hit_rate += hits > 0 ? 1.0 : 0.0;
      sum.arhr += arhr;
    }
    auto mean = [&](double total) { return n_users > 0 ? total / n : 0.0; };
    const double precision = mean(sum.precision);
    const double recall = mean(sum.recall);
    const double hit_rate = mean(sum.hit_rate);
    const double user_cov = mean(static_cast<double>(users_with_list));
    const NoveltyPopularity np = novelty_and_popularity(context, cutoff);
    double pooled_total = 0.0;
    double covered = 0.0;
    for (double c : pooled) {
      pooled_total += c;
      if (c > 0) covered += 1.0;
    }
    GlobalDiversity gd;
    if (pooled_total > 0) gd = global_diversity(pooled, context.num_items);
    const double inter = n_users >= 2 ? inter_list_diversity(truncated, cutoff) : 0.0;

    auto value = [&](BaseMetric b) -> double {
      switch (b) {
        case BaseMetric::precision: return precision;
        case BaseMetric::precision_recall_min_den: return mean(sum.prec_min_den);
        case BaseMetric::recall: return recall;
        case BaseMetric::map: return mean(sum.map);
        case BaseMetric::map_min_den: return mean(sum.map_min_den);
        case BaseMetric::mrr: return mean(sum.mrr);
        case BaseMetric::ndcg: return mean(sum.ndcg);
        case BaseMetric::f1:
          return precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        case BaseMetric::hit_rate: return hit_rate;
        case BaseMetric::arhr: return mean(sum.arhr);
        case BaseMetric::novelty: return np.novelty;
        case BaseMetric::average_popularity: return np.average_popularity;
        case BaseMetric::diversity_similarity:
        case BaseMetric::diversity_mean_inter_list: return inter;
        case BaseMetric::diversity_herfindahl: return gd.herfindahl;
        case BaseMetric::diversity_gini: return gd.gini;
        case BaseMetric::shannon_entropy: return gd.shannon;
        case BaseMetric::item_coverage:
          return context.num_items > 0 ? covered / context.num_items : 0.0;
        case BaseMetric::item_hit_coverage:
          return all_relevant.empty() ? 0.0
                                      : static_cast<double>(hit_items.size()) /
                                            static_cast<double>(all_relevant.size());
        case BaseMetric::user_coverage: return user_cov;
        case BaseMetric::user_hit_coverage: return hit_rate * user_cov;
      }
      return 0.0;
    };
    for (const auto& s : specs) {
      if (s.cutoff == cutoff) out[s] = value(s.base);
    }
  }
  return out;
}

MetricVector evaluate(const EvaluationContext& context, const std::vector<int>& cutoffs) {
  return evaluate(context, metric_specs(all_base_metrics(), cutoffs));
}

}  // namespace reczilla
