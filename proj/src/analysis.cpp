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

#include "reczilla/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_map>

#include "reczilla/common.hpp"
#include "reczilla/hyperparams.hpp"

namespace reczilla {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::vector<int> competition_ranks(std::span<const double> values) {
  std::vector<int> ranks(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    int better = 0;
    for (double v : values) better += v > values[i] ? 1 : 0;
    ranks[i] = better + 1;
  }
  return ranks;
}

RankTable rank_table(const MetaDataset& metadataset, const std::vector<MetricSpec>& metrics, int min_algorithms) {
  if (min_algorithms < 2) fail(ErrorCode::invalid_argument, "min_algorithms must be >= 2");
  RankTable table;
  for (const MetricSpec& spec : metrics) {
    const auto best = best_per_pair(metadataset, spec);
    std::map<std::string, std::vector<std::pair<std::string, double>>> per_dataset;
    for (const auto& [key, entry] : best) per_dataset[key.first].emplace_back(key.second, entry.value);
    std::map<std::string, std::vector<int>> ranks_of;
    for (const auto& [dataset, entries] : per_dataset) {
      if (static_cast<int>(entries.size()) < min_algorithms) continue;
      std::vector<double> values;
      for (const auto& e : entries) values.push_back(e.second);
      const std::vector<int> ranks = competition_ranks(values);
      for (std::size_t k = 0; k < entries.size(); ++k) ranks_of[entries[k].first].push_back(ranks[k]);
    }
    if (ranks_of.empty()) {
      warn("rank table: no dataset with at least " + std::to_string(min_algorithms) + " algorithms for " +
           spec.name());
      continue;
    }
    auto& out = table[spec];
    for (const auto& [alg, ranks] : ranks_of) {
      RankStats s;
      s.min_rank = *std::min_element(ranks.begin(), ranks.end());
      s.max_rank = *std::max_element(ranks.begin(), ranks.end());
      double sum = 0.0;
      for (int r : ranks) sum += r;
      s.mean_rank = sum / static_cast<double>(ranks.size());
      s.datasets = static_cast<int>(ranks.size());
      out[alg] = s;
    }
  }
  return table;
}

std::string rank_table_text(const RankTable& table) {
  std::ostringstream out;
  out << "metric\talgorithm\tmin_rank\tmax_rank\tmean_rank\tdatasets\n";
  for (const auto& [spec, algs] : table) {
    for (const auto& [alg, s] : algs) {
      out << spec.name() << '\t' << alg << '\t' << s.min_rank << '\t' << s.max_rank << '\t'
          << format_double(s.mean_rank) << '\t' << s.datasets << '\n';
    }
  }
  return out.str();
}

HpFilter parse_hp_filter(std::string_view text) {
  if (text == "defaults-only") return HpFilter::defaults_only;
  if (text == "best-per-pair") return HpFilter::best_per_pair;
  fail(ErrorCode::invalid_argument, "unknown hp filter '" + std::string(text) + "' (defaults-only, best-per-pair)");
}

std::vector<CorrelationEntry> correlation_report(const MetaDataset& metadataset, const PerformanceTarget& target,
                                                 int top_k, HpFilter filter) {
  // algorithm -> dataset -> target value
  std::map<std::string, std::map<std::string, double>> values;
  for (const auto& r : metadataset.records) {
    if (r.status != ExperimentStatus::ok) continue;
    if (filter == HpFilter::defaults_only && r.hp_index != 0) continue;
    double v;
    if (target.train_time) {
      v = r.train_time_s;
    } else {
      auto it = r.metrics.find(target.metric);
      if (it == r.metrics.end()) continue;
      v = it->second;
    }
    auto [pos, inserted] = values[r.algorithm].try_emplace(r.dataset_id, v);
    if (!inserted && (target.maximize() ? v > pos->second : v < pos->second)) pos->second = v;
  }
  std::map<std::string, std::string> family;
  for (const auto& r : metadataset.records) family.try_emplace(r.dataset_id, r.family);
  for (const auto& [id, f] : metadataset.families) family[id] = f;

  std::vector<std::string> feature_names;
  {
    std::set<std::string> present;
    for (const auto& [_, fv] : metadataset.features) {
      for (const auto& [name, __] : fv) present.insert(name);
    }
    for (const auto& name : metafeature_names()) {
      if (present.erase(name)) feature_names.push_back(name);
    }
    feature_names.insert(feature_names.end(), present.begin(), present.end());
  }
  std::map<std::string, std::unordered_map<std::string, double>> lookup;
  for (const auto& [id, fv] : metadataset.features) lookup[id] = {fv.begin(), fv.end()};

  std::vector<CorrelationEntry> entries;
  for (const auto& [alg, per_dataset] : values) {
    for (const auto& feature : feature_names) {
      std::vector<double> x, y;
      std::vector<std::string> fams;
      for (const auto& [dataset, v] : per_dataset) {
        auto lf = lookup.find(dataset);
        if (lf == lookup.end()) continue;
        auto f = lf->second.find(feature);
        if (f == lf->second.end() || std::isnan(f->second) || std::isnan(v)) continue;
        x.push_back(f->second);
        y.push_back(v);
        fams.push_back(family.count(dataset) ? family[dataset] : dataset);
      }
      if (x.size() < 2) continue;
      const std::vector<double> w = family_weights(fams);
      entries.push_back({alg, feature, weighted_correlation(x, y, w), static_cast<int>(x.size())});
    }
  }
  std::stable_sort(entries.begin(), entries.end(), [](const CorrelationEntry& a, const CorrelationEntry& b) {
    return std::abs(a.correlation) > std::abs(b.correlation);
  });
  if (top_k >= 0 && static_cast<int>(entries.size()) > top_k) entries.resize(static_cast<std::size_t>(top_k));
  return entries;
}

std::string correlation_report_text(const std::vector<CorrelationEntry>& entries) {
  std::ostringstream out;
  out << "algorithm\tfeature\tcorrelation\tabs_correlation\tdatasets\n";
  for (const auto& e : entries) {
    out << e.algorithm << '\t' << e.feature << '\t' << format_double(e.correlation) << '\t'
        << format_double(std::abs(e.correlation)) << '\t' << e.datasets << '\n';
  }
  return out.str();
}

std::map<std::string, double> dataset_hardness(const MetaDataset& metadataset, const MetricSpec& metric) {
  std::map<std::string, double> best;
  bool present = false;
  for (const auto& r : metadataset.records) {
    if (r.status != ExperimentStatus::ok) continue;
    auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    present = true;
    auto [pos, inserted] = best.try_emplace(r.dataset_id, it->second);
    if (!inserted) pos->second = std::max(pos->second, it->second);
  }
  if (!present && !metadataset.records.empty()) {
    fail(ErrorCode::unknown_metric, "metric " + metric.name() + " not present in the meta-dataset");
  }
  std::map<std::string, double> out;
  for (const auto& id : metadataset.dataset_ids()) {
    auto it = best.find(id);
    if (it == best.end()) {
      warn("dataset " + id + " has no ok record; hardness missing");
      out[id] = kNaN;
    } else {
      out[id] = -it->second;
    }
  }
  return out;
}

std::string hardness_text(const std::map<std::string, double>& hardness) {
  std::ostringstream out;
  out << "dataset_id\thardness\n";
  for (const auto& [id, h] : hardness) out << id << '\t' << format_value(h) << '\n';
  return out.str();
}

namespace {

using HpKey = std::pair<int, std::string>;

TransferMatrix transfer_for(const std::map<std::string, std::map<HpKey, double>>& table,
                            const std::vector<std::string>& datasets) {
  TransferMatrix tm;
  tm.datasets = datasets;
  const auto n = static_cast<Eigen::Index>(datasets.size());
  tm.values = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto ti = table.find(datasets[static_cast<std::size_t>(i)]);
    if (ti == table.end()) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      auto tj = table.find(datasets[static_cast<std::size_t>(j)]);
      if (tj == table.end()) continue;
      std::vector<std::pair<double, double>> shared;  // (on i, on j), ordered by hp key
      for (const auto& [key, vi] : ti->second) {
        auto f = tj->second.find(key);
        if (f != tj->second.end()) shared.emplace_back(vi, f->second);
      }
      if (shared.size() < 2) continue;
      double lo_i = shared[0].first, hi_i = lo_i, lo_j = shared[0].second, hi_j = lo_j;
      for (const auto& [a, b] : shared) {
        lo_i = std::min(lo_i, a);
        hi_i = std::max(hi_i, a);
        lo_j = std::min(lo_j, b);
        hi_j = std::max(hi_j, b);
      }
      if (hi_i == lo_i || hi_j == lo_j) continue;
      std::size_t best = 0;
      for (std::size_t k = 1; k < shared.size(); ++k) {
        if (shared[k].first > shared[best].first) best = k;
      }
      tm.values(i, j) = (shared[best].second - lo_j) / (hi_j - lo_j);
    }
  }
  return tm;
}

std::map<std::string, std::map<std::string, std::map<HpKey, double>>> transfer_tables(const MetaDataset& md,
                                                                                      const MetricSpec& metric) {
  // algorithm -> dataset -> hp -> value
  std::map<std::string, std::map<std::string, std::map<HpKey, double>>> out;
  for (const auto& r : md.records) {
    if (r.status != ExperimentStatus::ok) continue;
    auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    out[r.algorithm][r.dataset_id][{r.hp_index, r.hp_params}] = it->second;
  }
  return out;
}

}  // namespace

TransferMatrix transfer_matrix(const MetaDataset& metadataset, const std::string& algorithm, const MetricSpec& metric) {
  const auto tables = transfer_tables(metadataset, metric);
  auto it = tables.find(algorithm);
  if (it == tables.end()) {
    const bool known = std::any_of(metadataset.records.begin(), metadataset.records.end(),
                                   [&](const ExperimentRecord& r) { return r.algorithm == algorithm; });
    if (!known) find_algorithm(algorithm);  // throws not_found for unknown names
    return transfer_for({}, {});
  }
  std::vector<std::string> datasets;
  for (const auto& [id, _] : it->second) datasets.push_back(id);
  return transfer_for(it->second, datasets);
}

TransferMatrix average_transfer_matrix(const MetaDataset& metadataset, const MetricSpec& metric) {
  const auto tables = transfer_tables(metadataset, metric);
  std::set<std::string> ids;
  for (const auto& [_, per_dataset] : tables) {
    for (const auto& [id, __] : per_dataset) ids.insert(id);
  }
  TransferMatrix avg;
  avg.datasets.assign(ids.begin(), ids.end());
  const auto n = static_cast<Eigen::Index>(ids.size());
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n, n), count = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [_, per_dataset] : tables) {
    const TransferMatrix tm = transfer_for(per_dataset, avg.datasets);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (std::isnan(tm.values(i, j))) continue;
        sum(i, j) += tm.values(i, j);
        count(i, j) += 1.0;
      }
    }
  }
  avg.values = Eigen::MatrixXd::Constant(n, n, kNaN);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (count(i, j) > 0) avg.values(i, j) = sum(i, j) / count(i, j);
    }
  }
  return avg;
}

std::string transfer_matrix_text(const TransferMatrix& matrix) {
  std::ostringstream out;
  out << "dataset";
  for (const auto& d : matrix.datasets) out << '\t' << d;
  out << '\n';
  for (std::size_t i = 0; i < matrix.datasets.size(); ++i) {
    out << matrix.datasets[i];
    for (std::size_t j = 0; j < matrix.datasets.size(); ++j) {
      out << '\t' << format_value(matrix.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace reczilla
