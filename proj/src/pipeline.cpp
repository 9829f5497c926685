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

#include "reczilla/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "reczilla/common.hpp"

namespace reczilla {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kModelSchema = "#schema=reczilla-model/1";
}  // namespace

std::string ParameterizedAlgorithm::label() const { return algorithm + "#" + std::to_string(hp_index); }

std::string PerformanceTarget::name() const { return train_time ? "TRAIN_TIME" : metric.name(); }

PerformanceTarget PerformanceTarget::parse(std::string_view text) {
  PerformanceTarget t;
  if (to_upper(trim(text)) == "TRAIN_TIME") {
    t.train_time = true;
    return t;
  }
  t.metric = parse_metric_spec(trim(text));
  return t;
}

// ---------------------------------------------------------------------------
// Performance matrix

Eigen::MatrixXd PerformanceMatrix::normalized() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Constant(values.rows(), values.cols(), kNaN);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      if (std::isnan(values(r, c))) continue;
      lo = std::min(lo, values(r, c));
      hi = std::max(hi, values(r, c));
    }
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      if (std::isnan(v)) continue;
      const double scaled = normalize_performance(v, lo, hi);
      out(r, c) = maximize ? scaled : (hi == lo ? 100.0 : 100.0 - scaled);
    }
  }
  return out;
}

std::vector<double> PerformanceMatrix::best() const {
  std::vector<double> out(static_cast<std::size_t>(values.rows()), kNaN);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    for (Eigen::Index c = 0; c < values.cols(); ++c) {
      const double v = values(r, c);
      if (std::isnan(v)) continue;
      double& b = out[static_cast<std::size_t>(r)];
      if (std::isnan(b) || (maximize ? v > b : v < b)) b = v;
    }
  }
  return out;
}

int PerformanceMatrix::column_of(const ParameterizedAlgorithm& a) const {
  auto it = std::lower_bound(algorithms.begin(), algorithms.end(), a);
  return it != algorithms.end() && *it == a ? static_cast<int>(it - algorithms.begin()) : -1;
}

PerformanceMatrix performance_matrix(const MetaDataset& metadataset, const PerformanceTarget& target) {
  PerformanceMatrix pm;
  pm.maximize = target.maximize();
  std::map<std::string, std::map<ParameterizedAlgorithm, double>> cells;
  std::map<std::string, std::string> family_of;
  std::set<ParameterizedAlgorithm> algorithms;
  for (const auto& r : metadataset.records) {
    if (r.status != ExperimentStatus::ok) continue;
    double v;
    if (target.train_time) {
      v = r.train_time_s;
    } else {
      auto it = r.metrics.find(target.metric);
      if (it == r.metrics.end()) continue;
      v = it->second;
    }
    if (std::isnan(v)) continue;
    ParameterizedAlgorithm pa{r.algorithm, r.hp_index, r.hp_params};
    auto [pos, inserted] = cells[r.dataset_id].try_emplace(pa, v);
    if (!inserted && (pm.maximize ? v > pos->second : v < pos->second)) pos->second = v;
    algorithms.insert(pa);
    family_of.try_emplace(r.dataset_id, r.family);
  }
  if (!metadataset.records.empty() && cells.empty() && !target.train_time) {
    bool any_ok = std::any_of(metadataset.records.begin(), metadataset.records.end(),
                              [](const ExperimentRecord& r) { return r.status == ExperimentStatus::ok; });
    if (any_ok) fail(ErrorCode::unknown_metric, "metric " + target.name() + " not present in the meta-dataset");
  }
  pm.algorithms.assign(algorithms.begin(), algorithms.end());
  for (const auto& [id, _] : cells) {
    pm.datasets.push_back(id);
    auto fam = metadataset.families.find(id);
    pm.families.push_back(fam != metadataset.families.end() ? fam->second : family_of[id]);
  }
  pm.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(pm.datasets.size()),
                                        static_cast<Eigen::Index>(pm.algorithms.size()), kNaN);
  for (std::size_t d = 0; d < pm.datasets.size(); ++d) {
    for (const auto& [pa, v] : cells[pm.datasets[d]]) pm.values(static_cast<Eigen::Index>(d), pm.column_of(pa)) = v;
  }
  return pm;
}

// ---------------------------------------------------------------------------
// Algorithm selection

double coverage(const Eigen::MatrixXd& normalized, std::span<const int> subset) {
  if (subset.empty()) fail(ErrorCode::invalid_argument, "coverage of an empty subset");
  if (normalized.rows() == 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index r = 0; r < normalized.rows(); ++r) {
    double best = 0.0;
    for (int c : subset) {
      const double v = normalized(r, c);
      if (!std::isnan(v)) best = std::max(best, v);
    }
    total += best;
  }
  return total / static_cast<double>(normalized.rows());
}

std::vector<int> select_algorithms(const Eigen::MatrixXd& normalized, int n) {
  if (n < 1) fail(ErrorCode::invalid_argument, "n must be >= 1");
  const int total = static_cast<int>(normalized.cols());
  std::vector<int> chosen;
  std::vector<char> used(static_cast<std::size_t>(total), 0);
  while (static_cast<int>(chosen.size()) < std::min(n, total)) {
    int best = -1;
    double best_cov = -1.0;
    for (int c = 0; c < total; ++c) {
      if (used[static_cast<std::size_t>(c)]) continue;
      chosen.push_back(c);
      const double cov = coverage(normalized, chosen);
      chosen.pop_back();
      if (cov > best_cov) {
        best_cov = cov;
        best = c;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    chosen.push_back(best);
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Feature selection

double weighted_correlation(std::span<const double> x, std::span<const double> y, std::span<const double> w) {
  if (x.size() != y.size() || x.size() != w.size()) {
    fail(ErrorCode::invalid_argument, "weighted_correlation: length mismatch");
  }
  if (x.size() < 2) fail(ErrorCode::invalid_argument, "weighted_correlation: need at least 2 points");
  double sw = 0.0, mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sw += w[k];
    mx += w[k] * x[k];
    my += w[k] * y[k];
  }
  mx /= sw;
  my /= sw;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx, dy = y[k] - my;
    sxy += w[k] * dx * dy;
    sxx += w[k] * dx * dx;
    syy += w[k] * dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::vector<double> family_weights(const std::vector<std::string>& families) {
  std::map<std::string, int> counts;
  for (const auto& f : families) ++counts[f];
  std::vector<double> w;
  w.reserve(families.size());
  for (const auto& f : families) w.push_back(1.0 / counts[f]);
  return w;
}

std::vector<int> select_features(const Eigen::MatrixXd& abs_corr, int m) {
  if (m < 1) fail(ErrorCode::invalid_argument, "m must be >= 1");
  const int total = static_cast<int>(abs_corr.cols());
  if (m > total) warn("requested " + std::to_string(m) + " meta-features, only " + std::to_string(total) + " available");
  std::vector<double> covered(static_cast<std::size_t>(abs_corr.rows()), 0.0);
  std::vector<char> used(static_cast<std::size_t>(total), 0);
  std::vector<int> chosen;
  while (static_cast<int>(chosen.size()) < std::min(m, total)) {
    int best = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < total; ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      double gain = -std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < abs_corr.rows(); ++i) {
        const double c = std::isnan(abs_corr(i, j)) ? 0.0 : abs_corr(i, j);
        gain = std::max(gain, c - covered[static_cast<std::size_t>(i)]);
      }
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    used[static_cast<std::size_t>(best)] = 1;
    chosen.push_back(best);
    for (Eigen::Index i = 0; i < abs_corr.rows(); ++i) {
      const double c = std::isnan(abs_corr(i, best)) ? 0.0 : abs_corr(i, best);
      covered[static_cast<std::size_t>(i)] = std::max(covered[static_cast<std::size_t>(i)], c);
    }
  }
  return chosen;
}

// ---------------------------------------------------------------------------
// Training

namespace {

struct FeatureTable {
  std::vector<std::string> names;
  Eigen::MatrixXd values;  // datasets x features, NaN when missing
};

FeatureTable feature_table(const MetaDataset& md, const std::vector<std::string>& datasets) {
  FeatureTable t;
  std::set<std::string> seen;
  for (const auto& name : metafeature_names()) {
    for (const auto& d : datasets) {
      auto it = md.features.find(d);
      if (it != md.features.end() && !std::isnan(feature_value(it->second, name)) && seen.insert(name).second) {
        t.names.push_back(name);
        break;
      }
    }
  }
  // Non-canonical names follow in sorted order.
  std::set<std::string> extra;
  for (const auto& d : datasets) {
    auto it = md.features.find(d);
    if (it == md.features.end()) continue;
    for (const auto& [name, _] : it->second) {
      if (!seen.count(name)) extra.insert(name);
    }
  }
  t.names.insert(t.names.end(), extra.begin(), extra.end());

  t.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(datasets.size()),
                                       static_cast<Eigen::Index>(t.names.size()), kNaN);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    auto it = md.features.find(datasets[d]);
    if (it == md.features.end()) continue;
    std::unordered_map<std::string, double> lookup(it->second.begin(), it->second.end());
    for (std::size_t j = 0; j < t.names.size(); ++j) {
      auto f = lookup.find(t.names[j]);
      if (f != lookup.end()) t.values(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j)) = f->second;
    }
  }
  return t;
}

bool has_variance(const Eigen::VectorXd& column) {
  double first = kNaN;
  for (Eigen::Index k = 0; k < column.size(); ++k) {
    if (std::isnan(column(k))) continue;
    if (std::isnan(first)) {
      first = column(k);
    } else if (column(k) != first) {
      return true;
    }
  }
  return false;
}

}  // namespace

MetaModel train_metamodel(const MetaDataset& metadataset, const PerformanceTarget& target,
                          const TrainOptions& options) {
  PerformanceMatrix pm = performance_matrix(metadataset, target);
  {
    // Only datasets that carry meta-features can be training tuples.
    std::vector<Eigen::Index> keep;
    for (std::size_t d = 0; d < pm.datasets.size(); ++d) {
      if (metadataset.features.count(pm.datasets[d])) keep.push_back(static_cast<Eigen::Index>(d));
    }
    if (keep.size() != pm.datasets.size()) {
      PerformanceMatrix kept = pm;
      kept.datasets.clear();
      kept.families.clear();
      kept.values.resize(static_cast<Eigen::Index>(keep.size()), pm.values.cols());
      for (std::size_t k = 0; k < keep.size(); ++k) {
        kept.datasets.push_back(pm.datasets[static_cast<std::size_t>(keep[k])]);
        kept.families.push_back(pm.families[static_cast<std::size_t>(keep[k])]);
        kept.values.row(static_cast<Eigen::Index>(k)) = pm.values.row(keep[k]);
      }
      pm = std::move(kept);
    }
  }
  if (pm.datasets.size() < 2) {
    fail(ErrorCode::invalid_argument, "meta-model training needs at least 2 datasets with results and features");
  }
  if (options.observer) options.observer->touched("performance", pm.datasets);

  // Algorithm subset.
  if (options.observer) options.observer->touched("coverage", pm.datasets);
  std::vector<int> selected;
  if (options.algorithms.empty()) {
    selected = select_algorithms(pm.normalized(), options.n);
  } else {
    for (const auto& a : options.algorithms) {
      const int c = pm.column_of(a);
      if (c < 0) fail(ErrorCode::invalid_argument, "no ok record for " + a.label() + " under " + target.name());
      selected.push_back(c);
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(selected.size());
  Eigen::MatrixXd y(pm.values.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) y.col(k) = pm.values.col(selected[static_cast<std::size_t>(k)]);

  // Candidate features: non-constant over the training datasets.
  FeatureTable table = feature_table(metadataset, pm.datasets);
  std::vector<int> candidates;
  int dropped = 0;
  for (Eigen::Index j = 0; j < table.values.cols(); ++j) {
    if (has_variance(table.values.col(j))) {
      candidates.push_back(static_cast<int>(j));
    } else {
      ++dropped;
    }
  }
  if (dropped > 0) warn("dropped " + std::to_string(dropped) + " zero-variance meta-features");

  // Absolute weighted correlations over pairwise-defined datasets.
  if (options.observer) options.observer->touched("correlation", pm.datasets);
  const std::vector<double> weights = family_weights(pm.families);
  Eigen::MatrixXd abs_corr = Eigen::MatrixXd::Zero(n, static_cast<Eigen::Index>(candidates.size()));
  std::vector<double> xs, ys, ws;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      xs.clear();
      ys.clear();
      ws.clear();
      for (Eigen::Index d = 0; d < y.rows(); ++d) {
        const double fv = table.values(d, candidates[c]);
        if (std::isnan(y(d, i)) || std::isnan(fv)) continue;
        xs.push_back(fv);
        ys.push_back(y(d, i));
        ws.push_back(weights[static_cast<std::size_t>(d)]);
      }
      if (xs.size() < 2) continue;
      const double r = weighted_correlation(xs, ys, ws);
      abs_corr(i, static_cast<Eigen::Index>(c)) = std::isnan(r) ? 0.0 : std::abs(r);
    }
  }
  std::vector<int> chosen;
  if (!candidates.empty()) {
    for (int c : select_features(abs_corr, options.m)) chosen.push_back(candidates[static_cast<std::size_t>(c)]);
  }

  MetaModel model;
  model.target = target;
  model.kind = options.kind;
  model.seed = options.seed;
  for (int c : selected) model.algorithms.push_back(pm.algorithms[static_cast<std::size_t>(c)]);
  std::set<std::string> fams(pm.families.begin(), pm.families.end());
  model.training_families.assign(fams.begin(), fams.end());

  // Standardized design matrix, NaN imputed with the mean.
  Eigen::MatrixXd x(y.rows(), static_cast<Eigen::Index>(chosen.size()));
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const Eigen::VectorXd col = table.values.col(chosen[k]);
    double sum = 0.0, count = 0.0;
    for (Eigen::Index d = 0; d < col.size(); ++d) {
      if (!std::isnan(col(d))) {
        sum += col(d);
        count += 1.0;
      }
    }
    const double mean = sum / count;
    double var = 0.0;
    for (Eigen::Index d = 0; d < col.size(); ++d) {
      if (!std::isnan(col(d))) var += (col(d) - mean) * (col(d) - mean);
    }
    double sd = std::sqrt(var / count);
    if (!(sd > 0)) sd = 1.0;
    model.features.push_back(table.names[static_cast<std::size_t>(chosen[k])]);
    model.feature_means.push_back(mean);
    model.feature_stds.push_back(sd);
    for (Eigen::Index d = 0; d < col.size(); ++d) {
      x(d, static_cast<Eigen::Index>(k)) = std::isnan(col(d)) ? 0.0 : (col(d) - mean) / sd;
    }
  }

  // Missing targets take the per-algorithm mean.
  for (Eigen::Index i = 0; i < n; ++i) {
    double sum = 0.0, count = 0.0;
    for (Eigen::Index d = 0; d < y.rows(); ++d) {
      if (!std::isnan(y(d, i))) {
        sum += y(d, i);
        count += 1.0;
      }
    }
    const double mean = count > 0 ? sum / count : 0.0;
    for (Eigen::Index d = 0; d < y.rows(); ++d) {
      if (std::isnan(y(d, i))) y(d, i) = mean;
    }
  }

  if (options.observer) options.observer->touched("regression", pm.datasets);
  model.regressor = make_regressor(options.kind, options.regressor);
  model.regressor->fit(x, y);
  return model;
}

// ---------------------------------------------------------------------------
// Prediction

namespace {

Eigen::RowVectorXd design_row(const MetaModel& model, const MetaFeatureVector& features) {
  std::unordered_map<std::string, double> lookup(features.begin(), features.end());
  std::vector<std::string> missing;
  Eigen::RowVectorXd x(static_cast<Eigen::Index>(model.features.size()));
  for (std::size_t k = 0; k < model.features.size(); ++k) {
    auto it = lookup.find(model.features[k]);
    if (it == lookup.end()) {
      missing.push_back(model.features[k]);
      continue;
    }
    const double v = std::isnan(it->second) ? model.feature_means[k] : it->second;
    x(static_cast<Eigen::Index>(k)) = (v - model.feature_means[k]) / model.feature_stds[k];
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ",") + m;
    fail(ErrorCode::missing_features, "missing meta-features: " + list);
  }
  return x;
}

}  // namespace

std::vector<double> predict_values(const MetaModel& model, const MetaFeatureVector& features) {
  if (!model.regressor) fail(ErrorCode::invalid_argument, "meta-model has no regressor");
  const Eigen::MatrixXd x = design_row(model, features);
  const Eigen::MatrixXd y = model.regressor->predict(x);
  return {y.data(), y.data() + y.size()};
}

Prediction predict_best(const MetaModel& model, const MetaFeatureVector& features) {
  Prediction p;
  p.predicted = predict_values(model, features);
  if (p.predicted.empty()) fail(ErrorCode::invalid_argument, "meta-model has no algorithms");
  if (model.kind == RegressorKind::random) {
    std::uint64_t h = model.seed;
    for (const auto& name : model.features) {
      for (const auto& [n, v] : features) {
        if (n == name) h = mix_seed(h, std::bit_cast<std::uint64_t>(v));
      }
    }
    Rng rng(mix_seed(h, hash_string("random-selection")));
    p.index = static_cast<int>(rng.below(p.predicted.size()));
  } else {
    const bool maximize = model.target.maximize();
    for (std::size_t k = 1; k < p.predicted.size(); ++k) {
      const double v = p.predicted[k], b = p.predicted[static_cast<std::size_t>(p.index)];
      if (maximize ? v > b : v < b) p.index = static_cast<int>(k);
    }
  }
  p.chosen = model.algorithms[static_cast<std::size_t>(p.index)];
  return p;
}

double percent_diff(double y_star, double achieved, bool maximize) {
  if (maximize) {
    if (y_star == 0.0) {
      if (achieved == 0.0) return 0.0;
      fail(ErrorCode::invalid_argument, "percent_diff: y* = 0 with nonzero achieved value");
    }
    return 100.0 * (y_star - achieved) / y_star;
  }
  if (achieved == 0.0) {
    if (y_star == 0.0) return 0.0;
    fail(ErrorCode::invalid_argument, "percent_diff: achieved = 0 with nonzero y*");
  }
  return 100.0 * (achieved - y_star) / achieved;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) return kNaN;
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// ---------------------------------------------------------------------------
// Cross-validation over families

namespace {

std::string family_of(const MetaDataset& md, const std::string& dataset) {
  auto it = md.families.find(dataset);
  if (it != md.families.end()) return it->second;
  for (const auto& r : md.records) {
    if (r.dataset_id == dataset) return r.family;
  }
  return dataset;
}

MetaDataset restrict_to(const MetaDataset& md, const std::set<std::string>& families) {
  MetaDataset out;
  for (const auto& r : md.records) {
    if (families.count(family_of(md, r.dataset_id))) out.records.push_back(r);
  }
  for (const auto& [id, f] : md.features) {
    if (families.count(family_of(md, id))) out.features.emplace(id, f);
  }
  for (const auto& [id, fam] : md.families) {
    if (families.count(fam)) out.families.emplace(id, fam);
  }
  return out;
}

Quantiles quantiles(const std::vector<double>& v) { return {quantile(v, 0.4), quantile(v, 0.5), quantile(v, 0.6)}; }

}  // namespace

LoocvResult loocv(const MetaDataset& metadataset, const PerformanceTarget& target, const LoocvOptions& options) {
  if (options.trials < 1) fail(ErrorCode::invalid_argument, "trials must be >= 1");
  const PerformanceMatrix full = performance_matrix(metadataset, target);
  const std::vector<double> best = full.best();

  std::map<std::string, std::vector<std::string>> by_family;
  for (const auto& id : metadataset.dataset_ids()) by_family[family_of(metadataset, id)].push_back(id);
  if (by_family.size() < 2) fail(ErrorCode::invalid_argument, "cross-validation needs at least 2 families");

  struct Task {
    int fold_index;
    int trial;
    std::string held_out;
    std::vector<std::size_t> rows;
    std::vector<std::string> others;
  };
  std::vector<Task> tasks;
  int fold_index = 0;
  for (const auto& [held_out, datasets] : by_family) {
    ++fold_index;
    std::vector<std::size_t> rows;
    for (const auto& d : datasets) {
      auto it = std::find(full.datasets.begin(), full.datasets.end(), d);
      if (it != full.datasets.end() && metadataset.features.count(d)) {
        rows.push_back(static_cast<std::size_t>(it - full.datasets.begin()));
      }
    }
    if (rows.empty()) {
      warn("family " + held_out + " has no ok records; skipped");
      continue;
    }
    std::vector<std::string> others;
    for (const auto& [fam, _] : by_family) {
      if (fam != held_out) others.push_back(fam);
    }
    for (int trial = 0; trial < options.trials; ++trial) tasks.push_back({fold_index, trial, held_out, rows, others});
  }

  struct Outcome {
    std::vector<LoocvRow> rows;
    std::optional<LoocvFold> fold;
  };
  auto run = [&](const Task& task) {
    Outcome out;
    std::vector<std::string> train_fams = task.others;
    if (options.max_train_families > 0 && options.max_train_families < static_cast<int>(task.others.size())) {
      Rng rng(mix_seed(options.train.seed, mix_seed(static_cast<std::uint64_t>(task.trial),
                                                    static_cast<std::uint64_t>(task.fold_index))));
      train_fams.clear();
      for (int k : rng.sample_indices(static_cast<int>(task.others.size()), options.max_train_families)) {
        train_fams.push_back(task.others[static_cast<std::size_t>(k)]);
      }
    }
    if (options.train.observer) {
      std::vector<std::string> held;
      for (std::size_t r : task.rows) held.push_back(full.datasets[r]);
      options.train.observer->touched("held_out", held);
    }
    const MetaDataset train_md = restrict_to(metadataset, {train_fams.begin(), train_fams.end()});
    TrainOptions to = options.train;
    to.seed = mix_seed(options.train.seed, static_cast<std::uint64_t>(task.trial));
    MetaModel model;
    try {
      model = train_metamodel(train_md, target, to);
    } catch (const Error& e) {
      warn("fold " + task.held_out + " trial " + std::to_string(task.trial) + " skipped: " + e.what());
      return out;
    }
    double pd_sum = 0.0, mae_sum = 0.0;
    for (std::size_t r : task.rows) {
      const std::string& dataset = full.datasets[r];
      const Prediction p = predict_best(model, metadataset.features.at(dataset));
      LoocvRow row;
      row.trial = task.trial;
      row.family = task.held_out;
      row.dataset = dataset;
      row.selected = p.chosen.label();
      row.predicted = p.predicted[static_cast<std::size_t>(p.index)];
      row.y_star = best[r];
      row.train_families = static_cast<int>(train_fams.size());
      const int col = full.column_of(p.chosen);
      const double achieved = col >= 0 ? full.values(static_cast<Eigen::Index>(r), col) : kNaN;
      row.achieved = achieved;
      row.percent_diff = std::isnan(achieved) ? 100.0 : percent_diff(row.y_star, achieved, target.maximize());
      double err = 0.0, count = 0.0;
      for (std::size_t k = 0; k < model.algorithms.size(); ++k) {
        const int c = full.column_of(model.algorithms[k]);
        if (c < 0) continue;
        const double truth = full.values(static_cast<Eigen::Index>(r), c);
        if (std::isnan(truth)) continue;
        err += std::abs(p.predicted[k] - truth);
        count += 1.0;
      }
      row.mae = count > 0 ? err / count : kNaN;
      pd_sum += row.percent_diff;
      mae_sum += std::isnan(row.mae) ? 0.0 : row.mae;
      out.rows.push_back(row);
    }
    const double n = static_cast<double>(task.rows.size());
    out.fold = LoocvFold{task.trial, task.held_out, pd_sum / n, mae_sum / n, static_cast<int>(train_fams.size())};
    return out;
  };

  std::vector<Outcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < tasks.size(); k = next.fetch_add(1)) outcomes[k] = run(tasks[k]);
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(tasks.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  LoocvResult result;
  std::vector<double> fold_pd, fold_mae;
  for (auto& o : outcomes) {
    if (!o.fold) continue;
    result.rows.insert(result.rows.end(), o.rows.begin(), o.rows.end());
    fold_pd.push_back(o.fold->percent_diff);
    fold_mae.push_back(o.fold->mae);
    result.folds.push_back(*o.fold);
  }
  result.percent_diff = quantiles(fold_pd);
  result.mae = quantiles(fold_mae);
  return result;
}

// ---------------------------------------------------------------------------
// Pareto front

std::vector<int> pareto_front(std::span<const double> performance, std::span<const double> time,
                              bool maximize_performance) {
  if (performance.size() != time.size()) fail(ErrorCode::invalid_argument, "pareto_front: length mismatch");
  const std::size_t n = performance.size();
  auto perf = [&](std::size_t k) { return maximize_performance ? performance[k] : -performance[k]; };
  std::vector<int> front;
  for (std::size_t i = 0; i < n; ++i) {
    bool dominated = false;
    for (std::size_t j = 0; j < n && !dominated; ++j) {
      if (j == i) continue;
      dominated = perf(j) >= perf(i) && time[j] <= time[i] && (perf(j) > perf(i) || time[j] < time[i]);
    }
    if (!dominated) front.push_back(static_cast<int>(i));
  }
  std::stable_sort(front.begin(), front.end(), [&](int a, int b) {
    return perf(static_cast<std::size_t>(a)) > perf(static_cast<std::size_t>(b));
  });
  return front;
}

std::vector<int> pareto_front(const MetaModel& performance_model, const MetaModel& time_model,
                              const MetaFeatureVector& features) {
  if (performance_model.algorithms != time_model.algorithms) {
    fail(ErrorCode::invalid_argument, "pareto_front: the two meta-models select different algorithms");
  }
  const std::vector<double> perf = predict_values(performance_model, features);
  const std::vector<double> time = predict_values(time_model, features);
  return pareto_front(perf, time, performance_model.target.maximize());
}

// ---------------------------------------------------------------------------
// Model files

std::string MetaModel::to_text() const {
  std::ostringstream out;
  out << kModelSchema << '\n';
  out << "[target]\n";
  out << "metric=" << target.name() << '\n';
  out << "direction=" << (target.maximize() ? "maximize" : "minimize") << '\n';
  out << "seed=" << seed << '\n';
  out << "[algorithms]\n";
  for (const auto& a : algorithms) {
    out << a.algorithm << '\t' << a.hp_index << '\t' << (a.hp_params.empty() ? "-" : a.hp_params) << '\n';
  }
  out << "[features]\n";
  for (std::size_t k = 0; k < features.size(); ++k) {
    out << features[k] << '\t' << format_double(feature_means[k]) << '\t' << format_double(feature_stds[k]) << '\n';
  }
  out << "[families]\n";
  for (const auto& f : training_families) out << f << '\n';
  out << "[regressor]\n";
  out << "kind=" << regressor_kind_name(kind) << '\n';
  if (regressor) {
    for (const auto& [k, v] : regressor->save()) out << k << '=' << v << '\n';
  }
  return out.str();
}

MetaModel MetaModel::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kModelSchema) {
    fail(ErrorCode::schema, "model file: expected schema reczilla-model/1, found '" + line + "'");
  }
  MetaModel m;
  std::string section;
  RegressorState state;
  std::map<std::string, std::string> target;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    auto bad = [&](const std::string& why) {
      fail(ErrorCode::parse, "model file line " + std::to_string(line_no) + ": " + why);
    };
    if (section == "target" || section == "regressor") {
      const auto eq = line.find('=');
      if (eq == std::string::npos) bad("expected key=value");
      (section == "target" ? target : state)[line.substr(0, eq)] = line.substr(eq + 1);
    } else if (section == "algorithms") {
      const auto f = split(line, '\t');
      if (f.size() != 3) bad("expected 3 fields");
      auto idx = try_parse_int(f[1]);
      if (!idx) bad("bad hp_index");
      m.algorithms.push_back({f[0], static_cast<int>(*idx), f[2] == "-" ? "" : f[2]});
    } else if (section == "features") {
      const auto f = split(line, '\t');
      if (f.size() != 3) bad("expected 3 fields");
      m.features.push_back(f[0]);
      m.feature_means.push_back(parse_double(f[1]));
      m.feature_stds.push_back(parse_double(f[2]));
    } else if (section == "families") {
      m.training_families.push_back(line);
    } else {
      bad("content outside a known section");
    }
  }
  if (!target.count("metric") || !state.count("kind")) fail(ErrorCode::parse, "model file: incomplete");
  m.target = PerformanceTarget::parse(target["metric"]);
  if (target.count("seed")) {
    auto s = try_parse_int(target["seed"]);
    // Seeds above INT64_MAX are written unsigned.
    m.seed = s ? static_cast<std::uint64_t>(*s) : std::stoull(target["seed"]);
  }
  m.kind = parse_regressor_kind(state["kind"]);
  state.erase("kind");
  m.regressor = make_regressor(m.kind);
  m.regressor->load(state);
  return m;
}

void MetaModel::save(const std::filesystem::path& path) const { write_text_file(path, to_text()); }

MetaModel MetaModel::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) fail(ErrorCode::not_found, "model file not found: " + path.string());
  return from_text(read_text_file(path));
}

}  // namespace reczilla
