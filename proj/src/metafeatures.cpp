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

#include "reczilla/metafeatures.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "reczilla/algorithms.hpp"
#include "reczilla/common.hpp"
#include "reczilla/evaluation.hpp"
#include "reczilla/kernels.hpp"

namespace reczilla {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kMaxLandmarkUsers = 100;
constexpr int kMaxLandmarkItems = 250;
constexpr int kMinLandmarkItems = 6;

const std::vector<std::string>& general_names() {
  static const std::vector<std::string> names{"general:num_users", "general:num_items", "general:num_ratings",
                                              "general:item_user_ratio", "general:sparsity"};
  return names;
}

const std::vector<std::string>& aggregation_names() {
  static const std::vector<std::string> names{"rating",    "item_sum",  "item_count", "item_mean",
                                              "user_sum",  "user_count", "user_mean"};
  return names;
}

std::vector<BaseMetric> landmark_bases() {
  std::vector<BaseMetric> out;
  for (BaseMetric b : all_base_metrics()) {
    if (b != BaseMetric::diversity_similarity) out.push_back(b);
  }
  return out;
}

}  // namespace

const std::array<std::string_view, kNumStatistics>& statistic_names() {
  static const std::array<std::string_view, kNumStatistics> names{
      "mean", "max", "min", "std", "median", "mode", "gini", "skewness", "kurtosis", "entropy"};
  return names;
}

const std::vector<std::string>& landmarker_names() {
  static const std::vector<std::string> names{"toppop",     "itemknn_k1", "itemknn_k5", "userknn_k1",
                                              "userknn_k5", "puresvd_f1", "puresvd_f5"};
  return names;
}

const std::vector<std::string>& landmark_metric_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (BaseMetric b : landmark_bases()) out.emplace_back(base_metric_name(b));
    out.emplace_back("ITEMS_IN_EVAL_SET");
    out.emplace_back("USERS_IN_EVAL_SET");
    return out;
  }();
  return names;
}

const std::vector<std::string>& metafeature_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out = general_names();
    for (const auto& agg : aggregation_names()) {
      for (auto stat : statistic_names()) out.push_back("dist:" + agg + ":" + std::string(stat));
    }
    for (const auto& lm : landmarker_names()) {
      for (const auto& metric : landmark_metric_names()) {
        for (int k : kLandmarkCutoffs) out.push_back("landmark:" + lm + ":" + metric + ":" + std::to_string(k));
      }
    }
    return out;
  }();
  return names;
}

// ---------------------------------------------------------------------------
// Statistics

double gini_index(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return kNaN;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double total = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  if (total == 0.0) return 0.0;
  double weighted = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    weighted += (2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) * sorted[i];
  }
  return weighted / (static_cast<double>(n) * total);
}

double weight_entropy(std::span<const double> values) {
  double total = 0.0;
  for (double v : values) {
    if (v > 0) total += v;
  }
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : values) {
    if (v > 0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

std::array<double, kNumStatistics> describe(std::span<const double> values) {
  std::array<double, kNumStatistics> out;
  out.fill(kNaN);
  const std::size_t n = values.size();
  if (n == 0) return out;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double dn = static_cast<double>(n);
  const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / dn;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : sorted) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= dn;
  m3 /= dn;
  m4 /= dn;
  const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

  double mode = sorted[0];
  std::size_t best_run = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && sorted[j] == sorted[i]) ++j;
    if (j - i > best_run) {
      best_run = j - i;
      mode = sorted[i];
    }
    i = j;
  }

  // Rounding can leave a tiny positive variance on constant input.
  const bool constant = sorted.front() == sorted.back();
  out[0] = mean;
  out[1] = sorted.back();
  out[2] = sorted.front();
  out[3] = constant ? 0.0 : std::sqrt(m2);
  out[4] = median;
  out[5] = mode;
  out[6] = gini_index(sorted);
  out[7] = constant || m2 == 0.0 ? 0.0 : m3 / std::pow(m2, 1.5);
  out[8] = constant || m2 == 0.0 ? 0.0 : m4 / (m2 * m2) - 3.0;
  out[9] = weight_entropy(sorted);
  return out;
}

// ---------------------------------------------------------------------------
// Feature groups

MetaFeatureVector general_features(const CsrMatrix& train) {
  const double users = train.rows();
  const double items = train.cols();
  const double nnz = train.nnz();
  const std::vector<double> values{users, items, nnz, users > 0 ? items / users : kNaN,
                                   users * items > 0 ? 1.0 - nnz / (users * items) : kNaN};
  MetaFeatureVector out;
  for (std::size_t k = 0; k < values.size(); ++k) out.emplace_back(general_names()[k], values[k]);
  return out;
}

MetaFeatureVector distribution_features(const CsrMatrix& train) {
  std::vector<std::vector<double>> aggregations;
  aggregations.emplace_back(train.values().begin(), train.values().end());

  auto per_entity = [&](const CsrMatrix& by_row) {
    std::vector<double> sums, counts, means;
    for (int r = 0; r < by_row.rows(); ++r) {
      auto vals = by_row.row_values(r);
      if (vals.empty()) continue;
      const double s = std::accumulate(vals.begin(), vals.end(), 0.0);
      sums.push_back(s);
      counts.push_back(static_cast<double>(vals.size()));
      means.push_back(s / static_cast<double>(vals.size()));
    }
    aggregations.push_back(std::move(sums));
    aggregations.push_back(std::move(counts));
    aggregations.push_back(std::move(means));
  };
  per_entity(train.transpose());
  per_entity(train);

  MetaFeatureVector out;
  for (std::size_t a = 0; a < aggregations.size(); ++a) {
    const auto stats = describe(aggregations[a]);
    for (int s = 0; s < kNumStatistics; ++s) {
      out.emplace_back("dist:" + aggregation_names()[a] + ":" + std::string(statistic_names()[s]), stats[s]);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Canonical relabeling

namespace {

std::uint64_t combine(std::uint64_t h, std::uint64_t v) { return splitmix64(h ^ (v + 0x9e3779b97f4a7c15ULL)); }

std::uint64_t multiset_hash(std::uint64_t seed, std::vector<std::uint64_t>& elements) {
  std::sort(elements.begin(), elements.end());
  std::uint64_t h = seed;
  for (auto e : elements) h = combine(h, e);
  return h;
}

// Iterated neighborhood hashing of the bipartite rating graph.
std::vector<std::uint64_t> refine(const CsrMatrix& rows, const CsrMatrix& cols, int rounds, bool want_rows) {
  std::vector<std::uint64_t> rh(static_cast<std::size_t>(rows.rows())), ch(static_cast<std::size_t>(cols.rows()));
  for (int r = 0; r < rows.rows(); ++r) rh[static_cast<std::size_t>(r)] = combine(1, static_cast<std::uint64_t>(rows.row_nnz(r)));
  for (int c = 0; c < cols.rows(); ++c) ch[static_cast<std::size_t>(c)] = combine(2, static_cast<std::uint64_t>(cols.row_nnz(c)));
  std::vector<std::uint64_t> scratch;
  for (int round = 0; round < rounds; ++round) {
    std::vector<std::uint64_t> nr(rh.size()), nc(ch.size());
    for (int r = 0; r < rows.rows(); ++r) {
      scratch.clear();
      auto idx = rows.row_indices(r);
      auto val = rows.row_values(r);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        scratch.push_back(combine(std::bit_cast<std::uint64_t>(val[k]), ch[static_cast<std::size_t>(idx[k])]));
      }
      nr[static_cast<std::size_t>(r)] = multiset_hash(rh[static_cast<std::size_t>(r)], scratch);
    }
    for (int c = 0; c < cols.rows(); ++c) {
      scratch.clear();
      auto idx = cols.row_indices(c);
      auto val = cols.row_values(c);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        scratch.push_back(combine(std::bit_cast<std::uint64_t>(val[k]), rh[static_cast<std::size_t>(idx[k])]));
      }
      nc[static_cast<std::size_t>(c)] = multiset_hash(ch[static_cast<std::size_t>(c)], scratch);
    }
    rh.swap(nr);
    ch.swap(nc);
  }
  return want_rows ? rh : ch;
}

std::vector<int> order_by(const std::vector<std::uint64_t>& keys) {
  std::vector<int> order(keys.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  return order;
}

}  // namespace

CsrMatrix canonical_relabel(const CsrMatrix& m) {
  const CsrMatrix t = m.transpose();
  constexpr int kRounds = 3;
  const std::vector<int> row_order = order_by(refine(m, t, kRounds, true));
  const std::vector<int> col_order = order_by(refine(m, t, kRounds, false));
  std::vector<int> new_row(row_order.size()), new_col(col_order.size());
  for (std::size_t k = 0; k < row_order.size(); ++k) new_row[static_cast<std::size_t>(row_order[k])] = static_cast<int>(k);
  for (std::size_t k = 0; k < col_order.size(); ++k) new_col[static_cast<std::size_t>(col_order[k])] = static_cast<int>(k);
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(m.nnz()));
  for (int r = 0; r < m.rows(); ++r) {
    auto idx = m.row_indices(r);
    auto val = m.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      triplets.push_back({new_row[static_cast<std::size_t>(r)], new_col[static_cast<std::size_t>(idx[k])], val[k]});
    }
  }
  return CsrMatrix::from_triplets(m.rows(), m.cols(), std::move(triplets));
}

// ---------------------------------------------------------------------------
// Landmarkers

std::optional<LandmarkSubsample> landmark_subsample(const CsrMatrix& train, std::uint64_t seed) {
  Rng rng(mix_seed(seed, hash_string("landmark-subsample")));
  std::vector<int> users;
  for (int u = 0; u < train.rows(); ++u) {
    if (train.row_nnz(u) >= 2) users.push_back(u);
  }
  if (users.empty()) return std::nullopt;
  if (static_cast<int>(users.size()) > kMaxLandmarkUsers) {
    std::vector<int> picked;
    for (int k : rng.sample_indices(static_cast<int>(users.size()), kMaxLandmarkUsers)) {
      picked.push_back(users[static_cast<std::size_t>(k)]);
    }
    std::sort(picked.begin(), picked.end());
    users.swap(picked);
  }

  std::vector<char> in_set(static_cast<std::size_t>(train.cols()), 0);
  for (int u : users) {
    for (int i : train.row_indices(u)) in_set[static_cast<std::size_t>(i)] = 1;
  }
  auto pad_from = [&](const std::vector<int>& pool, int target) {
    std::vector<int> candidates;
    for (int i : pool) {
      if (!in_set[static_cast<std::size_t>(i)]) candidates.push_back(i);
    }
    int have = static_cast<int>(std::count(in_set.begin(), in_set.end(), 1));
    const int need = std::min(target - have, static_cast<int>(candidates.size()));
    if (need <= 0) return;
    for (int k : rng.sample_indices(static_cast<int>(candidates.size()), need)) {
      in_set[static_cast<std::size_t>(candidates[static_cast<std::size_t>(k)])] = 1;
    }
  };
  std::vector<int> all_items(static_cast<std::size_t>(train.cols()));
  std::iota(all_items.begin(), all_items.end(), 0);
  pad_from(all_items, kMinLandmarkItems);

  if (std::count(in_set.begin(), in_set.end(), 1) > kMaxLandmarkItems) {
    std::vector<int> previous;
    for (int i = 0; i < train.cols(); ++i) {
      if (in_set[static_cast<std::size_t>(i)]) previous.push_back(i);
    }
    std::fill(in_set.begin(), in_set.end(), 0);
    for (int u : users) {
      auto rated = train.row_indices(u);
      for (int k : rng.sample_indices(static_cast<int>(rated.size()), 2)) {
        in_set[static_cast<std::size_t>(rated[static_cast<std::size_t>(k)])] = 1;
      }
    }
    pad_from(previous, kMaxLandmarkItems);
  }

  LandmarkSubsample sub;
  sub.users = users;
  std::vector<int> column(static_cast<std::size_t>(train.cols()), -1);
  for (int i = 0; i < train.cols(); ++i) {
    if (in_set[static_cast<std::size_t>(i)]) {
      column[static_cast<std::size_t>(i)] = static_cast<int>(sub.items.size());
      sub.items.push_back(i);
    }
  }
  std::vector<Triplet> train_t, valid_t;
  for (std::size_t r = 0; r < users.size(); ++r) {
    auto idx = train.row_indices(users[r]);
    auto val = train.row_values(users[r]);
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (column[static_cast<std::size_t>(idx[k])] >= 0) kept.push_back(k);
    }
    const std::size_t held = kept[rng.below(kept.size())];
    for (std::size_t k : kept) {
      Triplet t{static_cast<int>(r), column[static_cast<std::size_t>(idx[k])], val[k]};
      (k == held ? valid_t : train_t).push_back(t);
    }
  }
  const int n_users = static_cast<int>(users.size());
  const int n_items = static_cast<int>(sub.items.size());
  sub.train = CsrMatrix::from_triplets(n_users, n_items, std::move(train_t));
  sub.validation = CsrMatrix::from_triplets(n_users, n_items, std::move(valid_t));
  return sub;
}

namespace {

class PopularityLandmark : public Recommender {
 public:
  explicit PopularityLandmark(const CsrMatrix& x) {
    for (int c : x.col_counts()) counts_.push_back(c);
  }
  void score(int, std::span<double> out) const override {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = counts_[i];
  }

 private:
  std::vector<double> counts_;
};

/// Scores X_u W or S_u X depending on the side the weights apply to.
class NeighborLandmark : public Recommender {
 public:
  NeighborLandmark(const CsrMatrix& x, CsrMatrix weights, bool item_side)
      : x_(x), w_(std::move(weights)), item_side_(item_side) {}
  void score(int user, std::span<double> out) const override {
    if (item_side_) {
      auto idx = x_.row_indices(user);
      auto val = x_.row_values(user);
      for (std::size_t k = 0; k < idx.size(); ++k) accumulate(w_, idx[k], val[k], out);
    } else {
      auto idx = w_.row_indices(user);
      auto val = w_.row_values(user);
      for (std::size_t k = 0; k < idx.size(); ++k) accumulate(x_, idx[k], val[k], out);
    }
  }

 private:
  static void accumulate(const CsrMatrix& m, int row, double scale, std::span<double> out) {
    auto idx = m.row_indices(row);
    auto val = m.row_values(row);
    for (std::size_t k = 0; k < idx.size(); ++k) out[static_cast<std::size_t>(idx[k])] += scale * val[k];
  }
  CsrMatrix x_;
  CsrMatrix w_;
  bool item_side_;
};

class SvdLandmark : public Recommender {
 public:
  SvdLandmark(const CsrMatrix& x, int factors) {
    Eigen::BDCSVD<Eigen::MatrixXd> svd(x.to_dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::Index f = std::min<Eigen::Index>(factors, svd.singularValues().size());
    user_ = svd.matrixU().leftCols(f) * svd.singularValues().head(f).asDiagonal();
    item_ = svd.matrixV().leftCols(f);
  }
  void score(int user, std::span<double> out) const override {
    Eigen::Map<Eigen::VectorXd> s(out.data(), static_cast<Eigen::Index>(out.size()));
    s.noalias() = item_ * user_.row(user).transpose();
  }

 private:
  Eigen::MatrixXd user_;
  Eigen::MatrixXd item_;
};

std::shared_ptr<const Recommender> make_landmarker(const std::string& name, const CsrMatrix& x) {
  SimilarityParams sp;
  sp.shrink = 0.0;
  if (name == "toppop") return std::make_shared<PopularityLandmark>(x);
  if (name == "itemknn_k1" || name == "itemknn_k5") {
    sp.top_k = name.back() - '0';
    return std::make_shared<NeighborLandmark>(
        x, build_similarity(x, Axis::item, SimilarityKind::cosine, sp).transpose(), true);
  }
  if (name == "userknn_k1" || name == "userknn_k5") {
    sp.top_k = name.back() - '0';
    return std::make_shared<NeighborLandmark>(x, build_similarity(x, Axis::user, SimilarityKind::cosine, sp),
                                              false);
  }
  if (name == "puresvd_f1" || name == "puresvd_f5") return std::make_shared<SvdLandmark>(x, name.back() - '0');
  fail(ErrorCode::not_found, "unknown landmarker " + name);
}

}  // namespace

MetaFeatureVector landmark_features(const CsrMatrix& train, std::uint64_t seed) {
  MetaFeatureVector out;
  const auto& names = metafeature_names();
  const auto begin = names.begin() + kNumGeneralFeatures + kNumDistributionFeatures;
  for (auto it = begin; it != names.end(); ++it) out.emplace_back(*it, kNaN);

  const auto sub = landmark_subsample(train, seed);
  if (!sub) {
    warn("landmark features missing: no user has at least 2 ratings");
    return out;
  }
  const std::vector<BaseMetric> bases = landmark_bases();
  const std::vector<int> cutoffs(kLandmarkCutoffs.begin(), kLandmarkCutoffs.end());
  const std::vector<MetricSpec> specs = metric_specs(bases, cutoffs);
  const int list_length = cutoffs.back();
  auto shared_train = std::make_shared<const CsrMatrix>(sub->train);
  const std::size_t per_landmarker = landmark_metric_names().size() * cutoffs.size();

  for (std::size_t l = 0; l < landmarker_names().size(); ++l) {
    const std::string& lm = landmarker_names()[l];
    try {
      FittedModel model(lm, {}, shared_train, make_landmarker(lm, sub->train), 0.0);
      const EvaluationContext ctx = build_evaluation_context(model, sub->train, sub->validation, list_length);
      const MetricVector values = evaluate(ctx, specs);
      const double items_in_eval = items_in_evaluation_set(ctx);
      const double users_in_eval = users_in_evaluation_set(ctx);
      std::size_t pos = l * per_landmarker;
      for (BaseMetric b : bases) {
        for (int k : cutoffs) out[pos++].second = values.at(MetricSpec{b, k});
      }
      for (int k = 0; k < static_cast<int>(cutoffs.size()); ++k) out[pos++].second = items_in_eval;
      for (int k = 0; k < static_cast<int>(cutoffs.size()); ++k) out[pos++].second = users_in_eval;
    } catch (const Error& e) {
      warn("landmarker " + lm + " failed: " + e.what());
    }
  }
  return out;
}

MetaFeatureVector all_features(const CsrMatrix& train, std::uint64_t seed) {
  if (train.nnz() == 0) fail(ErrorCode::empty_dataset, "meta-features need a nonempty training matrix");
  const CsrMatrix canon = canonical_relabel(train);
  MetaFeatureVector out = general_features(canon);
  for (auto& f : distribution_features(canon)) out.push_back(std::move(f));
  for (auto& f : landmark_features(canon, seed)) out.push_back(std::move(f));
  return out;
}

double feature_value(const MetaFeatureVector& features, const std::string& name) {
  for (const auto& [n, v] : features) {
    if (n == name) return v;
  }
  return kNaN;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {
constexpr std::string_view kSchemaLine = "#schema=reczilla/1";
constexpr std::string_view kHeader = "dataset_id\tfeature_name\tvalue";
}  // namespace

std::string metafeature_text(const MetaFeatureTable& table) {
  std::ostringstream out;
  out << kSchemaLine << '\n' << kHeader << '\n';
  for (const auto& [id, features] : table) {
    for (const auto& [name, value] : features) out << id << '\t' << name << '\t' << format_value(value) << '\n';
  }
  return out.str();
}

MetaFeatureTable parse_metafeature_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kSchemaLine) {
    fail(ErrorCode::schema, "meta-feature file: expected schema '" + std::string(kSchemaLine) + "', found '" +
                                std::string(trim(line)) + "'");
  }
  MetaFeatureTable table;
  bool header = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      if (line != kHeader) fail(ErrorCode::parse, "meta-feature file: bad header");
      header = true;
      continue;
    }
    const auto fields = split(line, '\t');
    if (fields.size() != 3) {
      fail(ErrorCode::parse, "meta-feature file line " + std::to_string(line_no) + ": expected 3 fields");
    }
    table[fields[0]].emplace_back(fields[1], parse_double(fields[2]));
  }
  return table;
}

void write_metafeatures(const std::filesystem::path& path, const MetaFeatureTable& table) {
  write_text_file(path, metafeature_text(table));
}

MetaFeatureTable read_metafeatures(const std::filesystem::path& path) {
  return parse_metafeature_text(read_text_file(path));
}

}  // namespace reczilla
