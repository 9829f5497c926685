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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>

#include "oracles.hpp"
#include "reczilla/common.hpp"
#include "reczilla/dataset.hpp"
#include "reczilla/metafeatures.hpp"

using namespace reczilla;

namespace {

CsrMatrix synthetic(int users, int items, int nnz, std::uint64_t seed, int scale = 5, double user_skew = 0.5) {
  SynthSpec spec;
  spec.users = users;
  spec.items = items;
  spec.nnz = nnz;
  spec.rating_scale = scale;
  spec.user_skew = user_skew;
  spec.seed = seed;
  return synthesize(spec).ratings();
}

bool same_bits(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

CsrMatrix permuted(const CsrMatrix& m, const std::vector<int>& rows, const std::vector<int>& cols) {
  std::vector<Triplet> t;
  for (int r = 0; r < m.rows(); ++r) {
    auto idx = m.row_indices(r);
    auto val = m.row_values(r);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      t.push_back({rows[static_cast<std::size_t>(r)], cols[static_cast<std::size_t>(idx[k])], val[k]});
    }
  }
  return CsrMatrix::from_triplets(m.rows(), m.cols(), std::move(t));
}

}  // namespace

TEST_CASE("feature counts and names") {
  const auto& names = metafeature_names();
  CHECK(names.size() == 383);
  CHECK(std::set<std::string>(names.begin(), names.end()).size() == 383);
  CHECK(landmarker_names().size() == 7);
  CHECK(landmark_metric_names().size() == 22);
  int general = 0, dist = 0, landmark = 0;
  for (const auto& n : names) {
    general += n.rfind("general:", 0) == 0;
    dist += n.rfind("dist:", 0) == 0;
    landmark += n.rfind("landmark:", 0) == 0;
  }
  CHECK(general == 5);
  CHECK(dist == 70);
  CHECK(landmark == 308);
}

TEST_CASE("general features") {
  const CsrMatrix tiny = CsrMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {1, 1, 2.0}});
  auto g = general_features(tiny);
  CHECK(feature_value(g, "general:sparsity") == 0.5);
  CHECK(feature_value(g, "general:item_user_ratio") == 1.0);
  const CsrMatrix dense = CsrMatrix::from_dense(Eigen::MatrixXd::Ones(3, 4));
  CHECK(feature_value(general_features(dense), "general:sparsity") == 0.0);
  const CsrMatrix m = synthetic(50, 40, 1000, 3);
  g = general_features(m);
  const double expected[] = {50, 40, 1000, 0.8, 0.5};
  for (std::size_t k = 0; k < 5; ++k) CHECK(g[k].second == doctest::Approx(expected[k]));
}

TEST_CASE("describe matches the statistics oracle") {
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> v;
    const int n = 1 + static_cast<int>(rng.below(40));
    for (int k = 0; k < n; ++k) v.push_back(static_cast<double>(rng.below(6)) + (t % 2 ? rng.uniform() : 0.0));
    const auto got = describe(v);
    const auto want = oracle::describe(v);
    for (int s = 0; s < kNumStatistics; ++s) {
      INFO(statistic_names()[static_cast<std::size_t>(s)]);
      CHECK(std::abs(got[static_cast<std::size_t>(s)] - want[static_cast<std::size_t>(s)]) <=
            1e-10 * std::max(1.0, std::abs(want[static_cast<std::size_t>(s)])));
    }
  }
}

TEST_CASE("constant input conventions") {
  std::vector<double> v(7, 3.0);
  const auto d = describe(v);
  CHECK(d[0] == 3.0);
  CHECK(d[3] == 0.0);
  CHECK(d[6] == 0.0);
  CHECK(d[7] == 0.0);
  CHECK(d[8] == 0.0);
  CHECK(d[9] == doctest::Approx(std::log(7.0)));
  CHECK(std::isnan(describe(std::vector<double>{})[0]));
}

TEST_CASE("uniform item counts have zero gini") {
  // Every item rated by exactly two users.
  std::vector<Triplet> t;
  for (int i = 0; i < 6; ++i) {
    t.push_back({i, i, 1.0});
    t.push_back({(i + 1) % 6, i, 2.0});
  }
  auto d = distribution_features(CsrMatrix::from_triplets(6, 6, t));
  CHECK(feature_value(d, "dist:item_count:gini") == doctest::Approx(0.0));
}

TEST_CASE("distribution features match a brute-force oracle") {
  const CsrMatrix m = synthetic(30, 20, 200, 8);
  const Eigen::MatrixXd r = m.to_dense();
  std::map<std::string, std::vector<double>> agg;
  for (int u = 0; u < 30; ++u) {
    for (int i = 0; i < 20; ++i) {
      if (r(u, i) != 0) agg["rating"].push_back(r(u, i));
    }
  }
  auto entity = [&](const std::string& prefix, const Eigen::MatrixXd& x) {
    for (Eigen::Index e = 0; e < x.rows(); ++e) {
      double s = 0, c = 0;
      for (Eigen::Index f = 0; f < x.cols(); ++f) {
        if (x(e, f) != 0) {
          s += x(e, f);
          c += 1;
        }
      }
      if (c == 0) continue;
      agg[prefix + "_sum"].push_back(s);
      agg[prefix + "_count"].push_back(c);
      agg[prefix + "_mean"].push_back(s / c);
    }
  };
  entity("item", r.transpose());
  entity("user", r);
  const auto features = distribution_features(m);
  CHECK(features.size() == 70);
  for (const auto& [name, values] : agg) {
    const auto want = oracle::describe(values);
    for (int s = 0; s < kNumStatistics; ++s) {
      const std::string key = "dist:" + name + ":" + std::string(statistic_names()[static_cast<std::size_t>(s)]);
      INFO(key);
      CHECK(std::abs(feature_value(features, key) - want[static_cast<std::size_t>(s)]) <=
            1e-10 * std::max(1.0, std::abs(want[static_cast<std::size_t>(s)])));
    }
  }
}

TEST_CASE("small matrices are subsampled whole") {
  const CsrMatrix m = CsrMatrix::from_dense(Eigen::MatrixXd::Ones(10, 8));
  auto sub = landmark_subsample(m, 0);
  REQUIRE(sub.has_value());
  CHECK(sub->users.size() == 10);
  CHECK(sub->items.size() == 8);
  CHECK(sub->validation.nnz() == 10);
  for (int u = 0; u < 10; ++u) CHECK(sub->validation.row_nnz(u) == 1);
}

TEST_CASE("user and item caps") {
  auto many_users = landmark_subsample(synthetic(500, 50, 3000, 5), 1);
  REQUIRE(many_users.has_value());
  CHECK(many_users->users.size() == 100);
  auto many_items = landmark_subsample(synthetic(100, 2000, 6000, 6, 1, 0.0), 2);
  REQUIRE(many_items.has_value());
  CHECK(many_items->items.size() == 250);
  for (int u = 0; u < many_items->train.rows(); ++u) {
    CHECK(many_items->train.row_nnz(u) + many_items->validation.row_nnz(u) >= 2);
    CHECK(many_items->validation.row_nnz(u) == 1);
  }
}

TEST_CASE("no user with two ratings means no landmarks") {
  const CsrMatrix m = CsrMatrix::from_triplets(3, 3, {{0, 0, 1.0}, {1, 1, 1.0}});
  CHECK_FALSE(landmark_subsample(m, 0).has_value());
  auto lm = landmark_features(m, 0);
  CHECK(lm.size() == 308);
  for (const auto& [name, v] : lm) CHECK(std::isnan(v));
}

TEST_CASE("evaluation-set descriptors agree across landmarkers") {
  const CsrMatrix m = synthetic(60, 40, 500, 9);
  const auto lm = landmark_features(m, 0);
  CHECK(lm.size() == 308);
  for (const std::string metric : {"ITEMS_IN_EVAL_SET", "USERS_IN_EVAL_SET"}) {
    for (int k : kLandmarkCutoffs) {
      const double first = feature_value(lm, "landmark:toppop:" + metric + ":" + std::to_string(k));
      CHECK_FALSE(std::isnan(first));
      for (const auto& l : landmarker_names()) {
        CHECK(feature_value(lm, "landmark:" + l + ":" + metric + ":" + std::to_string(k)) == first);
      }
    }
  }
}

TEST_CASE("TopPop landmark hit rate equals a direct evaluation") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const CsrMatrix m = synthetic(40, 12, 300, seed, 1, 0.0);
    auto sub = landmark_subsample(m, seed);
    REQUIRE(sub.has_value());
    const std::vector<int> pop = sub->train.col_counts();
    double hits = 0;
    for (int u = 0; u < sub->train.rows(); ++u) {
      int best = -1;
      for (int i = 0; i < sub->train.cols(); ++i) {
        if (sub->train.contains(u, i) || pop[static_cast<std::size_t>(i)] == 0) continue;
        if (best < 0 || pop[static_cast<std::size_t>(i)] > pop[static_cast<std::size_t>(best)]) best = i;
      }
      hits += best >= 0 && sub->validation.contains(u, best) ? 1 : 0;
    }
    const auto lm = landmark_features(m, seed);
    CHECK(feature_value(lm, "landmark:toppop:HIT_RATE:1") == doctest::Approx(hits / sub->train.rows()));
  }
}

TEST_CASE("planted popular item gives a perfect TopPop hit rate") {
  // Every user rates item 0 and one niche item; two users hold item 0 out at
  // most, so it stays the most popular unseen item of whoever lacks it.
  std::vector<Triplet> t;
  for (int u = 0; u < 30; ++u) {
    t.push_back({u, 0, 1.0});
    t.push_back({u, 1 + u % 10, 1.0});
  }
  const CsrMatrix m = CsrMatrix::from_triplets(30, 11, t);
  auto sub = landmark_subsample(m, 4);
  REQUIRE(sub.has_value());
  // Only meaningful when every held-out entry is the popular item.
  const int popular = static_cast<int>(std::find(sub->items.begin(), sub->items.end(), 0) - sub->items.begin());
  bool all_popular = true;
  for (int u = 0; u < sub->validation.rows(); ++u) all_popular &= sub->validation.contains(u, popular);
  if (all_popular) CHECK(feature_value(landmark_features(m, 4), "landmark:toppop:HIT_RATE:1") == 1.0);
}

TEST_CASE("full vector is deterministic and relabel-invariant") {
  const CsrMatrix m = synthetic(70, 45, 600, 10);
  const auto a = all_features(m, 0);
  const auto b = all_features(m, 0);
  REQUIRE(a.size() == 383);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a[k].first == metafeature_names()[k]);
    CHECK(same_bits(a[k].second, b[k].second));
  }
  Rng rng(1);
  for (int trial = 0; trial < 3; ++trial) {
    std::vector<int> rows(70), cols(45);
    std::iota(rows.begin(), rows.end(), 0);
    std::iota(cols.begin(), cols.end(), 0);
    rng.shuffle(rows);
    if (trial > 0) rng.shuffle(cols);
    const auto c = all_features(permuted(m, rows, cols), 0);
    for (std::size_t k = 0; k < a.size(); ++k) {
      INFO(a[k].first);
      CHECK(same_bits(a[k].second, c[k].second));
    }
  }
}

TEST_CASE("feature table persistence keeps NaN") {
  MetaFeatureTable table;
  table["d1"] = {{"general:num_users", 3.0}, {"dist:rating:std", std::nan("")}};
  table["d2"] = {{"general:num_users", 0.1}, {"dist:rating:std", 1.0 / 3.0}};
  const auto back = parse_metafeature_text(metafeature_text(table));
  REQUIRE(back.size() == 2);
  CHECK(std::isnan(back.at("d1")[1].second));
  CHECK(back.at("d2")[1].second == 1.0 / 3.0);
  const auto path = std::filesystem::temp_directory_path() / "reczilla_test_features.tsv";
  write_metafeatures(path, table);
  CHECK(read_metafeatures(path).at("d2") == table.at("d2"));
  CHECK_THROWS_AS(parse_metafeature_text("garbage"), Error);
}
