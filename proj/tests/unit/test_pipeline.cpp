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
#include <map>
#include <mutex>
#include <set>

#include "oracles.hpp"
#include "reczilla/common.hpp"
#include "reczilla/pipeline.hpp"
#include "support.hpp"

using namespace reczilla;

namespace {

Eigen::MatrixXd random_normalized(Rng& rng, int datasets, int algorithms) {
  Eigen::MatrixXd m(datasets, algorithms);
  for (int d = 0; d < datasets; ++d) {
    for (int a = 0; a < algorithms; ++a) m(d, a) = std::round(rng.uniform() * 100);
  }
  return m;
}

const PerformanceTarget kPrecision = PerformanceTarget::parse("PRECISION@10");

// Collects every dataset id each stage touched.
class Recorder : public PipelineObserver {
 public:
  void touched(std::string_view stage, const std::vector<std::string>& ids) override {
    std::lock_guard<std::mutex> lock(mutex_);
    events.emplace_back(std::string(stage), ids);
  }
  std::vector<std::pair<std::string, std::vector<std::string>>> events;

 private:
  std::mutex mutex_;
};

}  // namespace

TEST_CASE("targets parse") {
  CHECK(PerformanceTarget::parse("TRAIN_TIME").train_time);
  CHECK_FALSE(PerformanceTarget::parse("TRAIN_TIME").maximize());
  CHECK(PerformanceTarget::parse("ndcg@5").name() == "NDCG@5");
  try {
    PerformanceTarget::parse("BOGUS@5");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unknown_metric);
  }
}

TEST_CASE("coverage examples") {
  Eigen::MatrixXd m(2, 2);
  m << 100, 0, 0, 100;
  const std::vector<int> first{0}, both{0, 1};
  CHECK(coverage(m, first) == 50.0);
  CHECK(coverage(m, both) == 100.0);
  Eigen::MatrixXd dominant(3, 2);
  dominant << 100, 20, 100, 0, 100, 50;
  CHECK(coverage(dominant, first) == 100.0);
  Eigen::MatrixXd with_nan(1, 2);
  with_nan << std::nan(""), 30;
  CHECK(coverage(with_nan, first) == 0.0);
}

TEST_CASE("greedy selection examples") {
  Eigen::MatrixXd m(2, 3);
  m << 100, 0, 60, 0, 100, 60;
  auto one = select_algorithms(m, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 2);
  auto two = select_algorithms(m, 2);
  CHECK(two[0] == 2);
  CHECK(coverage(m, two) == 80.0);
  CHECK(coverage(m, two) >= (1 - 1 / M_E) * oracle::exhaustive_coverage(m, 2));
  CHECK(select_algorithms(m, 10).size() == 3);
}

TEST_CASE("greedy coverage against the exhaustive optimum") {
  Rng rng(7);
  for (int t = 0; t < 60; ++t) {
    const int algorithms = 2 + static_cast<int>(rng.below(9));
    const Eigen::MatrixXd m = random_normalized(rng, 2 + static_cast<int>(rng.below(8)), algorithms);
    double previous = 0;
    for (int n = 1; n <= 4; ++n) {
      const auto chosen = select_algorithms(m, n);
      const double c = coverage(m, chosen);
      CHECK(std::abs(c - oracle::coverage(m, chosen)) <= 1e-12);
      CHECK(c >= (1 - 1 / M_E) * oracle::exhaustive_coverage(m, n) - 1e-9);
      CHECK(c >= previous);
      previous = c;
    }
  }
}

TEST_CASE("weighted correlation") {
  std::vector<double> x{1, 2, 3, 4, 5}, w(5, 1.0);
  std::vector<double> y, neg;
  for (double v : x) {
    y.push_back(2 * v + 3);
    neg.push_back(-v);
  }
  CHECK(weighted_correlation(x, y, w) == doctest::Approx(1.0));
  CHECK(weighted_correlation(x, neg, w) == doctest::Approx(-1.0));
  std::vector<double> flat(5, 2.0);
  CHECK(weighted_correlation(x, flat, w) == 0.0);
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> a, b, weights;
    for (int k = 0; k < 12; ++k) {
      a.push_back(rng.normal());
      b.push_back(rng.normal() + 0.5 * a.back());
      weights.push_back(k % 4 == 0 ? 1.0 : 1.0 / (1 + static_cast<double>(rng.below(5))));
    }
    CHECK(std::abs(weighted_correlation(a, b, weights) - oracle::weighted_correlation(a, b, weights)) <= 1e-12);
  }
}

TEST_CASE("family weights") {
  const auto w = family_weights({"a", "b", "a", "a", "c"});
  CHECK(w[0] == doctest::Approx(1.0 / 3));
  CHECK(w[1] == 1.0);
  CHECK(w[3] == doctest::Approx(1.0 / 3));
}

TEST_CASE("meta-feature selection rules") {
  Eigen::MatrixXd c(2, 4);
  c << 0.1, 0.9, 0.3, 0.9, 0.8, 0.2, 0.7, 0.2;
  auto one = select_features(c, 1);
  REQUIRE(one.size() == 1);
  CHECK(one[0] == 1);
  // Feature 3 duplicates feature 1 and adds nothing once 1 is chosen.
  auto two = select_features(c, 2);
  CHECK(two == std::vector<int>{1, 0});
}

TEST_CASE("meta-feature selection matches the pseudocode simulation") {
  Rng rng(9);
  for (int t = 0; t < 100; ++t) {
    const int algorithms = 1 + static_cast<int>(rng.below(5));
    const int features = 1 + static_cast<int>(rng.below(10));
    const int m = 1 + static_cast<int>(rng.below(3));
    Eigen::MatrixXd c(algorithms, features);
    std::vector<std::vector<double>> nested(static_cast<std::size_t>(algorithms));
    for (int i = 0; i < algorithms; ++i) {
      for (int j = 0; j < features; ++j) {
        c(i, j) = std::round(rng.uniform() * 20) / 20;  // coarse grid forces ties
        nested[static_cast<std::size_t>(i)].push_back(c(i, j));
      }
    }
    WarningCapture quiet;
    CHECK(select_features(c, m) == oracle::simulate_feature_selection(nested, m));
  }
}

TEST_CASE("percent difference") {
  CHECK(percent_diff(0.3, 0.3) == 0.0);
  CHECK(percent_diff(0.3, 0.0) == 100.0);
  CHECK(percent_diff(0.01, 0.005) == doctest::Approx(50.0));
  CHECK(percent_diff(2.0, 4.0, false) == doctest::Approx(50.0));
}

TEST_CASE("quantiles interpolate") {
  CHECK(quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(quantile({5}, 0.4) == 5);
  CHECK(quantile({1, 2, 3, 4, 5}, 0.4) == doctest::Approx(2.6));
}

TEST_CASE("pareto front") {
  const std::vector<double> perf{0.5, 0.4, 0.3}, fast{1, 2, 3};
  CHECK(pareto_front(perf, fast) == std::vector<int>{0});
  const std::vector<double> same(3, 1.0);
  CHECK(pareto_front(same, same).size() == 3);
  Rng rng(10);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> p, time;
    const int n = 1 + static_cast<int>(rng.below(15));
    for (int k = 0; k < n; ++k) {
      p.push_back(static_cast<double>(rng.below(6)));
      time.push_back(static_cast<double>(rng.below(6)));
    }
    auto got = pareto_front(p, time);
    std::sort(got.begin(), got.end());
    CHECK(got == oracle::pareto(p, time));
    const auto ordered = pareto_front(p, time);
    for (std::size_t k = 1; k < ordered.size(); ++k) {
      CHECK(p[static_cast<std::size_t>(ordered[k - 1])] >= p[static_cast<std::size_t>(ordered[k])]);
    }
  }
}

TEST_CASE("performance matrix normalization") {
  Rng rng(11);
  const MetaDataset md = fixture::planted_metadataset(rng, 3, 2, 3, 2);
  const PerformanceMatrix pm = performance_matrix(md, kPrecision);
  CHECK(pm.datasets.size() == 6);
  CHECK(pm.algorithms.size() == 6);
  const Eigen::MatrixXd z = pm.normalized();
  for (Eigen::Index d = 0; d < z.rows(); ++d) {
    CHECK(z.row(d).maxCoeff() == 100.0);
    CHECK(z.row(d).minCoeff() == 0.0);
  }
  CHECK(pm.column_of(pm.algorithms[3]) == 3);
  CHECK(pm.column_of(ParameterizedAlgorithm{"Nope", 0, ""}) == -1);
}

TEST_CASE("training, prediction and model round-trip") {
  Rng rng(12);
  const MetaDataset md = fixture::planted_metadataset(rng, 5, 3, 4, 2);
  for (auto kind : {RegressorKind::knn, RegressorKind::linear, RegressorKind::gbt_chain, RegressorKind::random}) {
    TrainOptions o;
    o.n = 3;
    o.m = 2;
    o.kind = kind;
    o.regressor.trees = 20;
    const MetaModel model = train_metamodel(md, kPrecision, o);
    CHECK(model.algorithms.size() == 3);
    CHECK(model.features.size() == 2);
    CHECK(model.training_families.size() == 5);
    const MetaModel back = MetaModel::from_text(model.to_text());
    CHECK(back.to_text() == model.to_text());
    for (const auto& [id, features] : md.features) {
      const Prediction a = predict_best(model, features);
      const Prediction b = predict_best(back, features);
      CHECK(a.chosen == b.chosen);
      CHECK(a.predicted == b.predicted);
      if (kind != RegressorKind::random) {
        const auto best = std::max_element(a.predicted.begin(), a.predicted.end()) - a.predicted.begin();
        CHECK(a.index == best);
      }
    }
  }
}

TEST_CASE("n one always returns its sole member") {
  Rng rng(13);
  const MetaDataset md = fixture::planted_metadataset(rng, 4, 2, 3, 1);
  TrainOptions o;
  o.n = 1;
  const MetaModel model = train_metamodel(md, kPrecision, o);
  REQUIRE(model.algorithms.size() == 1);
  for (const auto& [id, f] : md.features) CHECK(predict_best(model, f).chosen == model.algorithms[0]);
}

TEST_CASE("missing features and imputation") {
  Rng rng(14);
  const MetaDataset md = fixture::planted_metadataset(rng, 4, 2, 3, 1);
  TrainOptions o;
  o.n = 2;
  o.m = 2;
  const MetaModel model = train_metamodel(md, kPrecision, o);
  try {
    predict_best(model, {{"unrelated", 1.0}});
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_features);
  }
  MetaFeatureVector with_nan;
  for (const auto& name : model.features) with_nan.emplace_back(name, std::nan(""));
  CHECK(std::isfinite(predict_values(model, with_nan)[0]));
}

TEST_CASE("affine feature transforms leave the selection unchanged") {
  Rng rng(15);
  const MetaDataset md = fixture::planted_metadataset(rng, 5, 3, 4, 1);
  MetaDataset shifted = md;
  for (auto& [id, v] : shifted.features) {
    for (auto& [name, x] : v) x = 3.0 * x + 7.0;
  }
  TrainOptions o;
  o.n = 3;
  o.m = 3;
  const MetaModel a = train_metamodel(md, kPrecision, o);
  const MetaModel b = train_metamodel(shifted, kPrecision, o);
  CHECK(a.features == b.features);
  for (const auto& [id, f] : md.features) {
    CHECK(predict_best(a, f).chosen == predict_best(b, shifted.features.at(id)).chosen);
  }
}

TEST_CASE("model files save and load") {
  Rng rng(16);
  const MetaDataset md = fixture::planted_metadataset(rng, 4, 2, 3, 1);
  const MetaModel model = train_metamodel(md, kPrecision, {});
  const auto path = std::filesystem::temp_directory_path() / "reczilla_test_model.txt";
  model.save(path);
  CHECK(MetaModel::load(path).to_text() == model.to_text());
  try {
    MetaModel::load(path.string() + ".missing");
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::not_found);
  }
  CHECK_THROWS_AS(MetaModel::from_text("not a model"), Error);
}

TEST_CASE("cross-validation rows and folds") {
  Rng rng(17);
  const MetaDataset md = fixture::planted_metadataset(rng, 4, 3, 4, 2);
  LoocvOptions o;
  o.trials = 3;
  o.train.n = 3;
  o.train.m = 2;
  const LoocvResult r = loocv(md, kPrecision, o);
  CHECK(r.folds.size() == 12);
  CHECK(r.rows.size() == 36);
  for (const auto& row : r.rows) {
    CHECK(row.train_families == 3);
    CHECK(row.percent_diff >= 0.0);
    CHECK(row.achieved <= row.y_star);
  }
  o.jobs = 3;
  const LoocvResult parallel = loocv(md, kPrecision, o);
  REQUIRE(parallel.rows.size() == r.rows.size());
  for (std::size_t k = 0; k < r.rows.size(); ++k) {
    CHECK(parallel.rows[k].selected == r.rows[k].selected);
    CHECK(parallel.rows[k].percent_diff == r.rows[k].percent_diff);
  }
  o.max_train_families = 2;
  for (const auto& row : loocv(md, kPrecision, o).rows) CHECK(row.train_families == 2);
}

TEST_CASE("a dominant algorithm gives zero percent difference") {
  MetaDataset md;
  for (int d = 0; d < 4; ++d) {
    const std::string id = "d" + std::to_string(d), fam = "f" + std::to_string(d % 2);
    md.families[id] = fam;
    md.features[id] = {{"f", static_cast<double>(d)}};
    for (int a = 0; a < 3; ++a) {
      ExperimentRecord r;
      r.dataset_id = id;
      r.family = fam;
      r.algorithm = "A" + std::to_string(a);
      r.metrics[MetricSpec{BaseMetric::precision, 10}] = a == 1 ? 0.5 : 0.1 + 0.05 * d * a;
      md.records.push_back(r);
    }
  }
  LoocvOptions o;
  o.train.n = 1;
  const LoocvResult r = loocv(md, kPrecision, o);
  REQUIRE(r.folds.size() == 2);
  for (const auto& f : r.folds) CHECK(f.percent_diff == 0.0);
}

TEST_CASE("random selection averages the analytic expectation") {
  Rng rng(18);
  const MetaDataset md = fixture::planted_metadataset(rng, 3, 2, 4, 1);
  const PerformanceMatrix pm = performance_matrix(md, kPrecision);
  // Every member is selected, so the expectation is the mean over members.
  double expected = 0;
  for (Eigen::Index d = 0; d < pm.values.rows(); ++d) {
    const double best = pm.values.row(d).maxCoeff();
    for (Eigen::Index a = 0; a < pm.values.cols(); ++a) expected += percent_diff(best, pm.values(d, a));
  }
  expected /= static_cast<double>(pm.values.size());
  double variance = 0;
  for (Eigen::Index d = 0; d < pm.values.rows(); ++d) {
    const double best = pm.values.row(d).maxCoeff();
    for (Eigen::Index a = 0; a < pm.values.cols(); ++a) {
      variance += std::pow(percent_diff(best, pm.values(d, a)) - expected, 2);
    }
  }
  variance /= static_cast<double>(pm.values.size());
  LoocvOptions o;
  o.trials = 300;
  o.train.n = 4;
  o.train.m = 1;
  o.train.kind = RegressorKind::random;
  WarningCapture quiet;
  const LoocvResult r = loocv(md, kPrecision, o);
  double mean = 0;
  for (const auto& row : r.rows) mean += row.percent_diff;
  mean /= static_cast<double>(r.rows.size());
  const double standard_error = std::sqrt(variance / static_cast<double>(r.rows.size()));
  CHECK(std::abs(mean - expected) <= 4 * standard_error);
}

TEST_CASE("held-out families never reach training stages") {
  Rng rng(19);
  const MetaDataset md = fixture::planted_metadataset(rng, 5, 2, 3, 1);
  Recorder recorder;
  LoocvOptions o;
  o.trials = 2;
  o.train.n = 2;
  o.train.m = 2;
  o.train.observer = &recorder;
  loocv(md, kPrecision, o);
  std::set<std::string> held;
  int folds = 0, violations = 0, stages = 0;
  for (const auto& [stage, ids] : recorder.events) {
    if (stage == "held_out") {
      ++folds;
      held = {ids.begin(), ids.end()};
      // The announcement must be exactly one family.
      std::set<std::string> fams;
      for (const auto& id : ids) fams.insert(md.families.at(id));
      CHECK(fams.size() == 1);
      continue;
    }
    ++stages;
    for (const auto& id : ids) violations += held.count(id) ? 1 : 0;
  }
  CHECK(folds == 10);
  CHECK(stages == 40);
  CHECK(violations == 0);
}
