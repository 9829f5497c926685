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

#include "reczilla/common.hpp"
#include "reczilla/dataset.hpp"
#include "reczilla/hyperparams.hpp"
#include "reczilla/metadataset.hpp"

using namespace reczilla;

namespace {

DatasetSplit small_split(std::uint64_t seed) {
  SynthSpec spec;
  spec.users = 40;
  spec.items = 30;
  spec.nnz = 400;
  spec.seed = seed;
  return split_leave_last_k(synthesize(spec), 1, 1);
}

SweepOptions quick_options() {
  SweepOptions o;
  o.metrics = {parse_metric_spec("PRECISION@5"), parse_metric_spec("NDCG@10"), parse_metric_spec("HIT_RATE@1")};
  o.seed = 1;
  return o;
}

ExperimentRecord record(const std::string& dataset, const std::string& algorithm, int hp, double precision) {
  ExperimentRecord r;
  r.dataset_id = dataset;
  r.family = dataset;
  r.algorithm = algorithm;
  r.hp_index = hp;
  r.metrics[MetricSpec{BaseMetric::precision, 10}] = precision;
  return r;
}

MetaDataset random_metadataset(Rng& rng, int records) {
  MetaDataset md;
  const std::vector<std::string> algorithms{"TopPop", "iALS", "EASE-R", "ItemKNN-Cosine"};
  const std::vector<MetricSpec> specs{{BaseMetric::precision, 10}, {BaseMetric::ndcg, 5}, {BaseMetric::novelty, 1}};
  for (int k = 0; k < records; ++k) {
    ExperimentRecord r;
    const int d = static_cast<int>(rng.below(25));
    r.dataset_id = "ds" + std::to_string(d);
    r.family = "fam" + std::to_string(d % 7);
    r.algorithm = algorithms[rng.below(algorithms.size())];
    r.hp_index = static_cast<int>(rng.below(50));
    r.hp_params = r.hp_index == 0 ? "" : "alpha=" + format_double(rng.uniform()) + ";top-K=" + std::to_string(rng.below(900));
    const double u = rng.uniform();
    r.status = u < 0.8 ? ExperimentStatus::ok
               : u < 0.9 ? ExperimentStatus::timeout
               : u < 0.95 ? ExperimentStatus::fit_error
                          : ExperimentStatus::resource_error;
    r.train_time_s = rng.uniform() * 100;
    r.eval_time_s = rng.uniform();
    if (r.status == ExperimentStatus::ok) {
      for (const auto& s : specs) r.metrics[s] = rng.uniform() < 0.05 ? std::nan("") : rng.uniform() / 3.0;
    }
    md.records.push_back(r);
    md.families[r.dataset_id] = r.family;
  }
  for (const auto& [id, fam] : md.families) {
    MetaFeatureVector v;
    v.emplace_back("general:num_users", rng.uniform() * 1000);
    v.emplace_back("dist:rating:std", rng.uniform() < 0.2 ? std::nan("") : rng.normal());
    md.features[id] = v;
  }
  return md;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reczilla_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("an algorithm without hyperparameters yields one record") {
  auto records = run_sweep(small_split(1), "d", "f", "TopPop", quick_options());
  REQUIRE(records.size() == 1);
  CHECK(records[0].hp_index == 0);
  CHECK(records[0].status == ExperimentStatus::ok);
  CHECK(records[0].metrics.size() == 3);
}

TEST_CASE("sweeps evaluate the requested number of in-bounds sets") {
  SweepOptions o = quick_options();
  o.max_hp_sets = 20;
  auto records = run_sweep(small_split(2), "d", "f", "ItemKNN-Cosine", o);
  REQUIRE(records.size() == 20);
  const auto& space = find_algorithm("ItemKNN-Cosine").space;
  for (std::size_t k = 0; k < records.size(); ++k) {
    CHECK(records[k].hp_index == static_cast<int>(k));
    CHECK_NOTHROW(space.validate(parse_params(records[k].hp_params, &space)));
    CHECK(records[k].status == ExperimentStatus::ok);
  }
  CHECK(parse_params(records[0].hp_params, &space) == space.defaults());
}

TEST_CASE("a vanishing budget leaves only the defaults attempt") {
  SweepOptions o = quick_options();
  o.max_hp_sets = 10;
  o.budget_s = 1e-9;
  auto records = run_sweep(small_split(3), "d", "f", "iALS", o);
  REQUIRE(records.size() == 1);
  CHECK(records[0].hp_index == 0);
  CHECK(records[0].status == ExperimentStatus::timeout);
  CHECK(records[0].metrics.empty());
}

TEST_CASE("parallel sweeps agree with serial ones") {
  SweepOptions o = quick_options();
  o.max_hp_sets = 6;
  auto serial = run_sweep(small_split(4), "d", "f", "PureSVD", o);
  o.jobs = 3;
  auto parallel = run_sweep(small_split(4), "d", "f", "PureSVD", o);
  REQUIRE(serial.size() == parallel.size());
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].hp_params == parallel[k].hp_params);
    CHECK(serial[k].metrics == parallel[k].metrics);
  }
}

TEST_CASE("normalized performance") {
  CHECK(normalize_performance(1.0, 0.0, 1.0) == 100.0);
  CHECK(normalize_performance(0.0, 0.0, 1.0) == 0.0);
  CHECK(normalize_performance(0.5, 0.0, 1.0) == 50.0);
  CHECK(normalize_performance(0.3, 0.3, 0.3) == 100.0);
}

TEST_CASE("best per pair") {
  MetaDataset md;
  md.records = {record("d", "a", 0, 0.1), record("d", "a", 1, 0.3), record("d", "a", 2, 0.2), record("e", "a", 0, 0.4)};
  auto best = best_per_pair(md, MetricSpec{BaseMetric::precision, 10});
  CHECK(best.at({"d", "a"}).value == 0.3);
  CHECK(best.at({"d", "a"}).hp_index == 1);
  CHECK(best.at({"e", "a"}).value == 0.4);
}

TEST_CASE("best per pair matches a linear scan") {
  Rng rng(5);
  const MetaDataset md = random_metadataset(rng, 400);
  const MetricSpec metric{BaseMetric::precision, 10};
  std::map<std::pair<std::string, std::string>, std::pair<double, int>> scan;
  for (const auto& r : md.records) {
    if (r.status != ExperimentStatus::ok) continue;
    const double v = r.metrics.at(metric);
    if (std::isnan(v)) continue;
    auto key = std::make_pair(r.dataset_id, r.algorithm);
    auto it = scan.find(key);
    if (it == scan.end() || v > it->second.first || (v == it->second.first && r.hp_index < it->second.second)) {
      scan[key] = {v, r.hp_index};
    }
  }
  const auto best = best_per_pair(md, metric);
  REQUIRE(best.size() == scan.size());
  for (const auto& [key, entry] : best) {
    CHECK(entry.value == scan.at(key).first);
    CHECK(entry.hp_index == scan.at(key).second);
  }
}

TEST_CASE("persistence round-trips") {
  MetaDataset empty;
  auto dir = temp_dir("md_empty");
  persist(empty, dir);
  CHECK(identical(load(dir), empty));

  MetaDataset timeout;
  ExperimentRecord r = record("d", "iALS", 0, 0.0);
  r.status = ExperimentStatus::timeout;
  r.metrics.clear();
  timeout.records.push_back(r);
  timeout.features["d"] = {{"general:num_users", 4.0}};
  timeout.families["d"] = "d";
  dir = temp_dir("md_timeout");
  persist(timeout, dir);
  const MetaDataset back = load(dir);
  REQUIRE(back.records.size() == 1);
  CHECK(back.records[0].status == ExperimentStatus::timeout);
  CHECK(identical(back, timeout));

  Rng rng(6);
  const MetaDataset big = random_metadataset(rng, 1000);
  dir = temp_dir("md_big");
  persist(big, dir);
  CHECK(identical(load(dir), big));
  CHECK(parse_results_text(results_text(big.records)).size() == 1000);
}

TEST_CASE("status names") {
  for (auto s : {ExperimentStatus::ok, ExperimentStatus::timeout, ExperimentStatus::fit_error,
                 ExperimentStatus::resource_error}) {
    CHECK(parse_status(status_name(s)) == s);
  }
  CHECK_THROWS_AS(parse_status("exploded"), Error);
}

TEST_CASE("consistency check") {
  MetaDataset md;
  md.records.push_back(record("d", "TopPop", 0, 0.1));
  try {
    md.check_consistency();
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::schema);
  }
  md.features["d"] = {{"general:num_users", 1.0}};
  md.families["d"] = "d";
  CHECK_NOTHROW(md.check_consistency());
  CHECK(md.dataset_ids() == std::vector<std::string>{"d"});
}
