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

#include <cstdlib>
#include <filesystem>
#include <string>

#include "reczilla/reczilla.h"

namespace {

// Takes ownership of a string returned through char**.
std::string take(char* text) {
  std::string out = text != nullptr ? text : "";
  rz_free(text);
  return out;
}

int lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reczilla_capi_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Sweeps four synthetic datasets in two families with fast algorithms.
rz_metadataset* small_metadataset() {
  rz_metadataset* md = nullptr;
  REQUIRE(rz_metadataset_new(&md) == RZ_OK);
  for (int d = 0; d < 4; ++d) {
    const std::string id = "syn" + std::to_string(d);
    const std::string family = d < 2 ? "famA" : "famB";
    rz_synth_options so;
    rz_synth_options_init(&so);
    so.users = 60;
    so.items = 40;
    so.nnz = 600 + 100 * d;
    so.seed = static_cast<uint64_t>(d + 1);
    so.popularity_skew = d < 2 ? 0.3 : 1.2;
    so.name = id.c_str();
    so.family = family.c_str();
    rz_dataset* ds = nullptr;
    REQUIRE(rz_dataset_synthesize(&so, &ds) == RZ_OK);
    rz_split* split = nullptr;
    REQUIRE(rz_split_leave_last_k(ds, 1, 1, &split) == RZ_OK);
    rz_features* f = nullptr;
    REQUIRE(rz_features_from_split(split, id.c_str(), 1, &f) == RZ_OK);
    REQUIRE(rz_metadataset_set_features(md, f, family.c_str()) == RZ_OK);
    rz_sweep_options sw;
    rz_sweep_options_init(&sw);
    sw.max_hp_sets = 2;
    sw.metrics = "PRECISION@10,NDCG@10";
    size_t added = 0;
    REQUIRE(rz_sweep(md, split, id.c_str(), family.c_str(), "TopPop,GlobalEffects,PureSVD,P3alpha", &sw, &added) ==
            RZ_OK);
    CHECK(added > 0);
    rz_features_free(f);
    rz_split_free(split);
    rz_dataset_free(ds);
  }
  return md;
}

}  // namespace

TEST_CASE("status names and errors") {
  CHECK(std::string(rz_status_name(RZ_OK)) == "ok");
  CHECK(std::string(rz_status_name(RZ_UNKNOWN_METRIC)) == "unknown_metric");
  CHECK(std::string(rz_status_name(RZ_MISSING_FEATURES)) == "missing_features");
  CHECK(std::string(rz_version()).size() > 0);
  CHECK(rz_check_target("NDCG@10") == RZ_OK);
  CHECK(rz_check_target("TRAIN_TIME") == RZ_OK);
  CHECK(rz_check_target("NOPE@10") == RZ_UNKNOWN_METRIC);
  CHECK(std::string(rz_last_error()).find("NOPE") != std::string::npos);
  rz_model* model = nullptr;
  CHECK(rz_model_load("/nonexistent/model.txt", &model) == RZ_NOT_FOUND);
  CHECK(model == nullptr);
  CHECK(rz_dataset_read("/nonexistent/data.tsv", nullptr) != RZ_OK);
  rz_dataset_free(nullptr);
  rz_model_free(nullptr);
}

TEST_CASE("catalog and metric listing") {
  char* text = nullptr;
  REQUIRE(rz_catalog_text(&text) == RZ_OK);
  const std::string catalog = take(text);
  CHECK(catalog.find("EASE-R") != std::string::npos);
  REQUIRE(rz_metric_bases(&text) == RZ_OK);
  CHECK(take(text).find("PRECISION") != std::string::npos);
}

TEST_CASE("datasets, splits and features round-trip through files") {
  rz_synth_options so;
  rz_synth_options_init(&so);
  so.seed = 5;
  so.name = "roundtrip";
  rz_dataset* ds = nullptr;
  REQUIRE(rz_dataset_synthesize(&so, &ds) == RZ_OK);
  CHECK(rz_dataset_users(ds) > 0);
  CHECK(std::string(rz_dataset_name(ds)) == "roundtrip");
  CHECK(std::string(rz_dataset_family(ds)) == "roundtrip");
  const auto dir = scratch("files");
  REQUIRE(rz_dataset_write(ds, (dir / "data.tsv").c_str()) == RZ_OK);
  rz_dataset* back = nullptr;
  REQUIRE(rz_dataset_read((dir / "data.tsv").c_str(), &back) == RZ_OK);
  CHECK(rz_dataset_nnz(back) == rz_dataset_nnz(ds));

  rz_split* split = nullptr;
  REQUIRE(rz_split_leave_last_k(ds, 1, 1, &split) == RZ_OK);
  REQUIRE(rz_split_write(split, (dir / "split").c_str()) == RZ_OK);
  rz_split* read = nullptr;
  REQUIRE(rz_split_read((dir / "split").c_str(), &read) == RZ_OK);
  int64_t a[3], b[3];
  rz_split_sizes(split, &a[0], &a[1], &a[2]);
  rz_split_sizes(read, &b[0], &b[1], &b[2]);
  for (int k = 0; k < 3; ++k) CHECK(a[k] == b[k]);
  CHECK(a[0] + a[1] + a[2] == rz_dataset_nnz(ds));

  rz_features* f = nullptr;
  REQUIRE(rz_features_from_split(split, "roundtrip", 3, &f) == RZ_OK);
  CHECK(rz_features_datasets(f) == 1);
  REQUIRE(rz_features_write(f, (dir / "features.tsv").c_str()) == RZ_OK);
  rz_features* fr = nullptr;
  REQUIRE(rz_features_read((dir / "features.tsv").c_str(), &fr) == RZ_OK);
  CHECK(rz_features_datasets(fr) == 1);

  CHECK(rz_split_global_timestamp(ds, 1.5, &split) == RZ_INVALID_ARGUMENT);
  rz_features_free(fr);
  rz_features_free(f);
  rz_split_free(read);
  rz_split_free(split);
  rz_dataset_free(back);
  rz_dataset_free(ds);
}

TEST_CASE("sweep, train, select and evaluate") {
  rz_metadataset* md = small_metadataset();
  CHECK(rz_metadataset_datasets(md) == 4);
  CHECK(rz_metadataset_records(md) > 8);

  const auto dir = scratch("pipeline");
  REQUIRE(rz_metadataset_persist(md, (dir / "md").c_str()) == RZ_OK);
  rz_metadataset* loaded = nullptr;
  REQUIRE(rz_metadataset_load((dir / "md").c_str(), &loaded) == RZ_OK);
  CHECK(rz_metadataset_records(loaded) == rz_metadataset_records(md));

  rz_train_options to;
  rz_train_options_init(&to);
  to.n = 2;
  to.m = 3;
  rz_model* model = nullptr;
  REQUIRE(rz_train(loaded, &to, &model) == RZ_OK);
  REQUIRE(rz_model_save(model, (dir / "model.txt").c_str()) == RZ_OK);
  rz_model* reloaded = nullptr;
  REQUIRE(rz_model_load((dir / "model.txt").c_str(), &reloaded) == RZ_OK);

  rz_synth_options so;
  rz_synth_options_init(&so);
  so.seed = 77;
  rz_dataset* fresh = nullptr;
  REQUIRE(rz_dataset_synthesize(&so, &fresh) == RZ_OK);
  rz_features* f = nullptr;
  REQUIRE(rz_features_from_dataset(fresh, "fresh", 1, &f) == RZ_OK);
  char* out = nullptr;
  REQUIRE(rz_select(model, f, "fresh", &out) == RZ_OK);
  const std::string selection = take(out);
  CHECK(lines(selection) == 2);
  REQUIRE(rz_select(reloaded, f, "fresh", &out) == RZ_OK);
  CHECK(take(out) == selection);
  CHECK(rz_select(model, f, "absent", &out) != RZ_OK);

  rz_model* time_model = nullptr;
  REQUIRE(rz_train_time_model(loaded, &to, model, &time_model) == RZ_OK);
  REQUIRE(rz_pareto(model, time_model, f, "fresh", &out) == RZ_OK);
  CHECK(lines(take(out)) >= 2);

  to.target = "BOGUS@1";
  rz_model* bad = nullptr;
  CHECK(rz_train(loaded, &to, &bad) == RZ_UNKNOWN_METRIC);
  CHECK(bad == nullptr);
  to.target = "PRECISION@10";

  rz_loocv_options lo;
  rz_loocv_options_init(&lo);
  lo.train = to;
  lo.trials = 2;
  char *folds = nullptr, *rows = nullptr, *summary = nullptr;
  REQUIRE(rz_loocv(loaded, &lo, &folds, &rows, &summary) == RZ_OK);
  CHECK(lines(take(folds)) == 1 + 2 * 2);
  CHECK(lines(take(rows)) == 1 + 2 * 4);
  CHECK(take(summary).size() > 0);

  REQUIRE(rz_report_ranks(loaded, "PRECISION@10", 2, &out) == RZ_OK);
  CHECK(lines(take(out)) == 1 + 4);
  REQUIRE(rz_report_correlation(loaded, "PRECISION@10", 5, "defaults-only", &out) == RZ_OK);
  CHECK(lines(take(out)) == 6);
  REQUIRE(rz_report_hardness(loaded, "NDCG@10", &out) == RZ_OK);
  CHECK(lines(take(out)) == 5);
  REQUIRE(rz_report_transfer(loaded, "", "PRECISION@10", &out) == RZ_OK);
  CHECK(lines(take(out)) == 5);
  CHECK(rz_report_hardness(loaded, "MRR@7", &out) != RZ_OK);

  rz_features_free(f);
  rz_dataset_free(fresh);
  rz_model_free(time_model);
  rz_model_free(reloaded);
  rz_model_free(model);
  rz_metadataset_free(loaded);
  rz_metadataset_free(md);
}
