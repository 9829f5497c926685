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

#include "reczilla/reczilla.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <new>
#include <set>
#include <sstream>
#include <string>

#include "reczilla/analysis.hpp"
#include "reczilla/common.hpp"
#include "reczilla/dataset.hpp"
#include "reczilla/hyperparams.hpp"
#include "reczilla/metadataset.hpp"
#include "reczilla/metafeatures.hpp"
#include "reczilla/pipeline.hpp"

struct rz_dataset {
  reczilla::InteractionDataset value;
};
struct rz_split {
  reczilla::DatasetSplit value;
};
struct rz_features {
  reczilla::MetaFeatureTable value;
};
struct rz_metadataset {
  reczilla::MetaDataset value;
};
struct rz_model {
  reczilla::MetaModel value;
};

namespace {

using namespace reczilla;

thread_local std::string last_error;

rz_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return RZ_INVALID_ARGUMENT;
    case ErrorCode::parse: return RZ_PARSE;
    case ErrorCode::empty_dataset: return RZ_EMPTY_DATASET;
    case ErrorCode::unsupported_scheme: return RZ_UNSUPPORTED_SCHEME;
    case ErrorCode::infeasible: return RZ_INFEASIBLE;
    case ErrorCode::unknown_metric: return RZ_UNKNOWN_METRIC;
    case ErrorCode::not_found: return RZ_NOT_FOUND;
    case ErrorCode::io: return RZ_IO;
    case ErrorCode::timeout: return RZ_TIMEOUT;
    case ErrorCode::fit: return RZ_FIT;
    case ErrorCode::resource: return RZ_RESOURCE;
    case ErrorCode::schema: return RZ_SCHEMA;
    case ErrorCode::missing_features: return RZ_MISSING_FEATURES;
  }
  return RZ_INTERNAL;
}

template <typename F>
rz_status guarded(F&& body) {
  last_error.clear();
  try {
    body();
    return RZ_OK;
  } catch (const Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RZ_RESOURCE;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RZ_INTERNAL;
  }
}

void require(const void* pointer, const char* what) {
  if (pointer == nullptr) fail(ErrorCode::invalid_argument, std::string(what) + " is NULL");
}

char* copy_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

void emit(char** out, const std::string& text) {
  if (out != nullptr) *out = copy_string(text);
}

std::string str(const char* text) { return text == nullptr ? std::string() : std::string(text); }

std::vector<std::string> list(const char* text) {
  std::vector<std::string> out;
  for (const auto& part : split(str(text), ',')) {
    const std::string_view t = trim(part);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

std::vector<MetricSpec> metric_list(const char* text) {
  std::vector<MetricSpec> out;
  for (const auto& s : list(text)) out.push_back(parse_metric_spec(s));
  return out;
}

TrainOptions train_options(const rz_train_options& o) {
  TrainOptions t;
  t.n = o.n;
  t.m = o.m;
  t.kind = parse_regressor_kind(str(o.regressor));
  t.seed = o.seed;
  t.regressor.knn_k = o.knn_k;
  t.regressor.trees = o.trees;
  t.regressor.depth = o.depth;
  t.regressor.learning_rate = o.learning_rate;
  return t;
}

std::string param_cell(const std::string& params) { return params.empty() ? "-" : params; }

const MetaFeatureVector& features_for(const rz_features* features, const char* dataset_id) {
  require(features, "features");
  const auto& table = features->value;
  if (dataset_id != nullptr && *dataset_id != '\0') {
    auto it = table.find(dataset_id);
    if (it == table.end()) fail(ErrorCode::not_found, "no features for dataset " + str(dataset_id));
    return it->second;
  }
  if (table.size() != 1) {
    fail(ErrorCode::invalid_argument, "feature table holds " + std::to_string(table.size()) +
                                          " datasets; name one with dataset_id");
  }
  return table.begin()->second;
}

std::string feature_key(const rz_features* features, const char* dataset_id) {
  if (dataset_id != nullptr && *dataset_id != '\0') return dataset_id;
  return features->value.begin()->first;
}

}  // namespace

extern "C" {

const char* rz_version(void) { return "0.1.0"; }

const char* rz_status_name(rz_status status) {
  switch (status) {
    case RZ_OK: return "ok";
    case RZ_INVALID_ARGUMENT: return "invalid_argument";
    case RZ_PARSE: return "parse";
    case RZ_EMPTY_DATASET: return "empty_dataset";
    case RZ_UNSUPPORTED_SCHEME: return "unsupported_scheme";
    case RZ_INFEASIBLE: return "infeasible";
    case RZ_UNKNOWN_METRIC: return "unknown_metric";
    case RZ_NOT_FOUND: return "not_found";
    case RZ_IO: return "io";
    case RZ_TIMEOUT: return "timeout";
    case RZ_FIT: return "fit";
    case RZ_RESOURCE: return "resource";
    case RZ_SCHEMA: return "schema";
    case RZ_MISSING_FEATURES: return "missing_features";
    case RZ_INTERNAL: return "internal";
  }
  return "internal";
}

const char* rz_last_error(void) { return last_error.c_str(); }

void rz_free(void* pointer) { std::free(pointer); }

rz_status rz_catalog_text(char** out) {
  return guarded([&] {
    require(out, "out");
    emit(out, catalog_text());
  });
}

rz_status rz_metric_bases(char** out) {
  return guarded([&] {
    require(out, "out");
    emit(out, base_metric_list());
  });
}

rz_status rz_check_target(const char* text) {
  return guarded([&] {
    require(text, "target");
    PerformanceTarget::parse(text);
  });
}

// ---- datasets

void rz_ingest_options_init(rz_ingest_options* options) {
  if (options == nullptr) return;
  options->delimiter = ',';
  options->header = -1;
  options->implicit = 0;
  options->name = nullptr;
  options->family = nullptr;
}

rz_status rz_dataset_ingest(const char* path, const rz_ingest_options* options, rz_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    rz_ingest_options defaults;
    rz_ingest_options_init(&defaults);
    const rz_ingest_options& o = options != nullptr ? *options : defaults;
    IngestOptions io;
    io.delimiter = o.delimiter;
    if (o.header >= 0) io.header = o.header != 0;
    io.implicit = o.implicit != 0;
    io.name = o.name != nullptr ? o.name : std::filesystem::path(path).stem().string();
    io.family = o.family != nullptr ? o.family : io.name;
    *out = new rz_dataset{ingest(path, io)};
  });
}

rz_status rz_dataset_read(const char* path, rz_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rz_dataset{read_canonical(path)};
  });
}

rz_status rz_dataset_write(const rz_dataset* dataset, const char* path) {
  return guarded([&] {
    require(dataset, "dataset");
    require(path, "path");
    write_canonical(dataset->value, path);
  });
}

void rz_synth_options_init(rz_synth_options* options) {
  if (options == nullptr) return;
  const SynthSpec d;
  options->users = d.users;
  options->items = d.items;
  options->nnz = d.nnz;
  options->popularity_skew = d.popularity_skew;
  options->user_skew = d.user_skew;
  options->rating_scale = d.rating_scale;
  options->latent_rank = d.latent_rank;
  options->latent_strength = d.latent_strength;
  options->seed = d.seed;
  options->name = nullptr;
  options->family = nullptr;
}

rz_status rz_dataset_synthesize(const rz_synth_options* options, rz_dataset** out) {
  return guarded([&] {
    require(options, "options");
    require(out, "out");
    SynthSpec s;
    s.users = options->users;
    s.items = options->items;
    s.nnz = options->nnz;
    s.popularity_skew = options->popularity_skew;
    s.user_skew = options->user_skew;
    s.rating_scale = options->rating_scale;
    s.latent_rank = options->latent_rank;
    s.latent_strength = options->latent_strength;
    s.seed = options->seed;
    if (options->name != nullptr) s.name = options->name;
    s.family = options->family != nullptr ? options->family : s.name;
    *out = new rz_dataset{synthesize(s)};
  });
}

int rz_dataset_users(const rz_dataset* dataset) { return dataset ? dataset->value.num_users() : 0; }
int rz_dataset_items(const rz_dataset* dataset) { return dataset ? dataset->value.num_items() : 0; }
int64_t rz_dataset_nnz(const rz_dataset* dataset) { return dataset ? dataset->value.nnz() : 0; }
const char* rz_dataset_name(const rz_dataset* dataset) { return dataset ? dataset->value.name().c_str() : ""; }
const char* rz_dataset_family(const rz_dataset* dataset) {
  return dataset ? dataset->value.family().c_str() : "";
}
void rz_dataset_free(rz_dataset* dataset) { delete dataset; }

// ---- splits

rz_status rz_split_leave_last_k(const rz_dataset* dataset, int k_val, int k_test, rz_split** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = new rz_split{split_leave_last_k(dataset->value, k_val, k_test)};
  });
}

rz_status rz_split_global_timestamp(const rz_dataset* dataset, double fraction_test, rz_split** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    *out = new rz_split{split_global_timestamp(dataset->value, fraction_test)};
  });
}

rz_status rz_split_write(const rz_split* split, const char* dir) {
  return guarded([&] {
    require(split, "split");
    require(dir, "dir");
    write_split(split->value, dir);
  });
}

rz_status rz_split_read(const char* dir, rz_split** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new rz_split{read_split(dir)};
  });
}

void rz_split_sizes(const rz_split* split, int64_t* train, int64_t* validation, int64_t* test) {
  if (split == nullptr) return;
  if (train) *train = split->value.train.nnz();
  if (validation) *validation = split->value.validation.nnz();
  if (test) *test = split->value.test.nnz();
}

const char* rz_split_family(const rz_split* split) { return split ? split->value.train.family().c_str() : ""; }

void rz_split_free(rz_split* split) { delete split; }

// ---- meta-features

rz_status rz_features_from_split(const rz_split* split, const char* dataset_id, uint64_t seed, rz_features** out) {
  return guarded([&] {
    require(split, "split");
    require(dataset_id, "dataset_id");
    require(out, "out");
    auto* f = new rz_features;
    f->value[dataset_id] = all_features(split->value.train.ratings(), seed);
    *out = f;
  });
}

rz_status rz_features_from_dataset(const rz_dataset* dataset, const char* dataset_id, uint64_t seed,
                                   rz_features** out) {
  return guarded([&] {
    require(dataset, "dataset");
    require(out, "out");
    const std::string id = dataset_id != nullptr && *dataset_id ? dataset_id : dataset->value.name();
    auto* f = new rz_features;
    f->value[id] = all_features(dataset->value.ratings(), seed);
    *out = f;
  });
}

rz_status rz_features_read(const char* path, rz_features** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rz_features{read_metafeatures(path)};
  });
}

rz_status rz_features_write(const rz_features* features, const char* path) {
  return guarded([&] {
    require(features, "features");
    require(path, "path");
    write_metafeatures(path, features->value);
  });
}

size_t rz_features_datasets(const rz_features* features) { return features ? features->value.size() : 0; }

void rz_features_free(rz_features* features) { delete features; }

// ---- meta-dataset

rz_status rz_metadataset_new(rz_metadataset** out) {
  return guarded([&] {
    require(out, "out");
    *out = new rz_metadataset;
  });
}

rz_status rz_metadataset_load(const char* dir, rz_metadataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    *out = new rz_metadataset{load(dir)};
  });
}

rz_status rz_metadataset_open(const char* dir, rz_metadataset** out) {
  return guarded([&] {
    require(dir, "dir");
    require(out, "out");
    const std::filesystem::path p(dir);
    *out = std::filesystem::exists(p / "results.tsv") ? new rz_metadataset{load(p)} : new rz_metadataset;
  });
}

rz_status rz_metadataset_persist(const rz_metadataset* metadataset, const char* dir) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(dir, "dir");
    persist(metadataset->value, dir);
  });
}

size_t rz_metadataset_records(const rz_metadataset* metadataset) {
  return metadataset ? metadataset->value.records.size() : 0;
}

size_t rz_metadataset_datasets(const rz_metadataset* metadataset) {
  return metadataset ? metadataset->value.dataset_ids().size() : 0;
}

rz_status rz_metadataset_set_features(rz_metadataset* metadataset, const rz_features* features,
                                      const char* family) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(features, "features");
    for (const auto& [id, fv] : features->value) {
      metadataset->value.features[id] = fv;
      if (family != nullptr && *family != '\0') metadataset->value.families[id] = family;
    }
  });
}

void rz_metadataset_free(rz_metadataset* metadataset) { delete metadataset; }

void rz_sweep_options_init(rz_sweep_options* options) {
  if (options == nullptr) return;
  const SweepOptions d;
  options->max_hp_sets = d.max_hp_sets;
  options->budget_s = d.budget_s;
  options->seed = d.seed;
  options->jobs = d.jobs;
  options->metrics = nullptr;
  options->early_stopping = d.early_stopping ? 1 : 0;
}

rz_status rz_sweep(rz_metadataset* metadataset, const rz_split* split, const char* dataset_id, const char* family,
                   const char* algorithms, const rz_sweep_options* options, size_t* records_added) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(split, "split");
    require(dataset_id, "dataset_id");
    rz_sweep_options defaults;
    rz_sweep_options_init(&defaults);
    const rz_sweep_options& o = options != nullptr ? *options : defaults;
    SweepOptions so;
    so.max_hp_sets = o.max_hp_sets;
    so.budget_s = o.budget_s;
    so.seed = o.seed;
    so.jobs = o.jobs;
    so.metrics = metric_list(o.metrics);
    so.early_stopping = o.early_stopping != 0;

    std::vector<std::string> names = list(algorithms);
    if (names.empty()) {
      for (const auto& info : catalog()) names.push_back(info.name);
    }
    for (const auto& name : names) find_algorithm(name);  // reject unknown names before any work
    const std::string fam = family != nullptr && *family ? family : split->value.train.family();

    MetaDataset& md = metadataset->value;
    const std::set<std::string> swept(names.begin(), names.end());
    std::erase_if(md.records, [&](const ExperimentRecord& r) {
      return r.dataset_id == dataset_id && swept.count(r.algorithm) > 0;
    });
    std::size_t added = 0;
    for (const auto& name : names) {
      auto records = run_sweep(split->value, dataset_id, fam, name, so);
      added += records.size();
      md.records.insert(md.records.end(), records.begin(), records.end());
    }
    md.families[dataset_id] = fam;
    if (records_added) *records_added = added;
  });
}

// ---- meta-model

void rz_train_options_init(rz_train_options* options) {
  if (options == nullptr) return;
  const TrainOptions d;
  options->target = "PRECISION@10";
  options->n = d.n;
  options->m = d.m;
  options->regressor = "knn";
  options->seed = d.seed;
  options->knn_k = d.regressor.knn_k;
  options->trees = d.regressor.trees;
  options->depth = d.regressor.depth;
  options->learning_rate = d.regressor.learning_rate;
}

rz_status rz_train(const rz_metadataset* metadataset, const rz_train_options* options, rz_model** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(options, "options");
    require(options->target, "target");
    require(out, "out");
    const PerformanceTarget target = PerformanceTarget::parse(options->target);
    *out = new rz_model{train_metamodel(metadataset->value, target, train_options(*options))};
  });
}

rz_status rz_train_time_model(const rz_metadataset* metadataset, const rz_train_options* options,
                              const rz_model* performance_model, rz_model** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(options, "options");
    require(performance_model, "performance_model");
    require(out, "out");
    TrainOptions t = train_options(*options);
    t.algorithms = performance_model->value.algorithms;
    PerformanceTarget target;
    target.train_time = true;
    *out = new rz_model{train_metamodel(metadataset->value, target, t)};
  });
}

rz_status rz_model_save(const rz_model* model, const char* path) {
  return guarded([&] {
    require(model, "model");
    require(path, "path");
    model->value.save(path);
  });
}

rz_status rz_model_load(const char* path, rz_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new rz_model{MetaModel::load(path)};
  });
}

void rz_model_free(rz_model* model) { delete model; }

rz_status rz_select(const rz_model* model, const rz_features* features, const char* dataset_id, char** out) {
  return guarded([&] {
    require(model, "model");
    require(out, "out");
    const MetaFeatureVector& fv = features_for(features, dataset_id);
    const Prediction p = predict_best(model->value, fv);
    std::ostringstream text;
    text << "dataset_id\talgorithm\thp_index\thyperparameters\ttarget\tpredicted\n";
    text << feature_key(features, dataset_id) << '\t' << p.chosen.algorithm << '\t' << p.chosen.hp_index << '\t'
         << param_cell(p.chosen.hp_params) << '\t' << model->value.target.name() << '\t'
         << format_value(p.predicted[static_cast<std::size_t>(p.index)]) << '\n';
    emit(out, text.str());
  });
}

rz_status rz_pareto(const rz_model* performance_model, const rz_model* time_model, const rz_features* features,
                    const char* dataset_id, char** out) {
  return guarded([&] {
    require(performance_model, "performance_model");
    require(time_model, "time_model");
    require(out, "out");
    const MetaFeatureVector& fv = features_for(features, dataset_id);
    const MetaModel& pm = performance_model->value;
    const std::vector<int> front = pareto_front(pm, time_model->value, fv);
    const std::vector<double> perf = predict_values(pm, fv);
    const std::vector<double> time = predict_values(time_model->value, fv);
    std::ostringstream text;
    text << "dataset_id\talgorithm\thp_index\thyperparameters\tpredicted_" << pm.target.name()
         << "\tpredicted_TRAIN_TIME\n";
    const std::string key = feature_key(features, dataset_id);
    for (int k : front) {
      const auto& a = pm.algorithms[static_cast<std::size_t>(k)];
      text << key << '\t' << a.algorithm << '\t' << a.hp_index << '\t' << param_cell(a.hp_params) << '\t'
           << format_value(perf[static_cast<std::size_t>(k)]) << '\t'
           << format_value(time[static_cast<std::size_t>(k)]) << '\n';
    }
    emit(out, text.str());
  });
}

void rz_loocv_options_init(rz_loocv_options* options) {
  if (options == nullptr) return;
  rz_train_options_init(&options->train);
  options->trials = 1;
  options->max_train_families = 0;
  options->jobs = 1;
}

rz_status rz_loocv(const rz_metadataset* metadataset, const rz_loocv_options* options, char** folds, char** rows,
                   char** summary) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(options, "options");
    require(options->train.target, "target");
    const PerformanceTarget target = PerformanceTarget::parse(options->train.target);
    LoocvOptions lo;
    lo.train = train_options(options->train);
    lo.trials = options->trials;
    lo.max_train_families = options->max_train_families;
    lo.jobs = options->jobs;
    const LoocvResult r = loocv(metadataset->value, target, lo);

    std::ostringstream f;
    f << "trial\tfamily\tpercent_diff\tmae\ttrain_families\n";
    for (const auto& x : r.folds) {
      f << x.trial << '\t' << x.family << '\t' << format_value(x.percent_diff) << '\t' << format_value(x.mae) << '\t'
        << x.train_families << '\n';
    }
    std::ostringstream w;
    w << "trial\tfamily\tdataset_id\tselected\tpredicted\tachieved\ty_star\tpercent_diff\tmae\n";
    for (const auto& x : r.rows) {
      w << x.trial << '\t' << x.family << '\t' << x.dataset << '\t' << x.selected << '\t' << format_value(x.predicted)
        << '\t' << format_value(x.achieved) << '\t' << format_value(x.y_star) << '\t' << format_value(x.percent_diff)
        << '\t' << format_value(x.mae) << '\n';
    }
    std::ostringstream s;
    s << "statistic\tp40\tmedian\tp60\n";
    s << "percent_diff\t" << format_value(r.percent_diff.p40) << '\t' << format_value(r.percent_diff.median) << '\t'
      << format_value(r.percent_diff.p60) << '\n';
    s << "mae\t" << format_value(r.mae.p40) << '\t' << format_value(r.mae.median) << '\t'
      << format_value(r.mae.p60) << '\n';
    emit(folds, f.str());
    emit(rows, w.str());
    emit(summary, s.str());
  });
}

// ---- reports

rz_status rz_report_ranks(const rz_metadataset* metadataset, const char* metrics, int min_algorithms, char** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(out, "out");
    emit(out, rank_table_text(rank_table(metadataset->value, metric_list(metrics), min_algorithms)));
  });
}

rz_status rz_report_correlation(const rz_metadataset* metadataset, const char* target, int top_k,
                                const char* hp_filter, char** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(target, "target");
    require(out, "out");
    const HpFilter filter = parse_hp_filter(hp_filter != nullptr ? hp_filter : "defaults-only");
    emit(out, correlation_report_text(
                  correlation_report(metadataset->value, PerformanceTarget::parse(target), top_k, filter)));
  });
}

rz_status rz_report_hardness(const rz_metadataset* metadataset, const char* metric, char** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(metric, "metric");
    require(out, "out");
    emit(out, hardness_text(dataset_hardness(metadataset->value, parse_metric_spec(metric))));
  });
}

rz_status rz_report_transfer(const rz_metadataset* metadataset, const char* algorithm, const char* metric,
                             char** out) {
  return guarded([&] {
    require(metadataset, "metadataset");
    require(metric, "metric");
    require(out, "out");
    const MetricSpec spec = parse_metric_spec(metric);
    const TransferMatrix tm = algorithm != nullptr && *algorithm
                                  ? transfer_matrix(metadataset->value, algorithm, spec)
                                  : average_transfer_matrix(metadataset->value, spec);
    emit(out, transfer_matrix_text(tm));
  });
}

}  // extern "C"
