/* Copyright 2026 The RecZilla Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the reczilla library.
 *
 * Every fallible call returns an rz_status. On failure the message is
 * available from rz_last_error() on the calling thread until the next call.
 * Strings returned through char** out-parameters are heap-allocated and must
 * be released with rz_free(). Handles are released with their _free function;
 * passing NULL to any _free function is a no-op. */

#ifndef RECZILLA_RECZILLA_H_
#define RECZILLA_RECZILLA_H_

#include <stddef.h>
#include <stdint.h>

#if defined(RZ_BUILDING_LIBRARY)
#define RZ_API __attribute__((visibility("default")))
#else
#define RZ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum rz_status {
  RZ_OK = 0,
  RZ_INVALID_ARGUMENT = 1,
  RZ_PARSE = 2,
  RZ_EMPTY_DATASET = 3,
  RZ_UNSUPPORTED_SCHEME = 4,
  RZ_INFEASIBLE = 5,
  RZ_UNKNOWN_METRIC = 6,
  RZ_NOT_FOUND = 7,
  RZ_IO = 8,
  RZ_TIMEOUT = 9,
  RZ_FIT = 10,
  RZ_RESOURCE = 11,
  RZ_SCHEMA = 12,
  RZ_MISSING_FEATURES = 13,
  RZ_INTERNAL = 14
} rz_status;

typedef struct rz_dataset rz_dataset;
typedef struct rz_split rz_split;
typedef struct rz_features rz_features;
typedef struct rz_metadataset rz_metadataset;
typedef struct rz_model rz_model;

RZ_API const char* rz_version(void);
/* Lower-case name such as "unknown_metric". */
RZ_API const char* rz_status_name(rz_status status);
RZ_API const char* rz_last_error(void);
RZ_API void rz_free(void* pointer);

/* Catalog of algorithms with their hyperparameter spaces, as text. */
RZ_API rz_status rz_catalog_text(char** out);
/* Comma-separated list of the base metric names. */
RZ_API rz_status rz_metric_bases(char** out);
/* Validates BASE@CUTOFF or TRAIN_TIME. */
RZ_API rz_status rz_check_target(const char* text);

/* ---- datasets ---- */

typedef struct rz_ingest_options {
  char delimiter;
  int header; /* -1 auto-detect, 0 no header, 1 header */
  int implicit;
  const char* name;   /* NULL: file stem */
  const char* family; /* NULL: name */
} rz_ingest_options;

RZ_API void rz_ingest_options_init(rz_ingest_options* options);
RZ_API rz_status rz_dataset_ingest(const char* path, const rz_ingest_options* options, rz_dataset** out);
/* Reads the canonical interaction format. */
RZ_API rz_status rz_dataset_read(const char* path, rz_dataset** out);
RZ_API rz_status rz_dataset_write(const rz_dataset* dataset, const char* path);

typedef struct rz_synth_options {
  int users;
  int items;
  int64_t nnz;
  double popularity_skew;
  double user_skew;
  int rating_scale;
  int latent_rank;
  double latent_strength;
  uint64_t seed;
  const char* name;
  const char* family;
} rz_synth_options;

RZ_API void rz_synth_options_init(rz_synth_options* options);
RZ_API rz_status rz_dataset_synthesize(const rz_synth_options* options, rz_dataset** out);
RZ_API int rz_dataset_users(const rz_dataset* dataset);
RZ_API int rz_dataset_items(const rz_dataset* dataset);
RZ_API int64_t rz_dataset_nnz(const rz_dataset* dataset);
RZ_API const char* rz_dataset_name(const rz_dataset* dataset);
RZ_API const char* rz_dataset_family(const rz_dataset* dataset);
RZ_API void rz_dataset_free(rz_dataset* dataset);

/* ---- splits ---- */

RZ_API rz_status rz_split_leave_last_k(const rz_dataset* dataset, int k_val, int k_test, rz_split** out);
RZ_API rz_status rz_split_global_timestamp(const rz_dataset* dataset, double fraction_test, rz_split** out);
/* Writes train.tsv, validation.tsv and test.tsv into dir. */
RZ_API rz_status rz_split_write(const rz_split* split, const char* dir);
RZ_API rz_status rz_split_read(const char* dir, rz_split** out);
RZ_API void rz_split_sizes(const rz_split* split, int64_t* train, int64_t* validation, int64_t* test);
RZ_API const char* rz_split_family(const rz_split* split);
RZ_API void rz_split_free(rz_split* split);

/* ---- meta-features ---- */

/* Features of the split's training part, stored under dataset_id. */
RZ_API rz_status rz_features_from_split(const rz_split* split, const char* dataset_id, uint64_t seed,
                                        rz_features** out);
/* Features of a whole dataset treated as training data. */
RZ_API rz_status rz_features_from_dataset(const rz_dataset* dataset, const char* dataset_id, uint64_t seed,
                                          rz_features** out);
RZ_API rz_status rz_features_read(const char* path, rz_features** out);
RZ_API rz_status rz_features_write(const rz_features* features, const char* path);
/* Number of datasets in the table. */
RZ_API size_t rz_features_datasets(const rz_features* features);
RZ_API void rz_features_free(rz_features* features);

/* ---- meta-dataset ---- */

RZ_API rz_status rz_metadataset_new(rz_metadataset** out);
/* Reads results.tsv, metafeatures.tsv and datasets.tsv from dir. */
RZ_API rz_status rz_metadataset_load(const char* dir, rz_metadataset** out);
/* Loads dir when it holds a meta-dataset, otherwise returns an empty one. */
RZ_API rz_status rz_metadataset_open(const char* dir, rz_metadataset** out);
RZ_API rz_status rz_metadataset_persist(const rz_metadataset* metadataset, const char* dir);
RZ_API size_t rz_metadataset_records(const rz_metadataset* metadataset);
RZ_API size_t rz_metadataset_datasets(const rz_metadataset* metadataset);
/* Replaces the features of every dataset in `features` and records family. */
RZ_API rz_status rz_metadataset_set_features(rz_metadataset* metadataset, const rz_features* features,
                                             const char* family);
RZ_API void rz_metadataset_free(rz_metadataset* metadataset);

typedef struct rz_sweep_options {
  int max_hp_sets;
  double budget_s;
  uint64_t seed;
  int jobs;
  const char* metrics; /* comma-separated BASE@CUTOFF list; NULL or "": all */
  int early_stopping;
} rz_sweep_options;

RZ_API void rz_sweep_options_init(rz_sweep_options* options);
/* Sweeps each algorithm of the comma-separated list (NULL or "": the whole
 * catalog) on the split. Earlier records of the same (dataset, algorithm)
 * are replaced. */
RZ_API rz_status rz_sweep(rz_metadataset* metadataset, const rz_split* split, const char* dataset_id,
                          const char* family, const char* algorithms, const rz_sweep_options* options,
                          size_t* records_added);

/* ---- meta-model ---- */

typedef struct rz_train_options {
  const char* target; /* BASE@CUTOFF or TRAIN_TIME */
  int n;
  int m;
  const char* regressor; /* knn, linear, gbt-chain, random */
  uint64_t seed;
  int knn_k;
  int trees;
  int depth;
  double learning_rate;
} rz_train_options;

RZ_API void rz_train_options_init(rz_train_options* options);
RZ_API rz_status rz_train(const rz_metadataset* metadataset, const rz_train_options* options, rz_model** out);
/* Trains a TRAIN_TIME model over the algorithms of performance_model, for
 * use with rz_pareto. */
RZ_API rz_status rz_train_time_model(const rz_metadataset* metadataset, const rz_train_options* options,
                                     const rz_model* performance_model, rz_model** out);
RZ_API rz_status rz_model_save(const rz_model* model, const char* path);
/* A missing file yields RZ_NOT_FOUND. */
RZ_API rz_status rz_model_load(const char* path, rz_model** out);
RZ_API void rz_model_free(rz_model* model);

/* One header line and one row:
 * dataset_id algorithm hp_index hyperparameters target predicted */
RZ_API rz_status rz_select(const rz_model* model, const rz_features* features, const char* dataset_id,
                           char** out);
/* Pareto front of predicted performance against predicted training time. */
RZ_API rz_status rz_pareto(const rz_model* performance_model, const rz_model* time_model,
                           const rz_features* features, const char* dataset_id, char** out);

typedef struct rz_loocv_options {
  rz_train_options train;
  int trials;
  int max_train_families; /* 0: all remaining families */
  int jobs;
} rz_loocv_options;

RZ_API void rz_loocv_options_init(rz_loocv_options* options);
/* folds: one row per (trial, family); rows: one row per held-out dataset;
 * summary: quantiles of %Diff and MAE. Any out-parameter may be NULL. */
RZ_API rz_status rz_loocv(const rz_metadataset* metadataset, const rz_loocv_options* options, char** folds,
                          char** rows, char** summary);

/* ---- analysis reports (TSV) ---- */

RZ_API rz_status rz_report_ranks(const rz_metadataset* metadataset, const char* metrics, int min_algorithms,
                                 char** out);
/* hp_filter: "defaults-only" or "best-per-pair". */
RZ_API rz_status rz_report_correlation(const rz_metadataset* metadataset, const char* target, int top_k,
                                       const char* hp_filter, char** out);
RZ_API rz_status rz_report_hardness(const rz_metadataset* metadataset, const char* metric, char** out);
/* algorithm NULL or "": average over all algorithms. */
RZ_API rz_status rz_report_transfer(const rz_metadataset* metadataset, const char* algorithm, const char* metric,
                                    char** out);

#ifdef __cplusplus
}
#endif

#endif /* RECZILLA_RECZILLA_H_ */
