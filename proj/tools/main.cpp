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

// reczilla command-line tool. Uses only the C interface of the library.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "reczilla/reczilla.h"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUnknownMetric = 2;
constexpr int kExitMissingModel = 3;

struct Failure {
  std::string code;
  std::string message;
  int exit_code = kExitFailure;
};

int exit_code_for(rz_status status) { return status == RZ_UNKNOWN_METRIC ? kExitUnknownMetric : kExitFailure; }

void check(rz_status status) {
  if (status != RZ_OK) throw Failure{rz_status_name(status), rz_last_error(), exit_code_for(status)};
}

[[noreturn]] void usage(const std::string& message) { throw Failure{"usage", message, kExitFailure}; }

// Owning wrappers for library handles and strings.
template <typename T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<rz_dataset, Deleter<rz_dataset, rz_dataset_free>>;
using Split = std::unique_ptr<rz_split, Deleter<rz_split, rz_split_free>>;
using Features = std::unique_ptr<rz_features, Deleter<rz_features, rz_features_free>>;
using MetaDataset = std::unique_ptr<rz_metadataset, Deleter<rz_metadataset, rz_metadataset_free>>;
using Model = std::unique_ptr<rz_model, Deleter<rz_model, rz_model_free>>;

std::string take(char* text) {
  std::string out = text != nullptr ? text : "";
  rz_free(text);
  return out;
}

std::string generated_line() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &utc);
  return std::string("#generated=") + buf + "\n";
}

// Empty path: stdout.
void write_output(const std::string& path, const std::string& text, bool stamp = false) {
  const std::string body = stamp ? generated_line() + text : text;
  if (path.empty() || path == "-") {
    std::cout << body;
    return;
  }
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << body;
  if (!out) throw Failure{"io", "cannot write " + path, kExitFailure};
}

void need(const std::string& value, const std::string& flag) {
  if (value.empty()) usage(flag + " is required");
}

Model load_model(const std::string& path) {
  rz_model* m = nullptr;
  const rz_status s = rz_model_load(path.c_str(), &m);
  if (s == RZ_NOT_FOUND) throw Failure{rz_status_name(s), rz_last_error(), kExitMissingModel};
  check(s);
  return Model(m);
}

MetaDataset load_results(const std::string& dir) {
  rz_metadataset* md = nullptr;
  check(rz_metadataset_load(dir.c_str(), &md));
  return MetaDataset(md);
}

std::string default_id(const std::string& dir) {
  std::filesystem::path p(dir);
  if (!p.has_filename()) p = p.parent_path();
  return p.filename().string();
}

// Flat `key = value` file; blank lines and lines starting with # or ; are
// ignored.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Failure{"io", "cannot read config file " + path, kExitFailure};
  std::map<std::string, std::string> out;
  std::string line;
  int number = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Failure{"parse", path + ":" + std::to_string(number) + ": expected key = value", kExitFailure};
    }
    std::string value = trim(t.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[trim(t.substr(0, eq))] = value;
  }
  return out;
}

// Fills options not given on the command line. Keys of other subcommands are
// ignored; keys known to no subcommand are an error.
void apply_config(const CLI::App& app, CLI::App* sub, const std::map<std::string, std::string>& config) {
  for (const auto& [key, value] : config) {
    CLI::Option* opt = nullptr;
    for (CLI::Option* o : sub->get_options()) {
      if (o->check_lname(key)) opt = o;
    }
    if (opt == nullptr) {
      bool known = false;
      for (const CLI::App* other : app.get_subcommands({})) {
        for (const CLI::Option* o : other->get_options()) known = known || o->check_lname(key);
      }
      if (!known) usage("unknown config key '" + key + "'");
      continue;
    }
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

void apply_env_seed(CLI::App* sub) {
  const char* env = std::getenv("RECZILLA_SEED");
  if (env == nullptr || *env == '\0') return;
  for (CLI::Option* o : sub->get_options()) {
    if (o->check_lname("seed") && o->count() == 0) {
      o->add_result(env);
      o->run_callback();
    }
  }
}

struct TrainFlags {
  std::string metric = "PRECISION@10";
  int n = 10;
  int m = 10;
  std::string regressor = "knn";
  std::uint64_t seed = 0;
  int knn_k = 5;
  int trees = 200;
  int depth = 3;
  double learning_rate = 0.1;

  void add(CLI::App* sub) {
    sub->add_option("--metric", metric, "Target: BASE@CUTOFF or TRAIN_TIME")->capture_default_str();
    sub->add_option("--n", n, "Number of parameterized algorithms to predict")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--m", m, "Number of meta-features to select")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sub->add_option("--regressor", regressor, "Meta-learner: knn, linear, gbt-chain or random")
        ->capture_default_str()
        ->check(CLI::IsMember({"knn", "linear", "gbt-chain", "random"}));
    sub->add_option("--seed", seed, "Random seed (RECZILLA_SEED overrides the default)")->capture_default_str();
    sub->add_option("--knn-k", knn_k, "Neighbours of the knn meta-learner")->capture_default_str();
    sub->add_option("--trees", trees, "Trees per output of the gbt-chain meta-learner")->capture_default_str();
    sub->add_option("--depth", depth, "Tree depth of the gbt-chain meta-learner")->capture_default_str();
    sub->add_option("--learning-rate", learning_rate, "Shrinkage of the gbt-chain meta-learner")
        ->capture_default_str();
  }

  rz_train_options options() const {
    rz_train_options o;
    rz_train_options_init(&o);
    o.target = metric.c_str();
    o.n = n;
    o.m = m;
    o.regressor = regressor.c_str();
    o.seed = seed;
    o.knn_k = knn_k;
    o.trees = trees;
    o.depth = depth;
    o.learning_rate = learning_rate;
    return o;
  }
};

// Features for select: from a features file, a split directory or a dataset
// file, in that order of preference.
Features query_features(const std::string& features_path, const std::string& split_dir,
                        const std::string& dataset_path, const std::string& dataset_id, std::uint64_t seed) {
  rz_features* f = nullptr;
  if (!features_path.empty()) {
    check(rz_features_read(features_path.c_str(), &f));
  } else if (!split_dir.empty()) {
    rz_split* s = nullptr;
    check(rz_split_read(split_dir.c_str(), &s));
    Split split(s);
    const std::string id = dataset_id.empty() ? default_id(split_dir) : dataset_id;
    check(rz_features_from_split(split.get(), id.c_str(), seed, &f));
  } else if (!dataset_path.empty()) {
    rz_dataset* d = nullptr;
    check(rz_dataset_read(dataset_path.c_str(), &d));
    Dataset dataset(d);
    check(rz_features_from_dataset(dataset.get(), dataset_id.empty() ? nullptr : dataset_id.c_str(), seed, &f));
  } else {
    usage("one of --dataset, --split or --features is required");
  }
  return Features(f);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Algorithm selection for recommender systems."};
  app.set_version_flag("--version", rz_version());
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "Flat key = value file supplying defaults for subcommand flags");

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a delimited interaction file to the canonical format");
  std::string in_input, in_output, in_delimiter = ",", in_header = "auto", in_name, in_family;
  bool in_implicit = false;
  ingest->add_option("--input", in_input, "Raw user,item[,rating[,timestamp]] file (required)");
  ingest->add_option("--output", in_output, "Canonical dataset file to write (required)");
  ingest->add_option("--delimiter", in_delimiter, "Field delimiter; 'tab' for a tab")->capture_default_str();
  ingest->add_option("--header", in_header, "Header line: auto, yes or no")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "yes", "no"}));
  ingest->add_flag("--implicit", in_implicit, "Store every interaction with rating 1");
  ingest->add_option("--name", in_name, "Dataset name (default: input file stem)");
  ingest->add_option("--family", in_family, "Dataset family (default: the name)");

  // split
  auto* split_cmd = app.add_subcommand("split", "Split a canonical dataset into train, validation and test");
  std::string sp_dataset, sp_output, sp_scheme = "leave-last-k";
  int sp_k_val = 1, sp_k_test = 1;
  double sp_fraction = 0.2;
  split_cmd->add_option("--dataset", sp_dataset, "Canonical dataset file (required)");
  split_cmd->add_option("--output", sp_output, "Directory receiving train.tsv, validation.tsv, test.tsv (required)");
  split_cmd->add_option("--scheme", sp_scheme, "leave-last-k or global-timestamp")
      ->capture_default_str()
      ->check(CLI::IsMember({"leave-last-k", "global-timestamp"}));
  split_cmd->add_option("--k-val", sp_k_val, "Validation interactions per user (leave-last-k)")->capture_default_str();
  split_cmd->add_option("--k-test", sp_k_test, "Test interactions per user (leave-last-k)")->capture_default_str();
  split_cmd->add_option("--fraction-test", sp_fraction, "Test fraction (global-timestamp)")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic canonical dataset");
  rz_synth_options sy;
  rz_synth_options_init(&sy);
  std::string sy_output, sy_name = "synthetic", sy_family;
  synth->add_option("--output", sy_output, "Canonical dataset file to write (required)");
  synth->add_option("--users", sy.users, "Number of users")->capture_default_str();
  synth->add_option("--items", sy.items, "Number of items")->capture_default_str();
  synth->add_option("--nnz", sy.nnz, "Number of interactions")->capture_default_str();
  synth->add_option("--popularity-skew", sy.popularity_skew, "Zipf exponent of item popularity")
      ->capture_default_str();
  synth->add_option("--user-skew", sy.user_skew, "Zipf exponent of user activity")->capture_default_str();
  synth->add_option("--rating-scale", sy.rating_scale, "Largest rating; 1 for implicit feedback")
      ->capture_default_str();
  synth->add_option("--latent-rank", sy.latent_rank, "Rank of the planted preference structure")
      ->capture_default_str();
  synth->add_option("--latent-strength", sy.latent_strength, "Weight of the planted preference structure")
      ->capture_default_str();
  synth->add_option("--seed", sy.seed, "Random seed (RECZILLA_SEED overrides the default)")->capture_default_str();
  synth->add_option("--name", sy_name, "Dataset name")->capture_default_str();
  synth->add_option("--family", sy_family, "Dataset family (default: the name)");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run hyperparameter sweeps and add the results to a meta-dataset");
  rz_sweep_options sw;
  rz_sweep_options_init(&sw);
  std::string sw_split, sw_results, sw_id, sw_family, sw_algorithms, sw_metrics;
  bool sw_no_early = false;
  sweep->add_option("--split", sw_split, "Split directory (required)");
  sweep->add_option("--results", sw_results, "Meta-dataset directory, created when absent (required)");
  sweep->add_option("--dataset-id", sw_id, "Dataset id (default: split directory name)");
  sweep->add_option("--family", sw_family, "Dataset family (default: from the split)");
  sweep->add_option("--algorithms", sw_algorithms, "Comma-separated algorithm names (default: whole catalog)");
  sweep->add_option("--max-hp-sets", sw.max_hp_sets, "Hyperparameter sets per algorithm")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--budget", sw.budget_s, "Seconds per (algorithm, dataset) sweep")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  sweep->add_option("--seed", sw.seed, "Random seed (RECZILLA_SEED overrides the default)")->capture_default_str();
  sweep->add_option("--jobs", sw.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  sweep->add_option("--metrics", sw_metrics, "Comma-separated BASE@CUTOFF list (default: all)");
  sweep->add_flag("--no-early-stopping", sw_no_early, "Ignore the validation part during training");

  // metafeatures
  auto* mf = app.add_subcommand("metafeatures", "Compute dataset meta-features");
  std::string mf_split, mf_dataset, mf_id, mf_family, mf_results, mf_output;
  std::uint64_t mf_seed = 0;
  mf->add_option("--split", mf_split, "Split directory; features of its training part");
  mf->add_option("--dataset", mf_dataset, "Canonical dataset file, used whole");
  mf->add_option("--dataset-id", mf_id, "Dataset id (default: split directory name or dataset name)");
  mf->add_option("--family", mf_family, "Dataset family (default: from the input)");
  mf->add_option("--results", mf_results, "Meta-dataset directory to store the features in");
  mf->add_option("--output", mf_output, "Meta-feature file to write");
  mf->add_option("--seed", mf_seed, "Landmark subsample seed (RECZILLA_SEED overrides the default)")
      ->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a meta-model");
  TrainFlags tr;
  std::string tr_results, tr_model, tr_time_model;
  bool tr_pareto = false;
  train->add_option("--results", tr_results, "Meta-dataset directory (required)");
  train->add_option("--model", tr_model, "Model file to write (required)");
  tr.add(train);
  train->add_flag("--pareto", tr_pareto, "Also train a TRAIN_TIME model for performance/time trade-offs");
  train->add_option("--time-model", tr_time_model, "TRAIN_TIME model file (default: <model>.time)");

  // select
  auto* select = app.add_subcommand("select", "Predict the best algorithm for a dataset");
  std::string se_model, se_dataset, se_split, se_features, se_id, se_time_model, se_output;
  std::uint64_t se_seed = 0;
  bool se_pareto = false;
  select->add_option("--model", se_model, "Model file (required)");
  select->add_option("--dataset", se_dataset, "Canonical dataset file, used whole as training data");
  select->add_option("--split", se_split, "Split directory; features of its training part");
  select->add_option("--features", se_features, "Precomputed meta-feature file");
  select->add_option("--dataset-id", se_id, "Dataset id within the features");
  select->add_option("--seed", se_seed, "Landmark subsample seed (RECZILLA_SEED overrides the default)")
      ->capture_default_str();
  select->add_flag("--pareto", se_pareto, "Print the predicted performance/time Pareto front");
  select->add_option("--time-model", se_time_model, "TRAIN_TIME model file (default: <model>.time)");
  select->add_option("--output", se_output, "Output file (default: stdout)");

  // loocv
  auto* cv = app.add_subcommand("loocv", "Leave-one-family-out evaluation of the meta-learner");
  TrainFlags cvt;
  std::string cv_results, cv_output, cv_rows, cv_summary;
  int cv_trials = 1, cv_max_fams = 0, cv_jobs = 1;
  cv->add_option("--results", cv_results, "Meta-dataset directory (required)");
  cvt.add(cv);
  cv->add_option("--trials", cv_trials, "Trials per held-out family")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cv->add_option("--max-train-families", cv_max_fams, "Train on this many random families per trial (0: all)")
      ->capture_default_str();
  cv->add_option("--jobs", cv_jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  cv->add_option("--output", cv_output, "Per-fold %Diff table (default: stdout)");
  cv->add_option("--rows-output", cv_rows, "Per-dataset table");
  cv->add_option("--summary-output", cv_summary, "Quantile summary table");

  // analyze
  auto* an = app.add_subcommand("analyze", "Study reports over a meta-dataset");
  std::string an_results, an_report = "ranks", an_metrics = "PRECISION@10", an_metric = "PRECISION@10",
                          an_target = "PRECISION@10", an_hp_filter = "defaults-only", an_algorithm, an_output;
  int an_min_algorithms = 2, an_top_k = 20;
  an->add_option("--results", an_results, "Meta-dataset directory (required)");
  an->add_option("--report", an_report, "ranks, correlation, hardness or transfer")
      ->capture_default_str()
      ->check(CLI::IsMember({"ranks", "correlation", "hardness", "transfer"}));
  an->add_option("--metrics", an_metrics, "Comma-separated BASE@CUTOFF list (ranks)")->capture_default_str();
  an->add_option("--metric", an_metric, "BASE@CUTOFF (hardness, transfer)")->capture_default_str();
  an->add_option("--target", an_target, "BASE@CUTOFF or TRAIN_TIME (correlation)")->capture_default_str();
  an->add_option("--min-algorithms", an_min_algorithms, "Minimum participants per dataset (ranks)")
      ->capture_default_str();
  an->add_option("--top-k", an_top_k, "Rows to report (correlation)")->capture_default_str();
  an->add_option("--hp-filter", an_hp_filter, "defaults-only or best-per-pair (correlation)")
      ->capture_default_str()
      ->check(CLI::IsMember({"defaults-only", "best-per-pair"}));
  an->add_option("--algorithm", an_algorithm, "Algorithm (transfer; default: average over all)");
  an->add_option("--output", an_output, "Output file (default: stdout)");

  // catalog
  auto* cat = app.add_subcommand("catalog", "List algorithms and their hyperparameter spaces");
  std::string cat_output;
  cat->add_option("--output", cat_output, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: code=usage message=" << e.what() << '\n';
    return kExitFailure;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!config_path.empty()) apply_config(app, sub, read_config(config_path));
    apply_env_seed(sub);

    if (sub == ingest) {
      need(in_input, "--input");
      need(in_output, "--output");
      rz_ingest_options o;
      rz_ingest_options_init(&o);
      if (in_delimiter == "tab" || in_delimiter == "\\t") in_delimiter = "\t";
      if (in_delimiter.size() != 1) usage("--delimiter must be a single character");
      o.delimiter = in_delimiter[0];
      o.header = in_header == "auto" ? -1 : (in_header == "yes" ? 1 : 0);
      o.implicit = in_implicit ? 1 : 0;
      o.name = in_name.empty() ? nullptr : in_name.c_str();
      o.family = in_family.empty() ? nullptr : in_family.c_str();
      rz_dataset* d = nullptr;
      check(rz_dataset_ingest(in_input.c_str(), &o, &d));
      Dataset dataset(d);
      check(rz_dataset_write(dataset.get(), in_output.c_str()));
      std::cout << "users=" << rz_dataset_users(d) << " items=" << rz_dataset_items(d) << " nnz=" << rz_dataset_nnz(d)
                << '\n';
    } else if (sub == split_cmd) {
      need(sp_dataset, "--dataset");
      need(sp_output, "--output");
      rz_dataset* d = nullptr;
      check(rz_dataset_read(sp_dataset.c_str(), &d));
      Dataset dataset(d);
      rz_split* s = nullptr;
      if (sp_scheme == "leave-last-k") {
        check(rz_split_leave_last_k(d, sp_k_val, sp_k_test, &s));
      } else {
        check(rz_split_global_timestamp(d, sp_fraction, &s));
      }
      Split split(s);
      check(rz_split_write(s, sp_output.c_str()));
      std::int64_t a = 0, b = 0, c = 0;
      rz_split_sizes(s, &a, &b, &c);
      std::cout << "train=" << a << " validation=" << b << " test=" << c << '\n';
    } else if (sub == synth) {
      need(sy_output, "--output");
      sy.name = sy_name.c_str();
      sy.family = sy_family.empty() ? nullptr : sy_family.c_str();
      rz_dataset* d = nullptr;
      check(rz_dataset_synthesize(&sy, &d));
      Dataset dataset(d);
      check(rz_dataset_write(d, sy_output.c_str()));
      std::cout << "users=" << rz_dataset_users(d) << " items=" << rz_dataset_items(d) << " nnz=" << rz_dataset_nnz(d)
                << '\n';
    } else if (sub == sweep) {
      need(sw_split, "--split");
      need(sw_results, "--results");
      rz_split* s = nullptr;
      check(rz_split_read(sw_split.c_str(), &s));
      Split split(s);
      rz_metadataset* md = nullptr;
      check(rz_metadataset_open(sw_results.c_str(), &md));
      MetaDataset metadataset(md);
      sw.metrics = sw_metrics.c_str();
      sw.early_stopping = sw_no_early ? 0 : 1;
      const std::string id = sw_id.empty() ? default_id(sw_split) : sw_id;
      std::size_t added = 0;
      check(rz_sweep(md, s, id.c_str(), sw_family.empty() ? nullptr : sw_family.c_str(), sw_algorithms.c_str(), &sw,
                     &added));
      check(rz_metadataset_persist(md, sw_results.c_str()));
      std::cout << "dataset=" << id << " records=" << added << '\n';
    } else if (sub == mf) {
      if (mf_split.empty() == mf_dataset.empty()) usage("exactly one of --split or --dataset is required");
      if (mf_results.empty() && mf_output.empty()) usage("--results or --output is required");
      rz_features* f = nullptr;
      std::string family = mf_family;
      if (!mf_split.empty()) {
        rz_split* s = nullptr;
        check(rz_split_read(mf_split.c_str(), &s));
        Split split(s);
        const std::string id = mf_id.empty() ? default_id(mf_split) : mf_id;
        check(rz_features_from_split(s, id.c_str(), mf_seed, &f));
        if (family.empty()) family = rz_split_family(s);
      } else {
        rz_dataset* d = nullptr;
        check(rz_dataset_read(mf_dataset.c_str(), &d));
        Dataset dataset(d);
        check(rz_features_from_dataset(d, mf_id.empty() ? nullptr : mf_id.c_str(), mf_seed, &f));
        if (family.empty()) family = rz_dataset_family(d);
      }
      Features features(f);
      if (!mf_output.empty()) check(rz_features_write(f, mf_output.c_str()));
      if (!mf_results.empty()) {
        rz_metadataset* md = nullptr;
        check(rz_metadataset_open(mf_results.c_str(), &md));
        MetaDataset metadataset(md);
        check(rz_metadataset_set_features(md, f, family.c_str()));
        check(rz_metadataset_persist(md, mf_results.c_str()));
      }
    } else if (sub == train) {
      need(tr_results, "--results");
      need(tr_model, "--model");
      check(rz_check_target(tr.metric.c_str()));
      MetaDataset md = load_results(tr_results);
      const rz_train_options o = tr.options();
      rz_model* m = nullptr;
      check(rz_train(md.get(), &o, &m));
      Model model(m);
      check(rz_model_save(m, tr_model.c_str()));
      if (tr_pareto) {
        rz_model* tm = nullptr;
        check(rz_train_time_model(md.get(), &o, m, &tm));
        Model time_model(tm);
        const std::string path = tr_time_model.empty() ? tr_model + ".time" : tr_time_model;
        check(rz_model_save(tm, path.c_str()));
      }
    } else if (sub == select) {
      need(se_model, "--model");
      Model model = load_model(se_model);
      Features f = query_features(se_features, se_split, se_dataset, se_id, se_seed);
      const char* id = se_id.empty() ? nullptr : se_id.c_str();
      char* text = nullptr;
      if (se_pareto) {
        Model time_model = load_model(se_time_model.empty() ? se_model + ".time" : se_time_model);
        check(rz_pareto(model.get(), time_model.get(), f.get(), id, &text));
      } else {
        check(rz_select(model.get(), f.get(), id, &text));
      }
      write_output(se_output, take(text));
    } else if (sub == cv) {
      need(cv_results, "--results");
      check(rz_check_target(cvt.metric.c_str()));
      MetaDataset md = load_results(cv_results);
      rz_loocv_options o;
      rz_loocv_options_init(&o);
      o.train = cvt.options();
      o.trials = cv_trials;
      o.max_train_families = cv_max_fams;
      o.jobs = cv_jobs;
      char *folds = nullptr, *rows = nullptr, *summary = nullptr;
      check(rz_loocv(md.get(), &o, &folds, &rows, &summary));
      const std::string f = take(folds), r = take(rows), s = take(summary);
      write_output(cv_output, f, true);
      if (!cv_rows.empty()) write_output(cv_rows, r, true);
      if (!cv_summary.empty()) write_output(cv_summary, s, true);
    } else if (sub == an) {
      need(an_results, "--results");
      MetaDataset md = load_results(an_results);
      char* text = nullptr;
      if (an_report == "ranks") {
        check(rz_report_ranks(md.get(), an_metrics.c_str(), an_min_algorithms, &text));
      } else if (an_report == "correlation") {
        check(rz_report_correlation(md.get(), an_target.c_str(), an_top_k, an_hp_filter.c_str(), &text));
      } else if (an_report == "hardness") {
        check(rz_report_hardness(md.get(), an_metric.c_str(), &text));
      } else {
        check(rz_report_transfer(md.get(), an_algorithm.c_str(), an_metric.c_str(), &text));
      }
      write_output(an_output, take(text), true);
    } else if (sub == cat) {
      char* text = nullptr;
      check(rz_catalog_text(&text));
      write_output(cat_output, take(text));
    }
  } catch (const Failure& f) {
    std::string message = f.message;
    for (char& c : message) {
      if (c == '\n' || c == '\r') c = ' ';
    }
    std::cerr << "error: code=" << f.code << " message=" << message << '\n';
    return f.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: code=internal message=" << e.what() << '\n';
    return kExitFailure;
  }
  return 0;
}
