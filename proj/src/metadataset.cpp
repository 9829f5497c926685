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

#include "reczilla/metadataset.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "reczilla/common.hpp"
#include "reczilla/evaluation.hpp"
#include "reczilla/hyperparams.hpp"

namespace reczilla {

namespace {
constexpr std::string_view kSchemaLine = "#schema=reczilla/1";
constexpr std::string_view kResultsHeader =
    "dataset_id\tfamily\talg_name\thp_index\thp_params\tmetric\tcutoff\tvalue\ttrain_time_s\teval_time_s\tstatus";
constexpr std::string_view kDatasetsHeader = "dataset_id\tfamily";
}  // namespace

std::string_view status_name(ExperimentStatus status) {
  switch (status) {
    case ExperimentStatus::ok: return "ok";
    case ExperimentStatus::timeout: return "timeout";
    case ExperimentStatus::fit_error: return "fit_error";
    case ExperimentStatus::resource_error: return "resource_error";
  }
  return "?";
}

ExperimentStatus parse_status(std::string_view text) {
  for (auto s : {ExperimentStatus::ok, ExperimentStatus::timeout, ExperimentStatus::fit_error,
                 ExperimentStatus::resource_error}) {
    if (status_name(s) == text) return s;
  }
  fail(ErrorCode::parse, "unknown experiment status '" + std::string(text) + "'");
}

std::vector<std::string> MetaDataset::dataset_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.dataset_id);
  for (const auto& [id, _] : features) ids.insert(id);
  return {ids.begin(), ids.end()};
}

void MetaDataset::check_consistency() const {
  for (const auto& r : records) {
    if (!features.count(r.dataset_id)) {
      fail(ErrorCode::schema, "dataset " + r.dataset_id + " has records but no meta-features");
    }
    auto it = families.find(r.dataset_id);
    if (it != families.end() && it->second != r.family) {
      fail(ErrorCode::schema, "dataset " + r.dataset_id + " has inconsistent family labels");
    }
  }
}

// ---------------------------------------------------------------------------
// Sweeps

namespace {

ExperimentRecord run_one(const DatasetSplit& split, const std::string& dataset_id, const std::string& family,
                         const std::string& algorithm, int hp_index, const ParamMap& params,
                         const std::vector<MetricSpec>& specs, const SweepOptions& options, double remaining_s) {
  ExperimentRecord rec;
  rec.dataset_id = dataset_id;
  rec.family = family;
  rec.algorithm = algorithm;
  rec.hp_index = hp_index;
  rec.hp_params = serialize_params(params);

  FitOptions fo = options.fit;
  fo.budget_s = remaining_s;
  fo.seed = mix_seed(options.seed, static_cast<std::uint64_t>(hp_index));
  const CsrMatrix& train = split.train.ratings();
  fo.validation = options.early_stopping && split.validation.nnz() > 0 ? &split.validation.ratings() : nullptr;

  const auto start = std::chrono::steady_clock::now();
  try {
    const FittedModel model = fit(algorithm, params, train, fo);
    rec.train_time_s = model.train_time_s();
    const auto eval_start = std::chrono::steady_clock::now();
    rec.metrics = evaluate_model(model, train, split.test.ratings(), specs);
    rec.eval_time_s = seconds_since(eval_start);
    rec.status = ExperimentStatus::ok;
  } catch (const Error& e) {
    rec.metrics.clear();
    rec.train_time_s = seconds_since(start);
    switch (e.code()) {
      case ErrorCode::timeout: rec.status = ExperimentStatus::timeout; break;
      case ErrorCode::resource: rec.status = ExperimentStatus::resource_error; break;
      default: rec.status = ExperimentStatus::fit_error; break;
    }
    warn(algorithm + " hp " + std::to_string(hp_index) + " on " + dataset_id + ": " + e.what());
  }
  return rec;
}

}  // namespace

std::vector<ExperimentRecord> run_sweep(const DatasetSplit& split, const std::string& dataset_id,
                                        const std::string& family, const std::string& algorithm,
                                        const SweepOptions& options) {
  if (options.max_hp_sets < 1) fail(ErrorCode::invalid_argument, "max_hp_sets must be >= 1");
  if (!(options.budget_s > 0)) fail(ErrorCode::invalid_argument, "budget must be positive");
  const AlgorithmInfo& info = find_algorithm(algorithm);
  const std::vector<MetricSpec> specs =
      options.metrics.empty() ? metric_specs(all_base_metrics(), standard_cutoffs()) : options.metrics;
  // Seeded by algorithm only, so hp_index k denotes the same configuration
  // on every dataset.
  const std::vector<ParamMap> sets = sample_hyperparameters(
      info.space, info.space.empty() ? 1 : options.max_hp_sets, mix_seed(options.seed, hash_string(algorithm)));

  const auto start = std::chrono::steady_clock::now();
  auto remaining = [&] { return options.budget_s - seconds_since(start); };

  std::vector<std::optional<ExperimentRecord>> slots(sets.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= sets.size()) return;
      const double left = remaining();
      if (stop.load() || (k > 0 && left <= 0)) return;
      slots[k] = run_one(split, dataset_id, family, algorithm, static_cast<int>(k), sets[k], specs, options,
                         std::max(left, 1e-9));
      if (slots[k]->status == ExperimentStatus::timeout) stop.store(true);
    }
  };
  const int jobs = std::max(1, std::min<int>(options.jobs, static_cast<int>(sets.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  std::vector<ExperimentRecord> out;
  for (auto& s : slots) {
    if (s) out.push_back(std::move(*s));
  }
  return out;
}

double normalize_performance(double value, double p_min, double p_max) {
  if (!(p_min <= p_max)) fail(ErrorCode::invalid_argument, "normalize_performance: p_min > p_max");
  if (value < p_min || value > p_max) {
    fail(ErrorCode::invalid_argument, "normalize_performance: value " + format_double(value) + " outside [" +
                                          format_double(p_min) + ", " + format_double(p_max) + "]");
  }
  if (p_max == p_min) return 100.0;
  return std::clamp(100.0 * ((value - p_min) / (p_max - p_min)), 0.0, 100.0);
}

std::map<std::pair<std::string, std::string>, BestEntry> best_per_pair(const MetaDataset& metadataset,
                                                                       const MetricSpec& metric) {
  bool present = false;
  std::map<std::pair<std::string, std::string>, BestEntry> out;
  for (const auto& r : metadataset.records) {
    if (r.status != ExperimentStatus::ok) continue;
    auto it = r.metrics.find(metric);
    if (it == r.metrics.end()) continue;
    present = true;
    if (std::isnan(it->second)) continue;
    const auto key = std::make_pair(r.dataset_id, r.algorithm);
    auto [pos, inserted] = out.try_emplace(key, BestEntry{it->second, r.hp_index, r.hp_params});
    if (!inserted) {
      BestEntry& b = pos->second;
      if (it->second > b.value || (it->second == b.value && r.hp_index < b.hp_index)) {
        b = BestEntry{it->second, r.hp_index, r.hp_params};
      }
    }
  }
  if (!present && !metadataset.records.empty()) {
    fail(ErrorCode::unknown_metric, "metric " + metric.name() + " not present in the meta-dataset");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence

std::string results_text(const std::vector<ExperimentRecord>& records) {
  std::ostringstream out;
  out << kSchemaLine << '\n' << kResultsHeader << '\n';
  for (const auto& r : records) {
    const std::string prefix = r.dataset_id + '\t' + r.family + '\t' + r.algorithm + '\t' +
                               std::to_string(r.hp_index) + '\t' + (r.hp_params.empty() ? "-" : r.hp_params) + '\t';
    const std::string suffix = '\t' + format_double(r.train_time_s) + '\t' + format_double(r.eval_time_s) + '\t' +
                               std::string(status_name(r.status)) + '\n';
    if (r.metrics.empty()) {
      out << prefix << "-\t-\t" << kNaToken << suffix;
      continue;
    }
    for (const auto& [spec, value] : r.metrics) {
      out << prefix << base_metric_name(spec.base) << '\t' << spec.cutoff << '\t' << format_value(value) << suffix;
    }
  }
  return out.str();
}

namespace {

void expect_schema(std::istream& in, const std::string& what) {
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kSchemaLine) {
    const std::string found = line.rfind("#schema=", 0) == 0 ? line.substr(8) : line;
    fail(ErrorCode::schema, what + ": expected schema version reczilla/1, found '" + found + "'");
  }
}

// Yields the data rows after the header, skipping comment lines.
std::vector<std::vector<std::string>> data_rows(std::istream& in, std::string_view header, std::size_t fields,
                                                const std::string& what) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      if (line != header) fail(ErrorCode::parse, what + ": unexpected header");
      header_seen = true;
      continue;
    }
    auto f = split(line, '\t');
    if (f.size() != fields) {
      fail(ErrorCode::parse, what + " line " + std::to_string(line_no) + ": expected " + std::to_string(fields) +
                                 " fields, found " + std::to_string(f.size()));
    }
    rows.push_back(std::move(f));
  }
  return rows;
}

int parse_int_field(const std::string& text, const std::string& what) {
  auto v = try_parse_int(text);
  if (!v) fail(ErrorCode::parse, what + ": bad integer '" + text + "'");
  return static_cast<int>(*v);
}

}  // namespace

std::vector<ExperimentRecord> parse_results_text(const std::string& text) {
  std::istringstream in(text);
  expect_schema(in, "results");
  std::vector<ExperimentRecord> records;
  bool open = false;
  for (const auto& f : data_rows(in, kResultsHeader, 11, "results")) {
    ExperimentRecord r;
    r.dataset_id = f[0];
    r.family = f[1];
    r.algorithm = f[2];
    r.hp_index = parse_int_field(f[3], "results hp_index");
    r.hp_params = f[4] == "-" ? "" : f[4];
    r.train_time_s = parse_double(f[8]);
    r.eval_time_s = parse_double(f[9]);
    r.status = parse_status(f[10]);
    const bool has_metric = f[5] != "-";
    std::optional<MetricSpec> spec;
    if (has_metric) spec = parse_metric_spec(f[5] + "@" + f[6], true);

    ExperimentRecord* last = records.empty() ? nullptr : &records.back();
    const bool same = open && last && has_metric && last->dataset_id == r.dataset_id && last->family == r.family &&
                      last->algorithm == r.algorithm && last->hp_index == r.hp_index &&
                      last->hp_params == r.hp_params && last->status == r.status &&
                      std::bit_cast<std::uint64_t>(last->train_time_s) == std::bit_cast<std::uint64_t>(r.train_time_s) &&
                      std::bit_cast<std::uint64_t>(last->eval_time_s) == std::bit_cast<std::uint64_t>(r.eval_time_s) &&
                      !last->metrics.count(*spec);
    if (!same) {
      records.push_back(std::move(r));
      last = &records.back();
    }
    if (has_metric) last->metrics[*spec] = parse_double(f[7]);
    open = has_metric;
  }
  return records;
}

void persist(const MetaDataset& metadataset, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::io, "cannot create " + dir.string() + ": " + ec.message());
  write_text_file(dir / "results.tsv", results_text(metadataset.records));
  write_metafeatures(dir / "metafeatures.tsv", metadataset.features);
  std::ostringstream ds;
  ds << kSchemaLine << '\n' << kDatasetsHeader << '\n';
  for (const auto& [id, family] : metadataset.families) ds << id << '\t' << family << '\n';
  write_text_file(dir / "datasets.tsv", ds.str());
}

MetaDataset load(const std::filesystem::path& dir) {
  MetaDataset md;
  md.records = parse_results_text(read_text_file(dir / "results.tsv"));
  md.features = read_metafeatures(dir / "metafeatures.tsv");
  std::istringstream in(read_text_file(dir / "datasets.tsv"));
  expect_schema(in, "datasets");
  for (const auto& f : data_rows(in, kDatasetsHeader, 2, "datasets")) md.families[f[0]] = f[1];
  return md;
}

namespace {

bool same_bits(double a, double b) { return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b); }

bool identical_records(const ExperimentRecord& a, const ExperimentRecord& b) {
  if (a.dataset_id != b.dataset_id || a.family != b.family || a.algorithm != b.algorithm ||
      a.hp_index != b.hp_index || a.hp_params != b.hp_params || a.status != b.status ||
      !same_bits(a.train_time_s, b.train_time_s) || !same_bits(a.eval_time_s, b.eval_time_s) ||
      a.metrics.size() != b.metrics.size()) {
    return false;
  }
  return std::equal(a.metrics.begin(), a.metrics.end(), b.metrics.begin(), [](const auto& x, const auto& y) {
    return x.first == y.first && same_bits(x.second, y.second);
  });
}

}  // namespace

bool identical(const MetaDataset& a, const MetaDataset& b) {
  if (a.families != b.families || a.records.size() != b.records.size() || a.features.size() != b.features.size()) {
    return false;
  }
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    if (!identical_records(a.records[k], b.records[k])) return false;
  }
  for (auto ia = a.features.begin(), ib = b.features.begin(); ia != a.features.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.size() != ib->second.size()) return false;
    for (std::size_t k = 0; k < ia->second.size(); ++k) {
      if (ia->second[k].first != ib->second[k].first || !same_bits(ia->second[k].second, ib->second[k].second)) {
        return false;
      }
    }
  }
  return true;
}

}  // namespace reczilla
