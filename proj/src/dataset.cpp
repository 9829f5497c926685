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

#include "reczilla/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "reczilla/common.hpp"

namespace reczilla {

// ---------------------------------------------------------------------------
// IdMap

int IdMap::intern(const std::string& id) {
  auto [it, inserted] = index_.try_emplace(id, static_cast<int>(ids_.size()));
  if (inserted) ids_.push_back(id);
  return it->second;
}

std::optional<int> IdMap::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

IdMap IdMap::sequential(int n, const std::string& prefix) {
  IdMap map;
  for (int i = 0; i < n; ++i) map.intern(prefix + std::to_string(i));
  return map;
}

// ---------------------------------------------------------------------------
// InteractionDataset

InteractionDataset InteractionDataset::build(std::string name, std::string family, IdMap users,
                                             IdMap items, std::vector<Interaction> interactions,
                                             bool has_timestamps) {
  std::sort(interactions.begin(), interactions.end(), [](const Interaction& a, const Interaction& b) {
    return a.user != b.user ? a.user < b.user : a.item < b.item;
  });
  InteractionDataset ds;
  ds.name_ = std::move(name);
  ds.family_ = std::move(family);
  ds.users_ = std::move(users);
  ds.items_ = std::move(items);
  ds.has_timestamps_ = has_timestamps;

  const int n_users = ds.users_.size();
  const int n_items = ds.items_.size();
  std::vector<int> indptr(static_cast<std::size_t>(n_users) + 1, 0);
  std::vector<int> indices;
  std::vector<double> values;
  indices.reserve(interactions.size());
  values.reserve(interactions.size());
  ds.sequence_.reserve(interactions.size());
  if (has_timestamps) ds.timestamps_.reserve(interactions.size());
  for (std::size_t k = 0; k < interactions.size(); ++k) {
    const Interaction& x = interactions[k];
    if (x.user < 0 || x.user >= n_users || x.item < 0 || x.item >= n_items) {
      fail(ErrorCode::invalid_argument, "interaction index out of range");
    }
    if (!std::isfinite(x.rating)) fail(ErrorCode::invalid_argument, "non-finite rating");
    if (k > 0 && interactions[k - 1].user == x.user && interactions[k - 1].item == x.item) {
      fail(ErrorCode::invalid_argument, "duplicate (user, item) pair");
    }
    indptr[static_cast<std::size_t>(x.user) + 1]++;
    indices.push_back(x.item);
    values.push_back(x.rating);
    ds.sequence_.push_back(x.sequence);
    if (has_timestamps) ds.timestamps_.push_back(x.timestamp);
  }
  std::partial_sum(indptr.begin(), indptr.end(), indptr.begin());
  ds.ratings_ = CsrMatrix::from_arrays(n_users, n_items, std::move(indptr), std::move(indices),
                                       std::move(values));
  return ds;
}

double InteractionDataset::sparsity() const {
  const double cells = static_cast<double>(num_users()) * static_cast<double>(num_items());
  return cells > 0 ? 1.0 - static_cast<double>(nnz()) / cells : 0.0;
}

std::vector<Interaction> InteractionDataset::interactions() const {
  std::vector<Interaction> out;
  out.reserve(static_cast<std::size_t>(nnz()));
  for (int u = 0; u < num_users(); ++u) {
    auto idx = ratings_.row_indices(u);
    auto val = ratings_.row_values(u);
    const int base = ratings_.row_begin(u);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const std::size_t pos = static_cast<std::size_t>(base) + k;
      out.push_back({u, idx[k], val[k], has_timestamps_ ? timestamps_[pos] : 0, sequence_[pos]});
    }
  }
  return out;
}

InteractionDataset InteractionDataset::with_interactions(std::vector<Interaction> interactions,
                                                         std::string name_suffix) const {
  return build(name_ + name_suffix, family_, users_, items_, std::move(interactions),
               has_timestamps_);
}

// ---------------------------------------------------------------------------
// Ingestion

namespace {

struct RawRow {
  std::string user;
  std::string item;
  double rating;
  std::optional<std::int64_t> timestamp;
};

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

}  // namespace

InteractionDataset ingest_text(const std::string& text, const IngestOptions& options) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  bool first_content_line = true;
  int expected_columns = 0;

  IdMap users;
  IdMap items;
  std::vector<Interaction> entries;
  std::map<std::pair<int, int>, std::size_t> position;
  std::int64_t ordinal = 0;

  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;
    std::vector<std::string> fields = split(view, options.delimiter);
    for (auto& f : fields) f = std::string(trim(f));

    if (first_content_line) {
      first_content_line = false;
      bool is_header = false;
      if (options.header.has_value()) {
        is_header = *options.header;
      } else {
        is_header = fields.size() >= 3 && !try_parse_double(fields[2]).has_value();
      }
      if (is_header) continue;
    }
    if (fields.size() != 3 && fields.size() != 4) {
      fail(ErrorCode::parse, line_error(line_no, "expected 3 or 4 fields, found " +
                                                     std::to_string(fields.size())));
    }
    if (expected_columns == 0) expected_columns = static_cast<int>(fields.size());
    if (static_cast<int>(fields.size()) != expected_columns) {
      fail(ErrorCode::parse, line_error(line_no, "expected " + std::to_string(expected_columns) +
                                                     " fields, found " +
                                                     std::to_string(fields.size())));
    }
    if (fields[0].empty() || fields[1].empty()) {
      fail(ErrorCode::parse, line_error(line_no, "empty user or item identifier"));
    }
    auto rating = try_parse_double(fields[2]);
    if (!rating || !std::isfinite(*rating)) {
      fail(ErrorCode::parse, line_error(line_no, "invalid rating '" + fields[2] + "'"));
    }
    std::int64_t timestamp = 0;
    if (expected_columns == 4) {
      auto ts = try_parse_int(fields[3]);
      if (!ts) fail(ErrorCode::parse, line_error(line_no, "invalid timestamp '" + fields[3] + "'"));
      timestamp = *ts;
    }
    const int u = users.intern(fields[0]);
    const int i = items.intern(fields[1]);
    Interaction x{u, i, options.implicit ? 1.0 : *rating, timestamp, ordinal++};
    auto [it, inserted] = position.try_emplace({u, i}, entries.size());
    if (inserted) {
      entries.push_back(x);
    } else {
      Interaction& old = entries[it->second];
      // Later occurrence wins unless it carries an older timestamp.
      if (expected_columns != 4 || x.timestamp >= old.timestamp) old = x;
    }
  }
  if (entries.empty()) fail(ErrorCode::empty_dataset, "dataset contains no interactions");
  return InteractionDataset::build(options.name, options.family, std::move(users), std::move(items),
                                   std::move(entries), expected_columns == 4);
}

InteractionDataset ingest(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  IngestOptions opts = options;
  if (opts.name.empty()) opts.name = path.stem().string();
  if (opts.family.empty()) opts.family = opts.name;
  return ingest_text(buffer.str(), opts);
}

// ---------------------------------------------------------------------------
// Canonical interchange format

std::string canonical_text(const InteractionDataset& dataset) {
  std::vector<Interaction> rows = dataset.interactions();
  const bool ts = dataset.has_timestamps();
  std::stable_sort(rows.begin(), rows.end(), [ts](const Interaction& a, const Interaction& b) {
    if (a.user != b.user) return a.user < b.user;
    const std::int64_t ta = ts ? a.timestamp : a.sequence;
    const std::int64_t tb = ts ? b.timestamp : b.sequence;
    if (ta != tb) return ta < tb;
    return a.item < b.item;
  });
  std::ostringstream out;
  out << "#schema=reczilla/1\n";
  out << "#name=" << dataset.name() << '\n';
  out << "#family=" << dataset.family() << '\n';
  out << "#num_users=" << dataset.num_users() << '\n';
  out << "#num_items=" << dataset.num_items() << '\n';
  out << "user_idx\titem_idx\trating\ttimestamp\n";
  for (const Interaction& x : rows) {
    out << x.user << '\t' << x.item << '\t' << format_double(x.rating) << '\t';
    if (ts) {
      out << x.timestamp;
    } else {
      out << kNaToken;
    }
    out << '\n';
  }
  return out.str();
}

void write_canonical(const InteractionDataset& dataset, const std::filesystem::path& path) {
  write_text_file(path, canonical_text(dataset));
}

InteractionDataset read_canonical_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::map<std::string, std::string> meta;
  bool header_seen = false;
  std::vector<Interaction> rows;
  std::optional<bool> has_ts;
  std::int64_t ordinal = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      const auto eq = view.find('=');
      if (eq != std::string_view::npos) {
        meta[std::string(view.substr(1, eq - 1))] = std::string(view.substr(eq + 1));
      }
      continue;
    }
    if (!header_seen) {
      if (view.rfind("user_idx", 0) != 0) {
        fail(ErrorCode::parse, line_error(line_no, "missing canonical header"));
      }
      header_seen = true;
      continue;
    }
    auto fields = split(view, '\t');
    if (fields.size() != 4) fail(ErrorCode::parse, line_error(line_no, "expected 4 fields"));
    auto u = try_parse_int(fields[0]);
    auto i = try_parse_int(fields[1]);
    auto r = try_parse_double(fields[2]);
    if (!u || !i || !r || !std::isfinite(*r) || *u < 0 || *i < 0) {
      fail(ErrorCode::parse, line_error(line_no, "malformed row"));
    }
    const bool row_has_ts = fields[3] != kNaToken;
    if (!has_ts) has_ts = row_has_ts;
    if (*has_ts != row_has_ts) fail(ErrorCode::parse, line_error(line_no, "mixed timestamp presence"));
    std::int64_t timestamp = 0;
    if (row_has_ts) {
      auto t = try_parse_int(fields[3]);
      if (!t) fail(ErrorCode::parse, line_error(line_no, "invalid timestamp"));
      timestamp = *t;
    }
    rows.push_back({static_cast<int>(*u), static_cast<int>(*i), *r, timestamp, ordinal++});
  }
  if (meta.count("schema") && meta["schema"] != "reczilla/1") {
    fail(ErrorCode::schema, "expected schema reczilla/1, found " + meta["schema"]);
  }
  int n_users = 0;
  int n_items = 0;
  for (const auto& x : rows) {
    n_users = std::max(n_users, x.user + 1);
    n_items = std::max(n_items, x.item + 1);
  }
  if (meta.count("num_users")) n_users = std::max(n_users, static_cast<int>(parse_double(meta["num_users"])));
  if (meta.count("num_items")) n_items = std::max(n_items, static_cast<int>(parse_double(meta["num_items"])));
  if (n_users == 0 || n_items == 0) fail(ErrorCode::empty_dataset, "canonical file has no shape");
  return InteractionDataset::build(meta["name"], meta["family"], IdMap::sequential(n_users),
                                   IdMap::sequential(n_items), std::move(rows),
                                   has_ts.value_or(false));
}

InteractionDataset read_canonical(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return read_canonical_text(buffer.str());
}

// ---------------------------------------------------------------------------
// Splits

DatasetSplit split_leave_last_k(const InteractionDataset& dataset, int k_val, int k_test) {
  if (k_val < 0 || k_test < 1) {
    fail(ErrorCode::invalid_argument, "leave-last-k requires k_val >= 0 and k_test >= 1");
  }
  std::vector<Interaction> all = dataset.interactions();
  std::vector<Interaction> train, validation, test;
  const bool ts = dataset.has_timestamps();
  std::size_t begin = 0;
  while (begin < all.size()) {
    std::size_t end = begin;
    while (end < all.size() && all[end].user == all[begin].user) ++end;
    std::vector<Interaction> row(all.begin() + static_cast<std::ptrdiff_t>(begin),
                                 all.begin() + static_cast<std::ptrdiff_t>(end));
    std::stable_sort(row.begin(), row.end(), [ts](const Interaction& a, const Interaction& b) {
      if (ts && a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
      return a.sequence < b.sequence;
    });
    const int n = static_cast<int>(row.size());
    if (n >= k_val + k_test + 1) {
      const int n_train = n - k_val - k_test;
      for (int j = 0; j < n; ++j) {
        auto& dst = j < n_train ? train : (j < n_train + k_val ? validation : test);
        dst.push_back(row[static_cast<std::size_t>(j)]);
      }
    } else {
      train.insert(train.end(), row.begin(), row.end());
    }
    begin = end;
  }
  DatasetSplit split;
  split.scheme = SplitScheme::leave_last_k;
  split.k = k_test;
  split.train = dataset.with_interactions(std::move(train), "");
  split.validation = dataset.with_interactions(std::move(validation), "");
  split.test = dataset.with_interactions(std::move(test), "");
  return split;
}

DatasetSplit split_global_timestamp(const InteractionDataset& dataset, double fraction_test) {
  if (!dataset.has_timestamps()) {
    fail(ErrorCode::unsupported_scheme, "global-timestamp split requires timestamps");
  }
  if (!(fraction_test > 0.0 && fraction_test < 1.0)) {
    fail(ErrorCode::invalid_argument, "fraction_test must lie in (0, 1)");
  }
  std::vector<Interaction> all = dataset.interactions();
  std::vector<double> sorted_ts;
  sorted_ts.reserve(all.size());
  for (const auto& x : all) sorted_ts.push_back(static_cast<double>(x.timestamp));
  std::sort(sorted_ts.begin(), sorted_ts.end());
  // Linear-interpolation quantile.
  const double pos = (1.0 - fraction_test) * static_cast<double>(sorted_ts.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted_ts.size() - 1);
  const double threshold = sorted_ts[lo] + (pos - static_cast<double>(lo)) * (sorted_ts[hi] - sorted_ts[lo]);

  std::vector<Interaction> train, test;
  for (const auto& x : all) {
    (static_cast<double>(x.timestamp) > threshold ? test : train).push_back(x);
  }
  if (test.empty()) warn("global-timestamp split produced an empty test set (timestamp quantile boundary)");

  std::vector<int> train_count(static_cast<std::size_t>(dataset.num_users()), 0);
  for (const auto& x : train) train_count[static_cast<std::size_t>(x.user)]++;
  std::vector<Interaction> kept_test;
  for (const auto& x : test) {
    if (train_count[static_cast<std::size_t>(x.user)] == 0) {
      train.push_back(x);
    } else {
      kept_test.push_back(x);
    }
  }
  DatasetSplit split;
  split.scheme = SplitScheme::global_timestamp;
  split.k = 0;
  split.train = dataset.with_interactions(std::move(train), "");
  split.validation = dataset.with_interactions({}, "");
  split.test = dataset.with_interactions(std::move(kept_test), "");
  return split;
}

void write_split(const DatasetSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_canonical(split.train, dir / "train.tsv");
  write_canonical(split.validation, dir / "validation.tsv");
  write_canonical(split.test, dir / "test.tsv");
}

DatasetSplit read_split(const std::filesystem::path& dir) {
  DatasetSplit split;
  split.train = read_canonical(dir / "train.tsv");
  const int u = split.train.num_users();
  const int i = split.train.num_items();
  auto read_part = [&](const std::string& file) {
    InteractionDataset part = read_canonical(dir / file);
    if (part.num_users() != u || part.num_items() != i) {
      fail(ErrorCode::parse, file + " shape does not match train.tsv");
    }
    return part;
  };
  split.validation = read_part("validation.tsv");
  split.test = read_part("test.tsv");
  return split;
}

// ---------------------------------------------------------------------------
// Synthetic generation

InteractionDataset synthesize(const SynthSpec& spec) {
  if (spec.users < 1 || spec.items < 1 || spec.nnz < 1) {
    fail(ErrorCode::invalid_argument, "synthesize requires users, items, nnz >= 1");
  }
  const std::int64_t cells = static_cast<std::int64_t>(spec.users) * spec.items;
  if (spec.nnz > cells) {
    fail(ErrorCode::infeasible, "nnz " + std::to_string(spec.nnz) + " exceeds users*items " +
                                    std::to_string(cells));
  }
  Rng rng(spec.seed);
  const auto n_users = static_cast<std::size_t>(spec.users);
  const auto n_items = static_cast<std::size_t>(spec.items);

  // Popularity ranks are a random permutation so that popularity does not
  // follow the index order.
  std::vector<int> item_rank(n_items);
  std::iota(item_rank.begin(), item_rank.end(), 1);
  rng.shuffle(item_rank);
  std::vector<double> item_weight(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    item_weight[i] = std::pow(static_cast<double>(item_rank[i]), -spec.popularity_skew);
  }
  std::vector<int> user_rank(n_users);
  std::iota(user_rank.begin(), user_rank.end(), 1);
  rng.shuffle(user_rank);
  std::vector<double> user_weight(n_users);
  for (std::size_t u = 0; u < n_users; ++u) {
    user_weight[u] = std::pow(static_cast<double>(user_rank[u]), -spec.user_skew);
  }

  const int rank = std::max(0, spec.latent_rank);
  Eigen::MatrixXd user_factors(static_cast<Eigen::Index>(n_users), rank);
  Eigen::MatrixXd item_factors(static_cast<Eigen::Index>(n_items), rank);
  for (Eigen::Index r = 0; r < user_factors.rows(); ++r)
    for (int c = 0; c < rank; ++c) user_factors(r, c) = rng.normal();
  for (Eigen::Index r = 0; r < item_factors.rows(); ++r)
    for (int c = 0; c < rank; ++c) item_factors(r, c) = rng.normal();
  const double affinity_scale = rank > 0 ? spec.latent_strength / std::sqrt(static_cast<double>(rank)) : 0.0;

  // Interactions per user: one each when possible, the rest drawn by
  // activity weight among users below the item cap.
  std::vector<std::int64_t> counts(n_users, 0);
  std::int64_t remaining = spec.nnz;
  if (spec.nnz >= spec.users) {
    std::fill(counts.begin(), counts.end(), 1);
    remaining -= spec.users;
  }
  std::vector<double> cumulative(n_users);
  std::partial_sum(user_weight.begin(), user_weight.end(), cumulative.begin());
  while (remaining > 0) {
    const double x = rng.uniform() * cumulative.back();
    auto u = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), x) -
                                      cumulative.begin());
    u = std::min(u, n_users - 1);
    if (counts[u] >= spec.items) continue;
    counts[u]++;
    remaining--;
  }

  std::vector<Interaction> entries;
  entries.reserve(static_cast<std::size_t>(spec.nnz));
  std::vector<std::pair<double, int>> keys(n_items);
  for (std::size_t u = 0; u < n_users; ++u) {
    if (counts[u] == 0) continue;
    for (std::size_t i = 0; i < n_items; ++i) {
      double w = item_weight[i];
      if (rank > 0) {
        w *= std::exp(affinity_scale * user_factors.row(static_cast<Eigen::Index>(u))
                                           .dot(item_factors.row(static_cast<Eigen::Index>(i))));
      }
      double r = 0.0;
      while (r <= 0.0) r = rng.uniform();
      // Efraimidis-Spirakis key for weighted sampling without replacement.
      keys[i] = {std::log(r) / w, static_cast<int>(i)};
    }
    const auto take = static_cast<std::ptrdiff_t>(counts[u]);
    std::partial_sort(keys.begin(), keys.begin() + take, keys.end(),
                      [](const auto& a, const auto& b) {
                        return a.first != b.first ? a.first > b.first : a.second < b.second;
                      });
    for (std::ptrdiff_t k = 0; k < take; ++k) {
      const int item = keys[static_cast<std::size_t>(k)].second;
      double rating = 1.0;
      if (spec.rating_scale > 1) {
        double affinity = 0.0;
        if (rank > 0) {
          affinity = affinity_scale * user_factors.row(static_cast<Eigen::Index>(u))
                                          .dot(item_factors.row(item));
        }
        const double center = 0.5 * (spec.rating_scale + 1);
        const double raw = center + affinity * spec.rating_scale / 4.0 + 0.75 * rng.normal();
        rating = std::clamp(std::round(raw), 1.0, static_cast<double>(spec.rating_scale));
      }
      entries.push_back({static_cast<int>(u), item, rating, 0,
                         static_cast<std::int64_t>(entries.size())});
    }
  }
  std::vector<std::int64_t> stamps(entries.size());
  std::iota(stamps.begin(), stamps.end(), 0);
  rng.shuffle(stamps);
  for (std::size_t k = 0; k < entries.size(); ++k) entries[k].timestamp = stamps[k];

  return InteractionDataset::build(spec.name, spec.family, IdMap::sequential(spec.users, "u"),
                                   IdMap::sequential(spec.items, "i"), std::move(entries), true);
}

}  // namespace reczilla
