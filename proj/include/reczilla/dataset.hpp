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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "reczilla/sparse.hpp"

namespace reczilla {

/// Bijection between external identifiers and dense internal indices.
/// Indices are assigned in order of first appearance.
class IdMap {
 public:
  int intern(const std::string& id);
  std::optional<int> find(const std::string& id) const;
  const std::string& id(int index) const { return ids_.at(static_cast<std::size_t>(index)); }
  int size() const { return static_cast<int>(ids_.size()); }
  const std::vector<std::string>& ids() const { return ids_; }

  static IdMap sequential(int n, const std::string& prefix = "");

  bool operator==(const IdMap& other) const { return ids_ == other.ids_; }

 private:
  std::vector<std::string> ids_;
  std::unordered_map<std::string, int> index_;
};

/// One stored interaction of a dataset.
struct Interaction {
  int user;
  int item;
  double rating;
  std::int64_t timestamp;  // meaningful only when the dataset has timestamps
  std::int64_t sequence;   // input ordinal, the surrogate chronology
};

/// Sparse user x item rating matrix with identifiers, optional timestamps and
/// the input order of every stored entry. Immutable once built.
class InteractionDataset {
 public:
  InteractionDataset() = default;

  /// Builds from interactions with unique (user, item) pairs.
  static InteractionDataset build(std::string name, std::string family, IdMap users, IdMap items,
                                  std::vector<Interaction> interactions, bool has_timestamps);

  const std::string& name() const { return name_; }
  const std::string& family() const { return family_; }
  const IdMap& users() const { return users_; }
  const IdMap& items() const { return items_; }
  const CsrMatrix& ratings() const { return ratings_; }

  int num_users() const { return ratings_.rows(); }
  int num_items() const { return ratings_.cols(); }
  int nnz() const { return ratings_.nnz(); }
  double sparsity() const;
  bool has_timestamps() const { return has_timestamps_; }

  /// Per stored entry (CSR order) timestamp / input ordinal.
  const std::vector<std::int64_t>& timestamps() const { return timestamps_; }
  const std::vector<std::int64_t>& sequence() const { return sequence_; }

  /// All interactions in CSR order.
  std::vector<Interaction> interactions() const;

  /// Same index spaces, subset of entries.
  InteractionDataset with_interactions(std::vector<Interaction> interactions,
                                       std::string name_suffix) const;

  void set_name(std::string name) { name_ = std::move(name); }
  void set_family(std::string family) { family_ = std::move(family); }

  bool operator==(const InteractionDataset& other) const = default;

 private:
  std::string name_;
  std::string family_;
  IdMap users_;
  IdMap items_;
  CsrMatrix ratings_;
  std::vector<std::int64_t> timestamps_;
  std::vector<std::int64_t> sequence_;
  bool has_timestamps_ = false;
};

// ---------------------------------------------------------------------------
// Ingestion

struct IngestOptions {
  char delimiter = ',';
  /// nullopt: auto-detect (first line is a header when its rating field is
  /// not numeric).
  std::optional<bool> header;
  /// Store every rating as 1.0.
  bool implicit = false;
  std::string name;
  std::string family;
};

/// Reads user,item,rating[,timestamp] lines. Duplicate (user, item) pairs keep
/// the latest timestamp, or the last occurrence when there are no timestamps.
InteractionDataset ingest(const std::filesystem::path& path, const IngestOptions& options = {});
InteractionDataset ingest_text(const std::string& text, const IngestOptions& options = {});

/// Canonical interchange file: metadata comment lines followed by a header and
/// `user_idx item_idx rating timestamp` rows sorted by user, chronology, item.
void write_canonical(const InteractionDataset& dataset, const std::filesystem::path& path);
std::string canonical_text(const InteractionDataset& dataset);
InteractionDataset read_canonical(const std::filesystem::path& path);
InteractionDataset read_canonical_text(const std::string& text);

// ---------------------------------------------------------------------------
// Splits

enum class SplitScheme { leave_last_k, global_timestamp };

struct DatasetSplit {
  InteractionDataset train;
  InteractionDataset validation;
  InteractionDataset test;
  SplitScheme scheme = SplitScheme::leave_last_k;
  int k = 1;
};

/// Per user (chronological by timestamp, ties by input order): the last
/// k_test entries go to test, the k_val before them to validation. Users with
/// fewer than k_val + k_test + 1 entries stay entirely in train.
DatasetSplit split_leave_last_k(const InteractionDataset& dataset, int k_val, int k_test);

/// Entries with timestamp above the (1 - fraction_test) quantile go to test;
/// users left without train entries get their test entries back.
DatasetSplit split_global_timestamp(const InteractionDataset& dataset, double fraction_test);

/// Writes train.tsv / validation.tsv / test.tsv (canonical format) into dir.
void write_split(const DatasetSplit& split, const std::filesystem::path& dir);
DatasetSplit read_split(const std::filesystem::path& dir);

// ---------------------------------------------------------------------------
// Synthetic generation

struct SynthSpec {
  int users = 100;
  int items = 50;
  std::int64_t nnz = 1000;
  /// Item popularity weight of popularity rank r is r^-popularity_skew.
  double popularity_skew = 1.0;
  /// User activity weight of activity rank r is r^-user_skew.
  double user_skew = 0.0;
  /// <= 1 produces implicit feedback (all ratings 1); otherwise integer
  /// ratings in [1, rating_scale].
  int rating_scale = 1;
  /// Optional planted low-rank preference structure.
  int latent_rank = 0;
  double latent_strength = 0.0;
  std::uint64_t seed = 0;
  std::string name = "synthetic";
  std::string family = "synthetic";
};

InteractionDataset synthesize(const SynthSpec& spec);

}  // namespace reczilla
