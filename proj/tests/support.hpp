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

// Shared fixtures for the tests: random inputs built from library types.

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "reczilla/common.hpp"
#include "reczilla/metadataset.hpp"
#include "reczilla/metrics.hpp"

namespace fixture {

// Random evaluation context; lists may be shorter than list_length and
// some may be empty.
inline reczilla::EvaluationContext random_context(reczilla::Rng& rng, int max_users, int max_items,
                                                  int list_length) {
  reczilla::EvaluationContext c;
  c.num_items = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_items - 1)));
  const int users = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_users)));
  c.num_users = users + static_cast<int>(rng.below(3));
  c.list_length = list_length;
  for (int i = 0; i < c.num_items; ++i) c.item_popularity.push_back(static_cast<double>(rng.below(6)));
  for (int u = 0; u < users; ++u) {
    const int len = rng.uniform() < 0.1 ? 0 : static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(list_length, c.num_items) + 1)));
    c.recommendations.push_back(rng.sample_indices(c.num_items, len));
    const int rel = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(4, c.num_items))));
    c.relevant.push_back(rng.sample_indices(c.num_items, rel));
  }
  return c;
}

inline oracle::Context to_oracle(const reczilla::EvaluationContext& c) {
  return {c.recommendations, c.relevant, c.item_popularity, c.num_items};
}

// Meta-dataset with `families` x `per_family` datasets, a few numeric
// features per dataset and PRECISION@10 results for `algorithms` algorithms
// with `hp_sets` hyperparameter sets each. Performance depends on the
// features so that meta-learning has signal.
inline reczilla::MetaDataset planted_metadataset(reczilla::Rng& rng, int families, int per_family, int algorithms,
                                                 int hp_sets, int features = 6) {
  using namespace reczilla;
  MetaDataset md;
  const MetricSpec metric{BaseMetric::precision, 10};
  std::vector<std::vector<double>> w(static_cast<std::size_t>(algorithms));
  for (auto& row : w) {
    for (int f = 0; f < features; ++f) row.push_back(rng.normal());
  }
  for (int fam = 0; fam < families; ++fam) {
    const std::vector<double> center = [&] {
      std::vector<double> c;
      for (int f = 0; f < features; ++f) c.push_back(rng.normal());
      return c;
    }();
    for (int k = 0; k < per_family; ++k) {
      const std::string id = "fam" + std::to_string(fam) + "_d" + std::to_string(k);
      const std::string family = "fam" + std::to_string(fam);
      md.families[id] = family;
      MetaFeatureVector v;
      std::vector<double> x;
      for (int f = 0; f < features; ++f) {
        x.push_back(center[static_cast<std::size_t>(f)] + 0.3 * rng.normal());
        v.emplace_back("feature_" + std::to_string(f), x.back());
      }
      md.features[id] = v;
      for (int a = 0; a < algorithms; ++a) {
        double z = 0;
        for (int f = 0; f < features; ++f) z += w[static_cast<std::size_t>(a)][static_cast<std::size_t>(f)] * x[static_cast<std::size_t>(f)];
        for (int h = 0; h < hp_sets; ++h) {
          ExperimentRecord r;
          r.dataset_id = id;
          r.family = family;
          r.algorithm = "Algo" + std::to_string(a);
          r.hp_index = h;
          r.hp_params = h == 0 ? "" : "x=" + std::to_string(h) + ".0";
          r.train_time_s = 0.1 + rng.uniform() * (1 + a);
          r.metrics[metric] = 0.05 + 0.4 / (1 + std::exp(-z)) + 0.05 * rng.uniform() + 0.01 * h;
          md.records.push_back(std::move(r));
        }
      }
    }
  }
  return md;
}

}  // namespace fixture
