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
#include <map>
#include <string>
#include <variant>
#include <vector>

namespace reczilla {

using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

enum class ParamKind { int_range, real_linear, real_log, categorical, boolean };

std::string_view param_kind_name(ParamKind kind);

struct ParamSpec {
  std::string name;
  ParamKind kind = ParamKind::real_linear;
  double lo = 0.0;
  double hi = 0.0;
  std::vector<ParamValue> choices;  // categorical only
  ParamValue default_value;

  bool admits(const ParamValue& value) const;
};

class HyperparameterSpace {
 public:
  HyperparameterSpace() = default;
  explicit HyperparameterSpace(std::vector<ParamSpec> entries);

  const std::vector<ParamSpec>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }
  const ParamSpec* find(const std::string& name) const;

  ParamMap defaults() const;
  /// Throws invalid_argument unless every entry is assigned an admissible
  /// value and no unknown names are present.
  void validate(const ParamMap& params) const;

 private:
  std::vector<ParamSpec> entries_;
};

struct AlgorithmInfo {
  std::string name;
  /// KNN similarity variants share one family per axis.
  std::string family;
  HyperparameterSpace space;
};

const std::vector<AlgorithmInfo>& catalog();
/// Throws not_found for unknown names.
const AlgorithmInfo& find_algorithm(const std::string& name);
std::vector<std::string> algorithm_families();

/// Human-readable catalog: one line per entry with name, kind, bounds, default.
std::string catalog_text();

/// `key=value` pairs sorted by key and separated by ';'. Reals are written in
/// shortest round-trip form and always carry a '.' or exponent so that the
/// value type survives parsing without a schema.
std::string serialize_params(const ParamMap& params);
std::string format_param_value(const ParamValue& value);
/// Inverse of serialize_params. With a space, values are typed by the entry
/// kind; without one the type is inferred from the text.
ParamMap parse_params(const std::string& text, const HyperparameterSpace* space = nullptr);

/// Element 0 is the defaults; the rest are scrambled Sobol points mapped into
/// the space.
std::vector<ParamMap> sample_hyperparameters(const HyperparameterSpace& space, int count,
                                             std::uint64_t seed);

/// Maps a point of the unit cube (one coordinate per entry) into the space.
ParamMap map_unit_point(const HyperparameterSpace& space, const std::vector<double>& point);

// Typed accessors; throw invalid_argument on a missing or mistyped entry.
std::int64_t param_int(const ParamMap& params, const std::string& name);
double param_real(const ParamMap& params, const std::string& name);
bool param_bool(const ParamMap& params, const std::string& name);
std::string param_string(const ParamMap& params, const std::string& name);

}  // namespace reczilla
