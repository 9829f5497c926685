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

#include "reczilla/hyperparams.hpp"

#include <boost/random/sobol.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "reczilla/common.hpp"

namespace reczilla {

std::string_view param_kind_name(ParamKind kind) {
  switch (kind) {
    case ParamKind::int_range: return "int";
    case ParamKind::real_linear: return "real";
    case ParamKind::real_log: return "real-log";
    case ParamKind::categorical: return "categorical";
    case ParamKind::boolean: return "bool";
  }
  return "unknown";
}

bool ParamSpec::admits(const ParamValue& value) const {
  switch (kind) {
    case ParamKind::int_range: {
      const auto* v = std::get_if<std::int64_t>(&value);
      return v != nullptr && static_cast<double>(*v) >= lo && static_cast<double>(*v) <= hi;
    }
    case ParamKind::real_linear:
    case ParamKind::real_log: {
      const auto* v = std::get_if<double>(&value);
      return v != nullptr && *v >= lo && *v <= hi;
    }
    case ParamKind::boolean:
      return std::holds_alternative<bool>(value);
    case ParamKind::categorical:
      return std::find(choices.begin(), choices.end(), value) != choices.end();
  }
  return false;
}

HyperparameterSpace::HyperparameterSpace(std::vector<ParamSpec> entries)
    : entries_(std::move(entries)) {
  std::set<std::string> names;
  for (const auto& e : entries_) {
    if (!names.insert(e.name).second) fail(ErrorCode::invalid_argument, "duplicate parameter " + e.name);
    if ((e.kind == ParamKind::int_range || e.kind == ParamKind::real_linear ||
         e.kind == ParamKind::real_log) && !(e.lo <= e.hi)) {
      fail(ErrorCode::invalid_argument, "empty range for " + e.name);
    }
    if (e.kind == ParamKind::real_log && !(e.lo > 0.0)) {
      fail(ErrorCode::invalid_argument, "log range must be positive for " + e.name);
    }
    if (e.kind == ParamKind::categorical && e.choices.empty()) {
      fail(ErrorCode::invalid_argument, "no choices for " + e.name);
    }
    if (!e.admits(e.default_value)) fail(ErrorCode::invalid_argument, "default out of range for " + e.name);
  }
}

const ParamSpec* HyperparameterSpace::find(const std::string& name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return &e;
  }
  return nullptr;
}

ParamMap HyperparameterSpace::defaults() const {
  ParamMap out;
  for (const auto& e : entries_) out[e.name] = e.default_value;
  return out;
}

void HyperparameterSpace::validate(const ParamMap& params) const {
  for (const auto& [name, value] : params) {
    const ParamSpec* spec = find(name);
    if (spec == nullptr) fail(ErrorCode::invalid_argument, "unknown parameter " + name);
    if (!spec->admits(value)) {
      fail(ErrorCode::invalid_argument,
           "parameter " + name + "=" + format_param_value(value) + " outside its declared space");
    }
  }
  for (const auto& e : entries_) {
    if (!params.count(e.name)) fail(ErrorCode::invalid_argument, "parameter " + e.name + " not assigned");
  }
}

// ---------------------------------------------------------------------------
// Catalog

namespace {

ParamSpec int_param(std::string name, std::int64_t lo, std::int64_t hi, std::int64_t def) {
  return {std::move(name), ParamKind::int_range, static_cast<double>(lo), static_cast<double>(hi), {}, def};
}

ParamSpec real_param(std::string name, double lo, double hi, double def) {
  return {std::move(name), ParamKind::real_linear, lo, hi, {}, def};
}

ParamSpec log_param(std::string name, double lo, double hi, double def) {
  return {std::move(name), ParamKind::real_log, lo, hi, {}, def};
}

ParamSpec bool_param(std::string name, bool def) {
  return {std::move(name), ParamKind::boolean, 0.0, 0.0, {}, def};
}

ParamSpec cat_param(std::string name, std::vector<std::string> choices, std::string def) {
  std::vector<ParamValue> values(choices.begin(), choices.end());
  return {std::move(name), ParamKind::categorical, 0.0, 0.0, std::move(values), std::move(def)};
}

ParamSpec batch_size_param(std::int64_t def) {
  std::vector<ParamValue> values;
  for (std::int64_t b = 1; b <= 1024; b *= 2) values.emplace_back(b);
  return {"batch-size", ParamKind::categorical, 0.0, 0.0, std::move(values), def};
}

std::vector<ParamSpec> knn_space(const std::string& kind) {
  std::vector<ParamSpec> e{int_param("top-K", 5, 1000, 50), int_param("shrink", 0, 1000, 100)};
  if (kind == "Cosine") {
    e.push_back(bool_param("normalize", true));
    e.push_back(cat_param("feature-weighting", {"none", "BM25", "TF-IDF"}, "none"));
  } else if (kind == "Asymmetric") {
    e.push_back(real_param("alpha", 0.0, 2.0, 0.5));
  } else if (kind == "Dice" || kind == "Jaccard") {
    e.push_back(bool_param("normalize", true));
  } else if (kind == "Tversky") {
    e.push_back(real_param("alpha", 0.0, 2.0, 1.0));
    e.push_back(real_param("beta", 0.0, 2.0, 1.0));
  } else if (kind == "Euclidean") {
    e.push_back(bool_param("normalize", false));
    e.push_back(bool_param("normalize-avg-row", false));
    e.push_back(cat_param("similarity-from-distance", {"lin", "log", "exp"}, "lin"));
  }
  return e;
}

std::vector<AlgorithmInfo> build_catalog() {
  const std::vector<std::string> sgd_modes{"sgd", "adagrad", "adam"};
  std::vector<AlgorithmInfo> c;
  auto add = [&](std::string name, std::string family, std::vector<ParamSpec> entries) {
    c.push_back({std::move(name), std::move(family), HyperparameterSpace(std::move(entries))});
  };
  add("TopPop", "TopPop", {});
  add("Random", "Random", {});
  add("GlobalEffects", "GlobalEffects", {});
  add("SlopeOne", "SlopeOne", {});
  add("CoClustering", "CoClustering",
      {int_param("num-control-users", 1, 1000, 3), int_param("num-control-items", 1, 1000, 3)});
  for (const std::string axis : {"ItemKNN", "UserKNN"}) {
    for (const std::string kind : {"Cosine", "Asymmetric", "Dice", "Jaccard", "Tversky", "Euclidean"}) {
      add(axis + "-" + kind, axis, knn_space(kind));
    }
  }
  add("P3alpha", "P3alpha",
      {int_param("top-K", 5, 1000, 100), real_param("alpha", 0.0, 2.0, 1.0),
       bool_param("normalize-similarity", false)});
  add("RP3beta", "RP3beta",
      {int_param("top-K", 5, 1000, 100), real_param("alpha", 0.0, 2.0, 1.0),
       real_param("beta", 0.0, 2.0, 0.6), bool_param("normalize-similarity", false)});
  add("PureSVD", "PureSVD", {int_param("num-factors", 1, 200, 100)});
  add("NMF", "NMF",
      {int_param("num-factors", 1, 350, 100),
       cat_param("solver", {"coordinate-descent", "multiplicative-update"}, "multiplicative-update"),
       cat_param("init-type", {"random", "nndsvda"}, "random"),
       cat_param("beta-loss", {"frobenius", "kullback-leibler"}, "frobenius")});
  add("MF-FunkSVD", "MF-FunkSVD",
      {cat_param("sgd-mode", sgd_modes, "sgd"), bool_param("use-bias", true), batch_size_param(1),
       int_param("num-factors", 1, 200, 10), log_param("item-reg", 1e-5, 1e-2, 1e-5),
       log_param("user-reg", 1e-5, 1e-2, 1e-5), log_param("learning-rate", 1e-4, 1e-1, 1e-3),
       real_param("negative-interactions-quota", 0.0, 0.5, 0.0)});
  add("MF-AsySVD", "MF-AsySVD",
      {cat_param("sgd-mode", sgd_modes, "sgd"), bool_param("use-bias", true),
       int_param("num-factors", 1, 200, 10), log_param("item-reg", 1e-5, 1e-2, 1e-5),
       log_param("user-reg", 1e-5, 1e-2, 1e-5), log_param("learning-rate", 1e-4, 1e-1, 1e-3),
       real_param("negative-interactions-quota", 0.0, 0.5, 0.0)});
  add("MF-BPR", "MF-BPR",
      {cat_param("sgd-mode", sgd_modes, "sgd"), int_param("num-factors", 1, 200, 10),
       batch_size_param(1), log_param("positive-reg", 1e-5, 1e-2, 1e-5),
       log_param("negative-reg", 1e-5, 1e-2, 1e-5), log_param("learning-rate", 1e-4, 1e-1, 1e-3)});
  add("iALS", "iALS",
      {int_param("num-factors", 1, 200, 50), cat_param("confidence-scaling", {"linear", "log"}, "linear"),
       log_param("alpha", 1e-3, 50.0, 1.0), log_param("epsilon", 1e-3, 10.0, 1.0),
       log_param("reg", 1e-5, 1e-2, 1e-3)});
  add("SLIM-BPR", "SLIM-BPR",
      {int_param("top-K", 5, 1000, 200), bool_param("symmetric", true),
       cat_param("sgd-mode", sgd_modes, "adagrad"), log_param("lambda-i", 1e-5, 1e-2, 1e-5),
       log_param("lambda-j", 1e-5, 1e-2, 1e-5), log_param("learning-rate", 1e-4, 1e-1, 1e-4)});
  add("SLIM-ElasticNet", "SLIM-ElasticNet",
      {int_param("top-K", 5, 1000, 100), bool_param("symmetric", false),
       log_param("l1-ratio", 1e-5, 1.0, 0.1), real_param("alpha", 1e-3, 1e-2, 1e-3)});
  add("EASE-R", "EASE-R", {log_param("l2-norm", 1.0, 1e7, 1e3)});
  return c;
}

}  // namespace

const std::vector<AlgorithmInfo>& catalog() {
  static const std::vector<AlgorithmInfo> instance = build_catalog();
  return instance;
}

const AlgorithmInfo& find_algorithm(const std::string& name) {
  for (const auto& a : catalog()) {
    if (a.name == name) return a;
  }
  fail(ErrorCode::not_found, "unknown algorithm '" + name + "'");
}

std::vector<std::string> algorithm_families() {
  std::vector<std::string> out;
  for (const auto& a : catalog()) {
    if (std::find(out.begin(), out.end(), a.family) == out.end()) out.push_back(a.family);
  }
  return out;
}

std::string catalog_text() {
  std::ostringstream out;
  out << "algorithm\tfamily\tparameter\tkind\tdomain\tdefault\n";
  for (const auto& a : catalog()) {
    if (a.space.empty()) {
      out << a.name << '\t' << a.family << "\t-\t-\t-\t-\n";
      continue;
    }
    for (const auto& e : a.space.entries()) {
      out << a.name << '\t' << a.family << '\t' << e.name << '\t' << param_kind_name(e.kind) << '\t';
      switch (e.kind) {
        case ParamKind::int_range:
          out << '[' << static_cast<std::int64_t>(e.lo) << ", " << static_cast<std::int64_t>(e.hi) << ']';
          break;
        case ParamKind::real_linear:
        case ParamKind::real_log:
          out << '[' << format_double(e.lo) << ", " << format_double(e.hi) << ']';
          break;
        case ParamKind::boolean:
          out << "{false, true}";
          break;
        case ParamKind::categorical: {
          out << '{';
          for (std::size_t k = 0; k < e.choices.size(); ++k) {
            out << (k ? ", " : "") << format_param_value(e.choices[k]);
          }
          out << '}';
          break;
        }
      }
      out << '\t' << format_param_value(e.default_value) << '\n';
    }
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Serialization

std::string format_param_value(const ParamValue& value) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          return std::to_string(v);
        } else if constexpr (std::is_same_v<T, double>) {
          std::string s = format_double(v);
          if (std::isfinite(v) && s.find_first_of(".e") == std::string::npos) s += ".0";
          return s;
        } else {
          return v;
        }
      },
      value);
}

std::string serialize_params(const ParamMap& params) {
  std::string out;
  for (const auto& [name, value] : params) {
    if (!out.empty()) out += ';';
    out += name;
    out += '=';
    out += format_param_value(value);
  }
  return out;
}

namespace {

ParamValue infer_value(const std::string& text) {
  if (text == "true") return true;
  if (text == "false") return false;
  if (auto i = try_parse_int(text)) return *i;
  if (text.find_first_of(".eE") != std::string::npos || text == "nan" || text == "inf" || text == "-inf") {
    if (auto d = try_parse_double(text)) return *d;
  }
  return text;
}

ParamValue typed_value(const ParamSpec& spec, const std::string& text) {
  switch (spec.kind) {
    case ParamKind::int_range: {
      auto i = try_parse_int(text);
      if (!i) fail(ErrorCode::parse, "parameter " + spec.name + " expects an integer, got '" + text + "'");
      return *i;
    }
    case ParamKind::real_linear:
    case ParamKind::real_log:
      return parse_double(text);
    case ParamKind::boolean:
      if (text == "true" || text == "1") return true;
      if (text == "false" || text == "0") return false;
      fail(ErrorCode::parse, "parameter " + spec.name + " expects a boolean, got '" + text + "'");
    case ParamKind::categorical:
      for (const auto& choice : spec.choices) {
        if (format_param_value(choice) == text) return choice;
      }
      fail(ErrorCode::parse, "parameter " + spec.name + " has no choice '" + text + "'");
  }
  return text;
}

}  // namespace

ParamMap parse_params(const std::string& text, const HyperparameterSpace* space) {
  ParamMap out;
  if (trim(text).empty() || trim(text) == "-") return out;
  for (const auto& part : split(text, ';')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) fail(ErrorCode::parse, "malformed parameter '" + part + "'");
    const std::string name(trim(std::string_view(part).substr(0, eq)));
    const std::string value(trim(std::string_view(part).substr(eq + 1)));
    const ParamSpec* spec = space != nullptr ? space->find(name) : nullptr;
    if (space != nullptr && spec == nullptr) fail(ErrorCode::parse, "unknown parameter " + name);
    out[name] = spec != nullptr ? typed_value(*spec, value) : infer_value(value);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

ParamMap map_unit_point(const HyperparameterSpace& space, const std::vector<double>& point) {
  if (point.size() != space.size()) fail(ErrorCode::invalid_argument, "point dimension mismatch");
  ParamMap out;
  for (std::size_t d = 0; d < space.size(); ++d) {
    const ParamSpec& e = space.entries()[d];
    const double u = std::clamp(point[d], 0.0, std::nextafter(1.0, 0.0));
    switch (e.kind) {
      case ParamKind::int_range: {
        const double width = e.hi - e.lo + 1.0;
        out[e.name] = static_cast<std::int64_t>(std::min(e.hi, e.lo + std::floor(u * width)));
        break;
      }
      case ParamKind::real_linear:
        out[e.name] = std::clamp(e.lo + u * (e.hi - e.lo), e.lo, e.hi);
        break;
      case ParamKind::real_log: {
        const double v = std::exp(std::log(e.lo) + u * (std::log(e.hi) - std::log(e.lo)));
        out[e.name] = std::clamp(v, e.lo, e.hi);
        break;
      }
      case ParamKind::boolean:
        out[e.name] = u >= 0.5;
        break;
      case ParamKind::categorical: {
        const auto n = e.choices.size();
        const auto k = std::min(n - 1, static_cast<std::size_t>(std::floor(u * static_cast<double>(n))));
        out[e.name] = e.choices[k];
        break;
      }
    }
  }
  return out;
}

std::vector<ParamMap> sample_hyperparameters(const HyperparameterSpace& space, int count,
                                             std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::invalid_argument, "count must be >= 1");
  std::vector<ParamMap> out{space.defaults()};
  if (space.empty() || count == 1) return out;

  const std::size_t dims = space.size();
  boost::random::sobol_engine<std::uint32_t, 32> engine(dims);
  // Random digital shift per dimension keeps the net structure while making
  // the sequence depend on the seed.
  Rng rng(mix_seed(seed, hash_string("sobol-shift")));
  std::vector<std::uint32_t> shift(dims);
  for (auto& s : shift) s = static_cast<std::uint32_t>(rng.next() >> 32);

  std::vector<double> point(dims);
  for (int k = 1; k < count; ++k) {
    for (std::size_t d = 0; d < dims; ++d) {
      const std::uint32_t x = engine() ^ shift[d];
      point[d] = static_cast<double>(x) * 0x1.0p-32;
    }
    out.push_back(map_unit_point(space, point));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Accessors

namespace {

const ParamValue& lookup(const ParamMap& params, const std::string& name) {
  auto it = params.find(name);
  if (it == params.end()) fail(ErrorCode::invalid_argument, "missing parameter " + name);
  return it->second;
}

}  // namespace

std::int64_t param_int(const ParamMap& params, const std::string& name) {
  const ParamValue& v = lookup(params, name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  fail(ErrorCode::invalid_argument, "parameter " + name + " is not an integer");
}

double param_real(const ParamMap& params, const std::string& name) {
  const ParamValue& v = lookup(params, name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  fail(ErrorCode::invalid_argument, "parameter " + name + " is not a real");
}

bool param_bool(const ParamMap& params, const std::string& name) {
  const ParamValue& v = lookup(params, name);
  if (const auto* b = std::get_if<bool>(&v)) return *b;
  fail(ErrorCode::invalid_argument, "parameter " + name + " is not a boolean");
}

std::string param_string(const ParamMap& params, const std::string& name) {
  const ParamValue& v = lookup(params, name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  fail(ErrorCode::invalid_argument, "parameter " + name + " is not a string");
}

}  // namespace reczilla
