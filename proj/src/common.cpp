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

#include "reczilla/common.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <unordered_set>

namespace reczilla {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse: return "parse";
    case ErrorCode::empty_dataset: return "empty_dataset";
    case ErrorCode::unsupported_scheme: return "unsupported_scheme";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::unknown_metric: return "unknown_metric";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::io: return "io";
    case ErrorCode::timeout: return "timeout";
    case ErrorCode::fit: return "fit";
    case ErrorCode::resource: return "resource";
    case ErrorCode::schema: return "schema";
    case ErrorCode::missing_features: return "missing_features";
  }
  return "unknown";
}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

namespace {
thread_local WarningCapture* active_capture = nullptr;
std::mutex stderr_mutex;
}  // namespace

WarningCapture::WarningCapture() : previous_(active_capture) { active_capture = this; }
WarningCapture::~WarningCapture() { active_capture = previous_; }

bool WarningCapture::contains(std::string_view needle) const {
  return std::any_of(messages_.begin(), messages_.end(), [&](const std::string& m) {
    return m.find(needle) != std::string::npos;
  });
}

void warn(const std::string& message) {
  if (active_capture != nullptr) {
    active_capture->messages_.push_back(message);
    return;
  }
  std::lock_guard<std::mutex> lock(stderr_mutex);
  std::cerr << "warning: " << message << '\n';
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag) {
  return splitmix64(seed ^ splitmix64(tag + 0x632be59bd9b4e019ULL));
}

std::uint64_t hash_string(std::string_view text) {
  // FNV-1a, stable across platforms.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) fail(ErrorCode::invalid_argument, "Rng::below(0)");
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % n;
}

double Rng::normal() {
  if (spare_normal_) {
    double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1 = 0.0;
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_normal_ = r * std::sin(theta);
  return r * std::cos(theta);
}

std::vector<int> Rng::sample_indices(int n, int k) {
  if (k < 0 || k > n) fail(ErrorCode::invalid_argument, "sample_indices: k out of range");
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  if (2 * k > n) {
    std::vector<int> all(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) all[static_cast<std::size_t>(i)] = i;
    // Partial Fisher-Yates.
    for (int i = 0; i < k; ++i) {
      const auto j = static_cast<int>(i + below(static_cast<std::uint64_t>(n - i)));
      std::swap(all[static_cast<std::size_t>(i)], all[static_cast<std::size_t>(j)]);
      out.push_back(all[static_cast<std::size_t>(i)]);
    }
    return out;
  }
  std::unordered_set<int> seen;
  while (static_cast<int>(out.size()) < k) {
    const auto v = static_cast<int>(below(static_cast<std::uint64_t>(n)));
    if (seen.insert(v).second) out.push_back(v);
  }
  return out;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string format_value(double value) {
  if (std::isnan(value)) return std::string(kNaToken);
  return format_double(value);
}

std::optional<double> try_parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (text == kNaToken || text == "nan" || text == "NaN") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  if (text.front() == '+') text.remove_prefix(1);
  double value = 0.0;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

double parse_double(std::string_view text) {
  auto value = try_parse_double(text);
  if (!value) fail(ErrorCode::parse, "not a number: '" + std::string(text) + "'");
  return *value;
}

std::optional<std::int64_t> try_parse_int(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  std::int64_t value = 0;
  auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

std::vector<std::string> split(std::string_view text, char delimiter) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(delimiter, start);
    if (pos == std::string_view::npos) {
      parts.emplace_back(text.substr(start));
      break;
    }
    parts.emplace_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

std::string to_upper(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

std::string to_lower(std::string_view text) {
  std::string out(text);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

Deadline::Deadline(double budget_s) : start_(Clock::now()), budget_s_(budget_s) {}

double Deadline::elapsed_s() const { return seconds_since(start_); }

bool Deadline::expired() const {
  return std::isfinite(budget_s_) && elapsed_s() > budget_s_;
}

void Deadline::check(std::string_view what, bool partial_progress) const {
  if (expired()) {
    throw TimeoutError(std::string(what) + ": time budget of " + format_double(budget_s_) +
                           " s exceeded",
                       partial_progress);
  }
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out << text;
  if (!out) fail(ErrorCode::io, "write failed: " + path.string());
}

}  // namespace reczilla
