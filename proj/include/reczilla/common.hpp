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

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace reczilla {

enum class ErrorCode {
  invalid_argument,
  parse,
  empty_dataset,
  unsupported_scheme,
  infeasible,
  unknown_metric,
  not_found,
  io,
  timeout,
  fit,
  resource,
  schema,
  missing_features,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Raised when a cooperative deadline expires inside a fit.
class TimeoutError : public Error {
 public:
  TimeoutError(const std::string& message, bool partial_progress)
      : Error(ErrorCode::timeout, message), partial_progress_(partial_progress) {}
  bool partial_progress() const noexcept { return partial_progress_; }

 private:
  bool partial_progress_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

// ---------------------------------------------------------------------------
// Warnings. By default they go to stderr; tests and library callers can
// redirect them for the current thread with a WarningCapture.

void warn(const std::string& message);

class WarningCapture {
 public:
  WarningCapture();
  ~WarningCapture();
  WarningCapture(const WarningCapture&) = delete;
  WarningCapture& operator=(const WarningCapture&) = delete;

  const std::vector<std::string>& messages() const { return messages_; }
  bool contains(std::string_view needle) const;

 private:
  friend void warn(const std::string& message);
  std::vector<std::string> messages_;
  WarningCapture* previous_;
};

// ---------------------------------------------------------------------------
// Portable deterministic randomness. std distributions are implementation
// defined, so every draw goes through these helpers instead.

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);
std::uint64_t hash_string(std::string_view text);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t next() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);
  double normal();

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::swap(values[i - 1], values[below(i)]);
    }
  }

  // k distinct elements of [0, n), in draw order.
  std::vector<int> sample_indices(int n, int k);

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

// ---------------------------------------------------------------------------
// Text helpers.

// Shortest decimal that round-trips; "nan", "inf", "-inf" for non-finite.
std::string format_double(double value);
// Like format_double but NaN is written as the NA token.
std::string format_value(double value);
// Accepts the output of format_double/format_value ("NA" parses to NaN).
double parse_double(std::string_view text);
std::optional<double> try_parse_double(std::string_view text);
std::optional<std::int64_t> try_parse_int(std::string_view text);

std::vector<std::string> split(std::string_view text, char delimiter);
std::string_view trim(std::string_view text);
std::string to_upper(std::string_view text);
std::string to_lower(std::string_view text);

inline constexpr std::string_view kNaToken = "NA";

// ---------------------------------------------------------------------------
// Wall-clock budget checked at cooperative checkpoints.

class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  Deadline() : Deadline(std::numeric_limits<double>::infinity()) {}
  explicit Deadline(double budget_s);

  double elapsed_s() const;
  bool expired() const;
  // Throws TimeoutError when expired.
  void check(std::string_view what, bool partial_progress) const;

 private:
  Clock::time_point start_;
  double budget_s_;
};

double seconds_since(std::chrono::steady_clock::time_point start);

// ---------------------------------------------------------------------------
// Whole-file IO; failures raise Error(io).

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace reczilla
