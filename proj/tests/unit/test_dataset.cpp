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

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <sstream>

#include "reczilla/common.hpp"
#include "reczilla/dataset.hpp"

using namespace reczilla;

namespace {

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("reczilla_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Five timestamped interactions for u1 and two for u2.
std::string timeline() {
  return "u1,a,1,50\nu1,b,2,10\nu1,c,3,40\nu1,d,4,20\nu1,e,5,30\n"
         "u2,a,1,1\nu2,b,2,2\n";
}

}  // namespace

TEST_CASE("ingest counts users, items and ratings") {
  auto d = ingest_text("u1,i1,5\nu1,i2,3\nu2,i1,4\n");
  CHECK(d.num_users() == 2);
  CHECK(d.num_items() == 2);
  CHECK(d.nnz() == 3);
  CHECK(d.ratings().at(*d.users().find("u2"), *d.items().find("i1")) == 4.0);
}

TEST_CASE("duplicate pairs keep the last occurrence") {
  auto d = ingest_text("u1,i1,2\nu1,i1,5\n");
  CHECK(d.nnz() == 1);
  CHECK(d.ratings().values()[0] == 5.0);
  auto t = ingest_text("u1,i1,2,9\nu1,i1,5,3\n");
  CHECK(t.ratings().values()[0] == 2.0);  // latest timestamp wins
}

TEST_CASE("header detection and implicit mode") {
  IngestOptions o;
  o.implicit = true;
  auto d = ingest_text("user,item,rating\nx,y,4\n", o);
  CHECK(d.nnz() == 1);
  CHECK(d.ratings().values()[0] == 1.0);
  o.header = false;
  CHECK_THROWS_AS(ingest_text("user,item,rating\nx,y,4\n", o), Error);
}

TEST_CASE("sparsity of a generated file matches an independent count") {
  std::ostringstream text;
  std::set<std::pair<int, int>> cells;
  Rng rng(5);
  // Every user and item appears at least once.
  for (int k = 0; k < 50; ++k) cells.insert({k, k % 40});
  while (cells.size() < 1000) cells.insert({static_cast<int>(rng.below(50)), static_cast<int>(rng.below(40))});
  for (auto [u, i] : cells) text << "u" << u << ",i" << i << ",1\n";
  auto d = ingest_text(text.str());
  CHECK(d.num_users() == 50);
  CHECK(d.num_items() == 40);
  CHECK(d.nnz() == 1000);
  CHECK(d.sparsity() == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("malformed rows are parse errors") {
  IngestOptions no_header;
  no_header.header = false;
  try {
    ingest_text("u1,i1,abc\nu2,i2,3\n", no_header);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
  }
  CHECK_THROWS_AS(ingest_text(""), Error);
}

TEST_CASE("canonical format round-trips") {
  auto d = ingest_text(timeline());
  auto back = read_canonical_text(canonical_text(d));
  CHECK(back.ratings() == d.ratings());
  CHECK(back.num_users() == d.num_users());
  CHECK(back.num_items() == d.num_items());
  CHECK(back.timestamps() == d.timestamps());
  CHECK(back.has_timestamps());
}

TEST_CASE("leave-last-k-out follows chronology") {
  auto d = ingest_text(timeline());
  auto s = split_leave_last_k(d, 1, 1);
  const int u1 = *d.users().find("u1");
  const int u2 = *d.users().find("u2");
  // u1 chronology: b(10) d(20) e(30) c(40) a(50).
  CHECK(s.test.ratings().contains(u1, *d.items().find("a")));
  CHECK(s.validation.ratings().contains(u1, *d.items().find("c")));
  CHECK(s.train.ratings().row_nnz(u1) == 3);
  // u2 has too few interactions and stays in train.
  CHECK(s.train.ratings().row_nnz(u2) == 2);
  CHECK(s.test.ratings().row_nnz(u2) == 0);
}

TEST_CASE("split parts partition the dataset with no cold users") {
  SynthSpec spec;
  spec.users = 100;
  spec.items = 60;
  spec.nnz = 900;
  spec.user_skew = 1.0;
  spec.seed = 11;
  auto d = synthesize(spec);
  auto s = split_leave_last_k(d, 0, 1);
  CHECK(s.train.nnz() + s.validation.nnz() + s.test.nnz() == d.nnz());
  int eligible = 0;
  for (int u = 0; u < d.num_users(); ++u) {
    eligible += d.ratings().row_nnz(u) >= 2 ? 1 : 0;
    if (s.test.ratings().row_nnz(u) > 0) CHECK(s.train.ratings().row_nnz(u) > 0);
  }
  CHECK(s.test.nnz() == eligible);
  for (int u = 0; u < d.num_users(); ++u) {
    for (int i : d.ratings().row_indices(u)) {
      const int where = s.train.ratings().contains(u, i) + s.validation.ratings().contains(u, i) +
                        s.test.ratings().contains(u, i);
      CHECK(where == 1);
    }
  }
}

TEST_CASE("split directory round-trips") {
  auto d = ingest_text(timeline());
  auto s = split_leave_last_k(d, 1, 1);
  auto dir = temp_dir("split");
  write_split(s, dir);
  auto back = read_split(dir);
  CHECK(back.train.ratings() == s.train.ratings());
  CHECK(back.validation.ratings() == s.validation.ratings());
  CHECK(back.test.ratings() == s.test.ratings());
}

TEST_CASE("global timestamp split takes the latest fraction") {
  std::ostringstream text;
  for (int t = 1; t <= 10; ++t) text << "u" << (t % 2) << ",i" << t << ",1," << t << "\n";
  auto d = ingest_text(text.str());
  auto s = split_global_timestamp(d, 0.2);
  CHECK(s.test.nnz() == 2);
  for (const auto& x : s.test.interactions()) CHECK(x.timestamp >= 9);
}

TEST_CASE("equal timestamps give an empty test set with a warning") {
  auto d = ingest_text("a,x,1,5\na,y,1,5\nb,x,1,5\n");
  WarningCapture capture;
  auto s = split_global_timestamp(d, 0.3);
  CHECK(s.test.nnz() == 0);
  CHECK(capture.contains("empty test"));
}

TEST_CASE("global timestamp size is near the quantile before repair") {
  SynthSpec spec;
  spec.users = 80;
  spec.items = 50;
  spec.nnz = 1200;
  spec.seed = 2;
  auto d = synthesize(spec);
  // Independent count of entries strictly above the interpolated quantile.
  std::vector<double> ts;
  for (auto x : d.interactions()) ts.push_back(static_cast<double>(x.timestamp));
  std::sort(ts.begin(), ts.end());
  const double expected = std::ceil(0.2 * static_cast<double>(d.nnz()));
  auto s = split_global_timestamp(d, 0.2);
  const double before_repair = static_cast<double>(s.test.nnz());
  CHECK(before_repair <= expected + 1);
  CHECK(before_repair >= expected - 1 - 80);  // at most one returned entry per cold user
  CHECK(s.test.nnz() + s.train.nnz() == d.nnz());
}

TEST_CASE("datasets without timestamps reject the global scheme") {
  auto d = ingest_text("u1,i1,5\nu1,i2,3\n");
  try {
    split_global_timestamp(d, 0.5);
    FAIL("no throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::unsupported_scheme);
  }
}

TEST_CASE("synthesize saturates and is deterministic") {
  SynthSpec spec;
  spec.users = 10;
  spec.items = 10;
  spec.nnz = 100;
  CHECK(synthesize(spec).nnz() == 100);
  spec.nnz = 101;
  CHECK_THROWS_AS(synthesize(spec), Error);
  spec.nnz = 40;
  spec.rating_scale = 5;
  spec.latent_rank = 2;
  spec.latent_strength = 1.0;
  const InteractionDataset first = synthesize(spec);
  CHECK(first == synthesize(spec));
  for (double r : first.ratings().values()) {
    CHECK(r >= 1.0);
    CHECK(r <= 5.0);
  }
}

TEST_CASE("popularity skew shows up as the rank-frequency slope") {
  SynthSpec spec;
  spec.users = 4000;
  spec.items = 200;
  spec.nnz = 12000;
  spec.popularity_skew = 1.2;
  spec.seed = 9;
  auto d = synthesize(spec);
  std::vector<int> counts = d.ratings().col_counts();
  std::sort(counts.rbegin(), counts.rend());
  // Least-squares slope of log count on log rank over ranks with counts.
  double sx = 0, sy = 0, sxx = 0, sxy = 0, n = 0;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] < 5) continue;
    const double x = std::log(static_cast<double>(r + 1));
    const double y = std::log(static_cast<double>(counts[r]));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    n += 1;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope == doctest::Approx(-1.2).epsilon(0.2 / 1.2));
}
