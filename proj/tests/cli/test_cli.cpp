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

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path workdir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "reczilla_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

// Runs the CLI with `args` (already shell-quoted), optionally prefixed by
// environment assignments.
Run cli(const std::string& args, const std::string& env = "") {
  const fs::path out = workdir() / "stdout.txt", err = workdir() / "stderr.txt";
  const std::string command = "cd '" + workdir().string() + "' && env -u RECZILLA_SEED " + env + " '" RECZILLA_CLI
                              "' " + args + " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(command.c_str());
  Run r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// Same bytes apart from a leading #generated= line.
std::string strip_generated(const std::string& text) {
  if (text.rfind("#generated=", 0) != 0) return text;
  return text.substr(text.find('\n') + 1);
}

int count_lines(const std::string& text) {
  int n = 0;
  for (char c : text) n += c == '\n' ? 1 : 0;
  return n;
}

bool error_line(const std::string& err, const std::string& code) {
  static const std::regex pattern("error: code=([a-z_]+) message=[^\n]+\n");
  std::smatch m;
  return std::regex_match(err, m, pattern) && m[1] == code;
}

// Builds a corpus of four synthetic datasets in two families under `dir`.
void build_corpus(const std::string& dir) {
  for (int d = 0; d < 4; ++d) {
    const std::string id = dir + "/d" + std::to_string(d);
    const std::string family = d < 2 ? "fa" : "fb";
    const std::string skew = d < 2 ? "0.4" : "1.3";
    REQUIRE(cli("synth --output " + id + ".tsv --users 60 --items 40 --nnz " + std::to_string(500 + 80 * d) +
                " --seed " + std::to_string(d + 1) + " --popularity-skew " + skew + " --family " + family)
                .exit_code == 0);
    REQUIRE(cli("split --dataset " + id + ".tsv --output " + id).exit_code == 0);
    REQUIRE(cli("metafeatures --split " + id + " --results " + dir + "/md").exit_code == 0);
    REQUIRE(cli("sweep --split " + id + " --results " + dir +
                "/md --algorithms TopPop,GlobalEffects,PureSVD --max-hp-sets 2 --metrics PRECISION@10,NDCG@10")
                .exit_code == 0);
  }
}

const std::map<std::string, std::set<std::string>> kFlags = {
    {"ingest", {"--input", "--output", "--delimiter", "--header", "--implicit", "--name", "--family"}},
    {"split", {"--dataset", "--output", "--scheme", "--k-val", "--k-test", "--fraction-test"}},
    {"synth",
     {"--output", "--users", "--items", "--nnz", "--popularity-skew", "--user-skew", "--rating-scale",
      "--latent-rank", "--latent-strength", "--seed", "--name", "--family"}},
    {"sweep",
     {"--split", "--results", "--dataset-id", "--family", "--algorithms", "--max-hp-sets", "--budget", "--seed",
      "--jobs", "--metrics", "--no-early-stopping"}},
    {"metafeatures", {"--split", "--dataset", "--dataset-id", "--family", "--results", "--output", "--seed"}},
    {"train",
     {"--results", "--model", "--metric", "--n", "--m", "--regressor", "--seed", "--knn-k", "--trees", "--depth",
      "--learning-rate", "--pareto", "--time-model"}},
    {"select",
     {"--model", "--dataset", "--split", "--features", "--dataset-id", "--seed", "--pareto", "--time-model",
      "--output"}},
    {"loocv",
     {"--results", "--metric", "--n", "--m", "--regressor", "--seed", "--knn-k", "--trees", "--depth",
      "--learning-rate", "--trials", "--max-train-families", "--jobs", "--output", "--rows-output",
      "--summary-output"}},
    {"analyze",
     {"--results", "--report", "--metrics", "--metric", "--target", "--min-algorithms", "--top-k", "--hp-filter",
      "--algorithm", "--output"}},
    {"catalog", {"--output"}},
};

}  // namespace

TEST_CASE("help lists every flag with a description") {
  const Run top = cli("--help");
  CHECK(top.exit_code == 0);
  for (const auto& [sub, _] : kFlags) CHECK(top.out.find("  " + sub + " ") != std::string::npos);
  CHECK(top.out.find("--config") != std::string::npos);

  static const std::regex option_line(R"(^  (?:-h,)?(--[a-z-]+)(.*)$)");
  for (const auto& [sub, expected] : kFlags) {
    CAPTURE(sub);
    const Run r = cli(sub + " --help");
    CHECK(r.exit_code == 0);
    std::vector<std::string> lines;
    std::istringstream in(r.out);
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::set<std::string> listed;
    for (std::size_t k = 0; k < lines.size(); ++k) {
      std::smatch m;
      if (!std::regex_match(lines[k], m, option_line)) continue;
      const std::string flag = m[1];
      if (flag == "--help") continue;
      listed.insert(flag);
      // The description sits past the option column or on the next line.
      const bool inline_text = lines[k].size() > 30 && lines[k].find_first_not_of(' ', 30) != std::string::npos &&
                               lines[k].substr(0, 30).back() == ' ';
      const bool next_text = k + 1 < lines.size() && lines[k + 1].rfind(std::string(30, ' '), 0) == 0 &&
                             lines[k + 1].find_first_not_of(' ') != std::string::npos;
      CHECK_MESSAGE((inline_text || next_text), flag);
    }
    CHECK(listed == expected);
  }
}

TEST_CASE("unknown metrics exit 2 and list the valid bases") {
  build_corpus("metric");
  const Run r = cli("train --results metric/md --model metric/m.txt --metric FOO@3");
  CHECK(r.exit_code == 2);
  CHECK(error_line(r.err, "unknown_metric"));
  CHECK(r.err.find("PRECISION") != std::string::npos);
  CHECK(r.err.find("USER_HIT_COVERAGE") != std::string::npos);
  CHECK(cli("loocv --results metric/md --metric NDCG@0").exit_code == 2);
  CHECK(cli("analyze --results metric/md --report hardness --metric BAR@5").exit_code == 2);
}

TEST_CASE("missing model files exit 3") {
  REQUIRE(cli("synth --output q.tsv --seed 4").exit_code == 0);
  const Run r = cli("select --model does/not/exist.txt --dataset q.tsv");
  CHECK(r.exit_code == 3);
  CHECK(error_line(r.err, "not_found"));
  CHECK(r.out.empty());
}

TEST_CASE("other failures exit nonzero with one machine-parsable line") {
  const Run missing_input = cli("split --dataset nowhere.tsv --output x");
  CHECK(missing_input.exit_code == 1);
  CHECK(error_line(missing_input.err, "io"));
  const Run no_flag = cli("train --model m.txt");
  CHECK(no_flag.exit_code == 1);
  CHECK(error_line(no_flag.err, "usage"));
  const Run bad_flag = cli("synth --output s.tsv --users -3");
  CHECK(bad_flag.exit_code != 0);
  CHECK(count_lines(bad_flag.err) == 1);
  CHECK(cli("synth --output s.tsv --bogus 1").exit_code == 1);
}

TEST_CASE("configuration precedence") {
  REQUIRE(cli("synth --output seed5.tsv --seed 5").exit_code == 0);
  REQUIRE(cli("synth --output seed6.tsv --seed 6").exit_code == 0);
  REQUIRE(cli("synth --output seed0.tsv").exit_code == 0);
  const std::string seed5 = slurp(workdir() / "seed5.tsv");
  const std::string seed6 = slurp(workdir() / "seed6.tsv");
  const std::string seed0 = slurp(workdir() / "seed0.tsv");
  REQUIRE(seed5 != seed6);
  REQUIRE(seed5 != seed0);
  {
    std::ofstream config(workdir() / "run.conf");
    config << "# defaults\nseed = 5\n\nusers = 100\nmetric = NDCG@5\n";
  }
  REQUIRE(cli("--config run.conf synth --output c.tsv").exit_code == 0);
  CHECK(slurp(workdir() / "c.tsv") == seed5);
  REQUIRE(cli("--config run.conf synth --output c.tsv --seed 6").exit_code == 0);
  CHECK(slurp(workdir() / "c.tsv") == seed6);
  REQUIRE(cli("synth --output e.tsv", "RECZILLA_SEED=5").exit_code == 0);
  CHECK(slurp(workdir() / "e.tsv") == seed5);
  REQUIRE(cli("synth --output e.tsv --seed 6", "RECZILLA_SEED=5").exit_code == 0);
  CHECK(slurp(workdir() / "e.tsv") == seed6);
  {
    std::ofstream config(workdir() / "bad.conf");
    config << "no_such_key = 1\n";
  }
  const Run bad = cli("--config bad.conf synth --output c.tsv");
  CHECK(bad.exit_code == 1);
  CHECK(error_line(bad.err, "usage"));
}

TEST_CASE("end-to-end workflow") {
  build_corpus("flow");
  REQUIRE(cli("train --results flow/md --model flow/model.txt --metric PRECISION@10 --n 10 --m 10 --pareto")
              .exit_code == 0);
  CHECK(fs::exists(workdir() / "flow/model.txt.time"));
  REQUIRE(cli("synth --output flow/query.tsv --seed 99").exit_code == 0);
  const Run select = cli("select --model flow/model.txt --dataset flow/query.tsv");
  REQUIRE(select.exit_code == 0);
  CHECK(count_lines(select.out) == 2);
  CHECK(select.out.rfind("dataset_id\talgorithm\thp_index\thyperparameters\ttarget\tpredicted\n", 0) == 0);
  const Run pareto = cli("select --model flow/model.txt --dataset flow/query.tsv --pareto");
  CHECK(pareto.exit_code == 0);
  CHECK(count_lines(pareto.out) >= 2);

  // n = 1 always names the model's single algorithm.
  REQUIRE(cli("train --results flow/md --model flow/one.txt --n 1 --m 3").exit_code == 0);
  const std::string model = slurp(workdir() / "flow/one.txt");
  const auto at = model.find("[algorithms]");
  REQUIRE(at != std::string::npos);
  std::istringstream section(model.substr(at));
  std::string header, algorithm_line;
  std::getline(section, header);
  std::getline(section, algorithm_line);
  const std::string algorithm = algorithm_line.substr(0, algorithm_line.find_first_of("\t "));
  const Run one = cli("select --model flow/one.txt --dataset flow/query.tsv");
  REQUIRE(one.exit_code == 0);
  CHECK(one.out.find("\t" + algorithm + "\t") != std::string::npos);

  for (const std::string report : {"ranks", "correlation", "hardness", "transfer"}) {
    const Run r = cli("analyze --results flow/md --report " + report);
    CHECK(r.exit_code == 0);
    CHECK(r.out.rfind("#generated=", 0) == 0);
  }
  CHECK(cli("catalog").out.find("iALS") != std::string::npos);
}

TEST_CASE("loocv emits trials times folds rows") {
  build_corpus("cv");
  const Run r = cli("loocv --results cv/md --trials 5 --n 2 --m 3 --rows-output cv/rows.tsv");
  REQUIRE(r.exit_code == 0);
  const std::string table = strip_generated(r.out);
  CHECK(table.rfind("#", 0) != 0);
  CHECK(count_lines(table) == 1 + 5 * 2);
  CHECK(count_lines(strip_generated(slurp(workdir() / "cv/rows.tsv"))) == 1 + 5 * 4);
}

TEST_CASE("identical inputs give identical bytes") {
  build_corpus("det");
  std::vector<std::string> runs;
  for (const std::string jobs : {"1", "2"}) {
    const std::string tag = "det" + jobs;
    REQUIRE(cli("train --results det/md --model " + tag + ".txt --n 3 --m 4 --regressor gbt-chain --trees 20")
                .exit_code == 0);
    const Run select = cli("select --model " + tag + ".txt --dataset det/d1.tsv");
    const Run cv = cli("loocv --results det/md --trials 2 --n 3 --m 4 --jobs " + jobs);
    const Run features = cli("metafeatures --dataset det/d2.tsv --output " + tag + ".features --seed 3");
    REQUIRE(select.exit_code == 0);
    REQUIRE(cv.exit_code == 0);
    REQUIRE(features.exit_code == 0);
    runs.push_back(slurp(workdir() / (tag + ".txt")) + select.out + strip_generated(cv.out) +
                   slurp(workdir() / (tag + ".features")));
  }
  CHECK(runs[0] == runs[1]);
}
