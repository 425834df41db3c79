// Copyright 2026 The COLE Authors.
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


#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <gtest/gtest.h>
#include <json.hpp>

#include "cole/cli.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;
using cole::testing::fixture;

struct Run {
  int code;
  std::string out, err;
};

Run run(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::ostringstream out, err;
  std::istringstream in(stdin_text);
  const int code = cole::cli::run_cli(args, out, err, in);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cole_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(Cli, TranspileGoldenFromStdin) {
  const auto r = run({"transpile", "-", "--mode", "helper"}, fixture("nb201_arch.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fixture("cell_helper.py"));
  const auto inl = run({"transpile", "-", "--mode", "inline"}, fixture("nb201_arch.txt"));
  EXPECT_EQ(inl.out, fixture("cell_inline.py"));
}

TEST_F(Cli, TranspileEinspace) {
  spit(path("tree.txt"), fixture("einspace_tree.txt"));
  const auto r = run({"transpile", path("tree.txt")});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, fixture("einspace_network.py"));
}

TEST_F(Cli, TranspileJsonlAndOutDir) {
  const std::string archs = "# two cells\n|skip_connect~0|+|none~0|none~1|+|none~0|none~1|none~2|\n" +
                            fixture("nb201_arch.txt");
  spit(path("archs.txt"), archs);
  const auto r = run({"transpile", path("archs.txt"), "--format", "jsonl"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string line;
  int n = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("arch_id"));
    EXPECT_TRUE(j.contains("code"));
    ++n;
  }
  EXPECT_EQ(n, 2);

  const auto d = run({"transpile", path("archs.txt"), "--out-dir", path("emitted")});
  ASSERT_EQ(d.code, 0) << d.err;
  EXPECT_TRUE(fs::exists(dir_ / "emitted" / "arch_00001.py"));
  EXPECT_TRUE(fs::exists(dir_ / "emitted" / "arch_00002.py"));
  EXPECT_TRUE(fs::exists(dir_ / "emitted" / "index.jsonl"));
  EXPECT_TRUE(fs::exists(dir_ / "emitted" / "resolved_config.json"));
}

TEST_F(Cli, TranspileErrors) {
  const auto empty = run({"transpile", "-"}, "\n\n");
  EXPECT_EQ(empty.code, 1);
  EXPECT_NE(empty.err.find("no inputs"), std::string::npos);

  const std::string mixed = fixture("nb201_arch.txt") + "|bogus~0|+|none~0|none~1|+|none~0|none~1|none~2|\n";
  const auto strict = run({"transpile", "-"}, mixed);
  EXPECT_EQ(strict.code, 1);
  EXPECT_TRUE(strict.out.empty());
  EXPECT_NE(strict.err.find("<stdin>:2"), std::string::npos) << strict.err;
  const auto lenient = run({"transpile", "-", "--continue-on-error"}, mixed);
  EXPECT_EQ(lenient.code, 1);
  EXPECT_FALSE(lenient.out.empty());

  EXPECT_EQ(run({"transpile", path("missing.txt")}).code, 1);
  EXPECT_EQ(run({"transpile", "-", "--mode", "verbose"}, fixture("nb201_arch.txt")).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST_F(Cli, EmbedIsIdempotent) {
  const std::string cache = path("cache.jsonl");
  spit(path("archs.txt"), fixture("nb201_arch.txt") + "|skip_connect~0|+|none~0|none~1|+|none~0|none~1|none~2|\n");
  const auto first = run({"embed", path("archs.txt"), "--provider", "hash", "--dim", "32", "--cache", cache});
  ASSERT_EQ(first.code, 0) << first.err;
  EXPECT_NE(first.out.find("texts=2 provider_calls=1 embedded=2 cache_hits=0 cache_size=2"), std::string::npos)
      << first.out;
  const std::string bytes = slurp(cache);
  const auto second = run({"embed", path("archs.txt"), "--provider", "hash", "--dim", "32", "--cache", cache});
  ASSERT_EQ(second.code, 0) << second.err;
  EXPECT_NE(second.out.find("provider_calls=0"), std::string::npos) << second.out;
  EXPECT_NE(second.out.find("cache_hits=2"), std::string::npos);
  EXPECT_EQ(slurp(cache), bytes);

  // A different width with the same cache is a mismatch, not a silent reuse.
  const auto clash = run({"embed", path("archs.txt"), "--provider", "hash", "--dim", "16", "--cache", cache});
  EXPECT_EQ(clash.code, 1);
  EXPECT_EQ(run({"embed", "--provider", "hash", "--cache", cache}).code, 1);
}

TEST_F(Cli, EmbedUnreachableRemoteIsRuntimeError) {
  spit(path("archs.txt"), fixture("nb201_arch.txt"));
  const auto r = run({"embed", path("archs.txt"), "--provider", "remote", "--url", "http://127.0.0.1:9/embed",
                      "--cache", path("c.jsonl")});
  EXPECT_EQ(r.code, 2) << r.err;
  EXPECT_NE(r.err.find("failed keys"), std::string::npos) << r.err;
}

std::vector<std::string> small_cv(const std::string& out) {
  return {"cv", "--representation", "path", "--budgets", "14", "--trial-seeds", "0", "1", "--epochs", "5",
          "--out", out};
}

TEST_F(Cli, CvWritesResultsDeterministically) {
  const auto a = run(small_cv(path("a")));
  ASSERT_EQ(a.code, 0) << a.err;
  const auto b = run(small_cv(path("b")));
  ASSERT_EQ(b.code, 0) << b.err;
  const std::string results = slurp(dir_ / "a" / "results.csv");
  EXPECT_EQ(results, slurp(dir_ / "b" / "results.csv"));
  EXPECT_EQ(slurp(dir_ / "a" / "summary.json"), slurp(dir_ / "b" / "summary.json"));
  // Header plus 10 folds x 2 seeds.
  EXPECT_EQ(std::count(results.begin(), results.end(), '\n'), 21);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "resolved_config.json"));
  EXPECT_NE(a.out.find("config,budget,trials"), std::string::npos);

  const auto rep = run({"report", "--results", path("a/results.csv"), "--out", path("rep")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_EQ(slurp(dir_ / "rep" / "summary.csv"), slurp(dir_ / "a" / "summary.csv"));
}

TEST_F(Cli, ResolvedConfigReplays) {
  ASSERT_EQ(run(small_cv(path("a"))).code, 0);
  const auto r = run({"cv", "--config", path("a/resolved_config.json"), "--out", path("b")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir_ / "a" / "results.csv"), slurp(dir_ / "b" / "results.csv"));
}

TEST_F(Cli, ConfigErrors) {
  spit(path("bad.json"), R"({"version": 1, "sed": 3})");
  const auto r = run({"cv", "--config", path("bad.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("sed"), std::string::npos) << r.err;
  spit(path("noversion.json"), R"({"seed": 3})");
  EXPECT_EQ(run({"cv", "--config", path("noversion.json")}).code, 1);
  spit(path("broken.json"), "{");
  EXPECT_EQ(run({"cv", "--config", path("broken.json")}).code, 1);
  EXPECT_EQ(run({"cv", "--budgets", "99999", "--representation", "path", "--out", path("x")}).code, 1);
  EXPECT_EQ(run({"cv", "--task", "mnist"}).code, 1);
}

TEST_F(Cli, OracleCsvRoundTrip) {
  const std::string csv = std::string(cole::oracle::kCsvHeader) + "\n" +
                          "\"|none~0|+|none~0|none~1|+|none~0|none~1|none~2|\",10,101,10\n";
  spit(path("bench.csv"), csv);
  const auto r = run({"cv", "--oracle", path("bench.csv"), "--representation", "path"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("bench.csv:2"), std::string::npos) << r.err;
}

TEST_F(Cli, SearchAndReport) {
  const std::vector<std::string> args = {"search", "--trials", "2", "--budget", "30", "--representation", "path",
                                         "--representation", "random", "--epochs", "5", "--out", path("s")};
  const auto a = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  const auto summary = nlohmann::json::parse(slurp(dir_ / "s" / "search_summary.json"));
  EXPECT_EQ(summary["trials"], 2);
  EXPECT_EQ(summary["budget"], 30);
  EXPECT_TRUE(summary["representations"].contains("path"));
  EXPECT_TRUE(summary["representations"].contains("random"));
  EXPECT_TRUE(fs::exists(dir_ / "s" / "comparison_path_vs_random.csv"));
  const std::string trace = slurp(dir_ / "s" / "traces" / "path" / "trial_0001.csv");
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 31);
  const auto header = nlohmann::json::parse(slurp(dir_ / "s" / "traces" / "path" / "trial_0001.json"));
  EXPECT_EQ(header["retrain_points"], nlohmann::json({20}));

  std::vector<std::string> b_args = args;
  b_args.back() = path("t");
  ASSERT_EQ(run(b_args).code, 0);
  EXPECT_EQ(trace, slurp(dir_ / "t" / "traces" / "path" / "trial_0001.csv"));

  const auto rep = run({"report", "--trace-a", path("s/traces/path/trial_0001.csv"), path("s/traces/path/trial_0002.csv"),
                        "--trace-b", path("s/traces/random/trial_0001.csv"), path("s/traces/random/trial_0002.csv"),
                        "--out", path("r")});
  ASSERT_EQ(rep.code, 0) << rep.err;
  EXPECT_NE(rep.out.find("median_evals_a="), std::string::npos);
  EXPECT_EQ(slurp(dir_ / "r" / "comparison.csv"), slurp(dir_ / "s" / "comparison_path_vs_random.csv"));

  EXPECT_EQ(run({"report", "--trace-a", path("s/traces/path/trial_0001.csv")}).code, 1);
  EXPECT_EQ(run({"report"}).code, 1);
}

}  // namespace
