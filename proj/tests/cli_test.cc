/*
 * Copyright 2026 The smddp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.h"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "smddp/dataset_io.h"
#include "smddp/harness.h"
#include "smddp/transcript.h"

namespace smddp::cli {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  int code = 0;
  std::string out;
  std::string err;
};

Outcome Invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "smddp");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = Main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::size_t CountLines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("smddp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override {
    ::unsetenv(kConfigEnv);
    fs::remove_all(dir_);
  }
  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(CliTest, NoArgumentsPrintsUsage) {
  auto r = Invoke({});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_NE(r.out.find("sweep"), std::string::npos);
}

TEST_F(CliTest, HelpExitsCleanly) {
  EXPECT_EQ(Invoke({"--help"}).code, kExitOk);
  EXPECT_EQ(Invoke({"run", "--help"}).code, kExitOk);
}

TEST_F(CliTest, UnknownFlagIsUsageError) {
  EXPECT_EQ(Invoke({"run", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(Invoke({"frobnicate"}).code, kExitUsage);
}

TEST_F(CliTest, AlphaFlagsConflict) {
  EXPECT_EQ(Invoke({"run", "--alpha", "2", "--alpha-equals-n"}).code, kExitUsage);
}

TEST_F(CliTest, KeygenRunAndInspect) {
  auto kg = Invoke({"keygen", "--bits", "1024", "--seed", "4", "--out", Path("key")});
  ASSERT_EQ(kg.code, kExitOk) << kg.err;
  EXPECT_TRUE(fs::exists(Path("key.pub")));
  EXPECT_TRUE(fs::exists(Path("key.sec")));

  auto run = Invoke({"run", "--parties", "3", "--epsilon", "1.6", "--alpha-equals-n", "--p", "0.9",
                     "--data", "synth:300x8", "--seed", "7", "--key", Path("key"), "--transcript",
                     Path("t.txt")});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  EXPECT_NE(run.out.find("model (9 coefficients, intercept first)"), std::string::npos);
  for (int j = 0; j < 9; ++j) {
    EXPECT_NE(run.out.find("w[" + std::to_string(j) + "] = "), std::string::npos);
  }
  EXPECT_NE(run.out.find("Err = "), std::string::npos);
  EXPECT_NE(run.out.find("timings_ms"), std::string::npos);

  auto dump = protocol::ReadTranscriptDump(Path("t.txt"));
  EXPECT_EQ(dump.entries.size(), 8u);

  auto inspect = Invoke({"inspect-transcript", Path("t.txt")});
  ASSERT_EQ(inspect.code, kExitOk) << inspect.err;
  EXPECT_NE(inspect.out.find("8 messages"), std::string::npos);
  EXPECT_NE(inspect.out.find("bounds=3"), std::string::npos);
  EXPECT_NE(inspect.out.find("aggregate=3"), std::string::npos);
}

TEST_F(CliTest, RunIsDeterministicWithKey) {
  ASSERT_EQ(Invoke({"keygen", "--bits", "1024", "--seed", "1", "--out", Path("k")}).code, kExitOk);
  std::vector<std::string> args{"run", "-n", "2", "--data", "synth:100x2", "--key", Path("k")};
  auto a = Invoke(args);
  auto b = Invoke(args);
  ASSERT_EQ(a.code, kExitOk) << a.err;
  EXPECT_EQ(a.out.substr(0, a.out.find("timings_ms")), b.out.substr(0, b.out.find("timings_ms")));
}

TEST_F(CliTest, GenDataThenRunFromCsv) {
  auto gen = Invoke({"gen-data", "--rows", "120", "-d", "3", "--seed", "2", "--out", Path("d.csv")});
  ASSERT_EQ(gen.code, kExitOk) << gen.err;
  auto data = harness::LoadCsv(Path("d.csv"));
  EXPECT_EQ(data.rows(), 120);
  EXPECT_EQ(data.attrs(), 3);
  ASSERT_EQ(Invoke({"keygen", "--bits", "1024", "--seed", "1", "--out", Path("k")}).code, kExitOk);
  auto run = Invoke({"run", "-n", "2", "--no-noise", "--data", Path("d.csv"), "--key", Path("k")});
  ASSERT_EQ(run.code, kExitOk) << run.err;
  EXPECT_NE(run.out.find("4 coefficients"), std::string::npos);
}

TEST_F(CliTest, MissingDataFileIsRuntimeError) {
  auto r = Invoke({"run", "--data", Path("absent.csv")});
  EXPECT_EQ(r.code, kExitRuntime);
  EXPECT_NE(r.err.find("absent.csv"), std::string::npos);
}

TEST_F(CliTest, InvalidParameterIsUsageError) {
  auto r = Invoke({"sweep", "--p", "1.5", "--repeats", "1", "--data", "synth:50x2"});
  EXPECT_EQ(r.code, kExitUsage);
}

TEST_F(CliTest, SweepThreeModesTimesEightEpsilons) {
  auto r = Invoke({"sweep", "--mode", "cdp,ddp,nodp", "--repeats", "2", "--folds", "2",
                   "--data", "synth:200x3", "--out", Path("res.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto rows = harness::ReadResultsCsv(Path("res.csv"));
  ASSERT_EQ(rows.size(), 24u);
  EXPECT_EQ(rows.front().mode, harness::Mode::kCdp);
  EXPECT_EQ(rows.front().epsilon, 0.1);
  EXPECT_EQ(rows.back().mode, harness::Mode::kNoDp);
  EXPECT_EQ(rows.back().epsilon, 12.8);
}

TEST_F(CliTest, SweepToStdout) {
  auto r = Invoke({"sweep", "--eps", "1,2", "--alpha", "1,n", "--repeats", "1", "--folds", "2",
                   "--data", "synth:100x2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(harness::ParseResultsCsv(r.out).size(), 4u);
}

TEST_F(CliTest, ConfigFileAndFlagPrecedence) {
  std::ofstream(Path("cfg.ini")) << "[sweep]\nrepeats = 1\nfolds = 2\nparties = 2\nunrelated = 5\n";
  auto r = Invoke({"sweep", "--config", Path("cfg.ini"), "--eps", "1", "--data", "synth:100x2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto rows = harness::ParseResultsCsv(r.out);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].n, 2u);
  EXPECT_EQ(rows[0].mse_stddev, 0.0);  // a single repeat has no spread

  r = Invoke({"sweep", "--config", Path("cfg.ini"), "--parties", "4", "--eps", "1", "--data",
              "synth:100x2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(harness::ParseResultsCsv(r.out)[0].n, 4u);
}

TEST_F(CliTest, ConfigFromEnvironment) {
  std::ofstream(Path("env.ini")) << "[sweep]\nparties = 5\nrepeats = 1\nfolds = 2\n";
  ::setenv(kConfigEnv, Path("env.ini").c_str(), 1);
  auto r = Invoke({"sweep", "--eps", "1", "--data", "synth:100x2"});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(harness::ParseResultsCsv(r.out)[0].n, 5u);
}

TEST_F(CliTest, BenchPrintsTimingCsv) {
  auto r = Invoke({"bench", "--parties", "1,2", "--attrs", "2", "--rows", "40", "--out",
                   Path("bench.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  std::ifstream in(Path("bench.csv"));
  std::stringstream text;
  text << in.rdbuf();
  EXPECT_EQ(CountLines(text.str()), 3u);
}

TEST_F(CliTest, KeygenRejectsSmallKeys) {
  EXPECT_EQ(Invoke({"keygen", "--bits", "256", "--out", Path("k")}).code, kExitUsage);
}

}  // namespace
}  // namespace smddp::cli
