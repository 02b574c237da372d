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

#include "smddp/harness.h"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "smddp/dataset_io.h"
#include "smddp/error.h"
#include "support/oracles.h"

namespace smddp::harness {
namespace {

ExperimentSpec SyntheticSpec(Mode mode, std::uint32_t n) {
  ExperimentSpec spec;
  spec.mode = mode;
  spec.n_parties = n;
  spec.repeats = 4;
  spec.folds = 2;
  spec.seed = 3;
  spec.data.rows = 600;
  spec.data.attrs = 3;
  spec.data.noise_sd = 1.0;
  return spec;
}

TEST(HarnessTest, NoDpInSampleMatchesOracleOls) {
  auto data = GenerateSynthetic(400, 4, 0.3, 2).data;
  const double oracle = testing::OracleOlsMse(data, data);
  for (std::uint32_t n : {1u, 2u, 7u}) {
    auto spec = SyntheticSpec(Mode::kNoDp, n);
    spec.folds = 1;
    spec.repeats = 2;
    spec.epsilons = {0.1, 1.0};
    auto rows = RunExperiment(spec, data);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
      EXPECT_NEAR(r.mean_mse, oracle, 1e-6 * oracle) << "n=" << n;
      EXPECT_NEAR(r.mse_stddev, 0.0, 1e-9);
      EXPECT_EQ(r.mode, Mode::kNoDp);
      EXPECT_EQ(r.n, n);
    }
  }
}

TEST(HarnessTest, NoDpFoldMseIndependentOfParties) {
  auto data = GenerateSynthetic(300, 3, 0.5, 5).data;
  auto a = RunExperiment(SyntheticSpec(Mode::kNoDp, 1), data);
  auto b = RunExperiment(SyntheticSpec(Mode::kNoDp, 5), data);
  EXPECT_NEAR(a[0].mean_mse, b[0].mean_mse, 1e-9 * a[0].mean_mse);
}

TEST(HarnessTest, Deterministic) {
  auto spec = SyntheticSpec(Mode::kDdp, 3);
  spec.epsilons = {0.8, 3.2};
  auto a = RunExperiment(spec);
  auto b = RunExperiment(spec);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].mean_mse, b[i].mean_mse);
    EXPECT_EQ(a[i].mse_stddev, b[i].mse_stddev);
  }
  spec.seed += 1;
  EXPECT_NE(RunExperiment(spec)[0].mean_mse, a[0].mean_mse);
}

TEST(HarnessTest, RawMatchesSummary) {
  auto spec = SyntheticSpec(Mode::kCdp, 2);
  spec.epsilons = {1.0, 4.0};
  auto data = spec.data.Load();
  auto raw = RunExperimentRaw(spec, data);
  auto rows = RunExperiment(spec, data);
  ASSERT_EQ(raw.size(), 2u);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    ASSERT_EQ(raw[i].size(), spec.repeats);
    EXPECT_DOUBLE_EQ(rows[i].mean_mse, testing::Mean(raw[i]));
    EXPECT_DOUBLE_EQ(rows[i].mse_stddev, std::sqrt(testing::SampleVariance(raw[i])));
  }
}

TEST(HarnessTest, DdpNoiseShrinksWithEpsilon) {
  auto spec = SyntheticSpec(Mode::kDdp, 3);
  spec.data.rows = 3000;
  spec.repeats = 6;
  spec.alpha = AlphaRule::EqualToN();
  spec.epsilons = {0.2, 12.8};
  auto rows = RunExperiment(spec);
  EXPECT_GT(rows[0].mean_mse, rows[1].mean_mse);
  auto nodp = SyntheticSpec(Mode::kNoDp, 3);
  nodp.data = spec.data;
  nodp.repeats = spec.repeats;
  nodp.epsilons = {12.8};
  EXPECT_GE(rows[1].mean_mse, 0.9 * RunExperiment(nodp)[0].mean_mse);
}

TEST(HarnessTest, LargerAlphaMeansLessNoise) {
  auto spec = SyntheticSpec(Mode::kDdp, 10);
  spec.data.rows = 3000;
  spec.repeats = 6;
  spec.epsilons = {3.2};
  double previous = std::numeric_limits<double>::infinity();
  for (double alpha : {1.0, 10.0, 100.0}) {
    spec.alpha = AlphaRule::Fixed(alpha);
    const double mse = RunExperiment(spec)[0].mean_mse;
    EXPECT_LT(mse, previous) << "alpha=" << alpha;
    previous = mse;
  }
}

TEST(HarnessTest, SecureRouteMatchesPlaintextRoute) {
  auto data = GenerateSynthetic(200, 3, 0.5, 9).data;
  auto parties = SplitHorizontal(data, 3, 1);
  auto spec = SyntheticSpec(Mode::kDdp, 3);
  dpfm::PrivacyParams privacy{12.8, 3.0, 0.9, dpfm::ScalingMode::kGeometricPerParty};
  auto key = testing::TestKey(1024);
  for (Mode mode : {Mode::kDdp, Mode::kNoDp}) {
    spec.mode = mode;
    spec.secure = false;
    auto plain = FitModel(mode, parties, privacy, spec, 4);
    spec.secure = true;
    auto secure = FitModel(mode, parties, privacy, spec, 4, key);
    const double scale = std::max(1.0, plain.model.w.cwiseAbs().maxCoeff());
    EXPECT_LE((plain.model.w - secure.model.w).cwiseAbs().maxCoeff(), 1e-4 * scale)
        << ModeName(mode);
    EXPECT_GT(secure.timings.regression_ms, 0.0);
  }
}

TEST(HarnessTest, EvaluateMseSpaces) {
  auto data = GenerateSynthetic(100, 2, 0.1, 1).data;
  auto parties = SplitHorizontal(data, 1, 1);
  auto spec = SyntheticSpec(Mode::kNoDp, 1);
  auto fit = FitModel(Mode::kNoDp, parties, {}, spec, 0);
  const double raw = EvaluateMse(fit.model, data, {}, false);
  const double norm = EvaluateMse(fit.model, data, {}, true);
  const double range = fit.model.bounds.max(2) - fit.model.bounds.min(2);
  EXPECT_NEAR(raw, norm * range * range, 1e-9 * raw);
}

TEST(HarnessTest, SpecValidation) {
  auto spec = SyntheticSpec(Mode::kDdp, 2);
  spec.p = 1.0;
  EXPECT_THROW(spec.Validate(), InvalidArgumentError);
  spec = SyntheticSpec(Mode::kDdp, 0);
  EXPECT_THROW(spec.Validate(), InvalidArgumentError);
  spec = SyntheticSpec(Mode::kDdp, 2);
  spec.epsilons = {};
  EXPECT_THROW(spec.Validate(), InvalidArgumentError);
  spec.epsilons = {-1.0};
  EXPECT_THROW(spec.Validate(), InvalidArgumentError);
  spec = SyntheticSpec(Mode::kDdp, 2);
  spec.repeats = 0;
  EXPECT_THROW(spec.Validate(), InvalidArgumentError);
}

TEST(HarnessTest, NamesAndAlphaRules) {
  EXPECT_EQ(ParseMode("cdp"), Mode::kCdp);
  EXPECT_EQ(ModeName(Mode::kNoDp), "nodp");
  EXPECT_THROW(ParseMode("ldp"), InvalidArgumentError);
  EXPECT_EQ(AlphaRule::Parse("n").Resolve(7), 7.0);
  EXPECT_EQ(AlphaRule::Parse("2.5").Resolve(7), 2.5);
  EXPECT_EQ(AlphaRule::EqualToN().ToString(), "n");
  EXPECT_THROW(AlphaRule::Parse("abc"), InvalidArgumentError);
}

TEST(SweepTest, CartesianOrder) {
  auto base = SyntheticSpec(Mode::kDdp, 1);
  base.repeats = 2;
  base.data.rows = 200;
  SweepGrid grid{{Mode::kNoDp, Mode::kDdp}, {1.0, 2.0, 4.0}, {0.5, 0.9},
                 {AlphaRule::Fixed(1.0)}, {1u, 2u}};
  auto rows = Sweep(base, grid);
  ASSERT_EQ(rows.size(), 2u * 3 * 2 * 1 * 2);
  std::size_t i = 0;
  for (Mode m : grid.modes) {
    for (double p : grid.ps) {
      for (std::uint32_t n : grid.parties) {
        for (double eps : grid.epsilons) {
          EXPECT_EQ(rows[i].mode, m);
          EXPECT_EQ(rows[i].p, p);
          EXPECT_EQ(rows[i].n, n);
          EXPECT_EQ(rows[i].epsilon, eps);
          ++i;
        }
      }
    }
  }
}

TEST(SweepTest, EmptyGridRejected) {
  auto base = SyntheticSpec(Mode::kDdp, 1);
  SweepGrid grid{{Mode::kDdp}, {}, {0.9}, {AlphaRule::Fixed(1.0)}, {1u}};
  EXPECT_THROW(Sweep(base, grid), InvalidArgumentError);
  grid = SweepGrid{{}, {1.0}, {0.9}, {AlphaRule::Fixed(1.0)}, {1u}};
  EXPECT_THROW(Sweep(base, grid), InvalidArgumentError);
}

TEST(ResultsCsvTest, RoundTrip) {
  std::vector<ResultRow> rows{
      {Mode::kCdp, 0.1, 0.9, 1.0, 3, 1.2345678, 0.5, 10.25, 1.5, 2.5, 14.0},
      {Mode::kNoDp, 12.8, 0.5, 4.0, 20, 1e-3, 0.0, 0, 0, 0, 0},
  };
  auto back = ParseResultsCsv(FormatResultsCsv(rows));
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].mode, rows[i].mode);
    EXPECT_EQ(back[i].n, rows[i].n);
    EXPECT_NEAR(back[i].mean_mse, rows[i].mean_mse, 1e-8 * rows[i].mean_mse);
    EXPECT_NEAR(back[i].epsilon, rows[i].epsilon, 1e-12);
  }
  // Formatting reaches a fixed point after one round trip.
  EXPECT_EQ(FormatResultsCsv(back), FormatResultsCsv(ParseResultsCsv(FormatResultsCsv(back))));
}

TEST(ResultsCsvTest, EmptyIsHeaderOnly) {
  const std::string text = FormatResultsCsv({});
  EXPECT_EQ(text,
            "mode,epsilon,p,alpha,n,mean_mse,mse_stddev,keygen_ms,minmax_ms,regression_ms,"
            "total_ms\n");
  EXPECT_TRUE(ParseResultsCsv(text).empty());
}

TEST(ResultsCsvTest, FileRoundTripAndDeterministicBytes) {
  auto spec = SyntheticSpec(Mode::kDdp, 2);
  spec.epsilons = {1.0, 2.0};
  auto strip_timings = [](std::vector<ResultRow> rows) {
    for (auto& r : rows) r.keygen_ms = r.minmax_ms = r.regression_ms = r.total_ms = 0.0;
    return rows;
  };
  auto rows = strip_timings(RunExperiment(spec));
  const auto path = std::filesystem::temp_directory_path() / "smddp_results_test.csv";
  WriteResultsCsv(rows, path);
  std::stringstream first;
  first << std::ifstream(path).rdbuf();
  WriteResultsCsv(strip_timings(RunExperiment(spec)), path);
  std::stringstream second;
  second << std::ifstream(path).rdbuf();
  EXPECT_EQ(first.str(), second.str());
  EXPECT_EQ(ReadResultsCsv(path).size(), 2u);
  std::filesystem::remove(path);
}

TEST(ResultsCsvTest, MalformedRejected) {
  EXPECT_THROW(ParseResultsCsv("bogus\n"), DecodeError);
  EXPECT_THROW(ParseResultsCsv("mode,epsilon,p,alpha,n,mean_mse,mse_stddev,keygen_ms,minmax_ms,"
                               "regression_ms,total_ms\nddp,1\n"),
               DecodeError);
}

TEST(FitLineTest, ExactLine) {
  const double x[] = {1, 2, 3, 4};
  const double y[] = {3, 5, 7, 9};
  auto f = FitLine(x, y);
  EXPECT_NEAR(f.slope, 2.0, 1e-12);
  EXPECT_NEAR(f.intercept, 1.0, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
}

TEST(FitLineTest, NoisyLine) {
  const double x[] = {2, 4, 8, 16};
  const double y[] = {10.5, 19.0, 41.0, 79.5};
  auto f = FitLine(x, y);
  EXPECT_GT(f.r_squared, 0.99);
  EXPECT_LT(f.r_squared, 1.0);
  EXPECT_NEAR(f.slope, 5.0, 0.2);
}

TEST(FitLineTest, DegenerateRejected) {
  const double x[] = {1, 1};
  const double y[] = {1, 2};
  EXPECT_THROW(FitLine(x, y), InvalidArgumentError);
}

TEST(BenchTest, SmallGrid) {
  BenchSpec spec;
  spec.parties = {1, 2, 3};
  spec.rows = {60};
  spec.attrs = {2};
  auto report = BenchOverhead(spec);
  ASSERT_EQ(report.rows.size(), 3u);
  ASSERT_EQ(report.fits.size(), 1u);
  for (const auto& r : report.rows) {
    EXPECT_EQ(r.key_bits, 1024);
    EXPECT_GT(r.regression_ms, 0.0);
    EXPECT_GE(r.total_ms, r.regression_ms);
  }
  EXPECT_GT(report.fits[0].fit.slope, 0.0);
  const std::string csv = FormatTimingCsv(report.rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "n,d,rows,key_bits,keygen_ms,minmax_ms,regression_ms,reconstruction_ms,total_ms");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

}  // namespace
}  // namespace smddp::harness
