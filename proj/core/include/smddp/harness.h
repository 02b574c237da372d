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


#ifndef SMDDP_HARNESS_H_
#define SMDDP_HARNESS_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "smddp/dp_fm.h"
#include "smddp/linmodel.h"
#include "smddp/paillier.h"
#include "smddp/protocol.h"

namespace smddp::harness {

enum class Mode { kCdp, kDdp, kNoDp };

std::string_view ModeName(Mode mode);  // "cdp", "ddp", "nodp"
Mode ParseMode(std::string_view name);

struct AlphaRule {
  enum class Kind { kFixed, kEqualToN };
  Kind kind = Kind::kFixed;
  double value = 1.0;

  static AlphaRule Fixed(double alpha) { return {Kind::kFixed, alpha}; }
  static AlphaRule EqualToN() { return {Kind::kEqualToN, 0.0}; }
  double Resolve(std::uint32_t n_parties) const;
  std::string ToString() const;  // "n" or the number
  static AlphaRule Parse(std::string_view text);
};

struct DataSource {
  enum class Kind { kSynthetic, kCsv };
  Kind kind = Kind::kSynthetic;
  std::filesystem::path path;
  std::int64_t rows = 1000;
  std::int64_t attrs = 8;
  double noise_sd = 0.1;
  std::uint64_t seed = 1;

  linmodel::Dataset Load() const;
};

struct ExperimentSpec {
  Mode mode = Mode::kDdp;
  std::vector<double> epsilons{1.0};
  double p = 0.9;
  AlphaRule alpha;
  dpfm::ScalingMode scaling = dpfm::ScalingMode::kGeometricPerParty;
  std::uint32_t n_parties = 1;
  std::uint32_t repeats = 100;
  std::uint32_t folds = 5;  // 1 evaluates in-sample
  std::uint64_t seed = 0;
  DataSource data;
  // Run the encrypted ring protocol instead of its plaintext equivalent.
  // Both give the same model up to fixed-point quantization.
  bool secure = false;
  int key_bits = ahe::kMinKeyBits;
  protocol::TransportKind transport = protocol::TransportKind::kInProcess;
  bool normalized_mse = false;
  dpfm::TrimParams trim;
  linmodel::NormalizeOptions normalize;

  void Validate() const;
};

struct ResultRow {
  Mode mode = Mode::kDdp;
  double epsilon = 0.0;
  double p = 0.0;
  double alpha = 0.0;
  std::uint32_t n = 0;
  double mean_mse = 0.0;
  double mse_stddev = 0.0;  // sample stddev across repeats
  double keygen_ms = 0.0;
  double minmax_ms = 0.0;
  double regression_ms = 0.0;
  double total_ms = 0.0;

  friend bool operator==(const ResultRow&, const ResultRow&) = default;
};

// One row per epsilon. Repeat r re-splits parties and folds from (seed, r).
std::vector<ResultRow> RunExperiment(const ExperimentSpec& spec);
std::vector<ResultRow> RunExperiment(const ExperimentSpec& spec, const linmodel::Dataset& data);

// Per-repeat MSE values behind a RunExperiment row, for variance checks.
std::vector<std::vector<double>> RunExperimentRaw(const ExperimentSpec& spec,
                                                  const linmodel::Dataset& data);

struct SweepGrid {
  std::vector<Mode> modes;
  std::vector<double> epsilons;
  std::vector<double> ps;
  std::vector<AlphaRule> alphas;
  std::vector<std::uint32_t> parties;

  void Validate() const;
};

// Cartesian product over the grid, using base for all other fields. Rows are
// ordered mode, p, alpha, n, epsilon (epsilon fastest).
std::vector<ResultRow> Sweep(const ExperimentSpec& base, const SweepGrid& grid);
std::vector<ResultRow> Sweep(const ExperimentSpec& base, const SweepGrid& grid,
                             const linmodel::Dataset& data);

// Single model fit on fixed party data; exposed for tests and the CLI.
struct FitResult {
  linmodel::ModelResult model;
  protocol::PhaseTimings timings;
};
FitResult FitModel(Mode mode, std::span<const linmodel::Dataset> parties,
                   const dpfm::PrivacyParams& privacy, const ExperimentSpec& spec,
                   std::uint64_t run_index,
                   const std::shared_ptr<const ahe::KeyPair>& key_pair = nullptr);

double EvaluateMse(const linmodel::ModelResult& model, const linmodel::Dataset& test,
                   const linmodel::NormalizeOptions& normalize, bool normalized_space);

std::string FormatResultsCsv(std::span<const ResultRow> rows);
void WriteResultsCsv(std::span<const ResultRow> rows, const std::filesystem::path& path);
std::vector<ResultRow> ParseResultsCsv(std::string_view text);
std::vector<ResultRow> ReadResultsCsv(const std::filesystem::path& path);

struct BenchSpec {
  std::vector<std::uint32_t> parties{2, 4, 8};
  std::vector<std::int64_t> attrs{8};
  std::vector<std::int64_t> rows{1000};  // total rows, split across parties
  int key_bits = ahe::kMinKeyBits;
  std::uint64_t seed = 0;
  protocol::TransportKind transport = protocol::TransportKind::kInProcess;
  bool noise_enabled = true;
  // Reuse one key per key size so cells measure the protocol, not prime
  // search. keygen_ms is then the one-off generation time.
  bool share_keys = true;

  void Validate() const;
};

struct TimingRow {
  std::uint32_t n = 0;
  std::int64_t d = 0;
  std::int64_t rows = 0;
  int key_bits = 0;
  double keygen_ms = 0.0;
  double minmax_ms = 0.0;
  double regression_ms = 0.0;
  double reconstruction_ms = 0.0;
  double total_ms = 0.0;
};

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Needs two distinct x.
LinearFit FitLine(std::span<const double> x, std::span<const double> y);

struct RegressionFit {
  std::int64_t d = 0;
  std::int64_t rows = 0;
  LinearFit fit;  // regression_ms against n
};

struct BenchReport {
  std::vector<TimingRow> rows;
  std::vector<RegressionFit> fits;
};

BenchReport BenchOverhead(const BenchSpec& spec);

std::string FormatTimingCsv(std::span<const TimingRow> rows);
void WriteTimingCsv(std::span<const TimingRow> rows, const std::filesystem::path& path);

}  // namespace smddp::harness

#endif  // SMDDP_HARNESS_H_
