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

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "smddp/dataset_io.h"
#include "smddp/error.h"
#include "smddp/random.h"

namespace smddp::harness {

using linmodel::Dataset;
using linmodel::LocalStatistics;

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

std::uint64_t SeedWord(std::uint64_t master, std::string_view domain,
                       std::initializer_list<std::uint64_t> path) {
  const StreamSeed s = DeriveSeed(master, domain, path);
  std::uint64_t word = 0;
  for (int i = 0; i < 8; ++i) word = (word << 8) | s.bytes[static_cast<std::size_t>(i)];
  return word;
}

std::shared_ptr<const ahe::KeyPair> ExperimentKey(int bits, std::uint64_t seed,
                                                  double* elapsed_ms) {
  const auto start = Clock::now();
  CryptoRandom rng(DeriveSeed(seed, "experiment-keygen", {static_cast<std::uint64_t>(bits)}));
  auto keys = std::make_shared<const ahe::KeyPair>(ahe::GenerateKeyPair(bits, rng));
  if (elapsed_ms) *elapsed_ms = MillisSince(start);
  return keys;
}

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<std::string> SplitCsvLine(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double ParseReal(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) {
    throw DecodeError("results csv line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

constexpr std::string_view kResultsHeader =
    "mode,epsilon,p,alpha,n,mean_mse,mse_stddev,keygen_ms,minmax_ms,regression_ms,total_ms";
constexpr std::string_view kTimingHeader =
    "n,d,rows,key_bits,keygen_ms,minmax_ms,regression_ms,reconstruction_ms,total_ms";

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

struct Outcome {
  std::vector<ResultRow> rows;
  std::vector<std::vector<double>> per_repeat;  // [epsilon][repeat]
};

Outcome Execute(const ExperimentSpec& spec, const Dataset& data) {
  spec.Validate();
  const std::uint32_t n = spec.n_parties;
  const std::uint32_t folds = spec.folds;
  const double alpha = spec.alpha.Resolve(n);
  const std::size_t n_eps = spec.epsilons.size();
  const auto rows = static_cast<std::size_t>(data.rows());
  const std::size_t min_train = folds == 1 ? rows : rows - (rows + folds - 1) / folds;
  if (folds > 1 && rows < folds) {
    throw InvalidArgumentError("dataset has fewer rows than folds");
  }
  if (min_train < n) {
    throw InvalidArgumentError("training folds have fewer rows than parties");
  }

  double keygen_ms = 0.0;
  std::shared_ptr<const ahe::KeyPair> keys;
  if (spec.secure && spec.mode != Mode::kCdp) keys = ExperimentKey(spec.key_bits, spec.seed, &keygen_ms);

  Outcome out;
  out.per_repeat.assign(n_eps, std::vector<double>(spec.repeats, 0.0));
  std::vector<protocol::PhaseTimings> timing_sum(n_eps);
  const double runs = static_cast<double>(spec.repeats) * folds;

  std::vector<Eigen::Index> order(rows);
  for (std::uint32_t r = 0; r < spec.repeats; ++r) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    RandomStream fold_rng(DeriveSeed(spec.seed, "folds", {r}));
    fold_rng.Shuffle(order);

    for (std::uint32_t f = 0; f < folds; ++f) {
      std::vector<Eigen::Index> train;
      std::vector<Eigen::Index> test;
      if (folds == 1) {
        train = order;
        test = order;
      } else {
        const std::size_t lo = rows * f / folds;
        const std::size_t hi = rows * (f + 1) / folds;
        for (std::size_t i = 0; i < rows; ++i) (i >= lo && i < hi ? test : train).push_back(order[i]);
      }
      const std::uint64_t run = static_cast<std::uint64_t>(r) * folds + f;
      const Dataset test_set = data.Subset(test);
      const std::vector<Dataset> parties =
          SplitHorizontal(data.Subset(train), n, SeedWord(spec.seed, "split", {run}));

      auto fit_and_score = [&](std::size_t e) {
        dpfm::PrivacyParams privacy{spec.epsilons[e], alpha, spec.p, spec.scaling};
        FitResult fit = FitModel(spec.mode, parties, privacy, spec, run, keys);
        auto& t = timing_sum[e];
        t.keygen_ms += fit.timings.keygen_ms;
        t.minmax_ms += fit.timings.minmax_ms;
        t.regression_ms += fit.timings.regression_ms;
        t.reconstruction_ms += fit.timings.reconstruction_ms;
        t.total_ms += fit.timings.total_ms;
        return EvaluateMse(fit.model, test_set, spec.normalize, spec.normalized_mse);
      };

      if (spec.mode == Mode::kNoDp) {
        // Noise-free, so every epsilon shares one fit.
        const double mse = fit_and_score(0);
        for (std::size_t e = 0; e < n_eps; ++e) {
          out.per_repeat[e][r] += mse / folds;
          if (e > 0) timing_sum[e] = timing_sum[0];
        }
      } else {
        for (std::size_t e = 0; e < n_eps; ++e) out.per_repeat[e][r] += fit_and_score(e) / folds;
      }
    }
  }

  for (std::size_t e = 0; e < n_eps; ++e) {
    const auto& values = out.per_repeat[e];
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    ResultRow row;
    row.mode = spec.mode;
    row.epsilon = spec.epsilons[e];
    row.p = spec.p;
    row.alpha = alpha;
    row.n = n;
    row.mean_mse = mean;
    row.mse_stddev = values.size() > 1 ? std::sqrt(ss / (values.size() - 1)) : 0.0;
    row.keygen_ms = keygen_ms + timing_sum[e].keygen_ms / runs;
    row.minmax_ms = timing_sum[e].minmax_ms / runs;
    row.regression_ms = timing_sum[e].regression_ms / runs;
    row.total_ms = timing_sum[e].total_ms / runs;
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace

std::string_view ModeName(Mode mode) {
  switch (mode) {
    case Mode::kCdp:
      return "cdp";
    case Mode::kDdp:
      return "ddp";
    case Mode::kNoDp:
      return "nodp";
  }
  return "?";
}

Mode ParseMode(std::string_view name) {
  if (name == "cdp" || name == "CDP") return Mode::kCdp;
  if (name == "ddp" || name == "DDP") return Mode::kDdp;
  if (name == "nodp" || name == "NoDP" || name == "NODP") return Mode::kNoDp;
  throw InvalidArgumentError("unknown mode '" + std::string(name) + "' (expected cdp, ddp or nodp)");
}

double AlphaRule::Resolve(std::uint32_t n_parties) const {
  return kind == Kind::kEqualToN ? static_cast<double>(n_parties) : value;
}

std::string AlphaRule::ToString() const {
  return kind == Kind::kEqualToN ? "n" : FormatReal(value);
}

AlphaRule AlphaRule::Parse(std::string_view text) {
  if (text == "n") return EqualToN();
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size() || !(v > 0.0) || !std::isfinite(v)) {
    throw InvalidArgumentError("alpha must be a positive number or 'n', got '" + s + "'");
  }
  return Fixed(v);
}

Dataset DataSource::Load() const {
  if (kind == Kind::kCsv) return LoadCsv(path);
  return GenerateSynthetic(rows, attrs, noise_sd, seed).data;
}

void ExperimentSpec::Validate() const {
  if (epsilons.empty()) throw InvalidArgumentError("experiment needs at least one epsilon");
  for (double e : epsilons) {
    if (!(e > 0.0) || !std::isfinite(e)) throw InvalidArgumentError("every epsilon must be > 0");
  }
  if (repeats < 1) throw InvalidArgumentError("repeats must be at least 1");
  if (folds < 1) throw InvalidArgumentError("folds must be at least 1");
  if (n_parties < 1) throw InvalidArgumentError("n_parties must be at least 1");
  if (alpha.kind == AlphaRule::Kind::kFixed && !(alpha.value > 0.0)) {
    throw InvalidArgumentError("alpha must be positive");
  }
  if (!(p > 0.0 && p < 1.0)) throw InvalidArgumentError("p must lie in (0, 1)");
  if (secure && key_bits < ahe::kMinKeyBits) {
    throw InvalidArgumentError("key_bits must be at least " + std::to_string(ahe::kMinKeyBits));
  }
}

FitResult FitModel(Mode mode, std::span<const Dataset> parties,
                   const dpfm::PrivacyParams& privacy, const ExperimentSpec& spec,
                   std::uint64_t run_index, const std::shared_ptr<const ahe::KeyPair>& key_pair) {
  if (parties.empty()) throw InvalidArgumentError("FitModel: no parties");
  const bool local_noise = mode == Mode::kDdp;

  if (spec.secure && mode != Mode::kCdp) {
    protocol::ProtocolConfig config;
    config.n_parties = static_cast<std::uint32_t>(parties.size());
    config.privacy = privacy;
    config.noise_enabled = local_noise;
    config.key_bits = spec.key_bits;
    config.key_pair = key_pair;
    config.transport = spec.transport;
    config.master_seed = spec.seed;
    config.run_index = run_index;
    config.trim = spec.trim;
    config.normalize = spec.normalize;
    config.retain_frames = false;
    protocol::ProtocolResult result = protocol::RunProtocol(config, parties);
    return {std::move(result.model), result.timings};
  }

  // Plaintext route: same seeds and arithmetic as the ring protocol, without
  // the encryption layer. CDP always runs here since it trusts the collector.
  FitResult out;
  const auto start = Clock::now();
  auto t = start;
  linmodel::NormalizationBounds bounds = linmodel::ComputeLocalMinMax(parties[0]);
  for (std::size_t i = 1; i < parties.size(); ++i) {
    bounds = linmodel::MergeBounds(bounds, linmodel::ComputeLocalMinMax(parties[i]));
  }
  out.timings.minmax_ms = MillisSince(t);

  t = Clock::now();
  const double delta = dpfm::GlobalSensitivity(bounds.attrs());
  std::vector<LocalStatistics> stats;
  stats.reserve(parties.size());
  for (std::size_t i = 0; i < parties.size(); ++i) {
    RandomStream rng(protocol::NoiseSeed(spec.seed, static_cast<int>(i), run_index));
    stats.push_back(protocol::PrepareContribution(parties[i], bounds, spec.normalize, privacy,
                                                  delta, local_noise, rng));
  }
  LocalStatistics total = linmodel::AggregateStatistics(stats);
  if (mode == Mode::kCdp) {
    RandomStream rng(DeriveSeed(spec.seed, "cdp", {run_index}));
    total = dpfm::CdpInject(total, delta, privacy.epsilon_global, rng);
  }
  out.timings.regression_ms = MillisSince(t);

  t = Clock::now();
  out.model = protocol::ModelFromAggregate(total, bounds, spec.trim);
  out.timings.reconstruction_ms = MillisSince(t);
  out.timings.total_ms = MillisSince(start);
  return out;
}

double EvaluateMse(const linmodel::ModelResult& model, const Dataset& test,
                   const linmodel::NormalizeOptions& normalize, bool normalized_space) {
  const auto& b = model.bounds;
  const Eigen::Index resp = b.size() - 1;
  const double span = b.max(resp) - b.min(resp);
  Eigen::VectorXd predicted(test.rows());
  Eigen::VectorXd actual(test.rows());
  for (Eigen::Index r = 0; r < test.rows(); ++r) {
    const Eigen::VectorXd x = linmodel::NormalizeFeatures(test.x().row(r).transpose(), b, normalize);
    const double yhat = linmodel::Predict(x, model.w);
    if (normalized_space) {
      predicted(r) = yhat;
      actual(r) = span == 0.0 ? 0.0 : (test.y()(r) - b.min(resp)) / span;
    } else {
      predicted(r) = linmodel::DenormalizePrediction(yhat, b);
      actual(r) = test.y()(r);
    }
  }
  return linmodel::Mse(predicted, actual);
}

std::vector<ResultRow> RunExperiment(const ExperimentSpec& spec) {
  return RunExperiment(spec, spec.data.Load());
}

std::vector<ResultRow> RunExperiment(const ExperimentSpec& spec, const Dataset& data) {
  return Execute(spec, data).rows;
}

std::vector<std::vector<double>> RunExperimentRaw(const ExperimentSpec& spec,
                                                  const Dataset& data) {
  return Execute(spec, data).per_repeat;
}

void SweepGrid::Validate() const {
  if (modes.empty()) throw InvalidArgumentError("sweep grid: no modes");
  if (epsilons.empty()) throw InvalidArgumentError("sweep grid: no epsilons");
  if (ps.empty()) throw InvalidArgumentError("sweep grid: no p values");
  if (alphas.empty()) throw InvalidArgumentError("sweep grid: no alpha values");
  if (parties.empty()) throw InvalidArgumentError("sweep grid: no party counts");
}

std::vector<ResultRow> Sweep(const ExperimentSpec& base, const SweepGrid& grid) {
  grid.Validate();
  return Sweep(base, grid, base.data.Load());
}

std::vector<ResultRow> Sweep(const ExperimentSpec& base, const SweepGrid& grid,
                             const Dataset& data) {
  grid.Validate();
  std::vector<ResultRow> out;
  for (Mode mode : grid.modes) {
    for (double p : grid.ps) {
      for (const AlphaRule& alpha : grid.alphas) {
        for (std::uint32_t n : grid.parties) {
          ExperimentSpec spec = base;
          spec.mode = mode;
          spec.p = p;
          spec.alpha = alpha;
          spec.n_parties = n;
          spec.epsilons = grid.epsilons;
          auto rows = RunExperiment(spec, data);
          out.insert(out.end(), rows.begin(), rows.end());
        }
      }
    }
  }
  return out;
}

std::string FormatResultsCsv(std::span<const ResultRow> rows) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += ModeName(r.mode);
    for (double v : {r.epsilon, r.p, r.alpha}) out += ',' + FormatReal(v);
    out += ',' + std::to_string(r.n);
    for (double v : {r.mean_mse, r.mse_stddev, r.keygen_ms, r.minmax_ms, r.regression_ms,
                     r.total_ms}) {
      out += ',' + FormatReal(v);
    }
    out += '\n';
  }
  return out;
}

void WriteResultsCsv(std::span<const ResultRow> rows, const std::filesystem::path& path) {
  WriteText(path, FormatResultsCsv(rows));
}

std::vector<ResultRow> ParseResultsCsv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw DecodeError("results csv: unexpected header");
  }
  std::vector<ResultRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto f = SplitCsvLine(line);
    if (f.size() != 11) {
      throw DecodeError("results csv line " + std::to_string(line_no) + ": expected 11 fields");
    }
    ResultRow r;
    r.mode = ParseMode(f[0]);
    r.epsilon = ParseReal(f[1], line_no);
    r.p = ParseReal(f[2], line_no);
    r.alpha = ParseReal(f[3], line_no);
    const double n = ParseReal(f[4], line_no);
    if (n < 1 || n != std::floor(n)) {
      throw DecodeError("results csv line " + std::to_string(line_no) + ": bad party count");
    }
    r.n = static_cast<std::uint32_t>(n);
    r.mean_mse = ParseReal(f[5], line_no);
    r.mse_stddev = ParseReal(f[6], line_no);
    r.keygen_ms = ParseReal(f[7], line_no);
    r.minmax_ms = ParseReal(f[8], line_no);
    r.regression_ms = ParseReal(f[9], line_no);
    r.total_ms = ParseReal(f[10], line_no);
    rows.push_back(r);
  }
  return rows;
}

std::vector<ResultRow> ReadResultsCsv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ParseResultsCsv(buf.str());
}

void BenchSpec::Validate() const {
  if (parties.empty() || attrs.empty() || rows.empty()) {
    throw InvalidArgumentError("bench grids must be non-empty");
  }
  for (auto n : parties) {
    if (n < 1) throw InvalidArgumentError("party counts must be positive");
  }
  for (auto d : attrs) {
    if (d < 1) throw InvalidArgumentError("attribute counts must be positive");
  }
  if (key_bits < ahe::kMinKeyBits) {
    throw InvalidArgumentError("key_bits must be at least " + std::to_string(ahe::kMinKeyBits));
  }
}

LinearFit FitLine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw InvalidArgumentError("FitLine needs at least two paired points");
  }
  const double m = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / m;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgumentError("FitLine needs two distinct x values");
  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

BenchReport BenchOverhead(const BenchSpec& spec) {
  spec.Validate();
  BenchReport report;
  double shared_keygen_ms = 0.0;
  std::shared_ptr<const ahe::KeyPair> keys;
  if (spec.share_keys) keys = ExperimentKey(spec.key_bits, spec.seed, &shared_keygen_ms);

  for (std::int64_t d : spec.attrs) {
    for (std::int64_t rows : spec.rows) {
      const Dataset data = GenerateSynthetic(rows, d, 0.1, spec.seed).data;
      std::vector<double> xs, ys;
      for (std::uint32_t n : spec.parties) {
        const auto parts = SplitHorizontal(data, n, spec.seed);
        protocol::ProtocolConfig config;
        config.n_parties = n;
        config.noise_enabled = spec.noise_enabled;
        config.key_bits = spec.key_bits;
        config.key_pair = keys;
        config.transport = spec.transport;
        config.master_seed = spec.seed;
        config.retain_frames = false;
        const protocol::ProtocolResult result = protocol::RunProtocol(config, parts);

        TimingRow row;
        row.n = n;
        row.d = d;
        row.rows = rows;
        row.key_bits = keys ? keys->public_key.bits() : spec.key_bits;
        row.keygen_ms = keys ? shared_keygen_ms : result.timings.keygen_ms;
        row.minmax_ms = result.timings.minmax_ms;
        row.regression_ms = result.timings.regression_ms;
        row.reconstruction_ms = result.timings.reconstruction_ms;
        row.total_ms = result.timings.total_ms + (keys ? shared_keygen_ms : 0.0);
        report.rows.push_back(row);
        xs.push_back(n);
        ys.push_back(row.regression_ms);
      }
      std::map<double, int> distinct;
      for (double x : xs) distinct[x]++;
      if (distinct.size() >= 2) report.fits.push_back({d, rows, FitLine(xs, ys)});
    }
  }
  return report;
}

std::string FormatTimingCsv(std::span<const TimingRow> rows) {
  std::string out(kTimingHeader);
  out += '\n';
  for (const TimingRow& r : rows) {
    out += std::to_string(r.n) + ',' + std::to_string(r.d) + ',' + std::to_string(r.rows) + ',' +
           std::to_string(r.key_bits);
    for (double v : {r.keygen_ms, r.minmax_ms, r.regression_ms, r.reconstruction_ms, r.total_ms}) {
      out += ',' + FormatReal(v);
    }
    out += '\n';
  }
  return out;
}

void WriteTimingCsv(std::span<const TimingRow> rows, const std::filesystem::path& path) {
  WriteText(path, FormatTimingCsv(rows));
}

}  // namespace smddp::harness
