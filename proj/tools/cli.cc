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

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

#include "smddp/dataset_io.h"
#include "smddp/error.h"
#include "smddp/harness.h"
#include "smddp/paillier.h"
#include "smddp/protocol.h"
#include "smddp/random.h"
#include "smddp/transcript.h"

namespace smddp::cli {
namespace {

struct DataFlags {
  std::string data = "synth:1000x8";
  double noise_sd = 0.1;
  std::uint64_t data_seed = 1;

  void Add(CLI::App& app) {
    app.add_option("--data", data, "CSV path or synth:ROWSxD")->capture_default_str();
    app.add_option("--noise-sd", noise_sd, "Response noise for synthetic data")
        ->capture_default_str();
    app.add_option("--data-seed", data_seed, "Seed of synthetic data")->capture_default_str();
  }

  harness::DataSource Source() const {
    harness::DataSource src;
    static const std::regex kSynth(R"(synth:(\d+)x(\d+))");
    std::smatch m;
    if (std::regex_match(data, m, kSynth)) {
      src.kind = harness::DataSource::Kind::kSynthetic;
      src.rows = std::stoll(m[1]);
      src.attrs = std::stoll(m[2]);
      src.noise_sd = noise_sd;
      src.seed = data_seed;
    } else if (data.rfind("synth:", 0) == 0) {
      throw InvalidArgumentError("synthetic data spec must look like synth:1000x8");
    } else {
      src.kind = harness::DataSource::Kind::kCsv;
      src.path = data;
    }
    return src;
  }
};

// Options for a subcommand live under a section of the same name, e.g.
// "[sweep]" followed by "repeats = 20". Unknown keys are ignored.
void AddConfig(CLI::App& app) {
  app.set_config("--config", "", "Read options from an INI-style config file")
      ->envname(kConfigEnv);
  app.allow_config_extras(CLI::config_extras_mode::ignore);
}

void PrintTimings(std::ostream& out, const protocol::PhaseTimings& t) {
  out << std::fixed << std::setprecision(3) << "timings_ms keygen=" << t.keygen_ms
      << " minmax=" << t.minmax_ms << " regression=" << t.regression_ms
      << " reconstruction=" << t.reconstruction_ms << " total=" << t.total_ms << '\n'
      << std::defaultfloat;
}

std::vector<harness::AlphaRule> ParseAlphas(const std::vector<std::string>& texts) {
  std::vector<harness::AlphaRule> out;
  for (const auto& t : texts) out.push_back(harness::AlphaRule::Parse(t));
  return out;
}

dpfm::ScalingMode ScalingFrom(const std::string& name) { return dpfm::ParseScalingMode(name); }

}  // namespace

int Main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Differentially private distributed linear regression over a ring of parties",
               "smddp"};
  app.require_subcommand(1, 1);
  AddConfig(app);
  app.fallthrough();  // lets --config follow the subcommand name
  std::function<int()> action;

  // keygen
  auto* keygen = app.add_subcommand("keygen", "Generate a Paillier key pair");
  int kg_bits = ahe::kDefaultKeyBits;
  std::string kg_out;
  std::optional<std::uint64_t> kg_seed;
  keygen->add_option("--bits", kg_bits, "Modulus size")->capture_default_str();
  keygen->add_option("--out", kg_out, "Output prefix; writes PREFIX.pub and PREFIX.sec")
      ->required();
  keygen->add_option("--seed", kg_seed, "Deterministic seed (default: system entropy)");
  keygen->callback([&] {
    action = [&] {
      if (kg_bits < ahe::kMinKeyBits) {
        throw InvalidArgumentError("--bits must be at least " + std::to_string(ahe::kMinKeyBits));
      }
      CryptoRandom rng = kg_seed ? CryptoRandom(DeriveSeed(*kg_seed, "keygen-cli"))
                                 : CryptoRandom::FromSystemEntropy();
      const ahe::KeyPair keys = ahe::GenerateKeyPair(kg_bits, rng);
      ahe::WritePublicKeyFile(kg_out + ".pub", keys.public_key);
      ahe::WriteSecretKeyFile(kg_out + ".sec", keys.secret_key);
      out << "wrote " << kg_out << ".pub and " << kg_out << ".sec (" << keys.public_key.bits()
          << " bits, fingerprint " << std::hex << keys.public_key.fingerprint() << std::dec
          << ")\n";
      return kExitOk;
    };
  });

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Write a synthetic regression dataset as CSV");
  std::int64_t gen_rows = 1000, gen_attrs = 8;
  double gen_noise = 0.1;
  std::uint64_t gen_seed = 1;
  std::string gen_out;
  gen->add_option("--rows", gen_rows)->capture_default_str();
  gen->add_option("--attrs,-d", gen_attrs)->capture_default_str();
  gen->add_option("--noise-sd", gen_noise)->capture_default_str();
  gen->add_option("--seed", gen_seed)->capture_default_str();
  gen->add_option("--out", gen_out, "Output CSV path")->required();
  gen->callback([&] {
    action = [&] {
      const auto synth = harness::GenerateSynthetic(gen_rows, gen_attrs, gen_noise, gen_seed);
      harness::WriteCsv(synth.data, gen_out);
      out << "wrote " << gen_rows << " rows x " << gen_attrs << " attributes to " << gen_out
          << '\n';
      return kExitOk;
    };
  });

  // run
  auto* run = app.add_subcommand("run", "Run one protocol instance and print the model");
  std::uint32_t run_parties = 3;
  double run_eps = 1.0, run_alpha = 1.0, run_p = 0.9;
  bool run_alpha_n = false, run_no_noise = false;
  std::string run_scaling = "geometric", run_transport = "in-process", run_key, run_transcript;
  int run_bits = ahe::kDefaultKeyBits;
  std::uint64_t run_seed = 0;
  DataFlags run_data;
  run->add_option("--parties,-n", run_parties)->capture_default_str();
  run->add_option("--epsilon,--eps", run_eps, "Global privacy budget")->capture_default_str();
  auto* alpha_opt =
      run->add_option("--alpha", run_alpha, "Local budget multiplier")->capture_default_str();
  run->add_flag("--alpha-equals-n", run_alpha_n, "Set alpha to the party count")
      ->excludes(alpha_opt);
  run->add_option("--p", run_p, "Geometric scaling parameter")->capture_default_str();
  run->add_option("--scaling", run_scaling, "geometric, sqrt-p or none")->capture_default_str();
  run->add_flag("--no-noise", run_no_noise, "Disable noise injection");
  run->add_option("--key-bits", run_bits)->capture_default_str();
  run->add_option("--key", run_key, "Key prefix from keygen (default: generate)");
  run->add_option("--transport", run_transport, "in-process or socket")->capture_default_str();
  run->add_option("--seed", run_seed)->capture_default_str();
  run->add_option("--transcript", run_transcript, "Write a transcript dump here");
  run_data.Add(*run);
  run->callback([&] {
    action = [&] {
      const linmodel::Dataset data = run_data.Source().Load();
      protocol::ProtocolConfig config;
      config.n_parties = run_parties;
      config.privacy = {run_eps, run_alpha_n ? static_cast<double>(run_parties) : run_alpha,
                        run_p, ScalingFrom(run_scaling)};
      config.noise_enabled = !run_no_noise;
      config.key_bits = run_bits;
      config.transport = protocol::ParseTransportKind(run_transport);
      config.master_seed = run_seed;
      config.retain_frames = false;
      if (!run_key.empty()) {
        auto pk = ahe::ReadPublicKeyFile(run_key + ".pub");
        auto sk = ahe::ReadSecretKeyFile(run_key + ".sec");
        config.key_pair = std::make_shared<const ahe::KeyPair>(ahe::KeyPair{pk, sk});
      }
      const auto parts = harness::SplitHorizontal(data, run_parties, run_seed);
      const protocol::ProtocolResult result = protocol::RunProtocol(config, parts);

      out << "model (" << result.model.w.size() << " coefficients, intercept first)\n";
      char buf[64];
      for (Eigen::Index j = 0; j < result.model.w.size(); ++j) {
        std::snprintf(buf, sizeof buf, "  w[%ld] = %.9g\n", static_cast<long>(j),
                      result.model.w(j));
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "Err = %.9g\n", result.model.err);
      out << buf;
      PrintTimings(out, result.timings);
      if (!run_transcript.empty()) {
        protocol::WriteTranscriptDump(run_transcript, result.transcript);
        out << "transcript: " << result.transcript.entries.size() << " messages written to "
            << run_transcript << '\n';
      }
      return kExitOk;
    };
  });

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment grid and write a results CSV");
  std::vector<std::string> sw_modes{"ddp"}, sw_alphas{"1"};
  std::vector<double> sw_eps{0.1, 0.2, 0.4, 0.8, 1.6, 3.2, 6.4, 12.8}, sw_p{0.9};
  std::vector<std::uint32_t> sw_parties{3};
  std::uint32_t sw_repeats = 100, sw_folds = 5;
  std::uint64_t sw_seed = 0;
  bool sw_secure = false, sw_alpha_n = false, sw_normalized = false;
  int sw_bits = ahe::kMinKeyBits;
  std::string sw_scaling = "geometric", sw_out;
  DataFlags sw_data;
  sweep->add_option("--mode", sw_modes, "cdp, ddp, nodp")->delimiter(',')->capture_default_str();
  sweep->add_option("--eps,--epsilon", sw_eps)->delimiter(',')->capture_default_str();
  sweep->add_option("--p", sw_p)->delimiter(',')->capture_default_str();
  auto* sw_alpha_opt = sweep->add_option("--alpha", sw_alphas, "Numbers or n")
                           ->delimiter(',')
                           ->capture_default_str();
  sweep->add_flag("--alpha-equals-n", sw_alpha_n)->excludes(sw_alpha_opt);
  sweep->add_option("--parties,-n", sw_parties)->delimiter(',')->capture_default_str();
  sweep->add_option("--repeats", sw_repeats)->capture_default_str();
  sweep->add_option("--folds", sw_folds)->capture_default_str();
  sweep->add_option("--seed", sw_seed)->capture_default_str();
  sweep->add_option("--scaling", sw_scaling)->capture_default_str();
  sweep->add_flag("--secure", sw_secure, "Run the encrypted protocol for each fit");
  sweep->add_option("--key-bits", sw_bits)->capture_default_str();
  sweep->add_flag("--normalized-mse", sw_normalized, "Report MSE in normalized units");
  sweep->add_option("--out", sw_out, "Results CSV path (default: stdout)");
  sw_data.Add(*sweep);
  sweep->callback([&] {
    action = [&] {
      harness::ExperimentSpec base;
      base.repeats = sw_repeats;
      base.folds = sw_folds;
      base.seed = sw_seed;
      base.scaling = ScalingFrom(sw_scaling);
      base.secure = sw_secure;
      base.key_bits = sw_bits;
      base.normalized_mse = sw_normalized;
      base.data = sw_data.Source();
      harness::SweepGrid grid;
      for (const auto& m : sw_modes) grid.modes.push_back(harness::ParseMode(m));
      grid.epsilons = sw_eps;
      grid.ps = sw_p;
      grid.alphas = sw_alpha_n ? std::vector{harness::AlphaRule::EqualToN()}
                               : ParseAlphas(sw_alphas);
      grid.parties = sw_parties;
      const auto rows = harness::Sweep(base, grid);
      if (sw_out.empty()) {
        out << harness::FormatResultsCsv(rows);
      } else {
        harness::WriteResultsCsv(rows, sw_out);
        out << "wrote " << rows.size() << " rows to " << sw_out << '\n';
      }
      return kExitOk;
    };
  });

  // bench
  auto* bench = app.add_subcommand("bench", "Time protocol phases over party and attribute grids");
  harness::BenchSpec bs;
  std::string bench_transport = "in-process", bench_out;
  bool bench_fresh_keys = false;
  bench->add_option("--parties,-n", bs.parties)->delimiter(',')->capture_default_str();
  bench->add_option("--attrs,-d", bs.attrs)->delimiter(',')->capture_default_str();
  bench->add_option("--rows", bs.rows)->delimiter(',')->capture_default_str();
  bench->add_option("--key-bits", bs.key_bits)->capture_default_str();
  bench->add_option("--seed", bs.seed)->capture_default_str();
  bench->add_option("--transport", bench_transport)->capture_default_str();
  bench->add_flag("--fresh-keys", bench_fresh_keys, "Generate a new key in every cell");
  bench->add_option("--out", bench_out, "Timing CSV path (default: stdout)");
  bench->callback([&] {
    action = [&] {
      bs.transport = protocol::ParseTransportKind(bench_transport);
      bs.share_keys = !bench_fresh_keys;
      const harness::BenchReport report = harness::BenchOverhead(bs);
      if (bench_out.empty()) {
        out << harness::FormatTimingCsv(report.rows);
      } else {
        harness::WriteTimingCsv(report.rows, bench_out);
        out << "wrote " << report.rows.size() << " rows to " << bench_out << '\n';
      }
      for (const auto& f : report.fits) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "fit d=%lld rows=%lld: regression_ms = %.4g * n + %.4g (R^2 = %.4f)\n",
                      static_cast<long long>(f.d), static_cast<long long>(f.rows), f.fit.slope,
                      f.fit.intercept, f.fit.r_squared);
        (bench_out.empty() ? err : out) << buf;
      }
      return kExitOk;
    };
  });

  // inspect-transcript
  auto* inspect = app.add_subcommand("inspect-transcript", "Pretty-print a transcript dump");
  std::string inspect_path;
  inspect->add_option("path", inspect_path, "Transcript dump from run --transcript")
      ->required()
      ->check(CLI::ExistingFile);
  inspect->callback([&] {
    action = [&] {
      const protocol::Transcript t = protocol::ReadTranscriptDump(inspect_path);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%4s  %-6s  %-8s  %-12s  %10s  %12s\n", "seq", "from", "to",
                    "kind", "bytes", "t_us");
      out << buf;
      for (std::size_t i = 0; i < t.entries.size(); ++i) {
        const auto& e = t.entries[i];
        const std::string to =
            e.receiver == protocol::kAllParties ? "all" : std::to_string(e.receiver);
        std::snprintf(buf, sizeof buf, "%4zu  %-6d  %-8s  %-12s  %10zu  %12lld\n", i, e.sender,
                      to.c_str(), std::string(protocol::MessageKindName(e.kind)).c_str(),
                      e.bytes, static_cast<long long>(e.timestamp_us));
        out << buf;
      }
      out << t.entries.size() << " messages, " << t.TotalBytes() << " bytes; bounds="
          << t.Count(protocol::MessageKind::kBounds)
          << " setup=" << t.Count(protocol::MessageKind::kSetupParams)
          << " aggregate=" << t.Count(protocol::MessageKind::kAggregate)
          << " publish=" << t.Count(protocol::MessageKind::kPublish) << '\n';
      return kExitOk;
    };
  });

  if (argc <= 1) {
    out << app.help();
    return kExitUsage;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    return action ? action() : kExitUsage;
  } catch (const InvalidArgumentError& e) {
    err << "smddp: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "smddp: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace smddp::cli
