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

#include "smddp/protocol.h"

#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>

#include "smddp/encrypted_statistics.h"
#include "smddp/error.h"

namespace smddp::protocol {

using linmodel::Dataset;
using linmodel::LocalStatistics;
using linmodel::ModelResult;
using linmodel::NormalizationBounds;

std::string_view TransportKindName(TransportKind kind) {
  return kind == TransportKind::kSocket ? "socket" : "in-process";
}

TransportKind ParseTransportKind(std::string_view name) {
  if (name == "in-process" || name == "inprocess") return TransportKind::kInProcess;
  if (name == "socket") return TransportKind::kSocket;
  throw InvalidArgumentError("unknown transport '" + std::string(name) +
                             "' (expected in-process or socket)");
}

void ProtocolConfig::Validate() const {
  if (n_parties < 1) throw InvalidArgumentError("n_parties must be at least 1");
  if (!key_pair && key_bits < ahe::kMinKeyBits) {
    throw InvalidArgumentError("key_bits must be at least " + std::to_string(ahe::kMinKeyBits));
  }
  if (codec_scale < 1) throw InvalidArgumentError("codec_scale must be positive");
  if (hop_timeout.count() <= 0) throw InvalidArgumentError("hop_timeout must be positive");
  if (transport == TransportKind::kSocket && !endpoints.empty() &&
      endpoints.size() != n_parties) {
    throw InvalidArgumentError("socket transport needs one endpoint per party");
  }
  privacy.Validate();
}

StreamSeed KeygenSeed(std::uint64_t master_seed, std::uint64_t run_index) {
  return DeriveSeed(master_seed, "keygen", {run_index});
}

StreamSeed NoiseSeed(std::uint64_t master_seed, int party, std::uint64_t run_index) {
  return DeriveSeed(master_seed, "party-noise", {static_cast<std::uint64_t>(party), run_index});
}

StreamSeed EncryptSeed(std::uint64_t master_seed, int party, std::uint64_t run_index) {
  return DeriveSeed(master_seed, "party-encrypt",
                    {static_cast<std::uint64_t>(party), run_index});
}

PartyState::PartyState(int index, Dataset dataset, std::uint64_t master_seed,
                       std::uint64_t run_index)
    : index_(index),
      dataset_(std::move(dataset)),
      noise_rng_(NoiseSeed(master_seed, index, run_index)),
      encrypt_rng_(EncryptSeed(master_seed, index, run_index)) {
  if (index < 0) throw InvalidArgumentError("party index must be non-negative");
}

const PartySetup& PartyState::setup() const {
  if (!setup_) throw ProtocolError("party " + std::to_string(index_) + " has no setup yet");
  return *setup_;
}

void PartyState::ApplySetup(const SetupParamsMessage& m) {
  m.bounds.Validate();
  if (m.bounds.attrs() != dataset_.attrs()) {
    throw DimensionError("party " + std::to_string(index_) + " has " +
                         std::to_string(dataset_.attrs()) + " attributes, setup announces " +
                         std::to_string(m.bounds.attrs()));
  }
  if (m.n_parties == 0 || static_cast<std::uint32_t>(index_) >= m.n_parties) {
    throw ProtocolError("setup party count does not cover this party");
  }
  setup_.emplace(PartySetup{m.public_key, m.sensitivity, m.bounds, m.privacy, m.noise_enabled,
                            linmodel::NormalizeOptions{m.bound_row_norm}, m.n_parties,
                            ahe::FixedPointCodec(m.public_key.n(), m.codec_scale)});
}

BoundsMessage PlaintextRingMinMax::Step(const Dataset& local,
                                        const std::optional<BoundsMessage>& incoming) const {
  BoundsMessage out;
  NormalizationBounds mine = linmodel::ComputeLocalMinMax(local);
  if (incoming) {
    out.running = linmodel::MergeBounds(incoming->running, mine);
    out.hop_count = incoming->hop_count + 1;
  } else {
    out.running = std::move(mine);
    out.hop_count = 1;
  }
  return out;
}

SetupParamsMessage MakeSetupMessage(const ProtocolConfig& config, const ahe::PublicKey& pk,
                                    const NormalizationBounds& bounds) {
  SetupParamsMessage m{pk};
  m.sensitivity = dpfm::GlobalSensitivity(bounds.attrs());
  m.bounds = bounds;
  m.privacy = config.privacy;
  m.codec_scale = config.codec_scale;
  m.noise_enabled = config.noise_enabled;
  m.bound_row_norm = config.normalize.bound_row_norm;
  m.n_parties = config.n_parties;
  return m;
}

LocalStatistics PrepareContribution(const Dataset& data, const NormalizationBounds& bounds,
                                    const linmodel::NormalizeOptions& normalize,
                                    const dpfm::PrivacyParams& privacy, double sensitivity,
                                    bool noise_enabled, RandomStream& noise_rng) {
  LocalStatistics stats =
      linmodel::ComputeLocalStatistics(linmodel::Normalize(data, bounds, normalize));
  if (!noise_enabled) return stats;
  const auto spec = dpfm::NoiseSpec::Create(sensitivity, dpfm::LocalBudget(privacy));
  return dpfm::NoiseInject(stats, spec, privacy, noise_rng);
}

AggregateMessage PartyStep(PartyState& state, const std::optional<AggregateMessage>& incoming) {
  const PartySetup& setup = state.setup();
  if (!incoming && state.index() != 0) {
    throw ProtocolError("only the data collector may start the aggregate pass");
  }
  if (incoming) {
    if (incoming->hop_count != static_cast<std::uint32_t>(state.index())) {
      throw ProtocolError("party " + std::to_string(state.index()) +
                          " received an aggregate with hop_count " +
                          std::to_string(incoming->hop_count));
    }
    ahe::ValidateEncryptedStatistics(setup.public_key, incoming->aggregate);
  }

  LocalStatistics stats =
      PrepareContribution(state.dataset(), setup.bounds, setup.normalize, setup.privacy,
                          setup.sensitivity, setup.noise_enabled, state.noise_rng());
  ahe::EncryptedStatistics mine =
      ahe::EncryptStatistics(setup.public_key, setup.codec, stats, state.encrypt_rng());

  AggregateMessage out;
  if (incoming) {
    out.aggregate = ahe::AddStatistics(setup.public_key, incoming->aggregate, mine);
    out.hop_count = incoming->hop_count + 1;
  } else {
    out.aggregate = std::move(mine);
    out.hop_count = 1;
  }
  return out;
}

ModelResult ModelFromAggregate(const LocalStatistics& aggregate,
                               const NormalizationBounds& bounds, const dpfm::TrimParams& trim) {
  dpfm::OptimizeResult opt = dpfm::Optimize(aggregate, trim);
  ModelResult model;
  model.err = linmodel::ObjectiveError(opt.repaired, opt.w);
  model.w = std::move(opt.w);
  model.bounds = bounds;
  return model;
}

ModelResult Reconstruct(const ahe::SecretKey& sk, const PartySetup& setup,
                        const AggregateMessage& final_message, const dpfm::TrimParams& trim) {
  if (final_message.hop_count != setup.n_parties) {
    throw ProtocolError("cannot reconstruct: " + std::to_string(final_message.hop_count) +
                        " of " + std::to_string(setup.n_parties) + " parties contributed");
  }
  if (!(sk.public_key() == setup.public_key)) {
    throw CryptoError("secret key does not match the announced public key");
  }
  LocalStatistics total = ahe::DecryptStatistics(sk, setup.codec, final_message.aggregate);
  return ModelFromAggregate(total, setup.bounds, trim);
}

namespace {

using Clock = std::chrono::steady_clock;

double MillisSince(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

template <typename T>
T ReceiveAs(Transport& transport, int self) {
  Message m = DecodeMessage(transport.Receive(self));
  if (!std::holds_alternative<T>(m)) {
    throw ProtocolError("party " + std::to_string(self) + " received an unexpected " +
                        std::string(MessageKindName(KindOf(m))) + " message");
  }
  return std::get<T>(std::move(m));
}

// A message may have to pass every other party before it reaches a waiting
// one, so receives allow one hop budget per party.
std::unique_ptr<Transport> MakeTransport(const ProtocolConfig& config) {
  const auto wait = config.hop_timeout * config.n_parties;
  if (config.transport == TransportKind::kSocket) {
    return MakeSocketTransport(config.n_parties, config.endpoints, config.retain_frames, wait);
  }
  return MakeInProcessTransport(config.n_parties, config.retain_frames, wait);
}

// State shared between party threads only for reporting back to the caller.
struct RunOutputs {
  std::shared_ptr<const ahe::KeyPair> key_pair;
  NormalizationBounds bounds;
  double sensitivity = 0.0;
  ModelResult model;
  PhaseTimings timings;
  std::vector<ModelResult> received;
};

class Run {
 public:
  Run(const ProtocolConfig& config, std::span<const Dataset> datasets, bool setup_only)
      : config_(config), datasets_(datasets), setup_only_(setup_only) {
    config_.Validate();
    if (datasets.size() != config_.n_parties) {
      throw InvalidArgumentError("expected " + std::to_string(config_.n_parties) +
                                 " datasets, got " + std::to_string(datasets.size()));
    }
    const Eigen::Index attrs = datasets.front().attrs();
    for (std::size_t i = 1; i < datasets.size(); ++i) {
      if (datasets[i].attrs() != attrs) {
        throw DimensionError("party " + std::to_string(i) + " has " +
                             std::to_string(datasets[i].attrs()) + " attributes, party 0 has " +
                             std::to_string(attrs));
      }
    }
    outputs_.received.resize(config_.n_parties);
  }

  Transcript Execute() {
    const auto start = Clock::now();
    transport_ = MakeTransport(config_);
    const int n = static_cast<int>(config_.n_parties);
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      threads.emplace_back([this, i] {
        try {
          if (i == 0) {
            CollectorScript();
          } else {
            PartyScript(i);
          }
        } catch (...) {
          Fail(std::current_exception());
        }
      });
    }
    for (auto& t : threads) t.join();
    if (first_error_) std::rethrow_exception(first_error_);
    outputs_.timings.total_ms = MillisSince(start);
    return transport_->TakeTranscript();
  }

  RunOutputs& outputs() { return outputs_; }

 private:
  int Next(int i) const { return (i + 1) % static_cast<int>(config_.n_parties); }
  bool IsLast(int i) const { return Next(i) == 0; }

  void Fail(std::exception_ptr error) {
    {
      std::lock_guard lock(error_mu_);
      if (!first_error_) first_error_ = error;
    }
    transport_->Shutdown();
  }

  void CollectorScript() {
    const int n = static_cast<int>(config_.n_parties);
    PartyState state(0, datasets_[0], config_.master_seed, config_.run_index);
    PlaintextRingMinMax minmax;

    auto t = Clock::now();
    std::shared_ptr<const ahe::KeyPair> keys = config_.key_pair;
    if (!keys) {
      CryptoRandom rng(KeygenSeed(config_.master_seed, config_.run_index));
      keys = std::make_shared<const ahe::KeyPair>(ahe::GenerateKeyPair(config_.key_bits, rng));
    }
    outputs_.timings.keygen_ms = MillisSince(t);
    outputs_.key_pair = keys;

    t = Clock::now();
    // With a single party every message loops back to the collector, so the
    // transcript keeps the same shape for any n.
    BoundsMessage bounds = minmax.Step(state.dataset(), std::nullopt);
    transport_->Send(0, Next(0), EncodeMessage(bounds));
    bounds = ReceiveAs<BoundsMessage>(*transport_, 0);
    if (bounds.hop_count != config_.n_parties) {
      throw ProtocolError("bounds pass returned with hop_count " +
                          std::to_string(bounds.hop_count));
    }
    outputs_.timings.minmax_ms = MillisSince(t);

    const SetupParamsMessage setup = MakeSetupMessage(config_, keys->public_key, bounds.running);
    state.ApplySetup(setup);
    outputs_.bounds = setup.bounds;
    outputs_.sensitivity = setup.sensitivity;
    transport_->Send(0, Next(0), EncodeMessage(setup), SendMode::kBroadcast);
    if (n == 1) ReceiveAs<SetupParamsMessage>(*transport_, 0);
    if (setup_only_) return;

    t = Clock::now();
    AggregateMessage aggregate = PartyStep(state, std::nullopt);
    transport_->Send(0, Next(0), EncodeMessage(aggregate));
    aggregate = ReceiveAs<AggregateMessage>(*transport_, 0);
    outputs_.timings.regression_ms = MillisSince(t);

    t = Clock::now();
    ModelResult model = Reconstruct(keys->secret_key, state.setup(), aggregate, config_.trim);
    outputs_.timings.reconstruction_ms = MillisSince(t);

    transport_->Send(0, Next(0), EncodeMessage(PublishMessage{model}), SendMode::kBroadcast);
    if (n == 1) ReceiveAs<PublishMessage>(*transport_, 0);
    outputs_.received[0] = model;
    outputs_.model = std::move(model);
  }

  void PartyScript(int i) {
    PartyState state(i, datasets_[static_cast<std::size_t>(i)], config_.master_seed,
                     config_.run_index);
    PlaintextRingMinMax minmax;

    const BoundsMessage bounds = ReceiveAs<BoundsMessage>(*transport_, i);
    transport_->Send(i, Next(i), EncodeMessage(minmax.Step(state.dataset(), bounds)));

    const SetupParamsMessage setup = ReceiveAs<SetupParamsMessage>(*transport_, i);
    state.ApplySetup(setup);
    if (!IsLast(i)) transport_->Send(i, Next(i), EncodeMessage(setup), SendMode::kRelay);
    if (setup_only_) return;

    const AggregateMessage incoming = ReceiveAs<AggregateMessage>(*transport_, i);
    transport_->Send(i, Next(i), EncodeMessage(PartyStep(state, incoming)));

    const PublishMessage publish = ReceiveAs<PublishMessage>(*transport_, i);
    if (!IsLast(i)) transport_->Send(i, Next(i), EncodeMessage(publish), SendMode::kRelay);
    outputs_.received[static_cast<std::size_t>(i)] = publish.model;
  }

  ProtocolConfig config_;
  std::span<const Dataset> datasets_;
  bool setup_only_;
  std::unique_ptr<Transport> transport_;
  RunOutputs outputs_;
  std::mutex error_mu_;
  std::exception_ptr first_error_;
};

}  // namespace

SetupResult RunSetup(const ProtocolConfig& config, std::span<const Dataset> datasets) {
  Run run(config, datasets, /*setup_only=*/true);
  SetupResult result;
  result.transcript = run.Execute();
  result.key_pair = run.outputs().key_pair;
  result.bounds = run.outputs().bounds;
  result.sensitivity = run.outputs().sensitivity;
  return result;
}

ProtocolResult RunProtocol(const ProtocolConfig& config, std::span<const Dataset> datasets) {
  Run run(config, datasets, /*setup_only=*/false);
  ProtocolResult result;
  result.transcript = run.Execute();
  result.model = std::move(run.outputs().model);
  result.timings = run.outputs().timings;
  result.received = std::move(run.outputs().received);
  result.key_pair = run.outputs().key_pair;
  return result;
}

}  // namespace smddp::protocol
