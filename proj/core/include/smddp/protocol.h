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


#ifndef SMDDP_PROTOCOL_H_
#define SMDDP_PROTOCOL_H_

// The secure ring protocol. Party 0 is the data collector (DC): it owns the
// key pair, starts both ring passes and publishes the model. Every other
// party only ever sees public parameters and ciphertexts.

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "smddp/dp_fm.h"
#include "smddp/fixed_point.h"
#include "smddp/linmodel.h"
#include "smddp/paillier.h"
#include "smddp/random.h"
#include "smddp/transcript.h"
#include "smddp/transport.h"
#include "smddp/wire.h"

namespace smddp::protocol {

enum class TransportKind { kInProcess, kSocket };

std::string_view TransportKindName(TransportKind kind);
TransportKind ParseTransportKind(std::string_view name);

struct ProtocolConfig {
  std::uint32_t n_parties = 1;
  dpfm::PrivacyParams privacy;
  bool noise_enabled = true;
  int key_bits = ahe::kDefaultKeyBits;
  std::int64_t codec_scale = ahe::FixedPointCodec::kDefaultScale;
  TransportKind transport = TransportKind::kInProcess;
  std::vector<Endpoint> endpoints;  // socket transport only; empty = loopback
  // Per-hop budget; a party waits at most n_parties * hop_timeout for any
  // message since it may have to pass every other party first.
  std::chrono::milliseconds hop_timeout = kDefaultHopTimeout;
  std::uint64_t master_seed = 0;
  std::uint64_t run_index = 0;
  dpfm::TrimParams trim;
  linmodel::NormalizeOptions normalize;
  // When set, the DC uses this key pair instead of generating one. Its size
  // then overrides key_bits.
  std::shared_ptr<const ahe::KeyPair> key_pair;
  bool retain_frames = true;

  void Validate() const;
};

struct PhaseTimings {
  double keygen_ms = 0.0;
  double minmax_ms = 0.0;
  double regression_ms = 0.0;
  double reconstruction_ms = 0.0;
  double total_ms = 0.0;
};

// Seed streams. Noise and encryption randomness are per party and per run;
// the key depends on the run only.
StreamSeed KeygenSeed(std::uint64_t master_seed, std::uint64_t run_index);
StreamSeed NoiseSeed(std::uint64_t master_seed, int party, std::uint64_t run_index);
StreamSeed EncryptSeed(std::uint64_t master_seed, int party, std::uint64_t run_index);

// Everything a party learns during setup.
struct PartySetup {
  ahe::PublicKey public_key;
  double sensitivity = 0.0;
  linmodel::NormalizationBounds bounds;
  dpfm::PrivacyParams privacy;
  bool noise_enabled = true;
  linmodel::NormalizeOptions normalize;
  std::uint32_t n_parties = 0;
  ahe::FixedPointCodec codec;
};

class PartyState {
 public:
  PartyState(int index, linmodel::Dataset dataset, std::uint64_t master_seed,
             std::uint64_t run_index);

  int index() const { return index_; }
  const linmodel::Dataset& dataset() const { return dataset_; }
  bool has_setup() const { return setup_.has_value(); }
  const PartySetup& setup() const;

  // Throws DimensionError if the broadcast attribute count differs from ours.
  void ApplySetup(const SetupParamsMessage& message);

  RandomStream& noise_rng() { return noise_rng_; }
  CryptoRandom& encrypt_rng() { return encrypt_rng_; }

 private:
  int index_;
  linmodel::Dataset dataset_;
  std::optional<PartySetup> setup_;
  RandomStream noise_rng_;
  CryptoRandom encrypt_rng_;
};

// Global extremes are merged by a plaintext ring pass of running min/max.
// Each party therefore sees the extremes of its predecessors. The interface
// exists so a secure comparison protocol can replace it.
class MinMaxProtocol {
 public:
  virtual ~MinMaxProtocol() = default;
  virtual BoundsMessage Step(const linmodel::Dataset& local,
                             const std::optional<BoundsMessage>& incoming) const = 0;
};

class PlaintextRingMinMax final : public MinMaxProtocol {
 public:
  BoundsMessage Step(const linmodel::Dataset& local,
                     const std::optional<BoundsMessage>& incoming) const override;
};

SetupParamsMessage MakeSetupMessage(const ProtocolConfig& config, const ahe::PublicKey& pk,
                                    const linmodel::NormalizationBounds& bounds);

// Normalize, compute local statistics, then inject noise when enabled. This
// is the plaintext half of a party step.
linmodel::LocalStatistics PrepareContribution(const linmodel::Dataset& data,
                                              const linmodel::NormalizationBounds& bounds,
                                              const linmodel::NormalizeOptions& normalize,
                                              const dpfm::PrivacyParams& privacy,
                                              double sensitivity, bool noise_enabled,
                                              RandomStream& noise_rng);

// incoming must be empty for party 0 only, and otherwise carry hop_count
// equal to this party's index.
AggregateMessage PartyStep(PartyState& state, const std::optional<AggregateMessage>& incoming);

// Optimization and objective error on decrypted (or plaintext) aggregates.
linmodel::ModelResult ModelFromAggregate(const linmodel::LocalStatistics& aggregate,
                                         const linmodel::NormalizationBounds& bounds,
                                         const dpfm::TrimParams& trim);

// DC side. Throws ProtocolError unless final.hop_count == setup.n_parties.
linmodel::ModelResult Reconstruct(const ahe::SecretKey& sk, const PartySetup& setup,
                                  const AggregateMessage& final_message,
                                  const dpfm::TrimParams& trim);

struct SetupResult {
  std::shared_ptr<const ahe::KeyPair> key_pair;
  linmodel::NormalizationBounds bounds;
  double sensitivity = 0.0;
  Transcript transcript;
};

struct ProtocolResult {
  linmodel::ModelResult model;
  Transcript transcript;
  PhaseTimings timings;
  std::vector<linmodel::ModelResult> received;  // copy published to each party
  std::shared_ptr<const ahe::KeyPair> key_pair;
};

// datasets[i] belongs to party i.
SetupResult RunSetup(const ProtocolConfig& config, std::span<const linmodel::Dataset> datasets);
ProtocolResult RunProtocol(const ProtocolConfig& config,
                           std::span<const linmodel::Dataset> datasets);

}  // namespace smddp::protocol

#endif  // SMDDP_PROTOCOL_H_
