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

#ifndef SMDDP_WIRE_H_
#define SMDDP_WIRE_H_

// Canonical binary framing for ring messages.
//
//   frame   := magic "SMDP" | version u8 | kind u8 | length u32 | payload
//   kind    := 0 bounds | 1 aggregate | 2 publish | 3 setup-params
//
// All integers are big-endian; big integers are u32 length-prefixed unsigned
// big-endian magnitudes; reals are IEEE-754 binary64, big-endian.
//
//   bounds    := hop u32 | bounds
//   aggregate := hop u32 | dim u32 | key-fingerprint u64 |
//                P-upper[dim(dim+1)/2] | V[dim] | O          (ciphertexts)
//   publish   := dim u32 | w f64[dim] | err f64 | bounds
//   setup     := key-bits u32 | n | sensitivity f64 | bounds |
//                epsilon f64 | alpha f64 | p f64 | scaling u8 |
//                codec-scale u64 | flags u8 | parties u32
//   bounds    := count u32 | min f64[count] | max f64[count]

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "smddp/dp_fm.h"
#include "smddp/encrypted_statistics.h"
#include "smddp/linmodel.h"
#include "smddp/paillier.h"

namespace smddp::protocol {

enum class MessageKind : std::uint8_t {
  kBounds = 0,
  kAggregate = 1,
  kPublish = 2,
  kSetupParams = 3,
};

std::string_view MessageKindName(MessageKind kind);

inline constexpr std::array<std::uint8_t, 4> kWireMagic = {'S', 'M', 'D', 'P'};
inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kFrameHeaderSize = 10;
inline constexpr std::uint32_t kMaxPayloadBytes = 256u << 20;

// Running extremes of the min-max ring pass.
struct BoundsMessage {
  linmodel::NormalizationBounds running;
  std::uint32_t hop_count = 0;
};

// Public parameters the data collector distributes after setup.
struct SetupParamsMessage {
  explicit SetupParamsMessage(ahe::PublicKey pk) : public_key(std::move(pk)) {}

  ahe::PublicKey public_key;
  double sensitivity = 0.0;
  linmodel::NormalizationBounds bounds;
  dpfm::PrivacyParams privacy;
  std::int64_t codec_scale = ahe::FixedPointCodec::kDefaultScale;
  bool noise_enabled = true;
  bool bound_row_norm = false;
  std::uint32_t n_parties = 0;
};

// Encrypted running sums; aggregate.p, .v and .o carry the xi, kappa and
// delta components of the ring pass.
struct AggregateMessage {
  ahe::EncryptedStatistics aggregate;
  std::uint32_t hop_count = 0;
};

struct PublishMessage {
  linmodel::ModelResult model;
};

using Message =
    std::variant<BoundsMessage, AggregateMessage, PublishMessage, SetupParamsMessage>;

MessageKind KindOf(const Message& message);

std::vector<std::uint8_t> EncodeMessage(const Message& message);

struct FrameHeader {
  MessageKind kind;
  std::uint32_t payload_length;
};

// Validates magic, version, kind and length of the first kFrameHeaderSize
// bytes. Throws DecodeError.
FrameHeader DecodeFrameHeader(std::span<const std::uint8_t> header);

// Throws DecodeError on truncation, bad magic, version mismatch, unknown
// kind, empty payload, length overflow or trailing bytes.
Message DecodeMessage(std::span<const std::uint8_t> frame);

}  // namespace smddp::protocol

#endif  // SMDDP_WIRE_H_
