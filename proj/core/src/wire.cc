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

#include "smddp/wire.h"

#include <string>

#include "smddp/bytes.h"
#include "smddp/error.h"

namespace smddp::protocol {
namespace {

constexpr std::uint32_t kMaxDim = 1u << 12;
constexpr std::size_t kMaxCiphertextBytes = 1u << 16;

void WriteBounds(ByteWriter& w, const linmodel::NormalizationBounds& b) {
  w.U32(static_cast<std::uint32_t>(b.min.size()));
  for (Eigen::Index i = 0; i < b.min.size(); ++i) w.F64(b.min(i));
  for (Eigen::Index i = 0; i < b.max.size(); ++i) w.F64(b.max(i));
}

linmodel::NormalizationBounds ReadBounds(ByteReader& r) {
  const std::uint32_t count = r.U32();
  if (count == 0 || count > kMaxDim || static_cast<std::size_t>(count) * 16 > r.remaining()) {
    throw DecodeError("bounds: invalid column count");
  }
  linmodel::NormalizationBounds b{Eigen::VectorXd(count), Eigen::VectorXd(count)};
  for (std::uint32_t i = 0; i < count; ++i) b.min(i) = r.F64();
  for (std::uint32_t i = 0; i < count; ++i) b.max(i) = r.F64();
  return b;
}

void WriteCiphertext(ByteWriter& w, const ahe::Ciphertext& c) { w.BigUnsigned(c.value()); }

ahe::Ciphertext ReadCiphertext(ByteReader& r) {
  return ahe::Ciphertext(r.BigUnsigned(kMaxCiphertextBytes));
}

void EncodePayload(ByteWriter& w, const BoundsMessage& m) {
  w.U32(m.hop_count);
  WriteBounds(w, m.running);
}

void EncodePayload(ByteWriter& w, const AggregateMessage& m) {
  const ahe::EncryptedStatistics& s = m.aggregate;
  if (s.p.size() != ahe::PackedUpperSize(s.dim) || s.v.size() != s.dim) {
    throw DimensionError("aggregate message: inconsistent ciphertext shape");
  }
  w.U32(m.hop_count);
  w.U32(s.dim);
  w.U64(s.key_fingerprint);
  for (const auto& c : s.p) WriteCiphertext(w, c);
  for (const auto& c : s.v) WriteCiphertext(w, c);
  WriteCiphertext(w, s.o);
}

void EncodePayload(ByteWriter& w, const PublishMessage& m) {
  w.U32(static_cast<std::uint32_t>(m.model.w.size()));
  for (Eigen::Index i = 0; i < m.model.w.size(); ++i) w.F64(m.model.w(i));
  w.F64(m.model.err);
  WriteBounds(w, m.model.bounds);
}

void EncodePayload(ByteWriter& w, const SetupParamsMessage& m) {
  w.U32(static_cast<std::uint32_t>(m.public_key.bits()));
  w.BigUnsigned(m.public_key.n());
  w.F64(m.sensitivity);
  WriteBounds(w, m.bounds);
  w.F64(m.privacy.epsilon_global);
  w.F64(m.privacy.alpha);
  w.F64(m.privacy.p);
  w.U8(static_cast<std::uint8_t>(m.privacy.scaling));
  w.U64(static_cast<std::uint64_t>(m.codec_scale));
  w.U8(static_cast<std::uint8_t>((m.noise_enabled ? 1 : 0) | (m.bound_row_norm ? 2 : 0)));
  w.U32(m.n_parties);
}

BoundsMessage DecodeBounds(ByteReader& r) {
  BoundsMessage m;
  m.hop_count = r.U32();
  m.running = ReadBounds(r);
  return m;
}

AggregateMessage DecodeAggregate(ByteReader& r) {
  AggregateMessage m;
  m.hop_count = r.U32();
  ahe::EncryptedStatistics& s = m.aggregate;
  s.dim = r.U32();
  if (s.dim == 0 || s.dim > kMaxDim) throw DecodeError("aggregate: invalid dimension");
  s.key_fingerprint = r.U64();
  const std::size_t packed = ahe::PackedUpperSize(s.dim);
  // Each ciphertext needs at least its 4-byte length prefix.
  if ((packed + s.dim + 1) * 4 > r.remaining()) throw DecodeError("aggregate: truncated");
  s.p.reserve(packed);
  for (std::size_t k = 0; k < packed; ++k) s.p.push_back(ReadCiphertext(r));
  s.v.reserve(s.dim);
  for (std::uint32_t k = 0; k < s.dim; ++k) s.v.push_back(ReadCiphertext(r));
  s.o = ReadCiphertext(r);
  return m;
}

PublishMessage DecodePublish(ByteReader& r) {
  PublishMessage m;
  const std::uint32_t dim = r.U32();
  if (dim == 0 || dim > kMaxDim || static_cast<std::size_t>(dim) * 8 > r.remaining()) {
    throw DecodeError("publish: invalid dimension");
  }
  m.model.w.resize(dim);
  for (std::uint32_t i = 0; i < dim; ++i) m.model.w(i) = r.F64();
  m.model.err = r.F64();
  m.model.bounds = ReadBounds(r);
  return m;
}

SetupParamsMessage DecodeSetup(ByteReader& r) {
  const std::uint32_t bits = r.U32();
  mpz_class n = r.BigUnsigned(kMaxCiphertextBytes);
  ahe::PublicKey pk = [&] {
    try {
      return ahe::PublicKey(std::move(n));
    } catch (const CryptoError& e) {
      throw DecodeError(std::string("setup: ") + e.what());
    }
  }();
  if (static_cast<std::uint32_t>(pk.bits()) != bits) {
    throw DecodeError("setup: key bit length does not match modulus");
  }
  SetupParamsMessage m{pk};
  m.sensitivity = r.F64();
  m.bounds = ReadBounds(r);
  m.privacy.epsilon_global = r.F64();
  m.privacy.alpha = r.F64();
  m.privacy.p = r.F64();
  const std::uint8_t scaling = r.U8();
  if (scaling > static_cast<std::uint8_t>(dpfm::ScalingMode::kNone)) {
    throw DecodeError("setup: unknown scaling mode");
  }
  m.privacy.scaling = static_cast<dpfm::ScalingMode>(scaling);
  m.codec_scale = static_cast<std::int64_t>(r.U64());
  if (m.codec_scale <= 0) throw DecodeError("setup: invalid codec scale");
  const std::uint8_t flags = r.U8();
  if (flags > 3) throw DecodeError("setup: unknown flags");
  m.noise_enabled = (flags & 1) != 0;
  m.bound_row_norm = (flags & 2) != 0;
  m.n_parties = r.U32();
  return m;
}

}  // namespace

std::string_view MessageKindName(MessageKind kind) {
  switch (kind) {
    case MessageKind::kBounds:
      return "bounds";
    case MessageKind::kAggregate:
      return "aggregate";
    case MessageKind::kPublish:
      return "publish";
    case MessageKind::kSetupParams:
      return "setup-params";
  }
  return "unknown";
}

MessageKind KindOf(const Message& message) {
  return static_cast<MessageKind>(message.index());
}

std::vector<std::uint8_t> EncodeMessage(const Message& message) {
  ByteWriter payload;
  std::visit([&](const auto& m) { EncodePayload(payload, m); }, message);
  if (payload.size() > kMaxPayloadBytes) throw InvalidArgumentError("message payload too large");

  ByteWriter frame;
  frame.Raw(kWireMagic);
  frame.U8(kWireVersion);
  frame.U8(static_cast<std::uint8_t>(KindOf(message)));
  frame.U32(static_cast<std::uint32_t>(payload.size()));
  frame.Raw(payload.bytes());
  return frame.Take();
}

FrameHeader DecodeFrameHeader(std::span<const std::uint8_t> header) {
  if (header.size() < kFrameHeaderSize) throw DecodeError("frame: truncated header");
  ByteReader r(header.first(kFrameHeaderSize));
  auto magic = r.Raw(kWireMagic.size());
  if (!std::equal(magic.begin(), magic.end(), kWireMagic.begin())) {
    throw DecodeError("frame: bad magic");
  }
  const std::uint8_t version = r.U8();
  if (version != kWireVersion) {
    throw DecodeError("frame: unsupported version " + std::to_string(version));
  }
  const std::uint8_t kind = r.U8();
  if (kind > static_cast<std::uint8_t>(MessageKind::kSetupParams)) {
    throw DecodeError("frame: unknown message kind " + std::to_string(kind));
  }
  const std::uint32_t length = r.U32();
  if (length == 0) throw DecodeError("frame: empty payload");
  if (length > kMaxPayloadBytes) throw DecodeError("frame: payload length overflow");
  return {static_cast<MessageKind>(kind), length};
}

Message DecodeMessage(std::span<const std::uint8_t> frame) {
  const FrameHeader header = DecodeFrameHeader(frame);
  const auto payload = frame.subspan(kFrameHeaderSize);
  if (payload.size() < header.payload_length) throw DecodeError("frame: truncated payload");
  if (payload.size() > header.payload_length) throw DecodeError("frame: trailing bytes");

  ByteReader r(payload);
  Message out = [&]() -> Message {
    switch (header.kind) {
      case MessageKind::kBounds:
        return DecodeBounds(r);
      case MessageKind::kAggregate:
        return DecodeAggregate(r);
      case MessageKind::kPublish:
        return DecodePublish(r);
      case MessageKind::kSetupParams:
        return DecodeSetup(r);
    }
    throw DecodeError("frame: unknown message kind");
  }();
  r.ExpectEnd("frame payload");
  return out;
}

}  // namespace smddp::protocol
