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

#include "smddp/random.h"

#include <sodium.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>

#include "smddp/error.h"

namespace smddp {
namespace {

void EnsureSodium() {
  static const int status = sodium_init();
  if (status < 0) throw CryptoError("libsodium initialisation failed");
}

void AppendU64(std::vector<std::uint8_t>& buf, std::uint64_t v) {
  for (int i = 7; i >= 0; --i) buf.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

}  // namespace

StreamSeed DeriveSeed(std::uint64_t master_seed, std::string_view domain,
                      std::initializer_list<std::uint64_t> path) {
  EnsureSodium();
  std::vector<std::uint8_t> message;
  AppendU64(message, master_seed);
  AppendU64(message, domain.size());
  message.insert(message.end(), domain.begin(), domain.end());
  AppendU64(message, path.size());
  for (std::uint64_t index : path) AppendU64(message, index);

  StreamSeed seed;
  crypto_generichash(seed.bytes.data(), seed.bytes.size(), message.data(),
                     message.size(), nullptr, 0);
  return seed;
}

RandomStream::RandomStream(const StreamSeed& seed) {
  std::array<std::uint32_t, 8> words{};
  for (std::size_t i = 0; i < words.size(); ++i) {
    std::memcpy(&words[i], seed.bytes.data() + 4 * i, 4);
  }
  std::seed_seq seq(words.begin(), words.end());
  engine_.seed(seq);
}

RandomStream::RandomStream(std::uint64_t seed)
    : RandomStream(DeriveSeed(seed, "random-stream")) {}

double RandomStream::UniformOpen() {
  // 53 random mantissa bits, shifted by half an ulp so 0 is excluded.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double RandomStream::UniformCentered() { return UniformOpen() - 0.5; }

double RandomStream::Uniform(double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(engine_() >> 11) * 0x1.0p-53);
}

double RandomStream::StandardNormal() {
  // Box-Muller; the second variate is discarded to keep the stream stateless.
  double u1 = UniformOpen();
  double u2 = UniformOpen();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RandomStream::Below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgumentError("RandomStream::Below: bound must be positive");
  const std::uint64_t limit = max() - max() % bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

CryptoRandom::CryptoRandom(const StreamSeed& seed) : key_(seed.bytes) {
  EnsureSodium();
}

CryptoRandom CryptoRandom::FromSystemEntropy() {
  EnsureSodium();
  StreamSeed seed;
  randombytes_buf(seed.bytes.data(), seed.bytes.size());
  return CryptoRandom(seed);
}

void CryptoRandom::Refill() {
  std::array<std::uint8_t, crypto_stream_chacha20_ietf_NONCEBYTES> nonce{};
  static_assert(crypto_stream_chacha20_ietf_NONCEBYTES >= 8);
  for (int i = 0; i < 8; ++i) {
    nonce[i] = static_cast<std::uint8_t>(block_counter_ >> (8 * i));
  }
  ++block_counter_;
  crypto_stream_chacha20_ietf(buffer_.data(), buffer_.size(), nonce.data(),
                              key_.data());
  offset_ = 0;
}

void CryptoRandom::Fill(std::span<std::uint8_t> out) {
  std::size_t written = 0;
  while (written < out.size()) {
    if (offset_ == buffer_.size()) Refill();
    std::size_t take = std::min(out.size() - written, buffer_.size() - offset_);
    std::memcpy(out.data() + written, buffer_.data() + offset_, take);
    offset_ += take;
    written += take;
  }
}

}  // namespace smddp
