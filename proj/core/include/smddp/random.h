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

#ifndef SMDDP_RANDOM_H_
#define SMDDP_RANDOM_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace smddp {

// 256-bit seed for one independent random stream.
struct StreamSeed {
  std::array<std::uint8_t, 32> bytes{};

  friend bool operator==(const StreamSeed&, const StreamSeed&) = default;
};

// Derives an independent stream seed from a master seed, a domain label and a
// path of indices (party, run, fold, ...). Distinct (domain, path) pairs give
// computationally independent streams; identical inputs give identical seeds.
StreamSeed DeriveSeed(std::uint64_t master_seed, std::string_view domain,
                      std::initializer_list<std::uint64_t> path = {});

// Fast statistical stream used for noise sampling, data generation and
// shuffling. Every draw is built from raw 64-bit outputs so sequences are
// identical across standard library implementations.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(const StreamSeed& seed);
  explicit RandomStream(std::uint64_t seed);

  std::uint64_t NextU64() { return engine_(); }
  result_type operator()() { return engine_(); }
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  // Uniform on the open interval (0, 1).
  double UniformOpen();
  // Uniform on the open interval (-1/2, 1/2).
  double UniformCentered();
  // Uniform on [lo, hi).
  double Uniform(double lo, double hi);
  double StandardNormal();
  // Uniform integer in [0, bound), bound > 0, without modulo bias.
  std::uint64_t Below(std::uint64_t bound);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// ChaCha20 keystream used for key generation and encryption randomness.
// Deterministic when built from a StreamSeed; FromSystemEntropy() gives a
// non-reproducible stream for interactive key generation.
class CryptoRandom {
 public:
  explicit CryptoRandom(const StreamSeed& seed);
  static CryptoRandom FromSystemEntropy();

  void Fill(std::span<std::uint8_t> out);

 private:
  void Refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t block_counter_ = 0;
  std::array<std::uint8_t, 4096> buffer_{};
  std::size_t offset_ = 4096;
};

}  // namespace smddp

#endif  // SMDDP_RANDOM_H_
