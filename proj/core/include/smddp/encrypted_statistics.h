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

#ifndef SMDDP_ENCRYPTED_STATISTICS_H_
#define SMDDP_ENCRYPTED_STATISTICS_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "smddp/fixed_point.h"
#include "smddp/linmodel.h"
#include "smddp/paillier.h"

namespace smddp::ahe {

// Element-wise ciphertexts of fixed-point encoded statistics. P is symmetric,
// so only its upper triangle (row-major, diagonal included) is encrypted;
// decryption mirrors it back to the full matrix.
struct EncryptedStatistics {
  std::uint32_t dim = 0;
  std::uint64_t key_fingerprint = 0;
  std::vector<Ciphertext> p;  // dim * (dim + 1) / 2
  std::vector<Ciphertext> v;  // dim
  Ciphertext o;

  friend bool operator==(const EncryptedStatistics&, const EncryptedStatistics&) = default;
};

constexpr std::size_t PackedUpperSize(std::size_t dim) { return dim * (dim + 1) / 2; }

// Throws OutOfRangeError if any entry overflows the codec and
// InvalidArgumentError if P is not symmetric.
EncryptedStatistics EncryptStatistics(const PublicKey& pk, const FixedPointCodec& codec,
                                      const linmodel::LocalStatistics& stats,
                                      CryptoRandom& rng);

// Throws CryptoError on key mismatch and DimensionError on shape mismatch.
EncryptedStatistics AddStatistics(const PublicKey& pk, const EncryptedStatistics& a,
                                  const EncryptedStatistics& b);

linmodel::LocalStatistics DecryptStatistics(const SecretKey& sk,
                                            const FixedPointCodec& codec,
                                            const EncryptedStatistics& enc);

// Shape and key checks shared by the operations above and by message decoding.
void ValidateEncryptedStatistics(const PublicKey& pk, const EncryptedStatistics& enc);

}  // namespace smddp::ahe

#endif  // SMDDP_ENCRYPTED_STATISTICS_H_
