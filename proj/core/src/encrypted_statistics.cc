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

#include "smddp/encrypted_statistics.h"

#include <cmath>

#include "smddp/error.h"

namespace smddp::ahe {

void ValidateEncryptedStatistics(const PublicKey& pk, const EncryptedStatistics& enc) {
  if (enc.key_fingerprint != pk.fingerprint()) {
    throw CryptoError("encrypted statistics were produced under a different public key");
  }
  if (enc.p.size() != PackedUpperSize(enc.dim) || enc.v.size() != enc.dim) {
    throw DimensionError("encrypted statistics: inconsistent shape");
  }
}

EncryptedStatistics EncryptStatistics(const PublicKey& pk, const FixedPointCodec& codec,
                                      const linmodel::LocalStatistics& stats,
                                      CryptoRandom& rng) {
  const Eigen::Index dim = stats.dim();
  if (stats.p.rows() != dim || stats.p.cols() != dim) {
    throw DimensionError("EncryptStatistics: statistics dimension mismatch");
  }
  if (codec.modulus() != pk.n()) {
    throw CryptoError("EncryptStatistics: codec modulus does not match the public key");
  }

  // Encode everything first so an overflow is reported before any work.
  std::vector<mpz_class> p_plain;
  p_plain.reserve(PackedUpperSize(static_cast<std::size_t>(dim)));
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      const double a = stats.p(i, j);
      const double b = stats.p(j, i);
      if (std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(a))) {
        throw InvalidArgumentError("EncryptStatistics: P is not symmetric");
      }
      p_plain.push_back(codec.Encode(a));
    }
  }
  std::vector<mpz_class> v_plain;
  v_plain.reserve(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) v_plain.push_back(codec.Encode(stats.v(i)));
  const mpz_class o_plain = codec.Encode(stats.o);

  EncryptedStatistics enc;
  enc.dim = static_cast<std::uint32_t>(dim);
  enc.key_fingerprint = pk.fingerprint();
  enc.p.reserve(p_plain.size());
  for (const mpz_class& m : p_plain) enc.p.push_back(Encrypt(pk, m, rng));
  enc.v.reserve(v_plain.size());
  for (const mpz_class& m : v_plain) enc.v.push_back(Encrypt(pk, m, rng));
  enc.o = Encrypt(pk, o_plain, rng);
  return enc;
}

EncryptedStatistics AddStatistics(const PublicKey& pk, const EncryptedStatistics& a,
                                  const EncryptedStatistics& b) {
  ValidateEncryptedStatistics(pk, a);
  ValidateEncryptedStatistics(pk, b);
  if (a.dim != b.dim) throw DimensionError("AddStatistics: dimension mismatch");
  EncryptedStatistics out;
  out.dim = a.dim;
  out.key_fingerprint = a.key_fingerprint;
  out.p.reserve(a.p.size());
  for (std::size_t k = 0; k < a.p.size(); ++k) out.p.push_back(Add(pk, a.p[k], b.p[k]));
  out.v.reserve(a.v.size());
  for (std::size_t k = 0; k < a.v.size(); ++k) out.v.push_back(Add(pk, a.v[k], b.v[k]));
  out.o = Add(pk, a.o, b.o);
  return out;
}

linmodel::LocalStatistics DecryptStatistics(const SecretKey& sk,
                                            const FixedPointCodec& codec,
                                            const EncryptedStatistics& enc) {
  ValidateEncryptedStatistics(sk.public_key(), enc);
  const Eigen::Index dim = enc.dim;
  linmodel::LocalStatistics out = linmodel::LocalStatistics::Zero(dim);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = i; j < dim; ++j) {
      out.p(i, j) = codec.Decode(Decrypt(sk, enc.p[k++]));
      out.p(j, i) = out.p(i, j);
    }
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    out.v(i) = codec.Decode(Decrypt(sk, enc.v[static_cast<std::size_t>(i)]));
  }
  out.o = codec.Decode(Decrypt(sk, enc.o));
  return out;
}

}  // namespace smddp::ahe
