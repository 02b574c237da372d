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

#ifndef SMDDP_PAILLIER_H_
#define SMDDP_PAILLIER_H_

// Paillier additively homomorphic encryption with g = n + 1.
//
//   Enc(m) = g^m r^n mod n^2,  Dec(c) = L(c^lambda mod n^2) mu mod n,
//   Dec(Enc(a) Enc(b) mod n^2) = a + b mod n,  L(u) = (u - 1) / n.
//
// Keys are immutable after construction and safe to share across threads.
// Only Decrypt touches SecretKey.

#include <gmpxx.h>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "smddp/random.h"

namespace smddp::ahe {

inline constexpr int kMinKeyBits = 1024;
inline constexpr int kDefaultKeyBits = 2048;
// Miller-Rabin rounds; worst-case error 4^-40 = 2^-80 per prime.
inline constexpr int kPrimalityRounds = 40;

class PublicKey {
 public:
  explicit PublicKey(mpz_class n);

  const mpz_class& n() const { return n_; }
  const mpz_class& n_squared() const { return n_squared_; }
  mpz_class g() const { return n_ + 1; }
  int bits() const { return bits_; }
  // First 8 bytes of BLAKE2b(n); identifies the key in encrypted payloads.
  std::uint64_t fingerprint() const { return fingerprint_; }

  friend bool operator==(const PublicKey& a, const PublicKey& b) { return a.n_ == b.n_; }

 private:
  mpz_class n_;
  mpz_class n_squared_;
  int bits_ = 0;
  std::uint64_t fingerprint_ = 0;
};

class SecretKey {
 public:
  // Throws CryptoError unless lambda * mu == 1 (mod n).
  SecretKey(PublicKey public_key, mpz_class lambda, mpz_class mu);

  const PublicKey& public_key() const { return public_key_; }
  const mpz_class& lambda() const { return lambda_; }
  const mpz_class& mu() const { return mu_; }

 private:
  PublicKey public_key_;
  mpz_class lambda_;
  mpz_class mu_;
};

struct KeyPair {
  PublicKey public_key;
  SecretKey secret_key;
};

class Ciphertext {
 public:
  Ciphertext() = default;
  explicit Ciphertext(mpz_class value) : value_(std::move(value)) {}

  const mpz_class& value() const { return value_; }

  friend bool operator==(const Ciphertext& a, const Ciphertext& b) {
    return a.value_ == b.value_;
  }

 private:
  mpz_class value_;
};

// Two distinct bits/2-bit primes with their top two bits set, so n has
// exactly `bits` bits. Throws InvalidArgumentError for bits < kMinKeyBits or
// odd bits.
KeyPair GenerateKeyPair(int bits, CryptoRandom& rng);

// Key pair from caller-supplied primes, without the size floor. Intended for
// small test keys; throws CryptoError if p, q are not distinct primes.
KeyPair KeyPairFromPrimes(const mpz_class& p, const mpz_class& q);

// Uniform in [0, bound).
mpz_class RandomBelow(const mpz_class& bound, CryptoRandom& rng);

// Requires 0 <= m < n (OutOfRangeError otherwise).
Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, CryptoRandom& rng);

// Throws CryptoError for ciphertexts outside [1, n^2) or not coprime to n.
mpz_class Decrypt(const SecretKey& sk, const Ciphertext& c);

// c1 * c2 mod n^2. Throws CryptoError if either operand is not a residue
// under pk.
Ciphertext Add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);

// True when 0 < c < n^2.
bool InRange(const PublicKey& pk, const Ciphertext& c);

// Key files
//   public: "SMPK" | version u8 | bits u32 | n
//   secret: "SMSK" | version u8 | n | lambda | mu
// Big integers are u32 length-prefixed unsigned big-endian.
inline constexpr std::uint8_t kKeyFileVersion = 1;

std::vector<std::uint8_t> SerializePublicKey(const PublicKey& pk);
PublicKey ParsePublicKey(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> SerializeSecretKey(const SecretKey& sk);
SecretKey ParseSecretKey(std::span<const std::uint8_t> bytes);

void WritePublicKeyFile(const std::filesystem::path& path, const PublicKey& pk);
PublicKey ReadPublicKeyFile(const std::filesystem::path& path);
void WriteSecretKeyFile(const std::filesystem::path& path, const SecretKey& sk);
SecretKey ReadSecretKeyFile(const std::filesystem::path& path);

}  // namespace smddp::ahe

#endif  // SMDDP_PAILLIER_H_
