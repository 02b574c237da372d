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

#include "smddp/paillier.h"

#include <sodium.h>

#include <fstream>
#include <iterator>
#include <string>

#include "smddp/bytes.h"
#include "smddp/error.h"

namespace smddp::ahe {
namespace {

constexpr std::string_view kPublicMagic = "SMPK";
constexpr std::string_view kSecretMagic = "SMSK";

mpz_class RandomBits(std::size_t bits, CryptoRandom& rng) {
  std::vector<std::uint8_t> buf((bits + 7) / 8);
  rng.Fill(buf);
  const std::size_t excess = buf.size() * 8 - bits;
  if (!buf.empty() && excess > 0) buf[0] &= static_cast<std::uint8_t>(0xFFu >> excess);
  return BigFromBytes(buf);
}

mpz_class RandomPrime(int bits, CryptoRandom& rng) {
  for (;;) {
    mpz_class candidate = RandomBits(static_cast<std::size_t>(bits), rng);
    mpz_setbit(candidate.get_mpz_t(), bits - 1);
    mpz_setbit(candidate.get_mpz_t(), bits - 2);
    mpz_setbit(candidate.get_mpz_t(), 0);
    if (mpz_probab_prime_p(candidate.get_mpz_t(), kPrimalityRounds) > 0) return candidate;
  }
}

mpz_class L(const mpz_class& u, const mpz_class& n) { return (u - 1) / n; }

void CheckMagic(ByteReader& reader, std::string_view magic, std::string_view what) {
  auto got = reader.Raw(magic.size());
  if (!std::equal(got.begin(), got.end(), magic.begin())) {
    throw DecodeError(std::string(what) + ": bad magic");
  }
  const std::uint8_t version = reader.U8();
  if (version != kKeyFileVersion) {
    throw DecodeError(std::string(what) + ": unsupported version " + std::to_string(version));
  }
}

std::vector<std::uint8_t> ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open key file " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void WriteFile(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write key file " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing key file " + path.string());
}

}  // namespace

PublicKey::PublicKey(mpz_class n) : n_(std::move(n)) {
  if (n_ < 3) throw CryptoError("public key modulus too small");
  n_squared_ = n_ * n_;
  bits_ = static_cast<int>(mpz_sizeinbase(n_.get_mpz_t(), 2));
  std::vector<std::uint8_t> bytes = BigToBytes(n_);
  std::uint8_t digest[8];
  crypto_generichash(digest, sizeof digest, bytes.data(), bytes.size(), nullptr, 0);
  for (std::uint8_t b : digest) fingerprint_ = (fingerprint_ << 8) | b;
}

SecretKey::SecretKey(PublicKey public_key, mpz_class lambda, mpz_class mu)
    : public_key_(std::move(public_key)), lambda_(std::move(lambda)), mu_(std::move(mu)) {
  mpz_class check = (lambda_ * mu_) % public_key_.n();
  if (check != 1) throw CryptoError("secret key is inconsistent with its modulus");
}

mpz_class RandomBelow(const mpz_class& bound, CryptoRandom& rng) {
  if (bound <= 0) throw InvalidArgumentError("RandomBelow: bound must be positive");
  const std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
  for (;;) {
    mpz_class candidate = RandomBits(bits, rng);
    if (candidate < bound) return candidate;
  }
}

KeyPair KeyPairFromPrimes(const mpz_class& p, const mpz_class& q) {
  if (p == q) throw CryptoError("key primes must be distinct");
  if (mpz_probab_prime_p(p.get_mpz_t(), kPrimalityRounds) == 0 ||
      mpz_probab_prime_p(q.get_mpz_t(), kPrimalityRounds) == 0) {
    throw CryptoError("key factors must be prime");
  }
  mpz_class n = p * q;
  mpz_class phi = (p - 1) * (q - 1);
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), n.get_mpz_t(), phi.get_mpz_t());
  if (g != 1) throw CryptoError("gcd(n, phi(n)) != 1");
  mpz_class lambda;
  mpz_class pm1 = p - 1;
  mpz_class qm1 = q - 1;
  mpz_lcm(lambda.get_mpz_t(), pm1.get_mpz_t(), qm1.get_mpz_t());
  // With g = n + 1, L(g^lambda mod n^2) = lambda mod n.
  mpz_class mu;
  if (mpz_invert(mu.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t()) == 0) {
    throw CryptoError("lambda is not invertible mod n");
  }
  PublicKey pk(n);
  return {pk, SecretKey(pk, lambda, mu)};
}

KeyPair GenerateKeyPair(int bits, CryptoRandom& rng) {
  if (bits < kMinKeyBits) {
    throw InvalidArgumentError("key size " + std::to_string(bits) +
                               " bits is below the minimum of " +
                               std::to_string(kMinKeyBits));
  }
  if (bits % 2 != 0) throw InvalidArgumentError("key size must be even");
  for (;;) {
    mpz_class p = RandomPrime(bits / 2, rng);
    mpz_class q = RandomPrime(bits / 2, rng);
    if (p == q) continue;
    try {
      return KeyPairFromPrimes(p, q);
    } catch (const CryptoError&) {
      continue;
    }
  }
}

bool InRange(const PublicKey& pk, const Ciphertext& c) {
  return c.value() > 0 && c.value() < pk.n_squared();
}

Ciphertext Encrypt(const PublicKey& pk, const mpz_class& m, CryptoRandom& rng) {
  if (m < 0 || m >= pk.n()) throw OutOfRangeError("Encrypt: plaintext outside Z_n");
  mpz_class r;
  mpz_class g;
  do {
    r = RandomBelow(pk.n(), rng);
    mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t());
  } while (r == 0 || g != 1);

  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n().get_mpz_t(), pk.n_squared().get_mpz_t());
  // g^m = (1 + n)^m = 1 + m n (mod n^2).
  mpz_class gm = (1 + m * pk.n()) % pk.n_squared();
  return Ciphertext((gm * rn) % pk.n_squared());
}

mpz_class Decrypt(const SecretKey& sk, const Ciphertext& c) {
  const PublicKey& pk = sk.public_key();
  if (!InRange(pk, c)) throw CryptoError("Decrypt: ciphertext outside [1, n^2)");
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), c.value().get_mpz_t(), pk.n().get_mpz_t());
  if (g != 1) throw CryptoError("Decrypt: ciphertext is not coprime to n^2");
  mpz_class u;
  mpz_powm(u.get_mpz_t(), c.value().get_mpz_t(), sk.lambda().get_mpz_t(),
           pk.n_squared().get_mpz_t());
  return (L(u, pk.n()) * sk.mu()) % pk.n();
}

Ciphertext Add(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
  if (!InRange(pk, c1) || !InRange(pk, c2)) {
    throw CryptoError("Add: ciphertext is not a residue under this public key");
  }
  return Ciphertext((c1.value() * c2.value()) % pk.n_squared());
}

std::vector<std::uint8_t> SerializePublicKey(const PublicKey& pk) {
  ByteWriter w;
  w.Raw(kPublicMagic);
  w.U8(kKeyFileVersion);
  w.U32(static_cast<std::uint32_t>(pk.bits()));
  w.BigUnsigned(pk.n());
  return w.Take();
}

PublicKey ParsePublicKey(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  CheckMagic(r, kPublicMagic, "public key");
  const std::uint32_t bits = r.U32();
  PublicKey pk(r.BigUnsigned());
  r.ExpectEnd("public key");
  if (static_cast<std::uint32_t>(pk.bits()) != bits) {
    throw DecodeError("public key: stored bit length does not match modulus");
  }
  return pk;
}

std::vector<std::uint8_t> SerializeSecretKey(const SecretKey& sk) {
  ByteWriter w;
  w.Raw(kSecretMagic);
  w.U8(kKeyFileVersion);
  w.BigUnsigned(sk.public_key().n());
  w.BigUnsigned(sk.lambda());
  w.BigUnsigned(sk.mu());
  return w.Take();
}

SecretKey ParseSecretKey(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  CheckMagic(r, kSecretMagic, "secret key");
  mpz_class n = r.BigUnsigned();
  mpz_class lambda = r.BigUnsigned();
  mpz_class mu = r.BigUnsigned();
  r.ExpectEnd("secret key");
  return SecretKey(PublicKey(std::move(n)), std::move(lambda), std::move(mu));
}

void WritePublicKeyFile(const std::filesystem::path& path, const PublicKey& pk) {
  WriteFile(path, SerializePublicKey(pk));
}

PublicKey ReadPublicKeyFile(const std::filesystem::path& path) {
  return ParsePublicKey(ReadFile(path));
}

void WriteSecretKeyFile(const std::filesystem::path& path, const SecretKey& sk) {
  WriteFile(path, SerializeSecretKey(sk));
}

SecretKey ReadSecretKeyFile(const std::filesystem::path& path) {
  return ParseSecretKey(ReadFile(path));
}

}  // namespace smddp::ahe
