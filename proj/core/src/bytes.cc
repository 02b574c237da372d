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

#include "smddp/bytes.h"

#include <bit>
#include <cstring>

#include "smddp/error.h"

namespace smddp {

void ByteWriter::U32(std::uint32_t v) {
  for (int i = 3; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::U64(std::uint64_t v) {
  for (int i = 7; i >= 0; --i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void ByteWriter::F64(double v) { U64(std::bit_cast<std::uint64_t>(v)); }

void ByteWriter::Raw(std::span<const std::uint8_t> bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::Raw(std::string_view bytes) {
  buf_.insert(buf_.end(), bytes.begin(), bytes.end());
}

void ByteWriter::BigUnsigned(const mpz_class& v) {
  std::vector<std::uint8_t> magnitude = BigToBytes(v);
  U32(static_cast<std::uint32_t>(magnitude.size()));
  Raw(magnitude);
}

void ByteReader::Need(std::size_t n) const {
  if (n > remaining()) {
    throw DecodeError("truncated input: need " + std::to_string(n) + " bytes, have " +
                      std::to_string(remaining()));
  }
}

std::uint8_t ByteReader::U8() {
  Need(1);
  return data_[offset_++];
}

std::uint32_t ByteReader::U32() {
  Need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = (v << 8) | data_[offset_++];
  return v;
}

std::uint64_t ByteReader::U64() {
  Need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | data_[offset_++];
  return v;
}

double ByteReader::F64() { return std::bit_cast<double>(U64()); }

std::span<const std::uint8_t> ByteReader::Raw(std::size_t n) {
  Need(n);
  auto out = data_.subspan(offset_, n);
  offset_ += n;
  return out;
}

mpz_class ByteReader::BigUnsigned(std::size_t max_bytes) {
  const std::uint32_t len = U32();
  if (len > max_bytes) throw DecodeError("big integer length exceeds limit");
  return BigFromBytes(Raw(len));
}

void ByteReader::ExpectEnd(std::string_view what) const {
  if (!done()) {
    throw DecodeError(std::string(what) + ": " + std::to_string(remaining()) +
                      " trailing bytes");
  }
}

std::vector<std::uint8_t> BigToBytes(const mpz_class& v) {
  if (sgn(v) < 0) throw InvalidArgumentError("BigToBytes: negative value");
  if (sgn(v) == 0) return {};
  const std::size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  std::vector<std::uint8_t> out(count);
  std::size_t written = 0;
  mpz_export(out.data(), &written, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(written);
  return out;
}

mpz_class BigFromBytes(std::span<const std::uint8_t> bytes) {
  mpz_class v;
  if (!bytes.empty()) mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return v;
}

}  // namespace smddp
