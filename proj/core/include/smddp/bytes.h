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

#ifndef SMDDP_BYTES_H_
#define SMDDP_BYTES_H_

// Big-endian byte writer/reader shared by the key-file and wire formats.
// Reader failures raise DecodeError and never read past the buffer.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace smddp {

class ByteWriter {
 public:
  void U8(std::uint8_t v) { buf_.push_back(v); }
  void U32(std::uint32_t v);
  void U64(std::uint64_t v);
  void F64(double v);
  void Raw(std::span<const std::uint8_t> bytes);
  void Raw(std::string_view bytes);
  // u32 length followed by the unsigned big-endian magnitude; 0 is empty.
  void BigUnsigned(const mpz_class& v);

  std::size_t size() const { return buf_.size(); }
  std::vector<std::uint8_t>& bytes() { return buf_; }
  std::vector<std::uint8_t> Take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t U8();
  std::uint32_t U32();
  std::uint64_t U64();
  double F64();
  std::span<const std::uint8_t> Raw(std::size_t n);
  mpz_class BigUnsigned(std::size_t max_bytes = 1u << 20);

  std::size_t remaining() const { return data_.size() - offset_; }
  bool done() const { return offset_ == data_.size(); }
  // Throws DecodeError mentioning `what` if any bytes are left unread.
  void ExpectEnd(std::string_view what) const;

 private:
  void Need(std::size_t n) const;

  std::span<const std::uint8_t> data_;
  std::size_t offset_ = 0;
};

std::vector<std::uint8_t> BigToBytes(const mpz_class& v);
mpz_class BigFromBytes(std::span<const std::uint8_t> bytes);

}  // namespace smddp

#endif  // SMDDP_BYTES_H_
