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

#ifndef SMDDP_FIXED_POINT_H_
#define SMDDP_FIXED_POINT_H_

#include <gmpxx.h>

#include <cstdint>

namespace smddp::ahe {

// Maps reals onto the plaintext ring Z_n as round(v * scale), with negative
// values in the upper half (n - |round(v * scale)|). Encodings are limited to
// magnitudes below (n / 2) / 2^kHeadroomBits so that up to 2^kHeadroomBits
// encodings can be summed homomorphically without wrapping.
class FixedPointCodec {
 public:
  static constexpr std::int64_t kDefaultScale = 1'000'000;
  static constexpr int kHeadroomBits = 16;

  explicit FixedPointCodec(mpz_class modulus, std::int64_t scale = kDefaultScale);

  // Throws OutOfRangeError for non-finite values or magnitude overflow.
  mpz_class Encode(double value) const;
  // Values above n / 2 decode as negative. Throws OutOfRangeError if m is not
  // in [0, n).
  double Decode(const mpz_class& m) const;

  std::int64_t scale() const { return scale_; }
  const mpz_class& modulus() const { return modulus_; }
  // Largest |round(v * scale)| accepted by Encode.
  const mpz_class& max_magnitude() const { return max_magnitude_; }

 private:
  mpz_class modulus_;
  mpz_class half_;
  mpz_class max_magnitude_;
  std::int64_t scale_;
};

}  // namespace smddp::ahe

#endif  // SMDDP_FIXED_POINT_H_
