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

#include "smddp/fixed_point.h"

#include <cmath>
#include <string>

#include "smddp/error.h"

namespace smddp::ahe {

FixedPointCodec::FixedPointCodec(mpz_class modulus, std::int64_t scale)
    : modulus_(std::move(modulus)), scale_(scale) {
  if (scale_ <= 0) throw InvalidArgumentError("fixed-point scale must be positive");
  if (modulus_ < 3) throw InvalidArgumentError("fixed-point modulus too small");
  half_ = modulus_ / 2;
  max_magnitude_ = half_ >> kHeadroomBits;
}

mpz_class FixedPointCodec::Encode(double value) const {
  if (!std::isfinite(value)) throw OutOfRangeError("Encode: non-finite value");
  const double scaled = std::round(value * static_cast<double>(scale_));
  if (!std::isfinite(scaled)) throw OutOfRangeError("Encode: value overflows the codec");
  mpz_class magnitude(std::abs(scaled));
  if (magnitude > max_magnitude_) {
    throw OutOfRangeError("Encode: |" + std::to_string(value) +
                          "| exceeds the representable range of the codec");
  }
  if (scaled < 0 && magnitude != 0) return modulus_ - magnitude;
  return magnitude;
}

double FixedPointCodec::Decode(const mpz_class& m) const {
  if (m < 0 || m >= modulus_) throw OutOfRangeError("Decode: value outside Z_n");
  mpz_class signed_value = m > half_ ? mpz_class(m - modulus_) : m;
  mpz_class quotient;
  mpz_class remainder;
  mpz_class scale(static_cast<long>(scale_));
  mpz_tdiv_qr(quotient.get_mpz_t(), remainder.get_mpz_t(), signed_value.get_mpz_t(),
              scale.get_mpz_t());
  return quotient.get_d() + remainder.get_d() / static_cast<double>(scale_);
}

}  // namespace smddp::ahe
