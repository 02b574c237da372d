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

#include <gtest/gtest.h>

#include <set>

namespace smddp {
namespace {

TEST(DeriveSeedTest, DeterministicAndDomainSeparated) {
  EXPECT_EQ(DeriveSeed(1, "a", {2, 3}), DeriveSeed(1, "a", {2, 3}));
  EXPECT_FALSE(DeriveSeed(1, "a", {2, 3}) == DeriveSeed(1, "a", {3, 2}));
  EXPECT_FALSE(DeriveSeed(1, "a") == DeriveSeed(1, "b"));
  EXPECT_FALSE(DeriveSeed(1, "a") == DeriveSeed(2, "a"));
  EXPECT_FALSE(DeriveSeed(1, "a", {}) == DeriveSeed(1, "a", {0}));
}

TEST(RandomStreamTest, ReproducibleSequences) {
  RandomStream a(DeriveSeed(5, "x")), b(DeriveSeed(5, "x")), c(DeriveSeed(6, "x"));
  bool differs = false;
  for (int i = 0; i < 100; ++i) {
    const auto va = a.NextU64();
    EXPECT_EQ(va, b.NextU64());
    differs |= va != c.NextU64();
  }
  EXPECT_TRUE(differs);
}

TEST(RandomStreamTest, UniformRanges) {
  RandomStream r(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = r.UniformOpen();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double c = r.UniformCentered();
    ASSERT_GT(c, -0.5);
    ASSERT_LT(c, 0.5);
    const double w = r.Uniform(-2.0, 3.0);
    ASSERT_GE(w, -2.0);
    ASSERT_LT(w, 3.0);
  }
}

TEST(RandomStreamTest, BelowIsUnbiasedEnough) {
  RandomStream r(2);
  std::array<int, 7> counts{};
  const int n = 70000;
  for (int i = 0; i < n; ++i) {
    const auto k = r.Below(7);
    ASSERT_LT(k, 7u);
    counts[k]++;
  }
  for (int c : counts) EXPECT_NEAR(c, n / 7, 400);
}

TEST(RandomStreamTest, StandardNormalMoments) {
  RandomStream r(3);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.StandardNormal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}

TEST(RandomStreamTest, ShuffleIsPermutation) {
  RandomStream r(4);
  std::vector<int> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i;
  auto copy = v;
  r.Shuffle(v);
  EXPECT_NE(v, copy);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, copy);
}

TEST(CryptoRandomTest, DeterministicFromSeed) {
  CryptoRandom a(DeriveSeed(9, "c")), b(DeriveSeed(9, "c"));
  std::vector<std::uint8_t> x(10000), y(10000);
  a.Fill(x);
  b.Fill(std::span(y).first(3));
  b.Fill(std::span(y).subspan(3));
  EXPECT_EQ(x, y);
  std::set<std::uint8_t> seen(x.begin(), x.end());
  EXPECT_EQ(seen.size(), 256u);
}

TEST(CryptoRandomTest, SystemEntropyDiffers) {
  auto a = CryptoRandom::FromSystemEntropy();
  auto b = CryptoRandom::FromSystemEntropy();
  std::vector<std::uint8_t> x(32), y(32);
  a.Fill(x);
  b.Fill(y);
  EXPECT_NE(x, y);
}

}  // namespace
}  // namespace smddp
