//
// Copyright 2026 The infoch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "infoch/rng.h"

#include <cmath>
#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"

namespace infoch {
namespace {

using ::testing::ElementsAre;

// Known-answer vectors from the Random123 distribution (kat_vectors).
TEST(PhiloxTest, KnownAnswers) {
  EXPECT_THAT(Philox4x32({0, 0, 0, 0}, {0, 0}),
              ElementsAre(0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u));
  EXPECT_THAT(Philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                         {0xffffffffu, 0xffffffffu}),
              ElementsAre(0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu));
  EXPECT_THAT(Philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                         {0xa4093822u, 0x299f31d0u}),
              ElementsAre(0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u));
}

TEST(CounterRngTest, NormalAtIsPureFunction) {
  const CounterRng a(7, 3);
  const CounterRng b(7, 3);
  for (std::uint64_t k = 0; k < 100; ++k) EXPECT_EQ(a.NormalAt(k), b.NormalAt(k));
  const CounterRng other_stream(7, 4);
  EXPECT_NE(a.NormalAt(0), other_stream.NormalAt(0));
}

TEST(CounterRngTest, NormalMoments) {
  const CounterRng rng(11, 0);
  const int n = 200000;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (int k = 0; k < n; ++k) {
    const double z = rng.NormalAt(k);
    sum += z;
    sum_sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 4.0 / std::sqrt(n));
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
}

TEST(CounterRngTest, UniformRangeAndBelow) {
  CounterRng rng(1, 1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.NextUniform();
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
    const std::uint64_t k = rng.NextBelow(5);
    EXPECT_LT(k, 5u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(CounterRngTest, DeriveSeedSeparatesPurposes) {
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(1, 1));
  EXPECT_NE(DeriveSeed(1, 0), DeriveSeed(2, 0));
  EXPECT_EQ(DeriveSeed(5, 9), DeriveSeed(5, 9));
}

}  // namespace
}  // namespace infoch
