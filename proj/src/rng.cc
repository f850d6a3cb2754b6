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
#include <numbers>

namespace infoch {
namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void MulHiLo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi,
                    std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> Round(std::array<std::uint32_t, 4> c,
                                          std::array<std::uint32_t, 2> k) {
  std::uint32_t hi0, lo0, hi1, lo1;
  MulHiLo(kMul0, c[0], hi0, lo0);
  MulHiLo(kMul1, c[2], hi1, lo1);
  return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

}  // namespace

std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  counter = Round(counter, key);
  for (int r = 1; r < 10; ++r) {
    key[0] += kWeyl0;
    key[1] += kWeyl1;
    counter = Round(counter, key);
  }
  return counter;
}

double ToOpenUnit(std::uint64_t bits) {
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t purpose) {
  return SplitMix64(SplitMix64(seed) ^ (purpose * 0xD6E8FEB86659FD93ull));
}

std::array<std::uint64_t, 2> CounterRng::BlockAt(std::uint64_t block) const {
  const std::array<std::uint32_t, 4> ctr = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      static_cast<std::uint32_t>(stream_),
      static_cast<std::uint32_t>(stream_ >> 32)};
  const std::array<std::uint32_t, 2> key = {
      static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)};
  const auto out = Philox4x32(ctr, key);
  return {(static_cast<std::uint64_t>(out[1]) << 32) | out[0],
          (static_cast<std::uint64_t>(out[3]) << 32) | out[2]};
}

double CounterRng::NormalAt(std::uint64_t k) const {
  const auto words = BlockAt(k / 2);
  const double u1 = ToOpenUnit(words[0]);
  const double u2 = ToOpenUnit(words[1]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return (k % 2 == 0) ? radius * std::cos(angle) : radius * std::sin(angle);
}

std::uint64_t CounterRng::NextU64() {
  if (word_ == 2) {
    // The sequential uniform interface lives in the upper half of the block
    // space so it never collides with NormalAt() indices.
    buffer_ = BlockAt(block_ | (1ull << 63));
    ++block_;
    word_ = 0;
  }
  return buffer_[word_++];
}

double CounterRng::NextUniform() { return ToOpenUnit(NextU64()); }

std::uint64_t CounterRng::NextBelow(std::uint64_t n) {
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = ~0ull - (~0ull % n);
  std::uint64_t x;
  do {
    x = NextU64();
  } while (x >= limit);
  return x % n;
}

double CounterRng::NextNormal() { return NormalAt(normal_index_++); }

}  // namespace infoch
