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

#ifndef INFOCH_RNG_H_
#define INFOCH_RNG_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace infoch {

// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> Philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

// Counter-based generator keyed by (seed, stream). Output k depends only on
// (seed, stream, k), so distinct streams never overlap and any range of
// outputs can be produced independently of the others.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : seed_(seed), stream_(stream) {}

  // Pair of 64-bit words from block `block`.
  std::array<std::uint64_t, 2> BlockAt(std::uint64_t block) const;

  // k-th standard normal of this stream (Box-Muller, two normals per block).
  double NormalAt(std::uint64_t k) const;

  // Sequential interface over the same counter space.
  std::uint64_t NextU64();
  // Uniform in the open interval (0, 1).
  double NextUniform();
  // Uniform integer in [0, n).
  std::uint64_t NextBelow(std::uint64_t n);
  double NextNormal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  int word_ = 2;
  std::array<std::uint64_t, 2> buffer_{};
  std::uint64_t normal_index_ = 0;
};

// Maps 64 random bits to a double in (0, 1).
double ToOpenUnit(std::uint64_t bits);

// Derives an independent 64-bit seed from (seed, purpose); used to split a
// master seed into per-component seeds.
std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t purpose);

}  // namespace infoch

#endif  // INFOCH_RNG_H_
