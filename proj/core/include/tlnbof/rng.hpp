// Copyright 2026 The tlnbof Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace tlnbof {

// xoshiro256** seeded through splitmix64. Only integer arithmetic touches the
// state, so the raw 64-bit sequence is identical on every platform.
//
// Independent streams come from `derive(seed, stream, counter)`, which lets the
// trainer draw the batch for step t without carrying generator state around
// (and therefore without storing it in checkpoints).
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed);

  static Rng derive(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0);
  static Rng from_state(const State& state);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 bits of mantissa.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  // Standard normal via Box-Muller; consumes two uniforms per call.
  double normal();
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // A child generator; advances this one by one draw.
  Rng split();

  const State& state() const { return state_; }

 private:
  Rng() = default;
  State state_{};
};

std::uint64_t splitmix64(std::uint64_t& x);

}  // namespace tlnbof
