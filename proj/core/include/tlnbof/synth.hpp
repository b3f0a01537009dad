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

#include <cstddef>
#include <cstdint>
#include <vector>

#include "tlnbof/data.hpp"

namespace tlnbof {

// Regime-switching mid-price with a linearly planted, noisy view of the
// upcoming drift.
//
// Each day runs a regime r_t in {-1, 0, +1}; the log mid-price moves by
// drift * r_t + price_noise * N(0, 1) per step. Regimes last
// min_duration + Geometric(mean_extra_duration) steps and always switch to a
// different regime. The hidden quantity
//
//   e_t = sum_{i=1..H} (H + 1 - i) r_{t+i} / (H (H + 1) / 2)
//
// is the normalized drift of the mean over the next H prices. Designated
// features carry separation * signal_gain * sign_j * e_t + N(0, 1); all other
// features are pure N(0, 1) noise. Labels are never planted: windowize()
// derives them from the prices.
struct SynthConfig {
  std::size_t n_days = 10;
  std::size_t rows_per_day = 1000;
  std::uint64_t seed = 1;
  double separation = 1.0;
  std::size_t feature_dim = kLobFeatureDim;
  std::size_t n_signal = 16;
  double signal_gain = 2.0;
  std::size_t horizon = 10;
  double drift = 1e-4;
  double price_noise = 2e-5;
  std::size_t min_duration = 30;
  double mean_extra_duration = 40.0;
  double initial_price = 100.0;
};

// Indices of the features that carry the planted signal (evenly spread).
std::vector<std::size_t> designated_features(const SynthConfig& config);

// Days are numbered 1..n_days.
std::vector<FeatureStream> synth_generate(const SynthConfig& config);
std::vector<FeatureStream> synth_generate(std::size_t n_days, std::size_t rows_per_day, std::uint64_t seed,
                                          double separation);

}  // namespace tlnbof
