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

#include <cstdint>
#include <span>

#include "tlnbof/network.hpp"

namespace tlnbof {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First/second moments mirror the parameter groups.
struct AdamState {
  ParamBlock m;
  ParamBlock v;
  std::uint64_t t = 0;

  static AdamState for_params(const TloNbofParams& params);
};

// In-place bias-corrected Adam update of one buffer; `t` is the already
// incremented step count.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t t, const AdamConfig& config);

// Advances state.t and updates every trainable group present in `grads`.
void adam_step(TloNbofParams& params, const Gradients& grads, AdamState& state, const AdamConfig& config);

}  // namespace tlnbof
