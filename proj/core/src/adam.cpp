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

#include "tlnbof/adam.hpp"

#include <cmath>
#include <string>

#include "tlnbof/errors.hpp"

namespace tlnbof {

AdamState AdamState::for_params(const TloNbofParams& params) {
  AdamState s;
  s.m = params.values;
  s.m.for_each([](std::string_view, Tensor& t) { t.fill(0.0); });
  s.v = s.m;
  return s;
}

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 std::uint64_t t, const AdamConfig& config) {
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size()) {
    throw InvalidArgument("adam_update: buffer sizes differ");
  }
  if (t == 0) throw InvalidArgument("adam_update: step count must be >= 1");
  const double td = static_cast<double>(t);
  const double correction1 = 1.0 - std::pow(config.beta1, td);
  const double correction2 = 1.0 - std::pow(config.beta2, td);
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * grad[i];
    v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / correction1;
    const double v_hat = v[i] / correction2;
    param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
  }
}

void adam_step(TloNbofParams& params, const Gradients& grads, AdamState& state, const AdamConfig& config) {
  ++state.t;
  params.values.for_each([&](std::string_view name, Tensor& p) {
    if (!params.trainable(name)) return;
    const Tensor* g = grads.values.find(name);
    if (g == nullptr) return;
    Tensor* m = state.m.find(name);
    Tensor* v = state.v.find(name);
    if (m == nullptr || v == nullptr || g->shape() != p.shape() || m->shape() != p.shape() || v->shape() != p.shape()) {
      throw InvalidArgument("adam_step: shape mismatch for parameter group " + std::string(name));
    }
    adam_update(p.data(), g->data(), m->data(), v->data(), state.t, config);
  });
  ++params.version;
}

}  // namespace tlnbof
