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

#include <benchmark/benchmark.h>

#include "tlnbof/rng.hpp"
#include "tlnbof/tensor.hpp"
#include "tlnbof/tlonbof_layer.hpp"

namespace tlnbof {
namespace {

Tensor uniform(Shape shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& v : t.data()) v = rng.uniform(-1.0, 1.0);
  return t;
}

// Args: sequence length, codewords, feature dim.
void BM_LayerForward(benchmark::State& state) {
  Rng rng(1);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto d = static_cast<std::size_t>(state.range(2));
  const Tensor x = uniform({n, d}, rng);
  const Codebook cb{uniform({k, d}, rng)};
  const KernelConfig kernel;
  const ScalingParams scaling = ScalingParams::initial(k, static_cast<double>(n), true);
  for (auto _ : state) benchmark::DoNotOptimize(forward(x, cb, kernel, scaling, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LayerForward)->Args({15, 256, 256})->Args({15, 64, 144})->Args({100, 256, 256});

void BM_LayerForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const auto d = static_cast<std::size_t>(state.range(2));
  const Tensor x = uniform({n, d}, rng);
  const Codebook cb{uniform({k, d}, rng)};
  const KernelConfig kernel;
  const ScalingParams scaling = ScalingParams::initial(k, static_cast<double>(n), true);
  const std::vector<double> upstream(3 * k, 1e-3);
  for (auto _ : state) {
    LayerContext ctx;
    forward(x, cb, kernel, scaling, 3, &ctx);
    benchmark::DoNotOptimize(backward(ctx, upstream, cb, kernel));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_LayerForwardBackward)->Args({15, 256, 256})->Args({15, 64, 144});

void BM_SoftAssignGaussian(benchmark::State& state) {
  Rng rng(3);
  const Tensor x = uniform({15, 256}, rng);
  const Codebook cb{uniform({256, 256}, rng)};
  KernelConfig kernel;
  kernel.type = KernelType::kGaussian;
  kernel.params.sigma = 4.0;
  for (auto _ : state) benchmark::DoNotOptimize(soft_assign(x, cb, kernel, ScalingParams::unit()));
}
BENCHMARK(BM_SoftAssignGaussian);

}  // namespace
}  // namespace tlnbof
