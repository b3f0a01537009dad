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

#include <vector>

#include "tlnbof/network.hpp"
#include "tlnbof/rng.hpp"
#include "tlnbof/synth.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof {
namespace {

std::vector<FeatureSeries> synthetic_samples(std::size_t count) {
  std::vector<FeatureSeries> out;
  for (const auto& day : synth_generate(1, count + 24, 1, 1.0)) {
    for (auto& s : windowize(day)) out.push_back(std::move(s));
  }
  out.resize(count);
  return out;
}

// Arg: batch size. Reference architecture.
void BM_ModelForward(benchmark::State& state) {
  Rng rng(1);
  const TloNbofParams params = TloNbofParams::initialize(ModelSpec{}, rng);
  const auto samples = synthetic_samples(static_cast<std::size_t>(state.range(0)));
  std::vector<const Tensor*> batch;
  for (const auto& s : samples) batch.push_back(&s.features);
  for (auto _ : state) {
    ForwardContext ctx;
    benchmark::DoNotOptimize(model_forward(batch, params, ctx));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ModelForward)->Arg(1)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_ModelForwardBackward(benchmark::State& state) {
  Rng rng(2);
  const TloNbofParams params = TloNbofParams::initialize(ModelSpec{}, rng);
  const auto samples = synthetic_samples(static_cast<std::size_t>(state.range(0)));
  std::vector<const Tensor*> batch;
  std::vector<std::size_t> labels;
  for (const auto& s : samples) {
    batch.push_back(&s.features);
    labels.push_back(s.label);
  }
  for (auto _ : state) {
    ForwardContext ctx;
    model_forward(batch, params, ctx);
    benchmark::DoNotOptimize(model_backward(ctx, params, labels));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ModelForwardBackward)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

// One optimizer step with the default protocol; Arg: worker threads.
void BM_TrainerStep(benchmark::State& state) {
  const auto samples = synthetic_samples(512);
  TrainConfig cfg;
  cfg.threads = static_cast<std::size_t>(state.range(0));
  cfg.max_steps = 1u << 30;
  Trainer trainer(cfg, samples);
  for (auto _ : state) benchmark::DoNotOptimize(trainer.step());
}
BENCHMARK(BM_TrainerStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace tlnbof
