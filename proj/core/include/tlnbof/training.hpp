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
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tlnbof/adam.hpp"
#include "tlnbof/data.hpp"
#include "tlnbof/errors.hpp"
#include "tlnbof/metrics.hpp"
#include "tlnbof/network.hpp"
#include "tlnbof/sampling.hpp"

namespace tlnbof {

// Switches studied in the ablation grid, applied on top of a base ModelSpec.
struct AblationFlags {
  bool deep_features = true;
  bool temporal_modeling = true;  // off: a single region over all timesteps
  bool kernel_param_learning = true;
  ScalingMode adaptive_scaling = ScalingMode::kLearned;
  KernelType kernel = KernelType::kLogistic;

  // `temporal_regions` is used when temporal modeling is on.
  ModelSpec apply(ModelSpec base, std::size_t temporal_regions = 3) const;
};

struct TrainConfig {
  ModelSpec model;
  AdamConfig adam;  // lr = 1e-4
  std::size_t batch_size = 128;
  std::size_t epochs = 20;
  std::uint64_t seed = 1;
  // 0 = epochs * steps_per_epoch; otherwise stop after this many steps.
  std::size_t max_steps = 0;
  std::size_t threads = 1;
  // Fixed shard layout and reduction order, independent of `threads`.
  bool deterministic = true;
  bool record_grad_norm = true;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double macro_f1 = 0.0;
  double kappa = 0.0;
};

struct TrainHistory {
  std::vector<double> loss;            // per step (mean batch cross-entropy)
  std::vector<double> grad_norm_conv;  // per step, Frobenius norm of dL/dW_conv
  std::vector<EpochMetrics> validation;
};

struct TrainingState {
  TloNbofParams params;
  AdamState adam;
  std::uint64_t step = 0;
};

// Thrown when a step yields a non-finite loss or gradient. `last_good` is the
// state before the failing step.
class TrainingAborted : public NumericFailure {
 public:
  TrainingAborted(std::uint64_t step, TrainingState last_good, std::string_view reason = "non-finite loss or gradient");
  std::uint64_t step() const { return step_; }
  const TrainingState& last_good() const { return last_good_; }

 private:
  std::uint64_t step_;
  TrainingState last_good_;
};

struct StepResult {
  double loss = 0.0;
  double grad_norm_conv = 0.0;
};

// Gradient of the mean loss over `indices` of `data`, computed in shards and
// reduced in shard order.
Gradients batch_gradients(const TloNbofParams& params, std::span<const FeatureSeries> data,
                          std::span<const std::size_t> indices, std::size_t threads, bool deterministic);

// Argmax class per sample.
std::vector<std::size_t> predict(const TloNbofParams& params, std::span<const FeatureSeries> data,
                                 std::size_t batch_size = 256);
ConfusionMatrix evaluate(const TloNbofParams& params, std::span<const FeatureSeries> data);

// Mean length of the samples, used to initialise c_u.
double mean_sequence_length(std::span<const FeatureSeries> data);

class Trainer {
 public:
  // Fresh start from `initial` (or a seeded initialization when empty).
  Trainer(TrainConfig config, std::span<const FeatureSeries> data, std::optional<TloNbofParams> initial = {});
  // Resume from a saved state.
  Trainer(TrainConfig config, std::span<const FeatureSeries> data, TrainingState state);

  std::size_t steps_per_epoch() const;
  std::size_t total_steps() const;
  bool done() const { return state_.step >= total_steps(); }

  // One Adam step on the balanced batch for the current step index.
  StepResult step();

  const TrainingState& state() const { return state_; }
  TrainingState& state() { return state_; }
  const TrainConfig& config() const { return config_; }

 private:
  TrainConfig config_;
  std::span<const FeatureSeries> data_;
  BalancedSampler sampler_;
  TrainingState state_;
};

struct TrainResult {
  TrainingState state;
  TrainHistory history;
};

using StepCallback = std::function<void(std::uint64_t step, const StepResult&)>;

// The full loop: epochs x ceil(|data| / batch_size) steps; validation metrics
// after each epoch when `validation` is non-empty.
TrainResult train(const TrainConfig& config, std::span<const FeatureSeries> data,
                  std::span<const FeatureSeries> validation = {}, std::optional<TloNbofParams> initial = {},
                  const StepCallback& on_step = {});

// RNG stream ids; streams are derived from the training seed.
inline constexpr std::uint64_t kInitStream = 1;
inline constexpr std::uint64_t kBatchStream = 2;

}  // namespace tlnbof
