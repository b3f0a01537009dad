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

#include "tlnbof/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

namespace tlnbof {

ModelSpec AblationFlags::apply(ModelSpec base, std::size_t temporal_regions) const {
  base.deep_features = deep_features;
  base.n_regions = temporal_modeling ? temporal_regions : 1;
  base.kernel_param_learning = kernel_param_learning;
  base.scaling = adaptive_scaling;
  base.kernel = kernel;
  return base;
}

TrainingAborted::TrainingAborted(std::uint64_t step, TrainingState last_good, std::string_view reason)
    : NumericFailure("training aborted at step " + std::to_string(step) + ": " + std::string(reason)),
      step_(step),
      last_good_(std::move(last_good)) {}

namespace {

constexpr std::size_t kDeterministicShard = 32;

void add_scaled(Gradients& into, const Gradients& from, double weight) {
  into.loss += weight * from.loss;
  into.kernel_params_present = into.kernel_params_present || from.kernel_params_present;
  into.scaling_present = into.scaling_present || from.scaling_present;
  from.values.for_each([&](std::string_view name, const Tensor& g) {
    Tensor& dst = into.values.group(name);
    if (dst.empty()) dst = Tensor::zeros_like(g);
    for (std::size_t i = 0; i < g.size(); ++i) dst[i] += weight * g[i];
  });
}

Gradients shard_gradients(const TloNbofParams& params, std::span<const FeatureSeries> data,
                          std::span<const std::size_t> indices) {
  std::vector<const Tensor*> batch;
  std::vector<std::size_t> labels;
  batch.reserve(indices.size());
  labels.reserve(indices.size());
  for (std::size_t i : indices) {
    batch.push_back(&data[i].features);
    labels.push_back(data[i].label);
  }
  ForwardContext ctx;
  model_forward(batch, params, ctx);
  return model_backward(ctx, params, labels);
}

bool all_finite(const Gradients& g) {
  if (!std::isfinite(g.loss)) return false;
  bool ok = true;
  g.values.for_each([&](std::string_view, const Tensor& t) { ok = ok && t.all_finite(); });
  return ok;
}

}  // namespace

Gradients batch_gradients(const TloNbofParams& params, std::span<const FeatureSeries> data,
                          std::span<const std::size_t> indices, std::size_t threads, bool deterministic) {
  if (indices.empty()) throw InvalidArgument("batch_gradients: empty batch");
  threads = std::max<std::size_t>(threads, 1);
  const std::size_t n = indices.size();
  std::size_t shards = deterministic ? (n + kDeterministicShard - 1) / kDeterministicShard : std::min(threads, n);
  if (threads == 1 && !deterministic) shards = 1;
  const std::size_t per = (n + shards - 1) / shards;
  shards = (n + per - 1) / per;

  auto shard_span = [&](std::size_t s) {
    const std::size_t begin = s * per;
    return indices.subspan(begin, std::min(per, n - begin));
  };

  Gradients total;
  if (shards == 1) return shard_gradients(params, data, indices);

  if (deterministic) {
    std::vector<Gradients> parts(shards);
    std::vector<std::exception_ptr> errors(shards);
    auto work = [&](std::size_t worker) {
      for (std::size_t s = worker; s < shards; s += threads) {
        try {
          parts[s] = shard_gradients(params, data, shard_span(s));
        } catch (...) {
          errors[s] = std::current_exception();
        }
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < std::min(threads, shards); ++w) pool.emplace_back(work, w);
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
    for (std::size_t s = 0; s < shards; ++s) {
      add_scaled(total, parts[s], static_cast<double>(shard_span(s).size()) / static_cast<double>(n));
    }
    return total;
  }

  // Reduction in completion order.
  std::mutex mu;
  std::exception_ptr error;
  {
    std::vector<std::jthread> pool;
    for (std::size_t s = 0; s < shards; ++s) {
      pool.emplace_back([&, s] {
        try {
          Gradients part = shard_gradients(params, data, shard_span(s));
          std::lock_guard lock(mu);
          add_scaled(total, part, static_cast<double>(shard_span(s).size()) / static_cast<double>(n));
        } catch (...) {
          std::lock_guard lock(mu);
          error = std::current_exception();
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
  return total;
}

std::vector<std::size_t> predict(const TloNbofParams& params, std::span<const FeatureSeries> data,
                                 std::size_t batch_size) {
  std::vector<std::size_t> out;
  out.reserve(data.size());
  batch_size = std::max<std::size_t>(batch_size, 1);
  for (std::size_t begin = 0; begin < data.size(); begin += batch_size) {
    const std::size_t end = std::min(data.size(), begin + batch_size);
    std::vector<const Tensor*> batch;
    for (std::size_t i = begin; i < end; ++i) batch.push_back(&data[i].features);
    ForwardContext ctx;
    for (const auto& p : model_forward(batch, params, ctx)) out.push_back(p.argmax());
  }
  return out;
}

ConfusionMatrix evaluate(const TloNbofParams& params, std::span<const FeatureSeries> data) {
  std::vector<std::size_t> truth;
  truth.reserve(data.size());
  for (const auto& s : data) truth.push_back(s.label);
  return confusion(truth, predict(params, data), params.spec.n_classes);
}

double mean_sequence_length(std::span<const FeatureSeries> data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& s : data) total += static_cast<double>(s.features.dim(0));
  return total / static_cast<double>(data.size());
}

namespace {

std::vector<std::size_t> labels_of(std::span<const FeatureSeries> data) {
  std::vector<std::size_t> labels;
  labels.reserve(data.size());
  for (const auto& s : data) labels.push_back(s.label);
  return labels;
}

TloNbofParams initial_params(const TrainConfig& config, std::span<const FeatureSeries> data) {
  ModelSpec spec = config.model;
  if (!data.empty()) spec.mean_length = mean_sequence_length(data);
  Rng rng = Rng::derive(config.seed, kInitStream);
  return TloNbofParams::initialize(spec, rng);
}

}  // namespace

Trainer::Trainer(TrainConfig config, std::span<const FeatureSeries> data, std::optional<TloNbofParams> initial)
    : config_(std::move(config)),
      data_(data),
      sampler_(labels_of(data), config_.model.n_classes),
      state_{initial ? std::move(*initial) : initial_params(config_, data), AdamState{}, 0} {
  if (config_.batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");
  state_.adam = AdamState::for_params(state_.params);
}

Trainer::Trainer(TrainConfig config, std::span<const FeatureSeries> data, TrainingState state)
    : config_(std::move(config)),
      data_(data),
      sampler_(labels_of(data), config_.model.n_classes),
      state_(std::move(state)) {
  if (config_.batch_size == 0) throw InvalidArgument("train: batch_size must be >= 1");
}

std::size_t Trainer::steps_per_epoch() const { return (data_.size() + config_.batch_size - 1) / config_.batch_size; }

std::size_t Trainer::total_steps() const {
  return config_.max_steps != 0 ? config_.max_steps : config_.epochs * steps_per_epoch();
}

StepResult Trainer::step() {
  Rng rng = Rng::derive(config_.seed, kBatchStream, state_.step);
  const std::vector<std::size_t> indices = sampler_.draw(config_.batch_size, rng);
  Gradients grads;
  try {
    grads = batch_gradients(state_.params, data_, indices, config_.threads, config_.deterministic);
  } catch (const TrainingAborted&) {
    throw;
  } catch (const NumericFailure& e) {
    throw TrainingAborted(state_.step + 1, state_, e.what());
  }
  if (!all_finite(grads)) throw TrainingAborted(state_.step + 1, state_);
  StepResult result;
  result.loss = grads.loss;
  if (config_.record_grad_norm && !grads.values.conv_weight.empty()) {
    result.grad_norm_conv = grads.values.conv_weight.frobenius_norm();
  }
  adam_step(state_.params, grads, state_.adam, config_.adam);
  ++state_.step;
  return result;
}

TrainResult train(const TrainConfig& config, std::span<const FeatureSeries> data,
                  std::span<const FeatureSeries> validation, std::optional<TloNbofParams> initial,
                  const StepCallback& on_step) {
  if (data.empty()) throw InvalidArgument("train: empty training set");
  Trainer trainer(config, data, std::move(initial));
  TrainResult result;
  const std::size_t per_epoch = trainer.steps_per_epoch();
  while (!trainer.done()) {
    const StepResult r = trainer.step();
    result.history.loss.push_back(r.loss);
    result.history.grad_norm_conv.push_back(r.grad_norm_conv);
    const std::uint64_t step = trainer.state().step;
    if (on_step) on_step(step, r);
    if (!validation.empty() && per_epoch != 0 && step % per_epoch == 0) {
      const ConfusionMatrix cm = evaluate(trainer.state().params, validation);
      EpochMetrics m;
      m.epoch = step / per_epoch;
      m.macro_f1 = macro_prf(cm).f1;
      try {
        m.kappa = cohens_kappa(cm);
      } catch (const UndefinedMetric&) {
        m.kappa = std::numeric_limits<double>::quiet_NaN();
      }
      result.history.validation.push_back(m);
    }
  }
  result.state = std::move(trainer.state());
  return result;
}

}  // namespace tlnbof
