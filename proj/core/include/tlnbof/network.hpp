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
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "tlnbof/kernels.hpp"
#include "tlnbof/rng.hpp"
#include "tlnbof/tensor.hpp"
#include "tlnbof/tlonbof_layer.hpp"

namespace tlnbof {

enum class Architecture { kTloNbof, kCnnGap };

// Off: c_u = c_s = 1, frozen. Fixed: c_s = N_K, c_u = E[N_i], frozen.
// Learned: same initialization, trained.
enum class ScalingMode { kOff, kFixed, kLearned };

std::string_view to_string(Architecture a);
std::string_view to_string(ScalingMode m);
Architecture parse_architecture(std::string_view name);
ScalingMode parse_scaling_mode(std::string_view name);

struct ModelSpec {
  Architecture architecture = Architecture::kTloNbof;
  std::size_t input_dim = 144;
  std::size_t n_filters = 256;
  std::size_t conv_kernel = 5;
  std::size_t n_codewords = 256;
  std::size_t n_regions = 3;
  std::size_t hidden = 512;
  std::size_t n_classes = 3;
  bool deep_features = true;
  bool nested_regions = false;
  KernelType kernel = KernelType::kLogistic;
  ScalingMode scaling = ScalingMode::kLearned;
  bool kernel_param_learning = true;
  // E[N_i] used to initialize c_u.
  double mean_length = 15.0;
  // Gaussian width; <= 0 selects 0.1 x mean pairwise codeword distance at init.
  double sigma = 0.0;

  // Dimension of the vectors entering the pooling stage.
  std::size_t feature_dim() const { return deep_features ? n_filters : input_dim; }
  std::size_t pooled_dim() const {
    return architecture == Architecture::kTloNbof ? n_regions * n_codewords : feature_dim();
  }
  void validate() const;
};

// Every trainable array of the model. Groups that the architecture does not use
// are empty tensors. Scalars are shape-{1} tensors.
struct ParamBlock {
  Tensor conv_weight;  // conv_kernel x input_dim x n_filters
  Tensor conv_bias;    // n_filters
  Tensor codebook;     // n_codewords x feature_dim
  Tensor fc1_weight;   // pooled_dim x hidden
  Tensor fc1_bias;     // hidden
  Tensor fc2_weight;   // hidden x n_classes
  Tensor fc2_bias;     // n_classes
  Tensor log_c_u;
  Tensor log_c_s;
  Tensor alpha;
  Tensor beta;
  Tensor sigma;

  // Visits (name, tensor) for every non-empty group, in a fixed order.
  template <typename F>
  void for_each(F&& f) {
    visit(*this, f);
  }
  template <typename F>
  void for_each(F&& f) const {
    visit(*this, f);
  }

  static constexpr std::size_t kGroupCount = 12;
  static const std::array<std::string_view, kGroupCount>& names();

  // Non-empty group by name, or nullptr.
  Tensor* find(std::string_view name);
  const Tensor* find(std::string_view name) const;
  // Slot by name whether or not it is empty; throws InvalidArgument for an
  // unknown name.
  Tensor& group(std::string_view name);

  bool operator==(const ParamBlock&) const = default;

 private:
  template <typename Self, typename F>
  static void visit(Self& self, F& f) {
    auto&& groups =
        std::tie(self.conv_weight, self.conv_bias, self.codebook, self.fc1_weight, self.fc1_bias, self.fc2_weight,
                 self.fc2_bias, self.log_c_u, self.log_c_s, self.alpha, self.beta, self.sigma);
    std::size_t i = 0;
    std::apply([&](auto&... t) { ((t.empty() ? void(++i) : void(f(names()[i++], t))), ...); }, groups);
  }
};

struct TloNbofParams {
  ModelSpec spec;
  ParamBlock values;
  // Bumped on every in-place update; forward contexts remember it.
  std::uint64_t version = 0;

  static TloNbofParams initialize(const ModelSpec& spec, Rng& rng);

  bool trainable(std::string_view group) const;
  Codebook codebook() const { return {values.codebook}; }
  KernelConfig kernel() const;
  ScalingParams scaling() const;
  std::size_t parameter_count() const;
};

struct ClassProbabilities {
  std::vector<double> probs;
  std::size_t argmax() const;
};

// Same-length 1-D convolution with zero padding. input: N x D_in,
// weights: K x D_in x D_out (K odd), bias: D_out. Returns N x D_out.
Tensor conv1d_same(const Tensor& input, const Tensor& weights, const Tensor& bias);
Tensor relu(const Tensor& x);
// x: length-in vector (any shape), W: in x out, b: out. Returns shape {out}.
Tensor fully_connected(const Tensor& x, const Tensor& weights, const Tensor& bias);

struct SoftmaxXent {
  std::vector<double> probs;
  double loss = 0.0;
};
SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t label);

// Cached activations of one batched forward pass.
struct ForwardContext {
  bool valid = false;
  std::uint64_t params_version = 0;
  const TloNbofParams* params = nullptr;
  std::vector<std::size_t> offsets;
  Tensor conv_cols;  // R x (K * D_in) im2col buffer
  Tensor conv_pre;   // R x D_out before ReLU
  Tensor features;   // R x D' entering the pooling stage
  LayerContext layer;
  Tensor pooled;   // B x pooled_dim
  Tensor fc1_pre;  // B x hidden
  Tensor fc1_act;  // B x hidden
  Tensor logits;   // B x C
  Tensor probs;    // B x C
};

enum class GradientScope {
  kTrainable,  // groups the optimizer updates; frozen groups are left empty
  kAll,        // every group the forward pass depends on
};

struct Gradients {
  ParamBlock values;
  double loss = 0.0;  // mean cross-entropy over the batch
  bool kernel_params_present = false;
  bool scaling_present = false;
};

// Stacks the samples, runs the whole network and returns per-sample
// probabilities. Each sample is an N_i x input_dim tensor.
std::vector<ClassProbabilities> model_forward(std::span<const Tensor* const> batch, const TloNbofParams& params,
                                              ForwardContext& ctx);
ClassProbabilities model_forward(const Tensor& sample, const TloNbofParams& params, ForwardContext* ctx = nullptr);

// Gradient of the mean cross-entropy of the batch cached in `ctx`. Throws
// InvalidState if `params` changed since the forward pass.
Gradients model_backward(const ForwardContext& ctx, const TloNbofParams& params, std::span<const std::size_t> labels,
                         GradientScope scope = GradientScope::kTrainable);

// Mean cross-entropy without keeping a context.
double batch_loss(std::span<const Tensor* const> batch, std::span<const std::size_t> labels,
                  const TloNbofParams& params);

// Baseline with global average pooling in place of the bag-of-features layer:
// conv -> ReLU -> mean over time -> FC -> ReLU -> FC -> softmax. `params` must use
// Architecture::kCnnGap.
ClassProbabilities cnn_gap_forward(const Tensor& sample, const TloNbofParams& params);

}  // namespace tlnbof
