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

#include "tlnbof/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "eigen_util.hpp"
#include "tlnbof/errors.hpp"
#include "tlnbof/init.hpp"

namespace tlnbof {

using detail::as_matrix;
using detail::as_vector;
using Index = Eigen::Index;

std::string_view to_string(Architecture a) { return a == Architecture::kTloNbof ? "tlonbof" : "cnn_gap"; }

std::string_view to_string(ScalingMode m) {
  switch (m) {
    case ScalingMode::kOff:
      return "off";
    case ScalingMode::kFixed:
      return "fixed";
    case ScalingMode::kLearned:
      return "learned";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "tlonbof") return Architecture::kTloNbof;
  if (name == "cnn_gap") return Architecture::kCnnGap;
  throw InvalidArgument("unknown model '" + std::string(name) + "' (expected tlonbof|cnn_gap)");
}

ScalingMode parse_scaling_mode(std::string_view name) {
  if (name == "off") return ScalingMode::kOff;
  if (name == "fixed") return ScalingMode::kFixed;
  if (name == "learned") return ScalingMode::kLearned;
  throw InvalidArgument("unknown scaling mode '" + std::string(name) + "' (expected off|fixed|learned)");
}

void ModelSpec::validate() const {
  if (input_dim == 0 || n_classes < 2 || hidden == 0) throw InvalidArgument("model: dimensions must be positive");
  if (deep_features) {
    if (n_filters == 0) throw InvalidArgument("model: n_filters must be >= 1");
    if (conv_kernel % 2 == 0) throw InvalidArgument("model: convolution kernel size must be odd");
  }
  if (architecture == Architecture::kTloNbof && (n_codewords == 0 || n_regions == 0)) {
    throw InvalidArgument("model: n_codewords and n_regions must be >= 1");
  }
  if (!(mean_length > 0.0)) throw InvalidArgument("model: mean_length must be positive");
}

const std::array<std::string_view, ParamBlock::kGroupCount>& ParamBlock::names() {
  static const std::array<std::string_view, kGroupCount> kNames = {
      "conv.weight", "conv.bias", "codebook", "fc1.weight", "fc1.bias", "fc2.weight",
      "fc2.bias",    "log_c_u",   "log_c_s",  "alpha",      "beta",     "sigma"};
  return kNames;
}

Tensor* ParamBlock::find(std::string_view name) {
  Tensor* found = nullptr;
  for_each([&](std::string_view n, Tensor& t) {
    if (n == name) found = &t;
  });
  return found;
}

Tensor& ParamBlock::group(std::string_view name) {
  Tensor* slots[] = {&conv_weight, &conv_bias, &codebook, &fc1_weight, &fc1_bias, &fc2_weight,
                     &fc2_bias,    &log_c_u,   &log_c_s,  &alpha,      &beta,     &sigma};
  const auto& n = names();
  for (std::size_t i = 0; i < kGroupCount; ++i) {
    if (n[i] == name) return *slots[i];
  }
  throw InvalidArgument("unknown parameter group '" + std::string(name) + "'");
}

const Tensor* ParamBlock::find(std::string_view name) const { return const_cast<ParamBlock*>(this)->find(name); }

TloNbofParams TloNbofParams::initialize(const ModelSpec& spec, Rng& rng) {
  spec.validate();
  TloNbofParams p;
  p.spec = spec;
  ParamBlock& v = p.values;
  const std::size_t d = spec.feature_dim();
  // One child stream per group keeps groups independent of each other's sizes.
  Rng conv_rng = rng.split();
  Rng codebook_rng = rng.split();
  Rng fc1_rng = rng.split();
  Rng fc2_rng = rng.split();
  if (spec.deep_features) {
    v.conv_weight = glorot_uniform({spec.conv_kernel, spec.input_dim, spec.n_filters},
                                   spec.conv_kernel * spec.input_dim, spec.conv_kernel * spec.n_filters, conv_rng);
    v.conv_bias = Tensor({spec.n_filters});
  }
  if (spec.architecture == Architecture::kTloNbof) {
    v.codebook = glorot_uniform({spec.n_codewords, d}, d, spec.n_codewords, codebook_rng);
    if (spec.scaling == ScalingMode::kOff) {
      v.log_c_u = Tensor::scalar(0.0);
      v.log_c_s = Tensor::scalar(0.0);
    } else {
      const ScalingParams s = ScalingParams::initial(spec.n_codewords, spec.mean_length, false);
      v.log_c_u = Tensor::scalar(s.log_c_u);
      v.log_c_s = Tensor::scalar(s.log_c_s);
    }
    v.alpha = Tensor::scalar(1.0);
    v.beta = Tensor::scalar(0.0);
    double sigma = spec.sigma;
    if (spec.kernel == KernelType::kGaussian && !(sigma > 0.0)) {
      double total = 0.0;
      std::size_t pairs = 0;
      for (std::size_t a = 0; a < spec.n_codewords; ++a) {
        for (std::size_t b = a + 1; b < spec.n_codewords; ++b) {
          double acc = 0.0;
          for (std::size_t k = 0; k < d; ++k) {
            const double diff = v.codebook[a * d + k] - v.codebook[b * d + k];
            acc += diff * diff;
          }
          total += std::sqrt(acc);
          ++pairs;
        }
      }
      sigma = pairs ? 0.1 * total / static_cast<double>(pairs) : 1.0;
    }
    v.sigma = Tensor::scalar(sigma > 0.0 ? sigma : 1.0);
  }
  const std::size_t pooled = spec.pooled_dim();
  v.fc1_weight = glorot_uniform({pooled, spec.hidden}, pooled, spec.hidden, fc1_rng);
  v.fc1_bias = Tensor({spec.hidden});
  v.fc2_weight = glorot_uniform({spec.hidden, spec.n_classes}, spec.hidden, spec.n_classes, fc2_rng);
  v.fc2_bias = Tensor({spec.n_classes});
  return p;
}

bool TloNbofParams::trainable(std::string_view group) const {
  if (group == "sigma") return false;
  if (group == "log_c_u" || group == "log_c_s") return spec.scaling == ScalingMode::kLearned;
  if (group == "alpha" || group == "beta") return spec.kernel_param_learning && spec.kernel == KernelType::kLogistic;
  return values.find(group) != nullptr;
}

KernelConfig TloNbofParams::kernel() const {
  KernelConfig k;
  k.type = spec.kernel;
  if (!values.alpha.empty()) k.params.alpha = values.alpha[0];
  if (!values.beta.empty()) k.params.beta = values.beta[0];
  if (!values.sigma.empty()) k.params.sigma = values.sigma[0];
  return k;
}

ScalingParams TloNbofParams::scaling() const {
  ScalingParams s;
  if (!values.log_c_u.empty()) s.log_c_u = values.log_c_u[0];
  if (!values.log_c_s.empty()) s.log_c_s = values.log_c_s[0];
  s.trainable = spec.scaling == ScalingMode::kLearned;
  return s;
}

std::size_t TloNbofParams::parameter_count() const {
  std::size_t n = 0;
  values.for_each([&](std::string_view, const Tensor& t) { n += t.size(); });
  return n;
}

std::size_t ClassProbabilities::argmax() const {
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

namespace {

// im2col for a same-length convolution: row t of the output holds the K
// zero-padded input rows centred on t, concatenated tap by tap.
void im2col(const Tensor& input, std::size_t kernel, double* out) {
  const std::size_t n = input.dim(0);
  const std::size_t d = input.dim(1);
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(kernel / 2);
  for (std::size_t t = 0; t < n; ++t) {
    double* row = out + t * kernel * d;
    for (std::size_t k = 0; k < kernel; ++k) {
      const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t) + static_cast<std::ptrdiff_t>(k) - half;
      double* dst = row + k * d;
      if (src < 0 || src >= static_cast<std::ptrdiff_t>(n)) {
        std::fill(dst, dst + d, 0.0);
      } else {
        std::copy_n(input.raw() + static_cast<std::size_t>(src) * d, d, dst);
      }
    }
  }
}

void check_conv_shapes(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 3) throw InvalidArgument("conv1d: weights must be K x D_in x D_out");
  if (weights.dim(0) % 2 == 0) throw InvalidArgument("conv1d: kernel size must be odd");
  if (input.rank() != 2 || input.dim(1) != weights.dim(1)) {
    throw InvalidArgument("conv1d: input " + shape_string(input.shape()) + " does not match weights " +
                          shape_string(weights.shape()));
  }
  if (bias.size() != weights.dim(2)) throw InvalidArgument("conv1d: bias length must equal D_out");
}

void relu_inplace(Tensor& t) {
  for (double& v : t.data()) v = v > 0.0 ? v : 0.0;
}

void softmax_rows(const Tensor& logits, Tensor& probs) {
  const std::size_t b = logits.dim(0);
  const std::size_t c = logits.dim(1);
  probs = Tensor({b, c});
  for (std::size_t i = 0; i < b; ++i) {
    const double* z = logits.raw() + i * c;
    const double m = *std::max_element(z, z + c);
    double sum = 0.0;
    for (std::size_t k = 0; k < c; ++k) sum += std::exp(z[k] - m);
    for (std::size_t k = 0; k < c; ++k) probs[i * c + k] = std::exp(z[k] - m) / sum;
  }
}

double log_prob(const double* z, std::size_t c, std::size_t label) {
  // log1p over the non-maximal terms keeps small losses accurate to full
  // relative precision.
  const std::size_t top = static_cast<std::size_t>(std::max_element(z, z + c) - z);
  const double m = z[top];
  double rest = 0.0;
  for (std::size_t k = 0; k < c; ++k) {
    if (k != top) rest += std::exp(z[k] - m);
  }
  return z[label] - m - std::log1p(rest);
}

}  // namespace

Tensor conv1d_same(const Tensor& input, const Tensor& weights, const Tensor& bias) {
  check_conv_shapes(input, weights, bias);
  const std::size_t n = input.dim(0);
  const std::size_t kernel = weights.dim(0);
  const std::size_t d_in = weights.dim(1);
  const std::size_t d_out = weights.dim(2);
  Tensor cols({n, kernel * d_in});
  im2col(input, kernel, cols.raw());
  Tensor out({n, d_out});
  as_matrix(out).noalias() =
      as_matrix(cols) * as_matrix(weights, static_cast<Index>(kernel * d_in), static_cast<Index>(d_out));
  as_matrix(out).rowwise() += as_vector(bias).transpose();
  return out;
}

Tensor relu(const Tensor& x) {
  Tensor out = x;
  relu_inplace(out);
  return out;
}

Tensor fully_connected(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  if (weights.rank() != 2 || x.size() != weights.dim(0) || bias.size() != weights.dim(1)) {
    throw InvalidArgument("fully_connected: shape mismatch");
  }
  Tensor out({weights.dim(1)});
  as_vector(out).noalias() = as_matrix(weights).transpose() * as_vector(x);
  as_vector(out) += as_vector(bias);
  return out;
}

SoftmaxXent softmax_xent(std::span<const double> logits, std::size_t label) {
  if (logits.empty()) throw InvalidArgument("softmax_xent: empty logits");
  if (label >= logits.size()) {
    throw InvalidArgument("softmax_xent: label " + std::to_string(label) + " out of range for " +
                          std::to_string(logits.size()) + " classes");
  }
  Tensor z({1, logits.size()}, std::vector<double>(logits.begin(), logits.end()));
  Tensor p;
  softmax_rows(z, p);
  SoftmaxXent out;
  out.probs.assign(p.data().begin(), p.data().end());
  out.loss = -log_prob(z.raw(), logits.size(), label);
  return out;
}

std::vector<ClassProbabilities> model_forward(std::span<const Tensor* const> batch, const TloNbofParams& params,
                                              ForwardContext& ctx) {
  const ModelSpec& spec = params.spec;
  const ParamBlock& pv = params.values;
  if (batch.empty()) throw InvalidArgument("model_forward: empty batch");
  ctx = ForwardContext{};
  ctx.offsets.assign(1, 0);
  for (const Tensor* s : batch) {
    if (s->rank() != 2 || s->dim(1) != spec.input_dim) {
      throw InvalidArgument("model_forward: sample shape " + shape_string(s->shape()) + " does not match input dim " +
                            std::to_string(spec.input_dim));
    }
    ctx.offsets.push_back(ctx.offsets.back() + s->dim(0));
  }
  const std::size_t b = batch.size();
  const std::size_t rows = ctx.offsets.back();

  if (spec.deep_features) {
    const std::size_t kernel = spec.conv_kernel;
    const std::size_t width = kernel * spec.input_dim;
    ctx.conv_cols = Tensor({rows, width});
    for (std::size_t i = 0; i < b; ++i) {
      check_conv_shapes(*batch[i], pv.conv_weight, pv.conv_bias);
      im2col(*batch[i], kernel, ctx.conv_cols.raw() + ctx.offsets[i] * width);
    }
    ctx.conv_pre = Tensor({rows, spec.n_filters});
    auto pre = as_matrix(ctx.conv_pre);
    pre.noalias() = as_matrix(ctx.conv_cols) *
                    as_matrix(pv.conv_weight, static_cast<Index>(width), static_cast<Index>(spec.n_filters));
    pre.rowwise() += as_vector(pv.conv_bias).transpose();
    ctx.features = relu(ctx.conv_pre);
  } else {
    ctx.features = Tensor({rows, spec.input_dim});
    for (std::size_t i = 0; i < b; ++i) {
      std::copy_n(batch[i]->raw(), batch[i]->size(), ctx.features.raw() + ctx.offsets[i] * spec.input_dim);
    }
  }

  if (spec.architecture == Architecture::kTloNbof) {
    TloNbofLayer layer({spec.n_regions, spec.nested_regions});
    ctx.pooled =
        layer.forward(ctx.features, ctx.offsets, params.codebook(), params.kernel(), params.scaling(), ctx.layer);
  } else {
    const std::size_t d = spec.feature_dim();
    ctx.pooled = Tensor({b, d});
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t n = ctx.offsets[i + 1] - ctx.offsets[i];
      if (n == 0) throw InvalidArgument("model_forward: empty sample");
      as_matrix(ctx.pooled).row(static_cast<Index>(i)) =
          as_matrix(ctx.features)
              .middleRows(static_cast<Index>(ctx.offsets[i]), static_cast<Index>(n))
              .colwise()
              .sum() /
          static_cast<double>(n);
    }
  }

  ctx.fc1_pre = Tensor({b, spec.hidden});
  as_matrix(ctx.fc1_pre).noalias() = as_matrix(ctx.pooled) * as_matrix(pv.fc1_weight);
  as_matrix(ctx.fc1_pre).rowwise() += as_vector(pv.fc1_bias).transpose();
  ctx.fc1_act = relu(ctx.fc1_pre);
  ctx.logits = Tensor({b, spec.n_classes});
  as_matrix(ctx.logits).noalias() = as_matrix(ctx.fc1_act) * as_matrix(pv.fc2_weight);
  as_matrix(ctx.logits).rowwise() += as_vector(pv.fc2_bias).transpose();
  softmax_rows(ctx.logits, ctx.probs);
  if (!ctx.probs.all_finite()) throw NumericFailure("model_forward: non-finite class probabilities");

  ctx.params = &params;
  ctx.params_version = params.version;
  ctx.valid = true;

  std::vector<ClassProbabilities> out(b);
  for (std::size_t i = 0; i < b; ++i) {
    auto r = ctx.probs.row(i);
    out[i].probs.assign(r.begin(), r.end());
  }
  return out;
}

ClassProbabilities model_forward(const Tensor& sample, const TloNbofParams& params, ForwardContext* ctx) {
  ForwardContext local;
  const Tensor* batch[] = {&sample};
  return model_forward(batch, params, ctx ? *ctx : local).front();
}

Gradients model_backward(const ForwardContext& ctx, const TloNbofParams& params, std::span<const std::size_t> labels,
                         GradientScope scope) {
  if (!ctx.valid || ctx.params != &params || ctx.params_version != params.version) {
    throw InvalidState("model_backward: forward context is missing or stale");
  }
  const ModelSpec& spec = params.spec;
  const ParamBlock& pv = params.values;
  const std::size_t b = ctx.offsets.size() - 1;
  const std::size_t c = spec.n_classes;
  if (labels.size() != b) throw InvalidArgument("model_backward: one label per sample required");

  Gradients g;
  Tensor grad_logits({b, c});
  const double inv_b = 1.0 / static_cast<double>(b);
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] >= c) throw InvalidArgument("model_backward: label out of range");
    g.loss -= log_prob(ctx.logits.raw() + i * c, c, labels[i]);
    for (std::size_t k = 0; k < c; ++k) {
      grad_logits[i * c + k] = (ctx.probs[i * c + k] - (k == labels[i] ? 1.0 : 0.0)) * inv_b;
    }
  }
  g.loss *= inv_b;

  ParamBlock& gv = g.values;
  const auto gl = as_matrix(grad_logits);
  gv.fc2_weight = Tensor(pv.fc2_weight.shape());
  as_matrix(gv.fc2_weight).noalias() = as_matrix(ctx.fc1_act).transpose() * gl;
  gv.fc2_bias = Tensor(pv.fc2_bias.shape());
  as_vector(gv.fc2_bias) = gl.colwise().sum().transpose();

  Tensor grad_fc1({b, spec.hidden});
  as_matrix(grad_fc1).noalias() = gl * as_matrix(pv.fc2_weight).transpose();
  for (std::size_t i = 0; i < grad_fc1.size(); ++i) {
    if (!(ctx.fc1_pre[i] > 0.0)) grad_fc1[i] = 0.0;
  }
  const auto g1 = as_matrix(grad_fc1);
  gv.fc1_weight = Tensor(pv.fc1_weight.shape());
  as_matrix(gv.fc1_weight).noalias() = as_matrix(ctx.pooled).transpose() * g1;
  gv.fc1_bias = Tensor(pv.fc1_bias.shape());
  as_vector(gv.fc1_bias) = g1.colwise().sum().transpose();

  Tensor grad_pooled(ctx.pooled.shape());
  as_matrix(grad_pooled).noalias() = g1 * as_matrix(pv.fc1_weight).transpose();

  Tensor grad_features;
  if (spec.architecture == Architecture::kTloNbof) {
    TloNbofLayer layer({spec.n_regions, spec.nested_regions});
    LayerGrads lg = layer.backward(ctx.layer, grad_pooled, params.codebook(), params.kernel());
    grad_features = std::move(lg.features);
    gv.codebook = std::move(lg.codebook);
    const bool want_scaling = scope == GradientScope::kAll || params.trainable("log_c_u");
    if (want_scaling) {
      gv.log_c_u = Tensor::scalar(lg.c_u * scale_log_derivative(pv.log_c_u[0]));
      gv.log_c_s = Tensor::scalar(lg.c_s * scale_log_derivative(pv.log_c_s[0]));
      g.scaling_present = true;
    }
    const bool want_kernel = scope == GradientScope::kAll || params.trainable("alpha");
    if (want_kernel) {
      gv.alpha = Tensor::scalar(lg.alpha);
      gv.beta = Tensor::scalar(lg.beta);
      g.kernel_params_present = true;
    }
    if (scope == GradientScope::kAll) gv.sigma = Tensor::scalar(lg.sigma);
  } else {
    const std::size_t d = spec.feature_dim();
    grad_features = Tensor({ctx.offsets.back(), d});
    for (std::size_t i = 0; i < b; ++i) {
      const std::size_t n = ctx.offsets[i + 1] - ctx.offsets[i];
      const auto row = as_matrix(grad_pooled).row(static_cast<Index>(i)) / static_cast<double>(n);
      for (std::size_t j = ctx.offsets[i]; j < ctx.offsets[i + 1]; ++j) {
        as_matrix(grad_features).row(static_cast<Index>(j)) = row;
      }
    }
  }

  if (spec.deep_features) {
    for (std::size_t i = 0; i < grad_features.size(); ++i) {
      if (!(ctx.conv_pre[i] > 0.0)) grad_features[i] = 0.0;
    }
    const auto gpre = as_matrix(grad_features);
    const std::size_t width = spec.conv_kernel * spec.input_dim;
    gv.conv_weight = Tensor(pv.conv_weight.shape());
    as_matrix(gv.conv_weight, static_cast<Index>(width), static_cast<Index>(spec.n_filters)).noalias() =
        as_matrix(ctx.conv_cols).transpose() * gpre;
    gv.conv_bias = Tensor(pv.conv_bias.shape());
    as_vector(gv.conv_bias) = gpre.colwise().sum().transpose();
  }
  return g;
}

double batch_loss(std::span<const Tensor* const> batch, std::span<const std::size_t> labels,
                  const TloNbofParams& params) {
  ForwardContext ctx;
  model_forward(batch, params, ctx);
  if (labels.size() != batch.size()) throw InvalidArgument("batch_loss: one label per sample required");
  const std::size_t c = params.spec.n_classes;
  double loss = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (labels[i] >= c) throw InvalidArgument("batch_loss: label out of range");
    loss -= log_prob(ctx.logits.raw() + i * c, c, labels[i]);
  }
  return loss / static_cast<double>(batch.size());
}

ClassProbabilities cnn_gap_forward(const Tensor& sample, const TloNbofParams& params) {
  if (params.spec.architecture != Architecture::kCnnGap) {
    throw InvalidArgument("cnn_gap_forward: parameters were not built for the cnn_gap architecture");
  }
  return model_forward(sample, params);
}

}  // namespace tlnbof
