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

// Temporal logistic neural bag-of-features layer.
//
// For one sample with transformed features x_1..x_N (rows of an N x D' matrix)
// and a codebook v_1..v_K (rows of a K x D' matrix):
//
//   u_jk = c_u * K(x_j, v_k) / sum_l K(x_j, v_l)        (soft assignment)
//   s_rk = c_s * mean_{j in region r} u_jk               (per-region histogram)
//
// and the output is the concatenation [s_short, s_mid, ..., s_long] of length
// n_regions * K. One codebook and one (c_u, c_s) pair serve every region. Every
// histogram segment therefore has mass c_s * c_u.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "tlnbof/kernels.hpp"
#include "tlnbof/tensor.hpp"

namespace tlnbof {

// Lower clamp applied to c_u and c_s.
inline constexpr double kMinScale = 1e-6;

struct RegionRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const { return end - begin; }
  bool operator==(const RegionRange&) const = default;
};

// `ranges` is ordered oldest-first (long, ..., mid, short). Histogram segment r
// (0 = short) is ranges[ranges.size() - 1 - r].
//
// Default (disjoint) mode: the short region and every intermediate region hold
// floor(n / n_regions) timesteps; the long region takes what is left. Nested
// mode: region r holds the most recent (r + 1) * floor(n / n_regions) steps and
// the long region covers the whole sequence, so ranges overlap.
struct RegionPartition {
  std::vector<RegionRange> ranges;
  bool nested = false;

  std::size_t size() const { return ranges.size(); }
  const RegionRange& histogram_segment(std::size_t r) const { return ranges[ranges.size() - 1 - r]; }
};

RegionPartition segment(std::size_t n_steps, std::size_t n_regions, bool nested = false);

struct Codebook {
  Tensor vectors;  // n_codewords x dim

  std::size_t size() const { return vectors.dim(0); }
  std::size_t dim() const { return vectors.dim(1); }
};

// c_u and c_s are kept as logarithms; the effective value is
// max(exp(log_c), kMinScale).
struct ScalingParams {
  double log_c_u = 0.0;
  double log_c_s = 0.0;
  bool trainable = false;

  double c_u() const;
  double c_s() const;

  // c_s = n_codewords, c_u = mean sequence length.
  static ScalingParams initial(std::size_t n_codewords, double mean_length, bool trainable);
  static ScalingParams unit() { return {}; }
};

// Derivative of max(exp(log_c), kMinScale) with respect to log_c.
double scale_log_derivative(double log_c);

struct KernelConfig {
  KernelType type = KernelType::kLogistic;
  KernelParams params;
};

struct TemporalHistogram {
  std::size_t n_regions = 0;
  std::size_t n_codewords = 0;
  std::vector<double> values;  // [short | mid | ... | long]

  std::span<const double> segment(std::size_t r) const {
    return std::span<const double>(values).subspan(r * n_codewords, n_codewords);
  }
};

// N x K soft-assignment matrix; each row sums to c_u.
Tensor soft_assign(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel,
                   const ScalingParams& scaling);

// c_s * column mean of `assignments` (the rows of one region).
std::vector<double> accumulate(const Tensor& assignments, const ScalingParams& scaling, std::size_t region_len);

// Everything the backward pass needs. Filled by TloNbofLayer::forward.
struct LayerContext {
  bool valid = false;
  std::vector<std::size_t> offsets;         // sample b owns rows [offsets[b], offsets[b+1])
  std::vector<RegionPartition> partitions;  // per sample
  Tensor features;                          // R x D'
  Tensor similarity;                        // logistic: x.v ; gaussian: ||x - v||^2   (R x K)
  Tensor kernel;                            // K(x_j, v_k)                            (R x K)
  std::vector<double> row_sum;              // sum_k K(x_j, v_k)
  Tensor assignments;                       // u_jk                                   (R x K)
  Tensor histograms;                        // B x (n_regions * K)
  double c_u = 1.0;
  double c_s = 1.0;
};

struct LayerGrads {
  Tensor features;  // R x D'
  Tensor codebook;  // K x D'
  double c_u = 0.0;
  double c_s = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
  double sigma = 0.0;
};

struct LayerConfig {
  std::size_t n_regions = 3;
  bool nested_regions = false;
};

// Batched layer over a stack of variable-length samples.
class TloNbofLayer {
 public:
  explicit TloNbofLayer(LayerConfig config) : config_(config) {}

  const LayerConfig& config() const { return config_; }

  // `features` stacks all samples' rows; `offsets` has B + 1 entries.
  // Returns B x (n_regions * K) histograms and fills `ctx`.
  Tensor forward(const Tensor& features, std::span<const std::size_t> offsets, const Codebook& codebook,
                 const KernelConfig& kernel, const ScalingParams& scaling, LayerContext& ctx) const;

  // `upstream` is dL/dhistograms, B x (n_regions * K). Throws InvalidState if
  // `ctx` was not produced by forward().
  LayerGrads backward(const LayerContext& ctx, const Tensor& upstream, const Codebook& codebook,
                      const KernelConfig& kernel) const;

 private:
  LayerConfig config_;
};

// Single-sample convenience wrappers around TloNbofLayer.
TemporalHistogram forward(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel,
                          const ScalingParams& scaling, std::size_t n_regions, LayerContext* ctx = nullptr,
                          bool nested_regions = false);
LayerGrads backward(const LayerContext& ctx, std::span<const double> upstream, const Codebook& codebook,
                    const KernelConfig& kernel);

}  // namespace tlnbof
