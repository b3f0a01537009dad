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

#include "tlnbof/tlonbof_layer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "eigen_util.hpp"
#include "tlnbof/errors.hpp"

namespace tlnbof {

using detail::as_matrix;

RegionPartition segment(std::size_t n_steps, std::size_t n_regions, bool nested) {
  if (n_regions == 0) throw InvalidArgument("segment: n_regions must be >= 1");
  if (n_steps < n_regions) {
    throw InvalidArgument("segment: sequence of " + std::to_string(n_steps) + " steps cannot be split into " +
                          std::to_string(n_regions) + " regions");
  }
  const std::size_t width = n_steps / n_regions;
  RegionPartition p;
  p.nested = nested;
  p.ranges.resize(n_regions);
  for (std::size_t r = 0; r < n_regions; ++r) {
    // r counts from the most recent region.
    RegionRange range;
    range.end = nested ? n_steps : n_steps - r * width;
    range.begin = (r + 1 == n_regions) ? 0 : n_steps - (r + 1) * width;
    p.ranges[n_regions - 1 - r] = range;
  }
  return p;
}

double ScalingParams::c_u() const { return std::max(std::exp(log_c_u), kMinScale); }
double ScalingParams::c_s() const { return std::max(std::exp(log_c_s), kMinScale); }

ScalingParams ScalingParams::initial(std::size_t n_codewords, double mean_length, bool trainable) {
  if (n_codewords == 0 || !(mean_length > 0.0)) throw InvalidArgument("ScalingParams::initial: bad arguments");
  return {std::log(mean_length), std::log(static_cast<double>(n_codewords)), trainable};
}

double scale_log_derivative(double log_c) {
  const double c = std::exp(log_c);
  return c > kMinScale ? c : 0.0;
}

namespace {

void check_layer_inputs(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel) {
  if (features.rank() != 2) throw InvalidArgument("TLo-NBoF: features must be a rank-2 tensor");
  if (codebook.vectors.rank() != 2) throw InvalidArgument("TLo-NBoF: codebook must be a rank-2 tensor");
  if (features.dim(1) != codebook.dim()) {
    throw InvalidArgument("TLo-NBoF: feature dimension " + std::to_string(features.dim(1)) +
                          " does not match codeword dimension " + std::to_string(codebook.dim()));
  }
  if (kernel.type == KernelType::kGaussian && !(kernel.params.sigma > 0.0)) {
    throw InvalidArgument("TLo-NBoF: gaussian kernel requires sigma > 0");
  }
}

// Fills similarity, kernel values and row sums for every row of `features`.
// Rows are processed independently, so a row's values never depend on where
// it sits in the stack.
void compute_kernel(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel, Tensor& similarity,
                    Tensor& kvals, std::vector<double>& row_sum) {
  const std::size_t rows = features.dim(0);
  const std::size_t nk = codebook.size();
  const std::size_t dim = codebook.dim();
  similarity = Tensor({rows, nk});
  kvals = Tensor({rows, nk});
  row_sum.assign(rows, 0.0);

  const auto v = as_matrix(codebook.vectors);
  const auto y = as_matrix(features);
  auto sim = as_matrix(similarity);
  if (kernel.type == KernelType::kLogistic) {
    for (std::size_t j = 0; j < rows; ++j) {
      sim.row(static_cast<Eigen::Index>(j)).noalias() =
          (v * y.row(static_cast<Eigen::Index>(j)).transpose()).transpose();
    }
  } else {
    for (std::size_t j = 0; j < rows; ++j) {
      const double* yj = features.raw() + j * dim;
      for (std::size_t k = 0; k < nk; ++k) {
        const double* vk = codebook.vectors.raw() + k * dim;
        double acc = 0.0;
        for (std::size_t d = 0; d < dim; ++d) acc += (yj[d] - vk[d]) * (yj[d] - vk[d]);
        similarity[j * nk + k] = acc;
      }
    }
  }
  for (std::size_t j = 0; j < rows; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      const double sv = similarity[j * nk + k];
      const double kv = kernel.type == KernelType::kLogistic ? logistic_from_dot(sv, kernel.params)
                                                             : gaussian_from_sqdist(sv, kernel.params);
      kvals[j * nk + k] = kv;
      s += kv;
    }
    row_sum[j] = s;
  }
}

void check_row_sums(const std::vector<double>& row_sum, const std::vector<std::size_t>& offsets) {
  for (std::size_t b = 0; b + 1 < offsets.size(); ++b) {
    for (std::size_t j = offsets[b]; j < offsets[b + 1]; ++j) {
      if (!(row_sum[j] > 0.0) || !std::isfinite(row_sum[j])) {
        throw NumericFailure("soft assignment denominator underflow at row " + std::to_string(j - offsets[b]) +
                             " of sample " + std::to_string(b) + " (all kernel values are zero or non-finite)");
      }
    }
  }
}

// Column sums over `rows` of `mat`, added in a canonical (lexicographic) row
// order so that any permutation of the rows yields bit-identical sums.
void region_column_sum(const Tensor& mat, std::size_t begin, std::size_t end, std::span<double> out) {
  const std::size_t cols = mat.dim(1);
  std::vector<std::size_t> order(end - begin);
  std::iota(order.begin(), order.end(), begin);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double* ra = mat.raw() + a * cols;
    const double* rb = mat.raw() + b * cols;
    return std::lexicographical_compare(ra, ra + cols, rb, rb + cols);
  });
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j : order) {
    const double* r = mat.raw() + j * cols;
    for (std::size_t k = 0; k < cols; ++k) out[k] += r[k];
  }
}

}  // namespace

Tensor soft_assign(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel,
                   const ScalingParams& scaling) {
  check_layer_inputs(features, codebook, kernel);
  Tensor sim, kvals;
  std::vector<double> row_sum;
  compute_kernel(features, codebook, kernel, sim, kvals, row_sum);
  check_row_sums(row_sum, {0, features.dim(0)});
  const double c_u = scaling.c_u();
  const std::size_t nk = codebook.size();
  for (std::size_t j = 0; j < features.dim(0); ++j) {
    for (std::size_t k = 0; k < nk; ++k) kvals[j * nk + k] = c_u * kvals[j * nk + k] / row_sum[j];
  }
  return kvals;
}

std::vector<double> accumulate(const Tensor& assignments, const ScalingParams& scaling, std::size_t region_len) {
  if (region_len == 0 || assignments.empty()) throw InvalidArgument("accumulate: empty region");
  if (assignments.rank() != 2 || assignments.dim(0) != region_len) {
    throw InvalidArgument("accumulate: region_len does not match the number of assignment rows");
  }
  std::vector<double> out(assignments.dim(1));
  region_column_sum(assignments, 0, region_len, out);
  const double factor = scaling.c_s() / static_cast<double>(region_len);
  for (double& v : out) v *= factor;
  return out;
}

Tensor TloNbofLayer::forward(const Tensor& features, std::span<const std::size_t> offsets, const Codebook& codebook,
                             const KernelConfig& kernel, const ScalingParams& scaling, LayerContext& ctx) const {
  check_layer_inputs(features, codebook, kernel);
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != features.dim(0)) {
    throw InvalidArgument("TLo-NBoF: offsets must start at 0 and end at the number of feature rows");
  }
  ctx = LayerContext{};
  ctx.offsets.assign(offsets.begin(), offsets.end());
  const std::size_t batch = offsets.size() - 1;
  const std::size_t nk = codebook.size();
  const std::size_t nr = config_.n_regions;
  for (std::size_t b = 0; b < batch; ++b) {
    if (offsets[b + 1] < offsets[b]) throw InvalidArgument("TLo-NBoF: offsets must be non-decreasing");
    ctx.partitions.push_back(segment(offsets[b + 1] - offsets[b], nr, config_.nested_regions));
  }

  compute_kernel(features, codebook, kernel, ctx.similarity, ctx.kernel, ctx.row_sum);
  check_row_sums(ctx.row_sum, ctx.offsets);

  ctx.c_u = scaling.c_u();
  ctx.c_s = scaling.c_s();
  ctx.assignments = Tensor({features.dim(0), nk});
  for (std::size_t j = 0; j < features.dim(0); ++j) {
    const double scale = ctx.c_u / ctx.row_sum[j];
    for (std::size_t k = 0; k < nk; ++k) ctx.assignments[j * nk + k] = scale * ctx.kernel[j * nk + k];
  }

  ctx.histograms = Tensor({batch, nr * nk});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < nr; ++r) {
      const RegionRange& range = ctx.partitions[b].histogram_segment(r);
      std::span<double> seg(ctx.histograms.raw() + b * nr * nk + r * nk, nk);
      region_column_sum(ctx.assignments, offsets[b] + range.begin, offsets[b] + range.end, seg);
      const double factor = ctx.c_s / static_cast<double>(range.size());
      for (double& v : seg) v *= factor;
    }
  }
  ctx.features = features;
  ctx.valid = true;
  return ctx.histograms;
}

LayerGrads TloNbofLayer::backward(const LayerContext& ctx, const Tensor& upstream, const Codebook& codebook,
                                  const KernelConfig& kernel) const {
  if (!ctx.valid) throw InvalidState("TLo-NBoF backward called without a forward context");
  const std::size_t batch = ctx.offsets.size() - 1;
  const std::size_t rows = ctx.features.dim(0);
  const std::size_t nk = codebook.size();
  const std::size_t dim = codebook.dim();
  const std::size_t nr = ctx.partitions.empty() ? 0 : ctx.partitions.front().size();
  if (upstream.shape() != ctx.histograms.shape()) {
    throw InvalidArgument("TLo-NBoF backward: upstream shape " + shape_string(upstream.shape()) +
                          " does not match histogram shape " + shape_string(ctx.histograms.shape()));
  }
  if (codebook.vectors.shape() != Shape{nk, ctx.features.dim(1)}) {
    throw InvalidState("TLo-NBoF backward: codebook changed shape since forward");
  }

  LayerGrads g;
  // dL/dc_s: s is linear in c_s.
  for (std::size_t i = 0; i < upstream.size(); ++i) g.c_s += upstream[i] * ctx.histograms[i];
  g.c_s /= ctx.c_s;

  // dL/du_jk = sum over regions containing j of (c_s / |region|) dL/ds_rk.
  Tensor grad_u({rows, nk});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < nr; ++r) {
      const RegionRange& range = ctx.partitions[b].histogram_segment(r);
      const double factor = ctx.c_s / static_cast<double>(range.size());
      const double* up = upstream.raw() + b * nr * nk + r * nk;
      for (std::size_t j = ctx.offsets[b] + range.begin; j < ctx.offsets[b] + range.end; ++j) {
        double* gu = grad_u.raw() + j * nk;
        for (std::size_t k = 0; k < nk; ++k) gu[k] += factor * up[k];
      }
    }
  }

  // Quotient rule through u_jk = c_u K_jk / S_j:
  //   dL/dK_jl = (c_u / S_j) * (dL/du_jl - sum_k dL/du_jk K_jk / S_j)
  Tensor grad_k({rows, nk});
  for (std::size_t j = 0; j < rows; ++j) {
    const double* gu = grad_u.raw() + j * nk;
    const double* kv = ctx.kernel.raw() + j * nk;
    const double* u = ctx.assignments.raw() + j * nk;
    double weighted = 0.0;
    for (std::size_t k = 0; k < nk; ++k) {
      weighted += gu[k] * kv[k];
      g.c_u += gu[k] * u[k];
    }
    const double s = ctx.row_sum[j];
    double* gk = grad_k.raw() + j * nk;
    for (std::size_t l = 0; l < nk; ++l) gk[l] = (ctx.c_u / s) * (gu[l] - weighted / s);
  }
  g.c_u /= ctx.c_u;

  g.features = Tensor({rows, dim});
  g.codebook = Tensor({nk, dim});
  auto gy = as_matrix(g.features);
  auto gv = as_matrix(g.codebook);
  const auto y = as_matrix(ctx.features);
  const auto v = as_matrix(codebook.vectors);

  if (kernel.type == KernelType::kLogistic) {
    // z = 2 alpha x.v + 2 beta ; K = sigm(z)
    Tensor grad_z({rows, nk});
    for (std::size_t i = 0; i < grad_z.size(); ++i) {
      const double kv = ctx.kernel[i];
      const double gz = grad_k[i] * kv * (1.0 - kv);
      grad_z[i] = gz;
      g.alpha += 2.0 * gz * ctx.similarity[i];
      g.beta += 2.0 * gz;
    }
    const auto gz = as_matrix(grad_z);
    const double two_alpha = 2.0 * kernel.params.alpha;
    gy.noalias() = two_alpha * (gz * v);
    gv.noalias() = two_alpha * (gz.transpose() * y);
  } else {
    // K = exp(-d2 / 2 sigma^2) / sqrt(2 pi sigma)
    const double sigma = kernel.params.sigma;
    const double s2 = sigma * sigma;
    Tensor weight({rows, nk});
    for (std::size_t i = 0; i < weight.size(); ++i) {
      const double w = grad_k[i] * ctx.kernel[i];
      weight[i] = w;
      g.sigma += w * (ctx.similarity[i] / (s2 * sigma) - 0.5 / sigma);
    }
    const auto w = as_matrix(weight);
    const detail::Vector row_w = w.rowwise().sum();
    const detail::Vector col_w = w.colwise().sum().transpose();
    gy.noalias() = (w * v) / s2;
    gy -= (row_w.asDiagonal() * y) / s2;
    gv.noalias() = (w.transpose() * y) / s2;
    gv -= (col_w.asDiagonal() * v) / s2;
  }
  return g;
}

TemporalHistogram forward(const Tensor& features, const Codebook& codebook, const KernelConfig& kernel,
                          const ScalingParams& scaling, std::size_t n_regions, LayerContext* ctx, bool nested_regions) {
  if (features.rank() != 2) throw InvalidArgument("TLo-NBoF: features must be a rank-2 tensor");
  TloNbofLayer layer({n_regions, nested_regions});
  LayerContext local;
  LayerContext& c = ctx ? *ctx : local;
  const std::vector<std::size_t> offsets{0, features.dim(0)};
  Tensor h = layer.forward(features, offsets, codebook, kernel, scaling, c);
  TemporalHistogram out;
  out.n_regions = n_regions;
  out.n_codewords = codebook.size();
  out.values.assign(h.data().begin(), h.data().end());
  return out;
}

LayerGrads backward(const LayerContext& ctx, std::span<const double> upstream, const Codebook& codebook,
                    const KernelConfig& kernel) {
  if (!ctx.valid) throw InvalidState("TLo-NBoF backward called without a forward context");
  const std::size_t nr = ctx.partitions.front().size();
  TloNbofLayer layer({nr, ctx.partitions.front().nested});
  if (upstream.size() != ctx.histograms.size()) throw InvalidArgument("TLo-NBoF backward: upstream length mismatch");
  Tensor up(ctx.histograms.shape(), std::vector<double>(upstream.begin(), upstream.end()));
  return layer.backward(ctx, up, codebook, kernel);
}

}  // namespace tlnbof
