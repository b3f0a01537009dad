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

#include "tlnbof/kernels.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "tlnbof/errors.hpp"

namespace tlnbof {

std::string_view to_string(KernelType type) {
  switch (type) {
    case KernelType::kLogistic:
      return "logistic";
    case KernelType::kGaussian:
      return "gaussian";
  }
  return "unknown";
}

KernelType parse_kernel_type(std::string_view name) {
  if (name == "logistic") return KernelType::kLogistic;
  if (name == "gaussian") return KernelType::kGaussian;
  throw InvalidArgument("unknown kernel '" + std::string(name) + "' (expected logistic|gaussian)");
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logistic_from_dot(double dot, const KernelParams& p) { return sigmoid(2.0 * p.alpha * dot + 2.0 * p.beta); }

double gaussian_from_sqdist(double sq_dist, const KernelParams& p) {
  if (!(p.sigma > 0.0)) throw InvalidArgument("gaussian kernel requires sigma > 0");
  return std::exp(-sq_dist / (2.0 * p.sigma * p.sigma)) / std::sqrt(2.0 * std::numbers::pi * p.sigma);
}

namespace {

void check_dims(std::span<const double> x, std::span<const double> v) {
  if (x.size() != v.size()) {
    throw InvalidArgument("kernel dimension mismatch: " + std::to_string(x.size()) + " vs " + std::to_string(v.size()));
  }
}

double dot(std::span<const double> x, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * v[i];
  return acc;
}

double sq_dist(std::span<const double> x, std::span<const double> v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - v[i]) * (x[i] - v[i]);
  return acc;
}

}  // namespace

double logistic_kernel(std::span<const double> x, std::span<const double> v, const KernelParams& p) {
  check_dims(x, v);
  return logistic_from_dot(dot(x, v), p);
}

double gaussian_kernel(std::span<const double> x, std::span<const double> v, const KernelParams& p) {
  check_dims(x, v);
  return gaussian_from_sqdist(sq_dist(x, v), p);
}

double kernel_value(KernelType type, std::span<const double> x, std::span<const double> v, const KernelParams& p) {
  return type == KernelType::kLogistic ? logistic_kernel(x, v, p) : gaussian_kernel(x, v, p);
}

KernelGrad kernel_backward(KernelType type, std::span<const double> x, std::span<const double> v, const KernelParams& p,
                           double upstream) {
  check_dims(x, v);
  KernelGrad g;
  g.dx.resize(x.size());
  g.dv.resize(x.size());
  if (type == KernelType::kLogistic) {
    const double xv = dot(x, v);
    const double k = logistic_from_dot(xv, p);
    const double dz = upstream * k * (1.0 - k);
    for (std::size_t i = 0; i < x.size(); ++i) {
      g.dx[i] = 2.0 * p.alpha * dz * v[i];
      g.dv[i] = 2.0 * p.alpha * dz * x[i];
    }
    g.dalpha = 2.0 * xv * dz;
    g.dbeta = 2.0 * dz;
    return g;
  }
  const double d2 = sq_dist(x, v);
  const double k = gaussian_from_sqdist(d2, p);
  const double s2 = p.sigma * p.sigma;
  for (std::size_t i = 0; i < x.size(); ++i) {
    g.dx[i] = upstream * k * (v[i] - x[i]) / s2;
    g.dv[i] = upstream * k * (x[i] - v[i]) / s2;
  }
  g.dsigma = upstream * k * (d2 / (s2 * p.sigma) - 0.5 / p.sigma);
  return g;
}

}  // namespace tlnbof
