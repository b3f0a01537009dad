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

#include <span>
#include <string_view>
#include <vector>

namespace tlnbof {

enum class KernelType { kLogistic, kGaussian };

std::string_view to_string(KernelType type);
KernelType parse_kernel_type(std::string_view name);

// alpha/beta drive the logistic kernel, sigma the Gaussian one.
struct KernelParams {
  double alpha = 1.0;
  double beta = 0.0;
  double sigma = 1.0;
};

// Overflow-safe 1 / (1 + exp(-z)).
double sigmoid(double z);

// sigm(2 * alpha * dot + 2 * beta), the tanh kernel rescaled onto (0, 1).
double logistic_from_dot(double dot, const KernelParams& p);
// exp(-d2 / (2 sigma^2)) / sqrt(2 pi sigma). The prefactor is sqrt(2 pi sigma),
// not sigma * sqrt(2 pi); it cancels under soft-assignment normalization.
double gaussian_from_sqdist(double sq_dist, const KernelParams& p);

double logistic_kernel(std::span<const double> x, std::span<const double> v, const KernelParams& p);
double gaussian_kernel(std::span<const double> x, std::span<const double> v, const KernelParams& p);
double kernel_value(KernelType type, std::span<const double> x, std::span<const double> v, const KernelParams& p);

// Gradients of upstream * K(x, v). For the logistic kernel dsigma is zero;
// for the Gaussian kernel dalpha and dbeta are zero.
struct KernelGrad {
  std::vector<double> dx;
  std::vector<double> dv;
  double dalpha = 0.0;
  double dbeta = 0.0;
  double dsigma = 0.0;
};

KernelGrad kernel_backward(KernelType type, std::span<const double> x, std::span<const double> v, const KernelParams& p,
                           double upstream);

}  // namespace tlnbof
