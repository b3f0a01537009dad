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

#include "tlnbof/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "tlnbof/errors.hpp"

namespace tlnbof {

Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw InvalidArgument("finite_diff_grad: eps must be positive");
  Tensor probe = x;
  Tensor grad = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + eps;
    const double plus = f(probe);
    probe[i] = saved - eps;
    const double minus = f(probe);
    probe[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NumericFailure("finite_diff_grad: non-finite function value at coordinate " + std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * eps);
  }
  return grad;
}

double relative_error(const Tensor& a, const Tensor& b, double floor) {
  if (a.shape() != b.shape()) throw InvalidArgument("relative_error: shape mismatch");
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += (a[i] - b[i]) * (a[i] - b[i]);
  const double scale = std::max({a.frobenius_norm(), b.frobenius_norm(), floor});
  return std::sqrt(diff) / scale;
}

}  // namespace tlnbof
