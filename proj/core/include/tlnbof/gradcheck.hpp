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

#include <functional>

#include "tlnbof/tensor.hpp"

namespace tlnbof {

using ScalarFunction = std::function<double(const Tensor&)>;

// Central-difference gradient of `f` at `x`, one coordinate at a time.
// Throws NumericFailure if any evaluation of `f` is non-finite.
Tensor finite_diff_grad(const ScalarFunction& f, const Tensor& x, double eps = 1e-5);

// ||a - b||_2 / max(||a||_2, ||b||_2, floor). The floor keeps groups whose true
// gradient is (numerically) zero from producing 0/0.
double relative_error(const Tensor& a, const Tensor& b, double floor = 1e-8);

}  // namespace tlnbof
