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

#include "tlnbof/init.hpp"

#include <cmath>

#include "tlnbof/errors.hpp"

namespace tlnbof {

Tensor glorot_uniform(const Shape& shape, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  if (fan_in == 0 || fan_out == 0) throw InvalidArgument("glorot_uniform: fan_in and fan_out must be >= 1");
  if (shape_product(shape) == 0) throw InvalidArgument("glorot_uniform: zero-sized shape " + shape_string(shape));
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor out(shape);
  for (double& v : out.data()) v = rng.uniform(-limit, limit);
  return out;
}

}  // namespace tlnbof
