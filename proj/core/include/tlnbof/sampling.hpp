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

#include <cstddef>
#include <span>
#include <vector>

#include "tlnbof/rng.hpp"

namespace tlnbof {

// Draws `batch_size` indices with replacement; sample i is drawn with
// probability proportional to 1 / count(labels[i]), so every class is equally
// likely per draw.
//
// With n_classes == 0 only the classes that occur in `labels` take part.
// Otherwise each class in [0, n_classes) must occur at least once.
std::vector<std::size_t> balanced_batch(std::span<const std::size_t> labels, std::size_t batch_size, Rng& rng,
                                        std::size_t n_classes = 0);

// Same distribution, with the per-class index lists built once.
class BalancedSampler {
 public:
  BalancedSampler(std::span<const std::size_t> labels, std::size_t n_classes = 0);

  std::vector<std::size_t> draw(std::size_t batch_size, Rng& rng) const;
  std::size_t class_count() const { return members_.size(); }

 private:
  std::vector<std::vector<std::size_t>> members_;
};

}  // namespace tlnbof
