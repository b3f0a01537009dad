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

#include "tlnbof/sampling.hpp"

#include <algorithm>
#include <string>

#include "tlnbof/errors.hpp"

namespace tlnbof {

BalancedSampler::BalancedSampler(std::span<const std::size_t> labels, std::size_t n_classes) {
  if (labels.empty()) throw InvalidArgument("balanced sampling needs at least one sample");
  const std::size_t max_label = *std::max_element(labels.begin(), labels.end());
  if (n_classes != 0 && max_label >= n_classes) throw InvalidArgument("balanced sampling: label out of range");
  std::vector<std::vector<std::size_t>> by_class(n_classes != 0 ? n_classes : max_label + 1);
  for (std::size_t i = 0; i < labels.size(); ++i) by_class[labels[i]].push_back(i);
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].empty()) {
      if (n_classes != 0) throw InvalidArgument("balanced sampling: class " + std::to_string(c) + " has no samples");
      continue;
    }
    members_.push_back(std::move(by_class[c]));
  }
}

std::vector<std::size_t> BalancedSampler::draw(std::size_t batch_size, Rng& rng) const {
  // Picking a class uniformly and then a member uniformly gives sample i the
  // probability (1 / n_classes) * (1 / count(class_i)).
  std::vector<std::size_t> out(batch_size);
  for (std::size_t& idx : out) {
    const auto& pool = members_[rng.below(members_.size())];
    idx = pool[rng.below(pool.size())];
  }
  return out;
}

std::vector<std::size_t> balanced_batch(std::span<const std::size_t> labels, std::size_t batch_size, Rng& rng,
                                        std::size_t n_classes) {
  return BalancedSampler(labels, n_classes).draw(batch_size, rng);
}

}  // namespace tlnbof
