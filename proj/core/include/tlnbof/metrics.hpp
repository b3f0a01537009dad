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
#include <cstdint>
#include <span>
#include <vector>

namespace tlnbof {

// Rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t n_classes = 3);
  ConfusionMatrix(std::size_t n_classes, std::vector<std::uint64_t> counts);

  std::size_t n_classes() const { return n_; }
  std::uint64_t at(std::size_t truth, std::size_t predicted) const { return counts_[truth * n_ + predicted]; }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) { return counts_[truth * n_ + predicted]; }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  std::uint64_t row_sum(std::size_t truth) const;
  std::uint64_t col_sum(std::size_t predicted) const;

  ConfusionMatrix& merge(const ConfusionMatrix& other);
  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t n_;
  std::vector<std::uint64_t> counts_;
};

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t n_classes = 3);

// Fractions in [0, 1]. Per-class 0/0 terms count as 0 and are tallied in
// `undefined_terms` so callers can warn.
struct MacroPrf {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t undefined_terms = 0;
};

MacroPrf macro_prf(const ConfusionMatrix& cm);

// (p_o - p_e) / (1 - p_e). Throws UndefinedMetric when p_e == 1 and
// InvalidArgument on an empty matrix.
double cohens_kappa(const ConfusionMatrix& cm);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation (n - 1); 0 for a single value
};

MeanStd mean_std(std::span<const double> values);

}  // namespace tlnbof
