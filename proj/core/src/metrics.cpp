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

#include "tlnbof/metrics.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "tlnbof/errors.hpp"

namespace tlnbof {

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes) : n_(n_classes), counts_(n_classes * n_classes, 0) {
  if (n_classes == 0) throw InvalidArgument("confusion matrix needs at least one class");
}

ConfusionMatrix::ConfusionMatrix(std::size_t n_classes, std::vector<std::uint64_t> counts)
    : n_(n_classes), counts_(std::move(counts)) {
  if (n_classes == 0 || counts_.size() != n_classes * n_classes) {
    throw InvalidArgument("confusion matrix counts must be n_classes x n_classes");
  }
}

std::uint64_t ConfusionMatrix::total() const {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t t = 0;
  for (std::size_t i = 0; i < n_; ++i) t += at(i, i);
  return t;
}

std::uint64_t ConfusionMatrix::row_sum(std::size_t truth) const {
  std::uint64_t s = 0;
  for (std::size_t j = 0; j < n_; ++j) s += at(truth, j);
  return s;
}

std::uint64_t ConfusionMatrix::col_sum(std::size_t predicted) const {
  std::uint64_t s = 0;
  for (std::size_t i = 0; i < n_; ++i) s += at(i, predicted);
  return s;
}

ConfusionMatrix& ConfusionMatrix::merge(const ConfusionMatrix& other) {
  if (other.n_ != n_) throw InvalidArgument("cannot merge confusion matrices of different sizes");
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  return *this;
}

ConfusionMatrix confusion(std::span<const std::size_t> truth, std::span<const std::size_t> predicted,
                          std::size_t n_classes) {
  if (truth.size() != predicted.size()) {
    throw InvalidArgument("confusion: " + std::to_string(truth.size()) + " true labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  ConfusionMatrix cm(n_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= n_classes || predicted[i] >= n_classes) throw InvalidArgument("confusion: label out of range");
    ++cm.at(truth[i], predicted[i]);
  }
  return cm;
}

MacroPrf macro_prf(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw InvalidArgument("macro_prf: empty confusion matrix");
  MacroPrf out;
  const std::size_t n = cm.n_classes();
  for (std::size_t c = 0; c < n; ++c) {
    const double tp = static_cast<double>(cm.at(c, c));
    const std::uint64_t predicted = cm.col_sum(c);
    const std::uint64_t actual = cm.row_sum(c);
    double p = 0.0;
    double r = 0.0;
    double f = 0.0;
    if (predicted > 0) {
      p = tp / static_cast<double>(predicted);
    } else {
      ++out.undefined_terms;
    }
    if (actual > 0) {
      r = tp / static_cast<double>(actual);
    } else {
      ++out.undefined_terms;
    }
    if (p + r > 0.0) {
      f = 2.0 * p * r / (p + r);
    } else {
      ++out.undefined_terms;
    }
    out.precision += p;
    out.recall += r;
    out.f1 += f;
  }
  out.precision /= static_cast<double>(n);
  out.recall /= static_cast<double>(n);
  out.f1 /= static_cast<double>(n);
  return out;
}

double cohens_kappa(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) throw InvalidArgument("cohens_kappa: empty confusion matrix");
  const double n = static_cast<double>(total);
  const double p_o = static_cast<double>(cm.trace()) / n;
  double p_e = 0.0;
  for (std::size_t c = 0; c < cm.n_classes(); ++c) {
    p_e += static_cast<double>(cm.row_sum(c)) * static_cast<double>(cm.col_sum(c));
  }
  p_e /= n * n;
  if (p_e >= 1.0) throw UndefinedMetric("cohens_kappa: chance agreement is 1 (all mass in one cell)");
  return (p_o - p_e) / (1.0 - p_e);
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd out;
  if (values.empty()) return out;
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double acc = 0.0;
    for (double v : values) acc += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(acc / static_cast<double>(values.size() - 1));
  }
  return out;
}

}  // namespace tlnbof
