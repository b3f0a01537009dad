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

#include "tlnbof/tensor.hpp"

#include <cmath>
#include <numeric>

#include "tlnbof/errors.hpp"

namespace tlnbof {

std::size_t shape_product(const Shape& shape) {
  if (shape.empty()) return 0;
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::string out = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + ")";
}

namespace {

void check_shape(const Shape& shape) {
  if (shape.empty()) throw InvalidArgument("tensor shape must have at least one dimension");
  for (std::size_t d : shape) {
    if (d == 0) throw InvalidArgument("tensor shape " + shape_string(shape) + " has a zero dimension");
  }
}

}  // namespace

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  check_shape(shape_);
  data_.assign(shape_product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data) : shape_(std::move(shape)), data_(data.begin(), data.end()) {
  check_shape(shape_);
  if (data_.size() != shape_product(shape_)) {
    throw InvalidArgument("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
  }
}

Tensor Tensor::zeros_like(const Tensor& other) {
  if (other.empty()) return Tensor();
  return Tensor(other.shape());
}

std::size_t Tensor::dim(std::size_t axis) const {
  if (axis >= shape_.size()) throw InvalidArgument("axis out of range");
  return shape_[axis];
}

std::span<double> Tensor::row(std::size_t i) {
  const std::size_t cols = shape_.at(1);
  return std::span<double>(data_).subspan(i * cols, cols);
}

std::span<const double> Tensor::row(std::size_t i) const {
  const std::size_t cols = shape_.at(1);
  return std::span<const double>(data_).subspan(i * cols, cols);
}

std::size_t Tensor::flat_index(std::span<const std::size_t> index) const {
  if (index.size() != shape_.size()) throw InvalidArgument("index rank does not match tensor rank");
  std::size_t flat = 0;
  for (std::size_t a = 0; a < shape_.size(); ++a) {
    if (index[a] >= shape_[a]) throw InvalidArgument("index out of range on axis " + std::to_string(a));
    flat = flat * shape_[a] + index[a];
  }
  return flat;
}

std::vector<std::size_t> Tensor::unflatten(std::size_t flat) const {
  if (flat >= data_.size()) throw InvalidArgument("flat index out of range");
  std::vector<std::size_t> index(shape_.size());
  for (std::size_t a = shape_.size(); a-- > 0;) {
    index[a] = flat % shape_[a];
    flat /= shape_[a];
  }
  return index;
}

void Tensor::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double Tensor::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Tensor::frobenius_norm() const {
  double acc = 0.0;
  for (double v : data_) acc += v * v;
  return std::sqrt(acc);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) {
    throw InvalidArgument("shape mismatch in +=: " + shape_string(shape_) + " vs " + shape_string(other.shape_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double factor) {
  for (double& v : data_) v *= factor;
  return *this;
}

}  // namespace tlnbof
