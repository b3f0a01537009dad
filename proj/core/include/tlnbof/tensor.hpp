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
#include <initializer_list>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace tlnbof {

using Shape = std::vector<std::size_t>;

// Cache-line aligned storage. Vectorized kernels take the same code path, and
// so round the same way, wherever a buffer happens to be allocated.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

using TensorStorage = std::vector<double, AlignedAllocator<double>>;

// Dense row-major tensor of doubles.
//
// A default-constructed tensor is "empty": it has rank 0 and holds no data.
// It stands for an absent parameter group (e.g. the convolution when deep
// features are disabled). Every non-empty tensor has positive dimensions and
// product(shape) == size().
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor scalar(double value) { return Tensor(Shape{1}, std::vector<double>{value}); }
  static Tensor zeros_like(const Tensor& other);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t dim(std::size_t axis) const;
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  double* raw() { return data_.data(); }
  const double* raw() const { return data_.data(); }

  double& operator[](std::size_t flat) { return data_[flat]; }
  double operator[](std::size_t flat) const { return data_[flat]; }

  double& at(std::initializer_list<std::size_t> index) { return data_[flat_index(index)]; }
  double at(std::initializer_list<std::size_t> index) const { return data_[flat_index(index)]; }

  // Row `i` of a rank-2 tensor.
  std::span<double> row(std::size_t i);
  std::span<const double> row(std::size_t i) const;

  std::size_t flat_index(std::span<const std::size_t> index) const;
  std::size_t flat_index(std::initializer_list<std::size_t> index) const {
    return flat_index(std::span<const std::size_t>(index.begin(), index.size()));
  }
  std::vector<std::size_t> unflatten(std::size_t flat) const;

  void fill(double value);
  bool all_finite() const;
  double sum() const;
  double frobenius_norm() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator*=(double factor);

  bool operator==(const Tensor& other) const = default;

 private:
  Shape shape_;
  TensorStorage data_;
};

std::size_t shape_product(const Shape& shape);
std::string shape_string(const Shape& shape);

}  // namespace tlnbof
