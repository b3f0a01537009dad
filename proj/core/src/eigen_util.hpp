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

#include <Eigen/Core>

#include "tlnbof/tensor.hpp"

namespace tlnbof::detail {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Vector>;
using ConstVectorMap = Eigen::Map<const Vector>;

// Views a tensor as a rows x cols row-major matrix; rows * cols must equal size().
inline MatrixMap as_matrix(Tensor& t, Eigen::Index rows, Eigen::Index cols) { return {t.raw(), rows, cols}; }
inline ConstMatrixMap as_matrix(const Tensor& t, Eigen::Index rows, Eigen::Index cols) { return {t.raw(), rows, cols}; }
inline MatrixMap as_matrix(Tensor& t) {
  return {t.raw(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.size() / t.dim(0))};
}
inline ConstMatrixMap as_matrix(const Tensor& t) {
  return {t.raw(), static_cast<Eigen::Index>(t.dim(0)), static_cast<Eigen::Index>(t.size() / t.dim(0))};
}
inline VectorMap as_vector(Tensor& t) { return {t.raw(), static_cast<Eigen::Index>(t.size())}; }
inline ConstVectorMap as_vector(const Tensor& t) { return {t.raw(), static_cast<Eigen::Index>(t.size())}; }

}  // namespace tlnbof::detail
