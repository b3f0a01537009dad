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
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "tlnbof/tensor.hpp"

namespace tlnbof {

inline constexpr std::size_t kLobFeatureDim = 144;

enum class Direction : std::size_t { kDown = 0, kStationary = 1, kUp = 2 };

// One trading day of pre-extracted feature vectors in time order.
struct FeatureStream {
  std::int64_t day_id = 0;
  Tensor features;                 // rows x feature_dim
  std::vector<double> mid_prices;  // one per row, > 0

  std::size_t rows() const { return mid_prices.size(); }
  std::size_t feature_dim() const { return features.empty() ? 0 : features.dim(1); }
};

// A labelled window of the last `window` feature vectors ending at `end_index`.
struct FeatureSeries {
  Tensor features;  // window x feature_dim
  std::size_t label = 0;
  std::int64_t day_id = 0;
  std::size_t end_index = 0;  // row of the stream the window ends at
};

enum class LabelMode { kMeanHorizon, kPointHorizon };

std::string_view to_string(LabelMode mode);
LabelMode parse_label_mode(std::string_view name);

struct LabelConfig {
  std::size_t horizon = 10;
  double threshold = 1e-4;
  LabelMode mode = LabelMode::kMeanHorizon;
};

// `prices` holds p_t followed by at least `horizon` future mid-prices.
// r = (m - p_t) / p_t with m the mean of the next `horizon` prices (or p_{t+H}
// in point mode); |r| < threshold is stationary, otherwise the sign decides.
Direction label_sample(std::span<const double> prices, const LabelConfig& config = {});

// Header: day_id,mid_price,f1,...,f<feature_dim>. One day per file.
FeatureStream load_feature_csv(const std::filesystem::path& path, std::size_t feature_dim = kLobFeatureDim);
void write_feature_csv(const std::filesystem::path& path, const FeatureStream& stream);

// Loads every *.csv in `dir` and returns the streams sorted by day_id.
std::vector<FeatureStream> load_feature_dir(const std::filesystem::path& dir, std::size_t feature_dim = kLobFeatureDim);

// One sample per t in [window - 1, rows - horizon). Windows stay inside the day.
std::vector<FeatureSeries> windowize(const FeatureStream& stream, std::size_t window = 15,
                                     const LabelConfig& labels = {});

struct FoldSpec {
  std::vector<std::int64_t> train_days;
  std::int64_t test_day = 0;
};

// Anchored walk-forward folds: fold k trains on the first k days and tests on
// day k + 1. Days are sorted and deduplicated first.
std::vector<FoldSpec> anchored_folds(std::vector<std::int64_t> day_ids);

}  // namespace tlnbof
