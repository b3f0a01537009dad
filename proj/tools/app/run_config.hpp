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

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tlnbof/data.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof::app {

// Bad configuration or command-line usage; maps to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class FoldMode { kAnchored, kSingle };

std::string_view to_string(FoldMode mode);
FoldMode parse_fold_mode(std::string_view name);

// Flat key=value run configuration. Defaults follow the reference training
// protocol (batch 128, lr 1e-4, 20 epochs, window 15, horizon 10).
struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t batch_size = 128;
  std::size_t epochs = 20;
  std::size_t max_steps = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::size_t threads = 0;  // 0: TLNB_THREADS or 1
  bool deterministic = true;

  Architecture model = Architecture::kTloNbof;
  bool deep_features = true;
  bool temporal_modeling = true;
  std::size_t n_regions = 3;
  bool nested_regions = false;
  bool kernel_param_learning = true;
  ScalingMode adaptive_scaling = ScalingMode::kLearned;
  KernelType kernel = KernelType::kLogistic;
  double sigma = 0.0;
  std::size_t n_codewords = 256;
  std::size_t n_filters = 256;
  std::size_t conv_kernel = 5;
  std::size_t hidden = 512;
  std::size_t feature_dim = kLobFeatureDim;

  std::size_t window = 15;
  std::size_t horizon = 10;
  double threshold = 1e-4;
  LabelMode label_mode = LabelMode::kMeanHorizon;

  std::string data_dir;
  std::string output_dir = ".";
  FoldMode folds = FoldMode::kAnchored;
  std::size_t max_folds = 0;  // 0: all folds
  std::vector<std::uint64_t> ablate_seeds = {1, 2, 3, 4, 5};

  // Throws UsageError naming the line of the first bad entry.
  static RunConfig parse(std::string_view text, std::string_view origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // Canonical text: every key, in a fixed order, with its comment.
  std::string dump() const;

  // Throws UsageError for unknown keys or malformed values.
  void set(std::string_view key, std::string_view value);
  static const std::vector<std::string_view>& keys();

  ModelSpec model_spec() const;
  TrainConfig train_config() const;
  LabelConfig label_config() const;
};

// Applies TLNB_THREADS (cap) and TLNB_DETERMINISTIC=1 (force) to `config`.
void apply_environment(TrainConfig& config);

}  // namespace tlnbof::app
