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

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "tlnbof/metrics.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof::app {

// One evaluated fold. Precision, recall and F1 are percentages; kappa is raw
// and NaN when undefined.
struct FoldRow {
  std::string fold;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double kappa = 0.0;
};

FoldRow fold_row(std::string fold, const ConfusionMatrix& cm);

// Per-fold rows followed by "mean" and "std" (sample std over folds).
std::vector<FoldRow> with_summary(std::vector<FoldRow> folds);

// Header fold,precision,recall,f1,kappa; numbers in shortest round-trip form.
std::string fold_report_csv(const std::vector<FoldRow>& rows);
std::vector<FoldRow> parse_fold_report(std::string_view csv);

struct GridRow {
  std::string name;
  AblationFlags flags;
};

// Header name,deep_features,temporal_modeling,kernel_param_learning,
// adaptive_scaling with an optional trailing kernel column. Booleans are
// true/false or 1/0; adaptive_scaling is off|fixed|learned.
std::vector<GridRow> parse_grid(std::string_view csv, std::string_view origin = "<grid>");
std::vector<GridRow> load_grid(const std::filesystem::path& path);
std::string grid_csv(const std::vector<GridRow>& rows);

struct AblationRow {
  GridRow grid;
  MeanStd f1;  // percent
  MeanStd kappa;
  std::size_t completed_seeds = 0;
  std::string status = "ok";  // "ok" or "failed: <reason>"
};

std::string ablation_report_csv(const std::vector<AblationRow>& rows);

// Columns padded to their widest cell; the first row is the header.
std::string aligned_table(const std::vector<std::vector<std::string>>& rows);
std::string fold_table(const std::vector<FoldRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

std::string format_number(double v);

}  // namespace tlnbof::app
