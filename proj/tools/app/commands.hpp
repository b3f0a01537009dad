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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "report.hpp"
#include "run_config.hpp"
#include "tlnbof/data.hpp"

namespace tlnbof::app {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct DaySamples {
  std::int64_t day_id = 0;
  std::vector<FeatureSeries> samples;
};

// Loads and windows every day of `dir`. A missing directory or one without CSV
// files is a UsageError naming the path.
std::vector<DaySamples> load_days(const std::filesystem::path& dir, const RunConfig& config);
std::vector<FeatureSeries> concat_days(const std::vector<DaySamples>& days);

struct SynthArgs {
  std::filesystem::path out;
  std::size_t days = 10;
  std::size_t rows_per_day = 1000;
  std::uint64_t seed = 1;
  double separation = 1.0;
  std::size_t feature_dim = kLobFeatureDim;
};

struct TrainArgs {
  std::filesystem::path config;
  std::filesystem::path data;
  std::filesystem::path out;
  std::filesystem::path history;  // default: <out> with extension .history.csv
  std::optional<std::uint64_t> seed;
};

struct EvalArgs {
  std::filesystem::path model;
  std::filesystem::path config;
  std::filesystem::path data;
  std::string folds;  // empty: the config's fold mode
  std::filesystem::path report;
  std::filesystem::path predictions;
};

struct AblateArgs {
  std::filesystem::path config;
  std::filesystem::path data;
  std::filesystem::path grid;
  std::filesystem::path report;
};

// Each returns a process exit code and reports errors on `err`.
int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err);
int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err);
int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err);

// Full command line, argv[0] included.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace tlnbof::app
