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

// Checkpoint files ("TLNB", little-endian throughout):
//
//   magic       4 bytes  "TLNB"
//   version     u32      kCheckpointVersion
//   count       u32      number of tensors
//   per tensor:
//     name_len  u16, then name_len bytes of UTF-8
//     rank      u8, then rank x u32 dims
//     payload   product(dims) x f32, row-major
//
// Tensor names used by save_checkpoint:
//   spec/<field>          model hyperparameters, shape {1}
//   param/<group>         model parameters (see ParamBlock::names())
//   adam/m/<group>, adam/v/<group>
//   adam/t, train/step, train/seed   u64 stored as four 16-bit chunks, shape {4}

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tlnbof/adam.hpp"
#include "tlnbof/network.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct StoredTensor {
  std::string name;
  Shape shape;
  std::vector<float> data;
};

std::string encode_tensors(const std::vector<StoredTensor>& tensors);
// Throws FormatError with the byte offset of the first malformed field.
std::vector<StoredTensor> decode_tensors(std::string_view bytes);

struct Checkpoint {
  TloNbofParams params;
  std::optional<AdamState> adam;
  std::uint64_t step = 0;
  std::uint64_t seed = 0;
};

void save_checkpoint(const std::filesystem::path& path, const TloNbofParams& params);
void save_checkpoint(const std::filesystem::path& path, const TrainingState& state, std::uint64_t seed);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// The state a save/load round trip produces: every stored value rounded to f32.
TrainingState quantize_f32(const TrainingState& state);
TloNbofParams quantize_f32(const TloNbofParams& params);

}  // namespace tlnbof
