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

#include "tlnbof/checkpoint.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <map>
#include <sstream>

#include "tlnbof/errors.hpp"
#include "tlnbof/io_util.hpp"

namespace tlnbof {

namespace {

constexpr char kMagic[4] = {'T', 'L', 'N', 'B'};

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  U u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xff));
    u = static_cast<U>(u >> 8);
  }
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    need(sizeof(T), what);
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::size_t pos() const { return pos_; }
  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string("checkpoint truncated while reading ") + what, FormatError::Position::kByteOffset,
                        pos_);
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

float to_f32(const std::string& name, double v) {
  if (!std::isfinite(v) || std::abs(v) > std::numeric_limits<float>::max()) {
    throw InvalidArgument("checkpoint: " + name + " holds " + std::to_string(v) + ", outside the f32 range");
  }
  return static_cast<float>(v);
}

StoredTensor stored(std::string name, const Tensor& t) {
  StoredTensor s{name, t.shape(), {}};
  s.data.reserve(t.size());
  for (double v : t.data()) s.data.push_back(to_f32(name, v));
  return s;
}

StoredTensor stored_scalar(std::string name, double v) {
  const float f = to_f32(name, v);
  return {std::move(name), {1}, {f}};
}

StoredTensor stored_u64(std::string name, std::uint64_t v) {
  StoredTensor s{std::move(name), {4}, {}};
  for (int i = 0; i < 4; ++i) s.data.push_back(static_cast<float>((v >> (16 * i)) & 0xffff));
  return s;
}

std::vector<StoredTensor> spec_tensors(const ModelSpec& spec) {
  return {
      stored_scalar("spec/architecture", static_cast<double>(spec.architecture)),
      stored_scalar("spec/input_dim", static_cast<double>(spec.input_dim)),
      stored_scalar("spec/n_filters", static_cast<double>(spec.n_filters)),
      stored_scalar("spec/conv_kernel", static_cast<double>(spec.conv_kernel)),
      stored_scalar("spec/n_codewords", static_cast<double>(spec.n_codewords)),
      stored_scalar("spec/n_regions", static_cast<double>(spec.n_regions)),
      stored_scalar("spec/hidden", static_cast<double>(spec.hidden)),
      stored_scalar("spec/n_classes", static_cast<double>(spec.n_classes)),
      stored_scalar("spec/deep_features", spec.deep_features ? 1.0 : 0.0),
      stored_scalar("spec/nested_regions", spec.nested_regions ? 1.0 : 0.0),
      stored_scalar("spec/kernel", static_cast<double>(spec.kernel)),
      stored_scalar("spec/scaling", static_cast<double>(spec.scaling)),
      stored_scalar("spec/kernel_param_learning", spec.kernel_param_learning ? 1.0 : 0.0),
      stored_scalar("spec/mean_length", spec.mean_length),
      stored_scalar("spec/sigma", spec.sigma),
  };
}

void append_params(std::vector<StoredTensor>& out, const std::string& prefix, const ParamBlock& block) {
  block.for_each([&](std::string_view name, const Tensor& t) { out.push_back(stored(prefix + std::string(name), t)); });
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open checkpoint " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

Tensor to_tensor(const StoredTensor& s) {
  std::vector<double> data(s.data.begin(), s.data.end());
  return Tensor(s.shape, std::move(data));
}

double quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

void quantize_block(ParamBlock& block) {
  block.for_each([](std::string_view, Tensor& t) {
    for (double& v : t.data()) v = quantize(v);
  });
}

}  // namespace

std::string encode_tensors(const std::vector<StoredTensor>& tensors) {
  std::string out(kMagic, 4);
  put_le<std::uint32_t>(out, kCheckpointVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
  for (const auto& t : tensors) {
    if (t.name.size() > 0xffff) throw InvalidArgument("tensor name too long: " + t.name);
    if (t.shape.size() > 0xff) throw InvalidArgument("tensor rank too large: " + t.name);
    if (shape_product(t.shape) != t.data.size()) throw InvalidArgument("tensor data does not match shape: " + t.name);
    put_le<std::uint16_t>(out, static_cast<std::uint16_t>(t.name.size()));
    out += t.name;
    put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape.size()));
    for (std::size_t d : t.shape) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
    for (float f : t.data) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(f));
  }
  return out;
}

std::vector<StoredTensor> decode_tensors(std::string_view bytes) {
  Reader r(bytes);
  const std::string_view magic = r.take(4, "magic");
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("bad checkpoint magic (expected \"TLNB\")", FormatError::Position::kByteOffset, 0);
  }
  const std::size_t version_at = r.pos();
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version), FormatError::Position::kByteOffset,
                      version_at);
  }
  const auto count = r.get<std::uint32_t>("tensor count");
  std::vector<StoredTensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    StoredTensor t;
    const auto name_len = r.get<std::uint16_t>("tensor name length");
    t.name = std::string(r.take(name_len, "tensor name"));
    const std::size_t rank_at = r.pos();
    const auto rank = r.get<std::uint8_t>("tensor rank");
    if (rank == 0) throw FormatError("tensor '" + t.name + "' has rank 0", FormatError::Position::kByteOffset, rank_at);
    std::size_t n = 1;
    for (std::uint8_t a = 0; a < rank; ++a) {
      const std::size_t dim_at = r.pos();
      const auto d = r.get<std::uint32_t>("tensor dimension");
      if (d == 0)
        throw FormatError("tensor '" + t.name + "' has a zero dimension", FormatError::Position::kByteOffset, dim_at);
      t.shape.push_back(d);
      n *= d;
    }
    const std::string_view payload = r.take(n * 4, "tensor payload");
    t.data.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      std::uint32_t u = 0;
      for (int b = 0; b < 4; ++b)
        u |= static_cast<std::uint32_t>(static_cast<unsigned char>(payload[4 * k + b])) << (8 * b);
      t.data[k] = std::bit_cast<float>(u);
    }
    out.push_back(std::move(t));
  }
  if (!r.at_end()) throw FormatError("trailing bytes after last tensor", FormatError::Position::kByteOffset, r.pos());
  return out;
}

void save_checkpoint(const std::filesystem::path& path, const TloNbofParams& params) {
  std::vector<StoredTensor> tensors = spec_tensors(params.spec);
  append_params(tensors, "param/", params.values);
  atomic_write(path, encode_tensors(tensors));
}

void save_checkpoint(const std::filesystem::path& path, const TrainingState& state, std::uint64_t seed) {
  std::vector<StoredTensor> tensors = spec_tensors(state.params.spec);
  append_params(tensors, "param/", state.params.values);
  append_params(tensors, "adam/m/", state.adam.m);
  append_params(tensors, "adam/v/", state.adam.v);
  tensors.push_back(stored_u64("adam/t", state.adam.t));
  tensors.push_back(stored_u64("train/step", state.step));
  tensors.push_back(stored_u64("train/seed", seed));
  atomic_write(path, encode_tensors(tensors));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  std::map<std::string, StoredTensor> by_name;
  for (auto& t : decode_tensors(bytes)) {
    std::string name = t.name;
    if (!by_name.emplace(name, std::move(t)).second) {
      throw FormatError("duplicate tensor '" + name + "'", FormatError::Position::kByteOffset, 0);
    }
  }
  auto scalar = [&](const std::string& name) -> double {
    auto it = by_name.find(name);
    if (it == by_name.end() || it->second.data.size() != 1) {
      throw FormatError("checkpoint is missing scalar '" + name + "'", FormatError::Position::kByteOffset,
                        bytes.size());
    }
    return it->second.data[0];
  };
  auto u64 = [&](const std::string& name) -> std::optional<std::uint64_t> {
    auto it = by_name.find(name);
    if (it == by_name.end()) return std::nullopt;
    if (it->second.data.size() != 4) {
      throw FormatError("'" + name + "' must hold four 16-bit chunks", FormatError::Position::kByteOffset,
                        bytes.size());
    }
    std::uint64_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint64_t>(it->second.data[i]) << (16 * i);
    return v;
  };

  ModelSpec spec;
  spec.architecture = static_cast<Architecture>(static_cast<int>(scalar("spec/architecture")));
  spec.input_dim = static_cast<std::size_t>(scalar("spec/input_dim"));
  spec.n_filters = static_cast<std::size_t>(scalar("spec/n_filters"));
  spec.conv_kernel = static_cast<std::size_t>(scalar("spec/conv_kernel"));
  spec.n_codewords = static_cast<std::size_t>(scalar("spec/n_codewords"));
  spec.n_regions = static_cast<std::size_t>(scalar("spec/n_regions"));
  spec.hidden = static_cast<std::size_t>(scalar("spec/hidden"));
  spec.n_classes = static_cast<std::size_t>(scalar("spec/n_classes"));
  spec.deep_features = scalar("spec/deep_features") != 0.0;
  spec.nested_regions = scalar("spec/nested_regions") != 0.0;
  spec.kernel = static_cast<KernelType>(static_cast<int>(scalar("spec/kernel")));
  spec.scaling = static_cast<ScalingMode>(static_cast<int>(scalar("spec/scaling")));
  spec.kernel_param_learning = scalar("spec/kernel_param_learning") != 0.0;
  spec.mean_length = scalar("spec/mean_length");
  spec.sigma = scalar("spec/sigma");
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("invalid model spec in checkpoint: ") + e.what(), FormatError::Position::kByteOffset,
                      0);
  }

  // A throwaway initialization supplies the expected group shapes.
  Rng rng(0);
  Checkpoint ck;
  ck.params = TloNbofParams::initialize(spec, rng);
  auto load_block = [&](const std::string& prefix, ParamBlock& block, bool required) -> bool {
    bool any = false;
    block.for_each([&](std::string_view name, Tensor& t) {
      auto it = by_name.find(prefix + std::string(name));
      if (it == by_name.end()) {
        if (required) {
          throw FormatError("checkpoint is missing tensor '" + prefix + std::string(name) + "'",
                            FormatError::Position::kByteOffset, bytes.size());
        }
        return;
      }
      if (it->second.shape != t.shape()) {
        throw FormatError("tensor '" + it->first + "' has shape " + shape_string(it->second.shape) + ", expected " +
                              shape_string(t.shape()),
                          FormatError::Position::kByteOffset, 0);
      }
      t = to_tensor(it->second);
      any = true;
    });
    return any;
  };
  load_block("param/", ck.params.values, true);
  AdamState adam = AdamState::for_params(ck.params);
  const bool has_m = load_block("adam/m/", adam.m, false);
  const bool has_v = load_block("adam/v/", adam.v, false);
  if (has_m || has_v) {
    if (!(has_m && has_v)) {
      throw FormatError("checkpoint holds only one Adam moment", FormatError::Position::kByteOffset, bytes.size());
    }
    adam.t = u64("adam/t").value_or(0);
    ck.adam = std::move(adam);
  }
  ck.step = u64("train/step").value_or(0);
  ck.seed = u64("train/seed").value_or(0);
  return ck;
}

TloNbofParams quantize_f32(const TloNbofParams& params) {
  TloNbofParams q = params;
  quantize_block(q.values);
  q.spec.mean_length = quantize(q.spec.mean_length);
  q.spec.sigma = quantize(q.spec.sigma);
  return q;
}

TrainingState quantize_f32(const TrainingState& state) {
  TrainingState q = state;
  q.params = quantize_f32(state.params);
  quantize_block(q.adam.m);
  quantize_block(q.adam.v);
  return q;
}

}  // namespace tlnbof
