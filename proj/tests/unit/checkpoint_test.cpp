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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "test_support.hpp"
#include "tlnbof/errors.hpp"

namespace tlnbof {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tlnbof_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
  }
  static void write(const fs::path& p, const std::string& bytes) {
    std::ofstream out(p, std::ios::binary);
    out << bytes;
  }

  fs::path dir_;
};

TEST_F(CheckpointTest, RoundTripWithinFloatPrecision) {
  Rng rng(1);
  const TloNbofParams p = testing::perturbed_params(testing::tiny_spec(), rng);
  save_checkpoint(dir_ / "m.tlnb", p);
  const Checkpoint c = load_checkpoint(dir_ / "m.tlnb");
  EXPECT_FALSE(c.adam.has_value());
  EXPECT_EQ(c.params.spec.n_codewords, p.spec.n_codewords);
  EXPECT_EQ(c.params.spec.kernel, p.spec.kernel);
  p.values.for_each([&](std::string_view name, const Tensor& t) {
    const Tensor* l = c.params.values.find(name);
    ASSERT_NE(l, nullptr) << name;
    ASSERT_EQ(l->shape(), t.shape());
    for (std::size_t i = 0; i < t.size(); ++i) {
      EXPECT_EQ((*l)[i], static_cast<double>(static_cast<float>(t[i]))) << name;
      EXPECT_LE(std::abs((*l)[i] - t[i]), std::abs(t[i]) * 6e-8) << name;
    }
  });
  EXPECT_EQ(c.params.values, quantize_f32(p).values);
}

TEST_F(CheckpointTest, HeaderLayout) {
  Rng rng(2);
  save_checkpoint(dir_ / "m.tlnb", TloNbofParams::initialize(testing::tiny_spec(), rng));
  const std::string bytes = read(dir_ / "m.tlnb");
  ASSERT_GT(bytes.size(), 12u);
  EXPECT_EQ(bytes.substr(0, 4), "TLNB");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 1u);  // version 1, little-endian
  EXPECT_EQ(bytes.substr(5, 3), std::string(3, '\0'));
}

TEST_F(CheckpointTest, EncodeDecodeTensors) {
  std::vector<StoredTensor> ts = {{"a", {2, 3}, {1, 2, 3, 4, 5, 6}}, {"bb", {1}, {-0.5f}}};
  const auto back = decode_tensors(encode_tensors(ts));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[0].name, "a");
  EXPECT_EQ(back[0].shape, (Shape{2, 3}));
  EXPECT_EQ(back[1].data, std::vector<float>{-0.5f});
}

TEST_F(CheckpointTest, MalformedFilesReportByteOffsets) {
  const std::string good = encode_tensors({{"w", {2}, {1.0f, 2.0f}}});
  try {
    decode_tensors("XLNB" + good.substr(4));
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.kind(), FormatError::Position::kByteOffset);
    EXPECT_EQ(e.position(), 0u);
  }
  std::string bad_version = good;
  bad_version[4] = 9;
  try {
    decode_tensors(bad_version);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  for (std::size_t cut = 0; cut < good.size(); ++cut) {
    EXPECT_THROW(decode_tensors(good.substr(0, cut)), FormatError) << "cut at " << cut;
  }
  EXPECT_THROW(decode_tensors(good + "x"), FormatError);
}

TEST_F(CheckpointTest, WrongMagicFileFailsToLoad) {
  write(dir_ / "bad.tlnb", "NOPE0000");
  EXPECT_THROW(load_checkpoint(dir_ / "bad.tlnb"), FormatError);
}

TEST_F(CheckpointTest, TrainingStateRoundTripAndResume) {
  Rng rng(3);
  std::vector<FeatureSeries> data;
  for (int i = 0; i < 60; ++i) {
    FeatureSeries s;
    s.label = static_cast<std::size_t>(i % 3);
    s.features = testing::random_tensor({6, 5}, rng);
    data.push_back(std::move(s));
  }
  TrainConfig cfg;
  cfg.model = testing::tiny_spec();
  cfg.batch_size = 16;
  cfg.epochs = 3;
  cfg.seed = 77;
  Trainer first(cfg, data);
  for (int i = 0; i < 5; ++i) first.step();
  save_checkpoint(dir_ / "s.tlnb", first.state(), cfg.seed);
  const Checkpoint c = load_checkpoint(dir_ / "s.tlnb");
  ASSERT_TRUE(c.adam.has_value());
  EXPECT_EQ(c.step, 5u);
  EXPECT_EQ(c.seed, 77u);
  EXPECT_EQ(c.adam->t, first.state().adam.t);

  Trainer resumed(cfg, data, TrainingState{c.params, *c.adam, c.step});
  Trainer reference(cfg, data, quantize_f32(first.state()));
  const StepResult a = resumed.step(), b = reference.step();
  EXPECT_EQ(a.loss, b.loss);
  EXPECT_EQ(resumed.state().params.values, reference.state().params.values);
  EXPECT_EQ(resumed.state().adam.m, reference.state().adam.m);
}

TEST_F(CheckpointTest, LargeStepAndSeedSurvive) {
  Rng rng(4);
  TrainingState st;
  st.params = TloNbofParams::initialize(testing::tiny_spec(), rng);
  st.adam = AdamState::for_params(st.params);
  st.adam.t = 0x0123456789abcdefULL;
  st.step = 0xfedcba9876543210ULL;
  save_checkpoint(dir_ / "big.tlnb", st, 0xffffffffffffffffULL);
  const Checkpoint c = load_checkpoint(dir_ / "big.tlnb");
  EXPECT_EQ(c.step, st.step);
  EXPECT_EQ(c.adam->t, st.adam.t);
  EXPECT_EQ(c.seed, 0xffffffffffffffffULL);
}

TEST_F(CheckpointTest, ValuesOutsideFloatRangeAreRejected) {
  Rng rng(6);
  TrainingState st;
  st.params = TloNbofParams::initialize(testing::tiny_spec(), rng);
  st.params.values.fc1_weight[0] = 1e300;
  EXPECT_THROW(save_checkpoint(dir_ / "o.tlnb", st, 1), InvalidArgument);
  st.params.values.fc1_weight[0] = std::nan("");
  EXPECT_THROW(save_checkpoint(dir_ / "o.tlnb", st, 1), InvalidArgument);
  EXPECT_FALSE(std::filesystem::exists(dir_ / "o.tlnb"));
}

TEST_F(CheckpointTest, EveryArchitectureRoundTrips) {
  Rng rng(5);
  for (const auto& flags : testing::all_ablation_flags()) {
    const TloNbofParams p = TloNbofParams::initialize(testing::tiny_spec(flags), rng);
    save_checkpoint(dir_ / "a.tlnb", p);
    const Checkpoint c = load_checkpoint(dir_ / "a.tlnb");
    EXPECT_EQ(c.params.values, quantize_f32(p).values) << testing::describe(flags);
    EXPECT_EQ(c.params.spec.deep_features, p.spec.deep_features);
    EXPECT_EQ(c.params.spec.n_regions, p.spec.n_regions);
    EXPECT_EQ(c.params.spec.scaling, p.spec.scaling);
  }
}

}  // namespace
}  // namespace tlnbof
