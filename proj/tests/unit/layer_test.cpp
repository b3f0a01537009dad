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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "test_support.hpp"
#include "tlnbof/errors.hpp"
#include "tlnbof/gradcheck.hpp"
#include "tlnbof/tlonbof_layer.hpp"

namespace tlnbof {
namespace {

using testing::random_tensor;

ScalingParams scaling_of(double c_u, double c_s) {
  ScalingParams s;
  s.log_c_u = std::log(c_u);
  s.log_c_s = std::log(c_s);
  return s;
}

KernelConfig logistic(double alpha = 1.0, double beta = 0.0) {
  KernelConfig k;
  k.params.alpha = alpha;
  k.params.beta = beta;
  return k;
}

double relative(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

TEST(Segment, FifteenStepsThreeRegions) {
  const RegionPartition p = segment(15, 3);
  ASSERT_EQ(p.size(), 3u);
  EXPECT_EQ(p.ranges[0], (RegionRange{0, 5}));
  EXPECT_EQ(p.ranges[1], (RegionRange{5, 10}));
  EXPECT_EQ(p.ranges[2], (RegionRange{10, 15}));
  EXPECT_EQ(p.histogram_segment(0), (RegionRange{10, 15}));  // short first
}

TEST(Segment, RemainderGoesToLongRegion) {
  const RegionPartition p = segment(16, 3);
  EXPECT_EQ(p.histogram_segment(0).size(), 5u);
  EXPECT_EQ(p.histogram_segment(1).size(), 5u);
  EXPECT_EQ(p.histogram_segment(2).size(), 6u);
  const RegionPartition m = segment(3, 3);
  for (const auto& r : m.ranges) EXPECT_EQ(r.size(), 1u);
}

TEST(Segment, CoversSequenceForManyShapes) {
  for (std::size_t n = 1; n < 40; ++n) {
    for (std::size_t k = 1; k <= n; ++k) {
      const RegionPartition p = segment(n, k);
      std::size_t expected_begin = 0;
      for (std::size_t r = 0; r < k; ++r) {
        EXPECT_EQ(p.ranges[r].begin, expected_begin);
        expected_begin = p.ranges[r].end;
        if (r > 0) EXPECT_EQ(p.ranges[r].size(), n / k);
      }
      EXPECT_EQ(expected_begin, n);
    }
  }
}

TEST(Segment, TooShortOrNoRegions) {
  EXPECT_THROW(segment(2, 3), InvalidArgument);
  EXPECT_THROW(segment(5, 0), InvalidArgument);
}

TEST(Segment, NestedRegionsGrowFromNewest) {
  const RegionPartition p = segment(16, 3, true);
  EXPECT_TRUE(p.nested);
  EXPECT_EQ(p.histogram_segment(0), (RegionRange{11, 16}));
  EXPECT_EQ(p.histogram_segment(1), (RegionRange{6, 16}));
  EXPECT_EQ(p.histogram_segment(2), (RegionRange{0, 16}));
}

TEST(Scaling, InitialValuesAndClamp) {
  const ScalingParams s = ScalingParams::initial(256, 15.0, true);
  EXPECT_NEAR(s.c_s(), 256.0, 1e-12);
  EXPECT_NEAR(s.c_u(), 15.0, 1e-12);
  ScalingParams tiny;
  tiny.log_c_u = -100.0;
  EXPECT_EQ(tiny.c_u(), kMinScale);
  EXPECT_EQ(scale_log_derivative(-100.0), 0.0);
  EXPECT_NEAR(scale_log_derivative(std::log(3.0)), 3.0, 1e-12);
  EXPECT_EQ(ScalingParams::unit().c_u(), 1.0);
}

TEST(SoftAssign, SingleCodewordGetsFullMass) {
  Rng rng(1);
  const Tensor x = random_tensor({4, 3}, rng);
  const Codebook cb{random_tensor({1, 3}, rng)};
  const Tensor u = soft_assign(x, cb, logistic(), scaling_of(7.5, 1.0));
  for (double v : u.data()) EXPECT_NEAR(v, 7.5, 1e-12);
}

TEST(SoftAssign, EqualSimilaritiesSplitEvenly) {
  const Tensor x({1, 2}, std::vector<double>{1.0, 1.0});
  // Both codewords have x.v = 1.
  const Codebook cb{Tensor({2, 2}, std::vector<double>{1.0, 0.0, 0.0, 1.0})};
  const Tensor u = soft_assign(x, cb, logistic(), scaling_of(4.0, 1.0));
  EXPECT_NEAR(u[0], 2.0, 1e-12);
  EXPECT_NEAR(u[1], 2.0, 1e-12);
}

TEST(SoftAssign, MatchesTermByTermOracle) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({5, 4}, rng);
    const Tensor v = random_tensor({3, 4}, rng);
    const Tensor u = soft_assign(x, Codebook{v}, logistic(), scaling_of(15.0, 1.0));
    for (std::size_t j = 0; j < 5; ++j) {
      double k[3], total = 0.0;
      for (std::size_t c = 0; c < 3; ++c) {
        double dot = 0.0;
        for (std::size_t i = 0; i < 4; ++i) dot += x.at({j, i}) * v.at({c, i});
        k[c] = 1.0 / (1.0 + std::exp(-2.0 * dot));
        total += k[c];
      }
      for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(u.at({j, c}), 15.0 * k[c] / total, 1e-12);
    }
  }
}

TEST(SoftAssign, GaussianUnderflowIsNumericFailure) {
  const Tensor x({2, 1}, std::vector<double>{0.0, 1e3});
  KernelConfig k;
  k.type = KernelType::kGaussian;
  k.params.sigma = 0.01;
  const Codebook cb{Tensor({2, 1}, std::vector<double>{0.0, 0.1})};
  try {
    soft_assign(x, cb, k, ScalingParams::unit());
    FAIL() << "expected NumericFailure";
  } catch (const NumericFailure& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos) << e.what();
  }
}

TEST(SoftAssign, ZeroFeatureRowIsSafeWithLogisticKernel) {
  const Tensor x({1, 3});
  Rng rng(3);
  const Codebook cb{random_tensor({4, 3}, rng)};
  const Tensor u = soft_assign(x, cb, logistic(1.0, 0.4), scaling_of(2.0, 1.0));
  for (double v : u.data()) EXPECT_NEAR(v, 0.5, 1e-12);
}

TEST(Accumulate, SingleRowAndUniformRows) {
  Tensor one({1, 3}, std::vector<double>{0.2, 0.5, 0.3});
  const auto s = accumulate(one, scaling_of(1.0, 4.0), 1);
  EXPECT_NEAR(s[0], 0.8, 1e-12);
  EXPECT_NEAR(s[1], 2.0, 1e-12);
  Tensor uniform({6, 4}, 15.0 / 4);
  for (double v : accumulate(uniform, scaling_of(15.0, 256.0), 6)) EXPECT_NEAR(v, 256.0 * 15.0 / 4, 1e-9);
}

TEST(Accumulate, ColumnMeanOracle) {
  Rng rng(4);
  const Tensor x = random_tensor({5, 6}, rng);
  const Tensor v = random_tensor({4, 6}, rng);
  const ScalingParams sc = scaling_of(15.0, 256.0);
  const Tensor u = soft_assign(x, Codebook{v}, logistic(), sc);
  const auto s = accumulate(u, sc, 5);
  double mass = 0.0;
  for (std::size_t c = 0; c < 4; ++c) {
    double col = 0.0;
    for (std::size_t j = 0; j < 5; ++j) col += u.at({j, c});
    EXPECT_NEAR(s[c], 256.0 * col / 5.0, 1e-9);
    mass += s[c];
  }
  EXPECT_LT(relative(mass, 256.0 * 15.0), 1e-9);
}

TEST(Accumulate, RejectsEmptyOrMismatchedRegion) {
  Tensor u({2, 3});
  EXPECT_THROW(accumulate(u, ScalingParams::unit(), 0), InvalidArgument);
  EXPECT_THROW(accumulate(u, ScalingParams::unit(), 3), InvalidArgument);
}

TEST(LayerForward, OutputLengthIndependentOfSequenceLength) {
  Rng rng(5);
  const Codebook cb{random_tensor({256, 8}, rng, -0.2, 0.2)};
  const auto sc = ScalingParams::initial(256, 15.0, true);
  const auto h15 = forward(random_tensor({15, 8}, rng), cb, logistic(), sc, 3);
  const auto h30 = forward(random_tensor({30, 8}, rng), cb, logistic(), sc, 3);
  EXPECT_EQ(h15.values.size(), 768u);
  EXPECT_EQ(h30.values.size(), 768u);
}

TEST(LayerForward, SegmentsAreRegionAccumulations) {
  Rng rng(6);
  const Tensor x = random_tensor({16, 3}, rng);
  const Codebook cb{random_tensor({5, 3}, rng)};
  const auto sc = scaling_of(3.0, 2.0);
  const auto h = forward(x, cb, logistic(), sc, 3);
  const Tensor u = soft_assign(x, cb, logistic(), sc);
  const RegionPartition p = segment(16, 3);
  for (std::size_t r = 0; r < 3; ++r) {
    const RegionRange range = p.histogram_segment(r);
    Tensor rows({range.size(), 5});
    std::copy_n(u.raw() + range.begin * 5, range.size() * 5, rows.raw());
    const auto expected = accumulate(rows, sc, range.size());
    const auto seg = h.segment(r);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_NEAR(seg[c], expected[c], 1e-12);
  }
}

TEST(LayerForward, MassInvariants) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng.below(20);
    const Tensor x = random_tensor({n, 4}, rng);
    const Codebook cb{random_tensor({1 + rng.below(8), 4}, rng)};
    const double c_u = rng.uniform(0.5, 20.0), c_s = rng.uniform(0.5, 300.0);
    LayerContext ctx;
    const auto h = forward(x, cb, logistic(), scaling_of(c_u, c_s), 3, &ctx);
    for (std::size_t j = 0; j < n; ++j) {
      const auto row = ctx.assignments.row(j);
      EXPECT_LT(relative(std::accumulate(row.begin(), row.end(), 0.0), c_u), 1e-9);
    }
    for (std::size_t r = 0; r < 3; ++r) {
      const auto seg = h.segment(r);
      EXPECT_LT(relative(std::accumulate(seg.begin(), seg.end(), 0.0), c_u * c_s), 1e-9);
    }
  }
}

TEST(LayerForward, WithinRegionPermutationIsBitIdentical) {
  Rng rng(8);
  const Tensor x = random_tensor({15, 4}, rng);
  const Codebook cb{random_tensor({6, 4}, rng)};
  const auto sc = scaling_of(15.0, 6.0);
  const auto base = forward(x, cb, logistic(), sc, 3);
  Tensor permuted = x;
  // Reverse the mid region [5, 10).
  for (std::size_t j = 0; j < 5; ++j) {
    std::copy_n(x.raw() + (9 - j) * 4, 4, permuted.raw() + (5 + j) * 4);
  }
  EXPECT_EQ(forward(permuted, cb, logistic(), sc, 3).values, base.values);
}

TEST(LayerForward, CrossRegionSwapChangesOutput) {
  Rng rng(9);
  const Tensor x = random_tensor({15, 4}, rng);
  const Codebook cb{random_tensor({6, 4}, rng)};
  const auto base = forward(x, cb, logistic(), ScalingParams::unit(), 3);
  Tensor swapped = x;
  std::copy_n(x.raw() + 0 * 4, 4, swapped.raw() + 14 * 4);
  std::copy_n(x.raw() + 14 * 4, 4, swapped.raw() + 0 * 4);
  EXPECT_NE(forward(swapped, cb, logistic(), ScalingParams::unit(), 3).values, base.values);
}

TEST(LayerForward, BatchedMatchesPerSample) {
  Rng rng(10);
  const Codebook cb{random_tensor({4, 3}, rng)};
  const auto sc = scaling_of(2.0, 3.0);
  const Tensor a = random_tensor({6, 3}, rng), b = random_tensor({9, 3}, rng);
  Tensor stacked({15, 3});
  std::copy_n(a.raw(), a.size(), stacked.raw());
  std::copy_n(b.raw(), b.size(), stacked.raw() + a.size());
  const std::size_t offsets[] = {0, 6, 15};
  LayerContext ctx;
  const Tensor h = TloNbofLayer({3, false}).forward(stacked, offsets, cb, logistic(), sc, ctx);
  const auto ha = forward(a, cb, logistic(), sc, 3), hb = forward(b, cb, logistic(), sc, 3);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(h[i], ha.values[i]);
    EXPECT_EQ(h[12 + i], hb.values[i]);
  }
}

TEST(LayerForward, ClassicalBofDegeneracy) {
  Rng rng(11);
  KernelConfig k;
  k.type = KernelType::kGaussian;
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor x = random_tensor({7, 3}, rng);
    const Tensor v = random_tensor({5, 3}, rng);
    k.params.sigma = rng.uniform(0.3, 2.0);
    const auto h = forward(x, Codebook{v}, k, ScalingParams::unit(), 2);
    const auto expected = testing::direct_bof(x, v, k.params.sigma, 2);
    ASSERT_EQ(h.values.size(), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(h.values[i], expected[i], 1e-12);
  }
}

TEST(LayerBackward, ZeroUpstreamGivesZeroGradients) {
  Rng rng(12);
  const Codebook cb{random_tensor({4, 3}, rng)};
  LayerContext ctx;
  const auto h = forward(random_tensor({6, 3}, rng), cb, logistic(), scaling_of(2.0, 3.0), 3, &ctx);
  const std::vector<double> zero(h.values.size(), 0.0);
  const LayerGrads g = backward(ctx, zero, cb, logistic());
  EXPECT_EQ(g.features.frobenius_norm(), 0.0);
  EXPECT_EQ(g.codebook.frobenius_norm(), 0.0);
  EXPECT_EQ(g.c_u, 0.0);
  EXPECT_EQ(g.c_s, 0.0);
  EXPECT_EQ(g.alpha, 0.0);
  EXPECT_EQ(g.beta, 0.0);
}

TEST(LayerBackward, ScaleGradientIsLinear) {
  Rng rng(13);
  const Codebook cb{random_tensor({4, 3}, rng)};
  LayerContext ctx;
  const double c_s = 3.0;
  const auto h = forward(random_tensor({6, 3}, rng), cb, logistic(), scaling_of(2.0, c_s), 3, &ctx);
  std::vector<double> up(h.values.size());
  double expected = 0.0;
  for (std::size_t i = 0; i < up.size(); ++i) {
    up[i] = rng.uniform(-1.0, 1.0);
    expected += up[i] * h.values[i] / c_s;
  }
  EXPECT_NEAR(backward(ctx, up, cb, logistic()).c_s, expected, 1e-12);
}

TEST(LayerBackward, MissingContextIsInvalidState) {
  Rng rng(14);
  const Codebook cb{random_tensor({4, 3}, rng)};
  LayerContext empty;
  const std::vector<double> up(12, 1.0);
  EXPECT_THROW(backward(empty, up, cb, logistic()), InvalidState);
}

// Every gradient group of the layer against central differences.
class LayerFiniteDifference : public ::testing::TestWithParam<std::tuple<KernelType, bool>> {};

TEST_P(LayerFiniteDifference, AllGroups) {
  const auto [type, nested] = GetParam();
  Rng rng(100 + static_cast<int>(type) * 2 + nested);
  for (int trial = 0; trial < 10; ++trial) {
    const Tensor x = random_tensor({6, 3}, rng);
    const Tensor v = random_tensor({4, 3}, rng);
    KernelConfig k;
    k.type = type;
    k.params = {rng.uniform(0.5, 1.5), rng.uniform(-0.5, 0.5), rng.uniform(0.7, 1.5)};
    ScalingParams sc = scaling_of(rng.uniform(1.0, 8.0), rng.uniform(1.0, 8.0));
    std::vector<double> up(12);
    for (double& u : up) u = rng.uniform(-1.0, 1.0);

    const auto loss = [&](const Tensor& xx, const Tensor& vv, const KernelConfig& kk, const ScalingParams& ss) {
      const auto h = forward(xx, Codebook{vv}, kk, ss, 3, nullptr, nested);
      double l = 0.0;
      for (std::size_t i = 0; i < up.size(); ++i) l += up[i] * h.values[i];
      return l;
    };
    LayerContext ctx;
    forward(x, Codebook{v}, k, sc, 3, &ctx, nested);
    const LayerGrads g = backward(ctx, up, Codebook{v}, k);

    EXPECT_LT(relative_error(g.features, finite_diff_grad([&](const Tensor& t) { return loss(t, v, k, sc); }, x)),
              1e-4);
    EXPECT_LT(relative_error(g.codebook, finite_diff_grad([&](const Tensor& t) { return loss(x, t, k, sc); }, v)),
              1e-4);
    const Tensor kp({3}, std::vector<double>{k.params.alpha, k.params.beta, k.params.sigma});
    const Tensor kernel_fd = finite_diff_grad(
        [&](const Tensor& t) {
          KernelConfig kk = k;
          kk.params = {t[0], t[1], t[2]};
          return loss(x, v, kk, sc);
        },
        kp);
    EXPECT_LT(relative_error(Tensor({3}, std::vector<double>{g.alpha, g.beta, g.sigma}), kernel_fd), 1e-4);
    const Tensor logs({2}, std::vector<double>{sc.log_c_u, sc.log_c_s});
    const Tensor scale_fd = finite_diff_grad(
        [&](const Tensor& t) {
          ScalingParams ss = sc;
          ss.log_c_u = t[0];
          ss.log_c_s = t[1];
          return loss(x, v, k, ss);
        },
        logs);
    const Tensor scale_analytic({2}, std::vector<double>{g.c_u * sc.c_u(), g.c_s * sc.c_s()});
    EXPECT_LT(relative_error(scale_analytic, scale_fd), 1e-4);
  }
}

INSTANTIATE_TEST_SUITE_P(KernelsAndSegmentations, LayerFiniteDifference,
                         ::testing::Combine(::testing::Values(KernelType::kLogistic, KernelType::kGaussian),
                                            ::testing::Bool()),
                         [](const auto& info) {
                           return std::string(to_string(std::get<0>(info.param))) +
                                  (std::get<1>(info.param) ? "_nested" : "_disjoint");
                         });

}  // namespace
}  // namespace tlnbof
