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

// Acceptance checks. Prints one line per criterion and exits nonzero if any
// required criterion fails. Criterion 10 runs only when TLNB_FI2010_DIR names a
// directory of per-day feature CSV files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "test_support.hpp"
#include "tlnbof/checkpoint.hpp"
#include "tlnbof/data.hpp"
#include "tlnbof/errors.hpp"
#include "tlnbof/metrics.hpp"
#include "tlnbof/network.hpp"
#include "tlnbof/rng.hpp"
#include "tlnbof/synth.hpp"
#include "tlnbof/tlonbof_layer.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof {
namespace {

using testing::random_tensor;

enum class Outcome { kPass, kFail, kSkip };

struct Result {
  Outcome outcome = Outcome::kFail;
  std::string detail;
};

Result pass(std::string detail) { return {Outcome::kPass, std::move(detail)}; }
Result fail(std::string detail) { return {Outcome::kFail, std::move(detail)}; }
Result check(bool ok, std::string detail) { return {ok ? Outcome::kPass : Outcome::kFail, std::move(detail)}; }

std::string fmt(const char* format, double a, double b = 0.0, double c = 0.0, double d = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, format, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double relative(double got, double want) { return std::abs(got - want) / std::max(std::abs(want), 1e-300); }

Result gradient_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(101);
  double worst = 0.0;
  std::string worst_where;
  std::size_t instances = 0;
  const auto rows = testing::ablation_grid_rows();
  for (const auto& base : rows) {
    for (KernelType kernel : {KernelType::kLogistic, KernelType::kGaussian}) {
      AblationFlags flags = base;
      flags.kernel = kernel;
      const ModelSpec spec = testing::tiny_spec(flags);
      for (int i = 0; i < 50; ++i) {
        const TloNbofParams params = testing::perturbed_params(spec, rng);
        const std::vector<Tensor> samples = {random_tensor({6, 5}, rng), random_tensor({6, 5}, rng)};
        const std::vector<std::size_t> labels = {rng.below(3), rng.below(3)};
        for (const auto& [group, err] : testing::model_gradient_errors(params, samples, labels)) {
          if (!(err <= worst)) {
            worst = err;
            worst_where = testing::describe(flags) + " " + group;
          }
        }
        ++instances;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  return check(worst < 1e-4 && elapsed < 60.0,
               std::to_string(instances) + " instances over " + std::to_string(rows.size()) +
                   " grid rows x 2 kernels; worst relative error " + fmt("%.2e", worst) + " (" + worst_where + "); " +
                   fmt("%.1f s", elapsed));
}

KernelConfig random_kernel(Rng& rng) {
  KernelConfig k;
  if (rng.below(2) == 0) {
    k.type = KernelType::kLogistic;
    k.params.alpha = rng.uniform(0.2, 3.0);
    k.params.beta = rng.uniform(-1.0, 1.0);
  } else {
    k.type = KernelType::kGaussian;
    k.params.sigma = rng.uniform(0.5, 3.0);
  }
  return k;
}

ScalingParams random_scaling(Rng& rng) {
  ScalingParams s;
  s.log_c_u = std::log(rng.uniform(0.1, 50.0));
  s.log_c_s = std::log(rng.uniform(0.1, 500.0));
  return s;
}

Result normalization_invariants() {
  Rng rng(102);
  double worst_row = 0.0, worst_segment = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t regions = 1 + rng.below(4);
    const std::size_t n = regions + rng.below(30);
    const std::size_t dim = 1 + rng.below(8);
    const Tensor x = random_tensor({n, dim}, rng);
    const Codebook cb{random_tensor({1 + rng.below(16), dim}, rng)};
    const KernelConfig k = random_kernel(rng);
    const ScalingParams s = random_scaling(rng);
    LayerContext ctx;
    const TemporalHistogram h = forward(x, cb, k, s, regions, &ctx, rng.below(2) == 1);
    for (std::size_t j = 0; j < n; ++j) {
      const auto row = ctx.assignments.row(j);
      worst_row = std::max(worst_row, relative(std::accumulate(row.begin(), row.end(), 0.0), s.c_u()));
    }
    for (std::size_t r = 0; r < regions; ++r) {
      const auto seg = h.segment(r);
      worst_segment =
          std::max(worst_segment, relative(std::accumulate(seg.begin(), seg.end(), 0.0), s.c_u() * s.c_s()));
    }
  }
  return check(worst_row <= 1e-9 && worst_segment <= 1e-9, "1000 passes; worst row-sum error " +
                                                               fmt("%.1e", worst_row) + ", worst segment-sum error " +
                                                               fmt("%.1e", worst_segment));
}

Result temporal_semantics() {
  Rng rng(103);
  std::size_t identical = 0, changed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t regions = 2 + rng.below(3);
    const std::size_t n = 2 * regions + rng.below(25);
    const std::size_t dim = 2 + rng.below(6);
    const Tensor x = random_tensor({n, dim}, rng);
    const Codebook cb{random_tensor({2 + rng.below(10), dim}, rng)};
    const KernelConfig k = random_kernel(rng);
    const ScalingParams s = random_scaling(rng);
    const RegionPartition part = segment(n, regions);
    const auto base = forward(x, cb, k, s, regions).values;

    // Shuffle the rows of one region.
    const RegionRange range = part.ranges[rng.below(part.size())];
    std::vector<std::size_t> perm(range.size());
    std::iota(perm.begin(), perm.end(), range.begin);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    Tensor permuted = x;
    for (std::size_t i = 0; i < perm.size(); ++i) {
      std::copy_n(x.raw() + perm[i] * dim, dim, permuted.raw() + (range.begin + i) * dim);
    }
    if (forward(permuted, cb, k, s, regions).values == base) ++identical;

    // Swap one row of each of two different regions.
    const std::size_t ra = rng.below(part.size());
    std::size_t rb = rng.below(part.size() - 1);
    if (rb >= ra) ++rb;
    const std::size_t a = part.ranges[ra].begin + rng.below(part.ranges[ra].size());
    const std::size_t b = part.ranges[rb].begin + rng.below(part.ranges[rb].size());
    Tensor swapped = x;
    std::copy_n(x.raw() + a * dim, dim, swapped.raw() + b * dim);
    std::copy_n(x.raw() + b * dim, dim, swapped.raw() + a * dim);
    if (forward(swapped, cb, k, s, regions).values != base) ++changed;
  }
  return check(identical == 100 && changed == 100, std::to_string(identical) + "/100 permutations bit-identical, " +
                                                       std::to_string(changed) +
                                                       "/100 cross-region swaps changed the histogram");
}

Result classical_bof() {
  Rng rng(104);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t regions = 1 + rng.below(3);
    const std::size_t n = regions + rng.below(20);
    const std::size_t dim = 1 + rng.below(6);
    const Tensor x = random_tensor({n, dim}, rng);
    const Tensor v = random_tensor({1 + rng.below(10), dim}, rng);
    KernelConfig k;
    k.type = KernelType::kGaussian;
    k.params.sigma = rng.uniform(0.3, 3.0);
    const auto got = forward(x, Codebook{v}, k, ScalingParams::unit(), regions).values;
    const auto want = testing::direct_bof(x, v, k.params.sigma, regions);
    if (got.size() != want.size()) return fail("histogram length mismatch");
    for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return check(worst <= 1e-12, "100 instances; worst absolute deviation " + fmt("%.1e", worst));
}

struct Scores {
  double f1 = 0.0;
  double kappa = 0.0;
};

Scores train_and_test(double separation, std::size_t test_rows) {
  const auto split = testing::synth_split(6, 1000, 7, separation, test_rows);
  TrainConfig cfg;
  const TrainResult r = train(cfg, split.train);
  const ConfusionMatrix cm = evaluate(r.state.params, split.test);
  return {macro_prf(cm).f1, cohens_kappa(cm)};
}

Result learnability() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto split = testing::synth_split(6, 1000, 7, 1.0);
  if (split.train.size() < 5000 && split.train.size() + split.test.size() < 5000) {
    return fail("synthetic set too small");
  }
  const Scores signal = train_and_test(1.0, 0);
  const double t_signal = seconds_since(t0);
  const Scores noise = train_and_test(0.0, 3000);
  const double elapsed = seconds_since(t0);
  const bool ok =
      signal.f1 >= 0.85 && signal.kappa >= 0.7 && noise.kappa >= -0.05 && noise.kappa <= 0.05 && t_signal < 600.0;
  return check(ok, std::to_string(split.train.size() + split.test.size()) + " samples; separation 1: F1 " +
                       fmt("%.3f kappa %.3f (%.0f s)", signal.f1, signal.kappa, t_signal) + "; separation 0: kappa " +
                       fmt("%.3f; total %.0f s", noise.kappa, elapsed));
}

Result adaptive_scaling() {
  const auto split = testing::synth_split(6, 1000, 7, 1.0);
  struct Run {
    double grad = 0.0;
    double loss500 = 0.0;
  };
  auto run = [&](ScalingMode mode) {
    TrainConfig cfg;
    cfg.max_steps = 500;
    cfg.model.scaling = mode;
    const TrainResult r = train(cfg, split.train);
    Run out;
    for (std::size_t i = 0; i < 200; ++i) out.grad += r.history.grad_norm_conv[i] / 200.0;
    out.loss500 = r.history.loss[499];
    return out;
  };
  const Run off = run(ScalingMode::kOff);
  const Run on = run(ScalingMode::kLearned);
  const double ratio = on.grad / off.grad;
  return check(ratio >= 10.0 && on.loss500 < off.loss500,
               "mean conv gradient norm over 200 steps " +
                   fmt("%.4g (scaled) vs %.4g (unit), ratio %.1f", on.grad, off.grad, ratio) + "; step-500 loss " +
                   fmt("%.4g vs %.4g", on.loss500, off.loss500));
}

Result metric_oracles() {
  Rng rng(107);
  double worst = 0.0;
  auto rows_of = [](const ConfusionMatrix& cm) {
    std::vector<std::vector<double>> m(3, std::vector<double>(3));
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) m[i][j] = static_cast<double>(cm.at(i, j));
    }
    return m;
  };
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint64_t> counts(9);
    for (auto& c : counts) c = 1 + rng.below(500);
    const ConfusionMatrix cm(3, counts);
    const auto o = testing::brute_force_metrics(rows_of(cm));
    const MacroPrf prf = macro_prf(cm);
    worst = std::max({worst, std::abs(prf.precision - o.precision), std::abs(prf.recall - o.recall),
                      std::abs(prf.f1 - o.f1), std::abs(cohens_kappa(cm) - o.kappa)});
  }
  double worst_diag = 0.0, worst_indep = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    ConfusionMatrix diag(3);
    for (std::size_t k = 0; k < 3; ++k) diag.at(k, k) = 1 + rng.below(100);
    worst_diag = std::max(worst_diag, std::abs(cohens_kappa(diag) - 1.0));
    std::vector<std::uint64_t> a(3), b(3), counts(9);
    for (auto& v : a) v = 1 + rng.below(30);
    for (auto& v : b) v = 1 + rng.below(30);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) counts[i * 3 + j] = a[i] * b[j];
    }
    worst_indep = std::max(worst_indep, std::abs(cohens_kappa(ConfusionMatrix(3, counts))));
  }
  return check(worst <= 1e-12 && worst_diag <= 1e-12 && worst_indep <= 1e-12,
               "1000 matrices; worst deviation " + fmt("%.1e", worst) + "; |kappa - 1| on diagonals " +
                   fmt("%.1e", worst_diag) + "; |kappa| on outer products " + fmt("%.1e", worst_indep));
}

Result protocol_fidelity() {
  std::vector<std::int64_t> days(10);
  std::iota(days.begin(), days.end(), 1);
  const auto folds = anchored_folds(days);
  bool ok = folds.size() == 9;
  for (std::size_t k = 0; ok && k < folds.size(); ++k) {
    const auto& f = folds[k];
    ok = f.train_days.size() == k + 1 && f.test_day == static_cast<std::int64_t>(k + 2);
    for (std::int64_t d : f.train_days) ok = ok && d < f.test_day;
  }
  Rng rng(108);
  std::size_t matched = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t rows = 1 + rng.below(200);
    const std::size_t window = 1 + rng.below(30);
    LabelConfig labels;
    labels.horizon = 1 + rng.below(15);
    FeatureStream s;
    s.day_id = 1;
    s.features = random_tensor({rows, 2}, rng);
    for (std::size_t t = 0; t < rows; ++t) s.mid_prices.push_back(100.0 + rng.uniform(-0.1, 0.1));
    std::size_t brute = 0;
    for (std::size_t t = 0; t < rows; ++t) brute += (t + 1 >= window && t + labels.horizon < rows) ? 1 : 0;
    if (windowize(s, window, labels).size() == brute) ++matched;
  }
  return check(ok && matched == 50, std::to_string(folds.size()) + " folds over 10 days" +
                                        (ok ? ", each trains strictly before its test day" : ", fold layout wrong") +
                                        "; windowize count matched " + std::to_string(matched) + "/50 lengths");
}

Result determinism_and_persistence() {
  const auto split = testing::synth_split(3, 300, 9, 1.0);
  TrainConfig cfg;
  cfg.model.n_filters = 32;
  cfg.model.n_codewords = 32;
  cfg.model.hidden = 64;
  cfg.batch_size = 64;
  cfg.max_steps = 30;
  cfg.seed = 42;
  const TrainResult a = train(cfg, split.train);
  const TrainResult b = train(cfg, split.train);
  TrainConfig threaded = cfg;
  threaded.threads = 4;
  const TrainResult c = train(threaded, split.train);
  const bool identical = a.history.loss == b.history.loss && a.state.params.values == b.state.params.values &&
                         c.state.params.values == a.state.params.values;

  const auto path = std::filesystem::temp_directory_path() / "tlnbof_acceptance_resume.tlnb";
  Trainer first(cfg, split.train);
  for (int i = 0; i < 10; ++i) first.step();
  save_checkpoint(path, first.state(), cfg.seed);
  const Checkpoint ck = load_checkpoint(path);
  std::filesystem::remove(path);
  if (!ck.adam) return fail("checkpoint lost the optimizer state");
  Trainer resumed(cfg, split.train, TrainingState{ck.params, *ck.adam, ck.step});
  Trainer reference(cfg, split.train, quantize_f32(first.state()));
  const StepResult ra = resumed.step(), rb = reference.step();
  const bool resume_ok = ra.loss == rb.loss && resumed.state().params.values == reference.state().params.values &&
                         resumed.state().adam.m == reference.state().adam.m &&
                         resumed.state().adam.v == reference.state().adam.v && resumed.state().step == 11;
  return check(identical && resume_ok,
               std::string(identical ? "repeat and 4-thread runs bit-identical" : "runs differ") +
                   (resume_ok ? "; resumed step matches the f32-quantized run exactly" : "; resume mismatch"));
}

Result fi2010() {
  const char* dir = std::getenv("TLNB_FI2010_DIR");
  if (dir == nullptr || *dir == '\0') return {Outcome::kSkip, "set TLNB_FI2010_DIR to a directory of day CSV files"};
  const auto streams = load_feature_dir(dir);
  std::vector<std::int64_t> ids;
  std::vector<std::vector<FeatureSeries>> samples;
  for (const auto& s : streams) {
    ids.push_back(s.day_id);
    samples.push_back(windowize(s));
  }
  auto day = [&](std::int64_t id) -> const std::vector<FeatureSeries>& {
    return samples[std::find(ids.begin(), ids.end(), id) - ids.begin()];
  };
  std::vector<double> f1s, kappas;
  for (const FoldSpec& fold : anchored_folds(ids)) {
    std::vector<FeatureSeries> train_set;
    for (std::int64_t d : fold.train_days) train_set.insert(train_set.end(), day(d).begin(), day(d).end());
    TrainConfig cfg;
    const TrainResult r = train(cfg, train_set);
    const ConfusionMatrix cm = evaluate(r.state.params, day(fold.test_day));
    f1s.push_back(100.0 * macro_prf(cm).f1);
    kappas.push_back(cohens_kappa(cm));
    std::printf("  fold %zu: F1 %.2f kappa %.4f\n", f1s.size(), f1s.back(), kappas.back());
  }
  const MeanStd f1 = mean_std(f1s), kappa = mean_std(kappas);
  return check(f1.mean >= 48.0 && f1.mean <= 58.0 && kappa.mean >= 0.23 && kappa.mean <= 0.36,
               std::to_string(f1s.size()) + " folds; F1 " +
                   fmt("%.2f +- %.2f, kappa %.4f +- %.4f", f1.mean, f1.std, kappa.mean, kappa.std));
}

struct Criterion {
  int id;
  const char* name;
  bool required;
  std::function<Result()> run;
};

}  // namespace
}  // namespace tlnbof

int main(int argc, char** argv) {
  using namespace tlnbof;
  const std::vector<Criterion> criteria = {
      {1, "gradient exactness", true, gradient_exactness},
      {2, "normalization invariants", true, normalization_invariants},
      {3, "temporal semantics", true, temporal_semantics},
      {4, "classical BoF degeneracy", true, classical_bof},
      {5, "learnability", true, learnability},
      {6, "adaptive scaling effect", true, adaptive_scaling},
      {7, "metric oracles", true, metric_oracles},
      {8, "protocol fidelity", true, protocol_fidelity},
      {9, "determinism and persistence", true, determinism_and_persistence},
      {10, "FI-2010 reference run (optional)", false, fi2010},
  };
  // Optional arguments select criteria by number.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Result r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {Outcome::kFail, std::string("exception: ") + e.what()};
    }
    const char* tag = r.outcome == Outcome::kPass ? "PASS" : (r.outcome == Outcome::kSkip ? "SKIP" : "FAIL");
    std::printf("[%s] %2d %s: %s\n", tag, c.id, c.name, r.detail.c_str());
    std::fflush(stdout);
    if (r.outcome == Outcome::kFail && c.required) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
