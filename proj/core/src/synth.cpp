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

#include "tlnbof/synth.hpp"

#include <cmath>

#include "tlnbof/errors.hpp"
#include "tlnbof/rng.hpp"

namespace tlnbof {

std::vector<std::size_t> designated_features(const SynthConfig& config) {
  std::vector<std::size_t> out;
  const std::size_t stride = config.feature_dim / config.n_signal;
  for (std::size_t i = 0; i < config.n_signal; ++i) out.push_back(i * stride);
  return out;
}

namespace {

int next_regime(int current, Rng& rng) {
  // Uniform over the two other regimes.
  const int shift = 1 + static_cast<int>(rng.below(2));
  return ((current + 1 + shift) % 3) - 1;
}

std::size_t regime_duration(const SynthConfig& c, Rng& rng) {
  const double p = 1.0 / (1.0 + c.mean_extra_duration);
  std::size_t extra = 0;
  while (rng.uniform() >= p) ++extra;
  return c.min_duration + extra;
}

}  // namespace

std::vector<FeatureStream> synth_generate(const SynthConfig& c) {
  if (c.n_days == 0 || c.rows_per_day == 0 || c.feature_dim == 0 || c.horizon == 0) {
    throw InvalidArgument("synth_generate: sizes must be positive");
  }
  if (c.n_signal == 0 || c.n_signal > c.feature_dim) throw InvalidArgument("synth_generate: bad n_signal");
  if (!(c.separation >= 0.0) || !(c.initial_price > 0.0)) throw InvalidArgument("synth_generate: bad parameters");

  const std::vector<std::size_t> signal = designated_features(c);
  std::vector<double> sign(c.n_signal);
  {
    Rng sign_rng = Rng::derive(c.seed, 0);
    for (double& s : sign) s = sign_rng.below(2) == 0 ? -1.0 : 1.0;
  }
  const double weight_total = static_cast<double>(c.horizon * (c.horizon + 1)) / 2.0;

  std::vector<FeatureStream> days;
  for (std::size_t d = 0; d < c.n_days; ++d) {
    Rng regime_rng = Rng::derive(c.seed, 1, d);
    Rng price_rng = Rng::derive(c.seed, 2, d);
    Rng feature_rng = Rng::derive(c.seed, 3, d);

    const std::size_t rows = c.rows_per_day;
    std::vector<int> regime(rows + c.horizon);
    int current = static_cast<int>(regime_rng.below(3)) - 1;
    std::size_t left = regime_duration(c, regime_rng);
    for (auto& r : regime) {
      if (left == 0) {
        current = next_regime(current, regime_rng);
        left = regime_duration(c, regime_rng);
      }
      r = current;
      --left;
    }

    FeatureStream s;
    s.day_id = static_cast<std::int64_t>(d + 1);
    s.mid_prices.resize(rows);
    double log_price = std::log(c.initial_price);
    for (std::size_t t = 0; t < rows; ++t) {
      if (t > 0) log_price += c.drift * regime[t] + c.price_noise * price_rng.normal();
      s.mid_prices[t] = std::exp(log_price);
    }

    s.features = Tensor({rows, c.feature_dim});
    for (std::size_t t = 0; t < rows; ++t) {
      double e = 0.0;
      for (std::size_t i = 1; i <= c.horizon && t + i < regime.size(); ++i) {
        e += static_cast<double>(c.horizon + 1 - i) * regime[t + i];
      }
      e /= weight_total;
      double* row = s.features.raw() + t * c.feature_dim;
      for (std::size_t f = 0; f < c.feature_dim; ++f) row[f] = feature_rng.normal();
      for (std::size_t j = 0; j < signal.size(); ++j) row[signal[j]] += c.separation * c.signal_gain * sign[j] * e;
    }
    days.push_back(std::move(s));
  }
  return days;
}

std::vector<FeatureStream> synth_generate(std::size_t n_days, std::size_t rows_per_day, std::uint64_t seed,
                                          double separation) {
  SynthConfig c;
  c.n_days = n_days;
  c.rows_per_day = rows_per_day;
  c.seed = seed;
  c.separation = separation;
  return synth_generate(c);
}

}  // namespace tlnbof
