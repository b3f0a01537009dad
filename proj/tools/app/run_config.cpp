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

#include "run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace tlnbof::app {

std::string_view to_string(FoldMode mode) { return mode == FoldMode::kAnchored ? "anchored" : "single"; }

FoldMode parse_fold_mode(std::string_view name) {
  if (name == "anchored") return FoldMode::kAnchored;
  if (name == "single") return FoldMode::kSingle;
  throw UsageError("unknown fold mode '" + std::string(name) + "' (expected anchored|single)");
}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw UsageError("expected a non-negative integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw UsageError("expected a finite number, got '" + std::string(s) + "'");
  }
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw UsageError("expected true|false, got '" + std::string(s) + "'");
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename E>
E parse_enum(std::string_view s, E (*parse)(std::string_view)) {
  try {
    return parse(s);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
}

struct Entry {
  std::string_view key;
  std::string_view doc;
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, std::string_view)> set;
};

template <typename T>
Entry size_entry(std::string_view key, std::string_view doc, T RunConfig::* field) {
  return {key, doc, [field](const RunConfig& c) { return std::to_string(c.*field); },
          [field](RunConfig& c, std::string_view v) { c.*field = static_cast<T>(parse_u64(v)); }};
}

Entry double_entry(std::string_view key, std::string_view doc, double RunConfig::* field) {
  return {key, doc, [field](const RunConfig& c) { return format_double(c.*field); },
          [field](RunConfig& c, std::string_view v) { c.*field = parse_double(v); }};
}

Entry bool_entry(std::string_view key, std::string_view doc, bool RunConfig::* field) {
  return {key, doc, [field](const RunConfig& c) { return std::string(c.*field ? "true" : "false"); },
          [field](RunConfig& c, std::string_view v) { c.*field = parse_bool(v); }};
}

Entry string_entry(std::string_view key, std::string_view doc, std::string RunConfig::* field) {
  return {key, doc, [field](const RunConfig& c) { return c.*field; },
          [field](RunConfig& c, std::string_view v) { c.*field = std::string(v); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      size_entry("seed", "training seed (initialization and batch sampling)", &RunConfig::seed),
      size_entry("batch_size", "samples per balanced batch", &RunConfig::batch_size),
      size_entry("epochs", "passes of ceil(samples / batch_size) steps", &RunConfig::epochs),
      size_entry("max_steps", "stop early after this many steps; 0 = no limit", &RunConfig::max_steps),
      double_entry("lr", "Adam learning rate", &RunConfig::lr),
      double_entry("beta1", "Adam first-moment decay", &RunConfig::beta1),
      double_entry("beta2", "Adam second-moment decay", &RunConfig::beta2),
      double_entry("eps", "Adam epsilon", &RunConfig::eps),
      size_entry("threads", "gradient worker threads; 0 = TLNB_THREADS or 1", &RunConfig::threads),
      bool_entry("deterministic", "fixed shard layout and reduction order", &RunConfig::deterministic),
      {"model", "tlonbof | cnn_gap", [](const RunConfig& c) { return std::string(to_string(c.model)); },
       [](RunConfig& c, std::string_view v) { c.model = parse_enum(v, &parse_architecture); }},
      bool_entry("deep_features", "convolutional feature extractor before pooling", &RunConfig::deep_features),
      bool_entry("temporal_modeling", "one histogram per temporal region; false = a single region",
                 &RunConfig::temporal_modeling),
      size_entry("n_regions", "temporal regions when temporal_modeling is on", &RunConfig::n_regions),
      bool_entry("nested_regions", "regions grow from the newest timestep instead of tiling",
                 &RunConfig::nested_regions),
      bool_entry("kernel_param_learning", "train the logistic kernel's alpha and beta",
                 &RunConfig::kernel_param_learning),
      {"adaptive_scaling", "off (c_u = c_s = 1) | fixed | learned",
       [](const RunConfig& c) { return std::string(to_string(c.adaptive_scaling)); },
       [](RunConfig& c, std::string_view v) { c.adaptive_scaling = parse_enum(v, &parse_scaling_mode); }},
      {"kernel", "logistic | gaussian", [](const RunConfig& c) { return std::string(to_string(c.kernel)); },
       [](RunConfig& c, std::string_view v) { c.kernel = parse_enum(v, &parse_kernel_type); }},
      double_entry("sigma", "gaussian width; 0 = 0.1 x mean pairwise codeword distance", &RunConfig::sigma),
      size_entry("n_codewords", "codebook size", &RunConfig::n_codewords),
      size_entry("n_filters", "convolution filters", &RunConfig::n_filters),
      size_entry("conv_kernel", "convolution kernel size (odd)", &RunConfig::conv_kernel),
      size_entry("hidden", "units of the first fully connected layer", &RunConfig::hidden),
      size_entry("feature_dim", "columns f1..fN of the feature CSV files", &RunConfig::feature_dim),
      size_entry("window", "feature vectors per sample", &RunConfig::window),
      size_entry("horizon", "future prices used for the label", &RunConfig::horizon),
      double_entry("threshold", "relative change below which a sample is stationary", &RunConfig::threshold),
      {"label_mode", "mean_horizon | point_horizon",
       [](const RunConfig& c) { return std::string(to_string(c.label_mode)); },
       [](RunConfig& c, std::string_view v) { c.label_mode = parse_enum(v, &parse_label_mode); }},
      string_entry("data_dir", "directory of per-day feature CSV files", &RunConfig::data_dir),
      string_entry("output_dir", "directory for outputs written without an explicit path", &RunConfig::output_dir),
      {"folds", "anchored | single", [](const RunConfig& c) { return std::string(to_string(c.folds)); },
       [](RunConfig& c, std::string_view v) { c.folds = parse_fold_mode(v); }},
      size_entry("max_folds", "evaluate only the first N anchored folds; 0 = all", &RunConfig::max_folds),
      {"ablate_seeds", "comma-separated seeds for each ablation cell",
       [](const RunConfig& c) {
         std::string out;
         for (std::size_t i = 0; i < c.ablate_seeds.size(); ++i)
           out += (i ? "," : "") + std::to_string(c.ablate_seeds[i]);
         return out;
       },
       [](RunConfig& c, std::string_view v) {
         std::vector<std::uint64_t> seeds;
         std::size_t start = 0;
         while (start <= v.size()) {
           const std::size_t comma = std::min(v.find(',', start), v.size());
           seeds.push_back(parse_u64(trim(v.substr(start, comma - start))));
           start = comma + 1;
         }
         if (seeds.empty()) throw UsageError("ablate_seeds must list at least one seed");
         c.ablate_seeds = std::move(seeds);
       }},
  };
  return table;
}

}  // namespace

const std::vector<std::string_view>& RunConfig::keys() {
  static const std::vector<std::string_view> out = [] {
    std::vector<std::string_view> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return out;
}

void RunConfig::set(std::string_view key, std::string_view value) {
  for (const auto& e : entries()) {
    if (e.key == key) {
      e.set(*this, value);
      return;
    }
  }
  throw UsageError("unknown config key '" + std::string(key) + "'");
}

RunConfig RunConfig::parse(std::string_view text, std::string_view origin) {
  RunConfig config;
  std::vector<std::string> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    const std::string where = std::string(origin) + ":" + std::to_string(line_no) + ": ";
    if (eq == std::string_view::npos) throw UsageError(where + "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) throw UsageError(where + "duplicate key '" + key + "'");
    seen.push_back(key);
    try {
      config.set(key, trim(line.substr(eq + 1)));
    } catch (const UsageError& e) {
      throw UsageError(where + e.what());
    }
  }
  return config;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse(text.str(), path.string());
}

std::string RunConfig::dump() const {
  std::string out = "# tlnbof run configuration\n";
  for (const auto& e : entries()) {
    out += "\n# ";
    out += e.doc;
    out += '\n';
    out += e.key;
    out += '=';
    out += e.get(*this);
    out += '\n';
  }
  return out;
}

ModelSpec RunConfig::model_spec() const {
  ModelSpec spec;
  spec.architecture = model;
  spec.input_dim = feature_dim;
  spec.n_filters = n_filters;
  spec.conv_kernel = conv_kernel;
  spec.n_codewords = n_codewords;
  spec.hidden = hidden;
  spec.nested_regions = nested_regions;
  spec.sigma = sigma;
  spec.mean_length = static_cast<double>(window);
  AblationFlags flags;
  flags.deep_features = deep_features;
  flags.temporal_modeling = temporal_modeling;
  flags.kernel_param_learning = kernel_param_learning;
  flags.adaptive_scaling = adaptive_scaling;
  flags.kernel = kernel;
  spec = flags.apply(spec, n_regions);
  try {
    spec.validate();
  } catch (const InvalidArgument& e) {
    throw UsageError(std::string("invalid model configuration: ") + e.what());
  }
  return spec;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.model = model_spec();
  t.adam.lr = lr;
  t.adam.beta1 = beta1;
  t.adam.beta2 = beta2;
  t.adam.eps = eps;
  if (batch_size == 0) throw UsageError("batch_size must be >= 1");
  t.batch_size = batch_size;
  t.epochs = epochs;
  t.seed = seed;
  t.max_steps = max_steps;
  t.threads = threads;
  t.deterministic = deterministic;
  apply_environment(t);
  return t;
}

LabelConfig RunConfig::label_config() const {
  if (horizon == 0) throw UsageError("horizon must be >= 1");
  if (window == 0) throw UsageError("window must be >= 1");
  LabelConfig l;
  l.horizon = horizon;
  l.threshold = threshold;
  l.mode = label_mode;
  return l;
}

void apply_environment(TrainConfig& config) {
  std::size_t cap = 0;
  if (const char* env = std::getenv("TLNB_THREADS"); env != nullptr && *env != '\0') {
    try {
      cap = static_cast<std::size_t>(parse_u64(env));
    } catch (const UsageError&) {
      throw UsageError(std::string("TLNB_THREADS must be a non-negative integer, got '") + env + "'");
    }
  }
  if (config.threads == 0) {
    config.threads = cap > 0 ? cap : 1;
  } else if (cap > 0) {
    config.threads = std::min(config.threads, cap);
  }
  if (const char* env = std::getenv("TLNB_DETERMINISTIC"); env != nullptr && std::string_view(env) == "1") {
    config.deterministic = true;
  }
}

}  // namespace tlnbof::app
