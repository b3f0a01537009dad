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

#include "tlnbof/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "tlnbof/errors.hpp"
#include "tlnbof/io_util.hpp"

namespace tlnbof {

std::string_view to_string(LabelMode mode) {
  return mode == LabelMode::kMeanHorizon ? "mean_horizon" : "point_horizon";
}

LabelMode parse_label_mode(std::string_view name) {
  if (name == "mean_horizon") return LabelMode::kMeanHorizon;
  if (name == "point_horizon") return LabelMode::kPointHorizon;
  throw InvalidArgument("unknown label mode '" + std::string(name) + "' (expected mean_horizon|point_horizon)");
}

Direction label_sample(std::span<const double> prices, const LabelConfig& config) {
  if (config.horizon == 0) throw InvalidArgument("label_sample: horizon must be >= 1");
  if (prices.size() < config.horizon + 1) throw InvalidArgument("label_sample: not enough future prices");
  const double current = prices[0];
  if (!(current > 0.0)) throw InvalidArgument("label_sample: current mid-price must be positive");
  double future = 0.0;
  if (config.mode == LabelMode::kMeanHorizon) {
    for (std::size_t k = 1; k <= config.horizon; ++k) future += prices[k];
    future /= static_cast<double>(config.horizon);
  } else {
    future = prices[config.horizon];
  }
  const double r = (future - current) / current;
  if (std::abs(r) < config.threshold) return Direction::kStationary;
  return r > 0.0 ? Direction::kUp : Direction::kDown;
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_number(std::string_view cell, std::size_t line, const std::filesystem::path& path) {
  while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
  while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.remove_suffix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v)) {
    throw FormatError(path.string() + ": non-numeric cell '" + std::string(cell) + "'", FormatError::Position::kLine,
                      line);
  }
  return v;
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

}  // namespace

FeatureStream load_feature_csv(const std::filesystem::path& path, std::size_t feature_dim) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open feature file " + path.string());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw FormatError(path.string() + ": missing header", FormatError::Position::kLine, 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    const auto header = split_commas(line);
    bool ok = header.size() == feature_dim + 2 && header[0] == "day_id" && header[1] == "mid_price";
    for (std::size_t i = 0; ok && i < feature_dim; ++i) ok = header[i + 2] == "f" + std::to_string(i + 1);
    if (!ok) {
      throw FormatError(path.string() + ": header must be day_id,mid_price,f1..f" + std::to_string(feature_dim) +
                            " (found " + std::to_string(header.size()) + " columns)",
                        FormatError::Position::kLine, 1);
    }
  }
  FeatureStream stream;
  std::vector<double> values;
  bool have_day = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != feature_dim + 2) {
      throw FormatError(path.string() + ": expected " + std::to_string(feature_dim + 2) + " columns, found " +
                            std::to_string(cells.size()),
                        FormatError::Position::kLine, line_no);
    }
    const double day = parse_number(cells[0], line_no, path);
    if (day != std::floor(day))
      throw FormatError(path.string() + ": day_id must be an integer", FormatError::Position::kLine, line_no);
    const auto day_id = static_cast<std::int64_t>(day);
    if (!have_day) {
      stream.day_id = day_id;
      have_day = true;
    } else if (day_id != stream.day_id) {
      throw FormatError(
          path.string() + ": file mixes day " + std::to_string(stream.day_id) + " and day " + std::to_string(day_id),
          FormatError::Position::kLine, line_no);
    }
    const double mid = parse_number(cells[1], line_no, path);
    if (!(mid > 0.0))
      throw FormatError(path.string() + ": mid_price must be positive", FormatError::Position::kLine, line_no);
    stream.mid_prices.push_back(mid);
    for (std::size_t i = 0; i < feature_dim; ++i) values.push_back(parse_number(cells[i + 2], line_no, path));
  }
  if (!stream.mid_prices.empty()) {
    stream.features = Tensor({stream.mid_prices.size(), feature_dim}, std::move(values));
  }
  return stream;
}

void write_feature_csv(const std::filesystem::path& path, const FeatureStream& stream) {
  const std::size_t dim = stream.feature_dim();
  std::string out = "day_id,mid_price";
  for (std::size_t i = 0; i < dim; ++i) out += ",f" + std::to_string(i + 1);
  out += '\n';
  for (std::size_t r = 0; r < stream.rows(); ++r) {
    out += std::to_string(stream.day_id);
    out += ',';
    out += format_number(stream.mid_prices[r]);
    for (std::size_t i = 0; i < dim; ++i) {
      out += ',';
      out += format_number(stream.features[r * dim + i]);
    }
    out += '\n';
  }
  atomic_write(path, out);
}

std::vector<FeatureStream> load_feature_dir(const std::filesystem::path& dir, std::size_t feature_dim) {
  if (!std::filesystem::is_directory(dir)) throw InvalidArgument("data directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<FeatureStream> streams;
  for (const auto& f : files) streams.push_back(load_feature_csv(f, feature_dim));
  std::stable_sort(streams.begin(), streams.end(),
                   [](const FeatureStream& a, const FeatureStream& b) { return a.day_id < b.day_id; });
  for (std::size_t i = 1; i < streams.size(); ++i) {
    if (streams[i].day_id == streams[i - 1].day_id) {
      throw InvalidArgument("data directory holds day " + std::to_string(streams[i].day_id) + " more than once");
    }
  }
  return streams;
}

std::vector<FeatureSeries> windowize(const FeatureStream& stream, std::size_t window, const LabelConfig& labels) {
  if (window == 0) throw InvalidArgument("windowize: window must be >= 1");
  std::vector<FeatureSeries> out;
  const std::size_t rows = stream.rows();
  if (rows < window + labels.horizon) return out;
  const std::size_t dim = stream.feature_dim();
  for (std::size_t t = window - 1; t < rows - labels.horizon; ++t) {
    FeatureSeries s;
    s.features = Tensor({window, dim});
    std::copy_n(stream.features.raw() + (t + 1 - window) * dim, window * dim, s.features.raw());
    s.label = static_cast<std::size_t>(
        label_sample(std::span<const double>(stream.mid_prices).subspan(t, labels.horizon + 1), labels));
    s.day_id = stream.day_id;
    s.end_index = t;
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<FoldSpec> anchored_folds(std::vector<std::int64_t> day_ids) {
  std::sort(day_ids.begin(), day_ids.end());
  day_ids.erase(std::unique(day_ids.begin(), day_ids.end()), day_ids.end());
  if (day_ids.size() < 2) throw InvalidArgument("anchored_folds: at least 2 distinct days are required");
  std::vector<FoldSpec> folds;
  for (std::size_t k = 1; k < day_ids.size(); ++k) {
    FoldSpec f;
    f.train_days.assign(day_ids.begin(), day_ids.begin() + static_cast<std::ptrdiff_t>(k));
    f.test_day = day_ids[k];
    folds.push_back(std::move(f));
  }
  return folds;
}

}  // namespace tlnbof
