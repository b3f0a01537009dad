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

#include "report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "run_config.hpp"
#include "tlnbof/errors.hpp"

namespace tlnbof::app {

namespace {

std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view cell =
        line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r')) cell.remove_suffix(1);
    out.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    out.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return out;
}

double parse_cell(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InvalidArgument("report: bad number '" + s + "'");
  return v;
}

bool parse_flag(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw UsageError(where + "expected true|false|1|0, got '" + s + "'");
}

std::string fixed(double v, int digits) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string yes_no(bool b) { return b ? "yes" : "-"; }

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

FoldRow fold_row(std::string fold, const ConfusionMatrix& cm) {
  const MacroPrf prf = macro_prf(cm);
  FoldRow row{std::move(fold), 100.0 * prf.precision, 100.0 * prf.recall, 100.0 * prf.f1, 0.0};
  try {
    row.kappa = cohens_kappa(cm);
  } catch (const UndefinedMetric&) {
    row.kappa = std::numeric_limits<double>::quiet_NaN();
  }
  return row;
}

std::vector<FoldRow> with_summary(std::vector<FoldRow> folds) {
  std::vector<double> p, r, f, k;
  for (const auto& row : folds) {
    p.push_back(row.precision);
    r.push_back(row.recall);
    f.push_back(row.f1);
    k.push_back(row.kappa);
  }
  const MeanStd mp = mean_std(p), mr = mean_std(r), mf = mean_std(f), mk = mean_std(k);
  folds.push_back({"mean", mp.mean, mr.mean, mf.mean, mk.mean});
  folds.push_back({"std", mp.std, mr.std, mf.std, mk.std});
  return folds;
}

std::string fold_report_csv(const std::vector<FoldRow>& rows) {
  std::string out = "fold,precision,recall,f1,kappa\n";
  for (const auto& r : rows) {
    out += r.fold + ',' + format_number(r.precision) + ',' + format_number(r.recall) + ',' + format_number(r.f1) + ',' +
           format_number(r.kappa) + '\n';
  }
  return out;
}

std::vector<FoldRow> parse_fold_report(std::string_view csv) {
  const auto lines = lines_of(csv);
  if (lines.empty() || split_line(lines[0]) != std::vector<std::string>{"fold", "precision", "recall", "f1", "kappa"}) {
    throw InvalidArgument("report: unexpected header");
  }
  std::vector<FoldRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto cells = split_line(lines[i]);
    if (cells.size() != 5) throw InvalidArgument("report: expected 5 columns on line " + std::to_string(i + 1));
    rows.push_back({cells[0], parse_cell(cells[1]), parse_cell(cells[2]), parse_cell(cells[3]), parse_cell(cells[4])});
  }
  return rows;
}

std::vector<GridRow> parse_grid(std::string_view csv, std::string_view origin) {
  const auto lines = lines_of(csv);
  std::size_t first = 0;
  while (first < lines.size() && (lines[first].empty() || lines[first].front() == '#')) ++first;
  if (first == lines.size()) throw UsageError(std::string(origin) + ": empty grid file");
  const auto header = split_line(lines[first]);
  const std::vector<std::string> expected = {"name", "deep_features", "temporal_modeling", "kernel_param_learning",
                                             "adaptive_scaling"};
  const bool has_kernel = header.size() == 6 && header[5] == "kernel";
  if (!(header.size() == 5 || has_kernel) || !std::equal(expected.begin(), expected.end(), header.begin())) {
    throw UsageError(std::string(origin) + ":" + std::to_string(first + 1) +
                     ": header must be name,deep_features,temporal_modeling,kernel_param_learning,"
                     "adaptive_scaling[,kernel]");
  }
  std::vector<GridRow> rows;
  for (std::size_t i = first + 1; i < lines.size(); ++i) {
    if (lines[i].empty() || lines[i].front() == '#') continue;
    const std::string where = std::string(origin) + ":" + std::to_string(i + 1) + ": ";
    const auto cells = split_line(lines[i]);
    if (cells.size() != header.size()) {
      throw UsageError(where + "expected " + std::to_string(header.size()) + " columns");
    }
    GridRow row;
    row.name = cells[0];
    if (row.name.empty()) throw UsageError(where + "empty row name");
    row.flags.deep_features = parse_flag(cells[1], where);
    row.flags.temporal_modeling = parse_flag(cells[2], where);
    row.flags.kernel_param_learning = parse_flag(cells[3], where);
    try {
      row.flags.adaptive_scaling = parse_scaling_mode(cells[4]);
      if (has_kernel) row.flags.kernel = parse_kernel_type(cells[5]);
    } catch (const InvalidArgument& e) {
      throw UsageError(where + e.what());
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw UsageError(std::string(origin) + ": grid has no rows");
  return rows;
}

std::vector<GridRow> load_grid(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read grid file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_grid(text.str(), path.string());
}

std::string grid_csv(const std::vector<GridRow>& rows) {
  std::string out = "name,deep_features,temporal_modeling,kernel_param_learning,adaptive_scaling,kernel\n";
  for (const auto& r : rows) {
    out += r.name + ',' + (r.flags.deep_features ? "true" : "false") + ',' +
           (r.flags.temporal_modeling ? "true" : "false") + ',' + (r.flags.kernel_param_learning ? "true" : "false") +
           ',' + std::string(to_string(r.flags.adaptive_scaling)) + ',' + std::string(to_string(r.flags.kernel)) + '\n';
  }
  return out;
}

std::string ablation_report_csv(const std::vector<AblationRow>& rows) {
  std::string out =
      "name,deep_features,temporal_modeling,kernel_param_learning,adaptive_scaling,kernel,"
      "f1_mean,f1_std,kappa_mean,kappa_std,seeds,status\n";
  for (const auto& r : rows) {
    const auto& f = r.grid.flags;
    out += r.grid.name + ',' + (f.deep_features ? "true" : "false") + ',' + (f.temporal_modeling ? "true" : "false") +
           ',' + (f.kernel_param_learning ? "true" : "false") + ',' + std::string(to_string(f.adaptive_scaling)) + ',' +
           std::string(to_string(f.kernel)) + ',' + format_number(r.f1.mean) + ',' + format_number(r.f1.std) + ',' +
           format_number(r.kappa.mean) + ',' + format_number(r.kappa.std) + ',' + std::to_string(r.completed_seeds) +
           ',' + r.status + '\n';
  }
  return out;
}

std::string aligned_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& row : rows) {
    if (width.size() < row.size()) width.resize(row.size(), 0);
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::string out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string line;
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) line += "  ";
      line += rows[r][c];
      if (c + 1 < rows[r].size()) line.append(width[c] - rows[r][c].size(), ' ');
    }
    out += line + '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c ? 2 : 0);
      out += std::string(total, '-') + '\n';
    }
  }
  return out;
}

std::string fold_table(const std::vector<FoldRow>& rows) {
  std::vector<std::vector<std::string>> cells = {{"fold", "precision", "recall", "f1", "kappa"}};
  for (const auto& r : rows) {
    cells.push_back({r.fold, fixed(r.precision, 2), fixed(r.recall, 2), fixed(r.f1, 2), fixed(r.kappa, 4)});
  }
  return aligned_table(cells);
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::vector<std::vector<std::string>> cells = {
      {"name", "deep", "temporal", "kernel param", "scaling", "macro-F1", "kappa", "status"}};
  for (const auto& r : rows) {
    const auto& f = r.grid.flags;
    cells.push_back({r.grid.name, yes_no(f.deep_features), yes_no(f.temporal_modeling), yes_no(f.kernel_param_learning),
                     std::string(to_string(f.adaptive_scaling)), fixed(r.f1.mean, 2) + " +- " + fixed(r.f1.std, 2),
                     fixed(r.kappa.mean, 4) + " +- " + fixed(r.kappa.std, 4), r.status});
  }
  return aligned_table(cells);
}

}  // namespace tlnbof::app
