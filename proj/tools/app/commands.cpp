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

#include "commands.hpp"

#include <cmath>
#include <cstdio>
#include <exception>
#include <ostream>

#include "CLI11.hpp"
#include "tlnbof/checkpoint.hpp"
#include "tlnbof/errors.hpp"
#include "tlnbof/io_util.hpp"
#include "tlnbof/synth.hpp"
#include "tlnbof/training.hpp"

namespace tlnbof::app {

namespace {

std::filesystem::path side_file(const std::filesystem::path& path, const std::string& extension) {
  std::filesystem::path p = path;
  if (p.extension() == extension) return p.string() + extension;
  return p.replace_extension(extension);
}

RunConfig load_config(const std::filesystem::path& path) { return path.empty() ? RunConfig{} : RunConfig::load(path); }

std::filesystem::path data_dir(const std::filesystem::path& flag, const RunConfig& config) {
  if (!flag.empty()) return flag;
  if (!config.data_dir.empty()) return config.data_dir;
  throw UsageError("no data directory given (use --data or data_dir in the config)");
}

// Maps exceptions onto the exit-code contract.
template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

std::string history_csv(const TrainHistory& h) {
  std::string out = "step,loss,grad_norm_conv\n";
  for (std::size_t i = 0; i < h.loss.size(); ++i) {
    out += std::to_string(i + 1) + ',' + format_number(h.loss[i]) + ',' + format_number(h.grad_norm_conv[i]) + '\n';
  }
  return out;
}

std::vector<FeatureSeries> select_days(const std::vector<DaySamples>& days, std::span<const std::int64_t> ids) {
  std::vector<FeatureSeries> out;
  for (const auto& d : days) {
    if (std::find(ids.begin(), ids.end(), d.day_id) != ids.end()) {
      out.insert(out.end(), d.samples.begin(), d.samples.end());
    }
  }
  return out;
}

std::vector<std::size_t> truths(std::span<const FeatureSeries> data) {
  std::vector<std::size_t> t;
  t.reserve(data.size());
  for (const auto& s : data) t.push_back(s.label);
  return t;
}

void write_outputs(const std::filesystem::path& report, const std::string& csv, const std::string& table,
                   std::ostream& out) {
  if (report.has_parent_path()) std::filesystem::create_directories(report.parent_path());
  atomic_write(report, csv);
  atomic_write(side_file(report, ".txt"), table);
  out << table;
}

}  // namespace

std::vector<DaySamples> load_days(const std::filesystem::path& dir, const RunConfig& config) {
  if (!std::filesystem::is_directory(dir)) throw UsageError("data directory not found: " + dir.string());
  const LabelConfig labels = config.label_config();
  std::vector<DaySamples> days;
  for (auto& stream : load_feature_dir(dir, config.feature_dim)) {
    days.push_back({stream.day_id, windowize(stream, config.window, labels)});
  }
  if (days.empty()) throw UsageError("no .csv feature files in " + dir.string());
  return days;
}

std::vector<FeatureSeries> concat_days(const std::vector<DaySamples>& days) {
  std::vector<FeatureSeries> out;
  for (const auto& d : days) out.insert(out.end(), d.samples.begin(), d.samples.end());
  return out;
}

int cmd_synth(const SynthArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.out.empty()) throw UsageError("--out is required");
    if (args.days == 0 || args.rows_per_day == 0) throw UsageError("--days and --rows-per-day must be >= 1");
    if (!(args.separation >= 0.0) || !std::isfinite(args.separation)) throw UsageError("--separation must be >= 0");
    if (args.feature_dim == 0) throw UsageError("--feature-dim must be >= 1");
    SynthConfig c;
    c.n_days = args.days;
    c.rows_per_day = args.rows_per_day;
    c.seed = args.seed;
    c.separation = args.separation;
    c.feature_dim = args.feature_dim;
    c.n_signal = std::min(c.n_signal, c.feature_dim);
    std::vector<FeatureStream> days;
    try {
      days = synth_generate(c);
    } catch (const InvalidArgument& e) {
      throw UsageError(e.what());
    }
    std::filesystem::create_directories(args.out);
    for (const auto& d : days) {
      char name[32];
      std::snprintf(name, sizeof(name), "day_%03lld.csv", static_cast<long long>(d.day_id));
      write_feature_csv(args.out / name, d);
    }
    out << "wrote " << days.size() << " day files to " << args.out.string() << '\n';
    return kExitOk;
  });
}

int cmd_train(const TrainArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.out.empty()) throw UsageError("--out is required");
    RunConfig config = load_config(args.config);
    if (args.seed) config.seed = *args.seed;
    const TrainConfig train_config = config.train_config();
    const auto days = load_days(data_dir(args.data, config), config);
    const std::vector<FeatureSeries> data = concat_days(days);
    if (data.empty()) throw UsageError("the data directory yields no samples for window/horizon settings");

    const std::filesystem::path history_path =
        args.history.empty() ? side_file(args.out, ".history.csv") : args.history;
    if (args.out.has_parent_path()) std::filesystem::create_directories(args.out.parent_path());
    if (history_path.has_parent_path()) std::filesystem::create_directories(history_path.parent_path());

    TrainHistory history;
    Trainer trainer(train_config, data);
    out << "training on " << data.size() << " samples from " << days.size() << " days, " << trainer.total_steps()
        << " steps\n";
    try {
      while (!trainer.done()) {
        const StepResult r = trainer.step();
        history.loss.push_back(r.loss);
        history.grad_norm_conv.push_back(r.grad_norm_conv);
        if (trainer.steps_per_epoch() > 0 && trainer.state().step % trainer.steps_per_epoch() == 0) {
          out << "epoch " << trainer.state().step / trainer.steps_per_epoch() << " loss " << r.loss << '\n';
        }
      }
    } catch (const TrainingAborted& e) {
      atomic_write(history_path, history_csv(history));
      std::filesystem::path last_good = args.out.string() + ".lastgood";
      try {
        save_checkpoint(last_good, e.last_good(), train_config.seed);
        err << "error: " << e.what() << "; last good state saved to " << last_good.string() << '\n';
      } catch (const InvalidArgument& store) {
        // Optimizer moments can leave the f32 range before the parameters do.
        save_checkpoint(last_good, e.last_good().params);
        err << "error: " << e.what() << "; last good parameters saved to " << last_good.string()
            << " without optimizer state (" << store.what() << ")\n";
      }
      return kExitFailure;
    }
    save_checkpoint(args.out, trainer.state(), train_config.seed);
    atomic_write(history_path, history_csv(history));
    const ConfusionMatrix cm = evaluate(trainer.state().params, data);
    const FoldRow row = fold_row("train", cm);
    out << "train macro-F1 " << row.f1 << " kappa " << row.kappa << '\n';
    out << "checkpoint " << args.out.string() << ", history " << history_path.string() << '\n';
    return kExitOk;
  });
}

int cmd_eval(const EvalArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.model.empty() || args.report.empty()) throw UsageError("--model and --report are required");
    const RunConfig config = load_config(args.config);
    const FoldMode mode = args.folds.empty() ? config.folds : parse_fold_mode(args.folds);
    if (!std::filesystem::exists(args.model)) throw UsageError("model file not found: " + args.model.string());
    const Checkpoint checkpoint = load_checkpoint(args.model);
    RunConfig data_config = config;
    data_config.feature_dim = checkpoint.params.spec.input_dim;
    const auto days = load_days(data_dir(args.data, config), data_config);

    std::vector<FoldRow> rows;
    std::string predictions = "fold,day_id,end_index,label,predicted\n";
    auto record = [&](const std::string& fold, std::span<const FeatureSeries> test,
                      const std::vector<std::size_t>& predicted) {
      for (std::size_t i = 0; i < test.size(); ++i) {
        predictions += fold + ',' + std::to_string(test[i].day_id) + ',' + std::to_string(test[i].end_index) + ',' +
                       std::to_string(test[i].label) + ',' + std::to_string(predicted[i]) + '\n';
      }
      rows.push_back(fold_row(fold, confusion(truths(test), predicted, checkpoint.params.spec.n_classes)));
    };

    if (mode == FoldMode::kSingle) {
      const auto data = concat_days(days);
      if (data.empty()) throw UsageError("the data directory yields no samples");
      record("1", data, predict(checkpoint.params, data));
    } else {
      std::vector<std::int64_t> ids;
      for (const auto& d : days) ids.push_back(d.day_id);
      if (ids.size() < 2) throw UsageError("anchored evaluation needs at least 2 days of data");
      // Each fold trains a fresh model of the checkpoint's architecture on the
      // days before the test day.
      TrainConfig train_config = config.train_config();
      train_config.model = checkpoint.params.spec;
      const auto folds = anchored_folds(ids);
      const std::size_t n = config.max_folds == 0 ? folds.size() : std::min(config.max_folds, folds.size());
      for (std::size_t k = 0; k < n; ++k) {
        const auto train_data = select_days(days, folds[k].train_days);
        const std::int64_t test_id[] = {folds[k].test_day};
        const auto test_data = select_days(days, test_id);
        if (train_data.empty() || test_data.empty()) {
          throw UsageError("fold " + std::to_string(k + 1) + " has no training or test samples");
        }
        const TrainResult trained = train(train_config, train_data);
        const auto predicted = predict(trained.state.params, test_data);
        record(std::to_string(k + 1), test_data, predicted);
        out << "fold " << k + 1 << ": trained on " << train_data.size() << " samples, tested on day "
            << folds[k].test_day << '\n';
      }
    }
    rows = with_summary(std::move(rows));
    if (!args.predictions.empty()) atomic_write(args.predictions, predictions);
    write_outputs(args.report, fold_report_csv(rows), fold_table(rows), out);
    return kExitOk;
  });
}

int cmd_ablate(const AblateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.grid.empty() || args.report.empty()) throw UsageError("--grid and --report are required");
    const RunConfig config = load_config(args.config);
    const TrainConfig base = config.train_config();
    const auto grid = load_grid(args.grid);
    const auto days = load_days(data_dir(args.data, config), config);
    if (days.size() < 2) throw UsageError("ablation needs at least 2 days (the last day is the test day)");
    std::vector<FeatureSeries> train_data;
    for (std::size_t d = 0; d + 1 < days.size(); ++d) {
      train_data.insert(train_data.end(), days[d].samples.begin(), days[d].samples.end());
    }
    const auto& test_data = days.back().samples;
    if (train_data.empty() || test_data.empty()) throw UsageError("ablation split has no training or test samples");

    std::vector<AblationRow> rows;
    for (const auto& cell : grid) {
      AblationRow row;
      row.grid = cell;
      std::vector<double> f1, kappa;
      for (const std::uint64_t seed : config.ablate_seeds) {
        try {
          TrainConfig tc = base;
          tc.seed = seed;
          tc.model = cell.flags.apply(base.model, config.n_regions);
          tc.model.validate();
          const TrainResult trained = train(tc, train_data);
          const FoldRow r = fold_row(cell.name, evaluate(trained.state.params, test_data));
          f1.push_back(r.f1);
          kappa.push_back(r.kappa);
        } catch (const std::exception& e) {
          row.status = "failed: seed " + std::to_string(seed) + ": " + e.what();
          for (char& c : row.status) {
            if (c == ',' || c == '\n') c = ';';
          }
          break;
        }
      }
      row.completed_seeds = f1.size();
      row.f1 = mean_std(f1);
      row.kappa = mean_std(kappa);
      out << cell.name << ": " << row.status << '\n';
      rows.push_back(std::move(row));
    }
    write_outputs(args.report, ablation_report_csv(rows), ablation_table(rows), out);
    return kExitOk;
  });
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Temporal logistic neural bag-of-features for time-series classification", "tlnbof"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "write synthetic per-day feature CSV files");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--days", synth.days, "number of days")->capture_default_str();
  s->add_option("--rows-per-day", synth.rows_per_day, "rows per day")->capture_default_str();
  s->add_option("--seed", synth.seed, "generator seed")->capture_default_str();
  s->add_option("--separation", synth.separation, "signal strength; 0 = no signal")->capture_default_str();
  s->add_option("--feature-dim", synth.feature_dim, "features per row")->capture_default_str();

  TrainArgs train_args;
  std::uint64_t seed = 0;
  auto* t = app.add_subcommand("train", "train a model and write a checkpoint and history CSV");
  t->add_option("--config", train_args.config, "run configuration file");
  t->add_option("--data", train_args.data, "directory of per-day feature CSV files");
  t->add_option("--out", train_args.out, "checkpoint path")->required();
  t->add_option("--history", train_args.history, "history CSV path (default: <out>.history.csv)");
  auto* seed_opt = t->add_option("--seed", seed, "override the config seed");

  EvalArgs eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint with anchored or single folds");
  e->add_option("--model", eval.model, "checkpoint path")->required();
  e->add_option("--config", eval.config, "run configuration (training settings for anchored folds)");
  e->add_option("--data", eval.data, "directory of per-day feature CSV files");
  e->add_option("--folds", eval.folds, "anchored | single")->check(CLI::IsMember({"anchored", "single"}));
  e->add_option("--report", eval.report, "report CSV path")->required();
  e->add_option("--predictions", eval.predictions, "per-sample predictions CSV path");

  AblateArgs ablate;
  auto* a = app.add_subcommand("ablate", "run an ablation grid and write a report");
  a->add_option("--config", ablate.config, "run configuration file");
  a->add_option("--data", ablate.data, "directory of per-day feature CSV files");
  a->add_option("--grid", ablate.grid, "grid CSV")->required();
  a->add_option("--report", ablate.report, "report CSV path")->required();

  bool dump_defaults = false;
  std::filesystem::path normalize;
  auto* c = app.add_subcommand("config", "print configuration files");
  auto* dump_flag = c->add_flag("--dump-defaults", dump_defaults, "print the default configuration");
  c->add_option("--load", normalize, "load a configuration and print it in canonical form")->excludes(dump_flag);

  std::vector<const char*> raw;
  for (const auto& arg : argv) raw.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(raw.size()), raw.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "error: " << ex.what() << '\n';
    return kExitUsage;
  }

  if (s->parsed()) return cmd_synth(synth, out, err);
  if (t->parsed()) {
    if (*seed_opt) train_args.seed = seed;
    return cmd_train(train_args, out, err);
  }
  if (e->parsed()) return cmd_eval(eval, out, err);
  if (a->parsed()) return cmd_ablate(ablate, out, err);
  return guarded(err, [&] {
    if (!normalize.empty()) {
      out << RunConfig::load(normalize).dump();
    } else if (dump_defaults) {
      out << RunConfig{}.dump();
    } else {
      throw UsageError("config: pass --dump-defaults or --load PATH");
    }
    return kExitOk;
  });
}

}  // namespace tlnbof::app
