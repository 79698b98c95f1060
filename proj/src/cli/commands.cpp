/*
 * Copyright 2026 The AutoCF Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "autocf/cli/commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/fmt/fmt.h>
#include <spdlog/spdlog.h>

#include "autocf/cfmodel/baselines.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/data/ingest.hpp"
#include "autocf/errors.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

namespace {

std::vector<std::string> SplitList(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string piece;
  while (std::getline(in, piece, sep)) {
    if (!piece.empty()) out.push_back(piece);
  }
  return out;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out << text;
  if (!out) throw FormatError("write failed for " + path.string());
}

std::string Fixed(double v) { return fmt::format("{:.6f}", v); }

struct TrainFlags {
  std::string task = "rating";
  std::optional<std::size_t> max_epochs;
  std::optional<std::size_t> batch_size;
  std::optional<std::size_t> patience;
  std::optional<std::size_t> negatives;
  std::string metric;
  std::uint64_t seed = 0;

  void Add(CLI::App* app) {
    app->add_option("--task", task, "rating or ranking")
        ->check(CLI::IsMember({"rating", "ranking"}));
    app->add_option("--max-epochs", max_epochs, "epoch budget per model");
    app->add_option("--batch-size", batch_size, "mini-batch size");
    app->add_option("--patience", patience, "early-stop patience (epochs)");
    app->add_option("--negatives", negatives, "negatives per positive");
    app->add_option("--metric", metric, "validation metric");
    app->add_option("--seed", seed, "random seed");
  }

  TrainSpec Spec() const {
    TrainSpec spec = TrainSpec::For(ParseTask(task));
    if (max_epochs) spec.max_epochs = *max_epochs;
    if (batch_size) spec.batch_size = *batch_size;
    if (patience) spec.patience = *patience;
    if (negatives) spec.negatives_per_positive = *negatives;
    if (!metric.empty()) spec.validation_metric = ParseMetric(metric, &spec.top_k);
    spec.seed = seed;
    spec.Validate();
    return spec;
  }
};

std::string MetricsCell(const std::map<std::string, double>& m) {
  std::string out;
  for (const auto& [k, v] : m) {
    out += (out.empty() ? "" : " ") + k + "=" + Fixed(v);
  }
  return out;
}

InteractionDataset LoadForTask(const std::filesystem::path& path, Task task) {
  InteractionDataset ds = LoadSnapshot(path);
  if (task == Task::kRanking && ds.form() == Form::kExplicit) {
    spdlog::info("converting explicit snapshot to implicit for ranking");
    ds = ToImplicit(ds);
  }
  return ds;
}

int CmdPrepare(const std::string& input, const std::string& format,
               const std::string& delimiter, int user_col, int item_col,
               int rating_col, int ts_col, int header_lines,
               std::size_t min_count, const std::string& filter_side,
               const std::string& ratios,
               bool implicit, std::uint64_t seed, const std::string& out) {
  FormatSpec spec = format == "ml1m" ? FormatSpec::MovieLens1M()
                                     : FormatSpec::MovieLens100K();
  if (!delimiter.empty()) spec.delimiter = delimiter == "\\t" ? "\t" : delimiter;
  if (user_col >= 0) spec.user_column = user_col;
  if (item_col >= 0) spec.item_column = item_col;
  if (rating_col >= -1) spec.rating_column = rating_col;
  if (ts_col >= -1) spec.timestamp_column = ts_col;
  if (header_lines >= 0) spec.header_lines = header_lines;
  const IngestResult raw = Ingest(input, spec);
  if (raw.malformed > 0) {
    spdlog::warn("{} malformed line(s) skipped", raw.malformed);
  }
  const FilterSide side = filter_side == "users"   ? FilterSide::kUsers
                          : filter_side == "items" ? FilterSide::kItems
                                                   : FilterSide::kBoth;
  const auto filtered = FilterMinCount(raw.records, min_count, side);
  Rng rng(seed);
  InteractionDataset ds = Split(filtered, ParseRatios(ratios), rng);
  if (implicit && ds.form() == Form::kExplicit) ds = ToImplicit(ds);
  SaveSnapshot(ds, out);
  const DatasetStats s = ds.Stats();
  std::cout << fmt::format(
      "users={} items={} records={} train={} validation={} test={} "
      "density={:.5f} form={}\n",
      s.users, s.items, s.records, s.train, s.validation, s.test, s.density,
      FormName(ds.form()));
  return 0;
}

int CmdTrain(const std::string& data, const std::string& config_text,
             const TrainFlags& flags, const std::string& dims,
             const std::string& lrs, const std::string& out) {
  const TrainSpec spec = flags.Spec();
  const SearchSpace space(ParseSizeList(dims), ParseRealList(lrs));
  const ModelConfig config = space.Parse(config_text);
  const InteractionDataset ds = LoadForTask(data, spec.task);
  const TrainReport report = TrainConfig(config, space, ds, spec);
  if (!out.empty()) WriteText(out, TrainReportToJson(report).dump(2) + "\n");
  std::cout << "config\tvalid_" << report.metric << "\ttest\tepochs\n";
  std::cout << report.config << '\t' << Fixed(report.best_validation) << '\t'
            << MetricsCell(report.test_metrics) << '\t' << report.epochs_run
            << '\n';
  spdlog::info("trained in {:.1f}s", report.seconds);
  return 0;
}

int CmdBaselines(const std::string& data, const TrainFlags& flags,
                 const std::string& dims, const std::string& lrs,
                 const std::string& models, const std::string& out_dir) {
  const TrainSpec spec = flags.Spec();
  const InteractionDataset ds = LoadForTask(data, spec.task);
  const auto dim_list = ParseSizeList(dims);
  const auto lr_list = ParseRealList(lrs);
  std::vector<Baseline> chosen;
  if (models.empty()) {
    chosen = SingleBaselines();
    for (const Baseline& b : FusedBaselines()) chosen.push_back(b);
  } else {
    for (const std::string& name : SplitList(models, ',')) {
      chosen.push_back(FindBaseline(name));
    }
  }
  const std::vector<std::string> test_cols =
      spec.task == Task::kRating
          ? std::vector<std::string>{"rmse", "mae"}
          : std::vector<std::string>{MetricName(Metric::kRecall, spec.top_k),
                                     MetricName(Metric::kNdcg, spec.top_k)};
  const std::string metric = MetricName(spec.validation_metric, spec.top_k);
  std::string csv = "model,d,lr,valid_" + metric;
  for (const auto& c : test_cols) csv += ",test_" + c;
  csv += ",failed\n";
  std::string table = fmt::format("{:<10} {:>4} {:>8} {:>12}", "model", "d",
                                  "lr", "valid_" + metric);
  for (const auto& c : test_cols) table += fmt::format(" {:>12}", "test_" + c);
  table += "\n";
  for (const Baseline& b : chosen) {
    std::optional<TrainReport> best;
    std::size_t best_dim = 0;
    double best_lr = 0.0;
    for (std::size_t d : dim_list) {
      for (double lr : lr_list) {
        TrainReport r = TrainBaseline(b, d, lr, ds, spec);
        spdlog::info("{}: valid {} = {}", r.config, metric, r.best_validation);
        if (!best || (!r.failed && (best->failed ||
                                    IsBetter(spec.validation_metric,
                                             r.best_validation,
                                             best->best_validation)))) {
          best = std::move(r);
          best_dim = d;
          best_lr = lr;
        }
      }
    }
    csv += fmt::format("{},{},{},{}", b.name, best_dim, FormatReal(best_lr),
                       Fixed(best->best_validation));
    table += fmt::format("{:<10} {:>4} {:>8} {:>12}", b.name, best_dim,
                         FormatReal(best_lr), Fixed(best->best_validation));
    for (const auto& c : test_cols) {
      const auto it = best->test_metrics.find(c);
      const double v = it == best->test_metrics.end() ? 0.0 : it->second;
      csv += "," + Fixed(v);
      table += fmt::format(" {:>12}", Fixed(v));
    }
    csv += fmt::format(",{}\n", best->failed ? 1 : 0);
    table += best->failed ? "  (failed)\n" : "\n";
  }
  const std::filesystem::path dir = out_dir;
  WriteText(dir / "baselines.csv", csv);
  WriteText(dir / "baselines.txt", table);
  std::cout << table;
  return 0;
}

void EmitSearchOutputs(const SearchResult& result,
                       const std::filesystem::path& dir) {
  WriteText(dir / "top3.txt", FormatTopModels(result.history, 3));
  WriteText(dir / "curve.txt", FormatCurve(result.history));
  nlohmann::json summary = {
      {"evaluations", result.history.size()},
      {"rounds", result.rounds},
      {"stop_reason", StopReasonName(result.reason)},
      {"exhausted", result.exhausted},
      {"metric", result.history.metric_name()}};
  if (const EvalRecord* best = result.best()) {
    summary["best"] = EvalRecordToJson(*best);
    summary["best"].erase("cost_seconds");
  }
  if (result.fused) summary["fused"] = TrainReportToJson(*result.fused);
  WriteText(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << FormatTopModels(result.history, 3);
}

int CmdSearch(const std::string& config_path, const std::string& data,
              const std::string& strategy, const std::string& cache,
              bool resume, std::optional<std::uint64_t> seed,
              std::optional<std::size_t> workers, const std::string& out_dir,
              std::optional<std::size_t> cap) {
  RunConfig rc = LoadRunConfig(config_path);
  if (!data.empty()) rc.dataset = data;
  if (!strategy.empty()) rc.search.strategy = ParseStrategy(strategy);
  if (seed) {
    rc.seed = *seed;
    rc.search.seed = *seed;
    rc.search.train.seed = *seed;
  }
  if (workers) rc.search.workers = *workers;
  if (cap) rc.search.stop.cap = *cap;
  if (!out_dir.empty()) rc.output_dir = out_dir;
  rc.search.Validate();

  std::optional<InteractionDataset> ds;
  if (cache.empty() || rc.search.fuse_top2) {
    ds = LoadForTask(rc.dataset, rc.task);
  }
  std::unique_ptr<CandidateEvaluator> evaluator;
  if (!cache.empty()) {
    evaluator = std::make_unique<CachedEvaluator>(
        CachedEvaluator::FromFile(rc.space, cache));
  } else {
    evaluator = std::make_unique<TrainingEvaluator>(*ds, rc.space,
                                                    rc.search.train);
  }
  SearchOptions options;
  options.history_path = rc.output_dir / "history.jsonl";
  options.resume = resume;
  options.dataset = ds ? &*ds : nullptr;
  const SearchResult result =
      RunSearch(rc.space, *evaluator, rc.search, options);
  EmitSearchOutputs(result, rc.output_dir);
  spdlog::info("search stopped ({}) after {} evaluations",
               StopReasonName(result.reason), result.history.size());
  return 0;
}

int CmdReport(const std::string& history_path, const std::string& curve,
              std::size_t top) {
  std::ifstream in(history_path);
  if (!in) throw FormatError("cannot read history file " + history_path);
  std::string first;
  std::getline(in, first);
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(first);
  } catch (const nlohmann::json::exception&) {
    throw FormatError("history file " + history_path + " has no valid header");
  }
  if (!header.contains("space") || !header.contains("metric")) {
    throw FormatError("history file " + history_path + " has no valid header");
  }
  const SearchSpace space = SpaceFromJson(header.at("space"));
  std::size_t k = 20;
  const Metric metric = ParseMetric(header.at("metric").get<std::string>(), &k);
  const HistoryFile file = ReadHistoryFile(history_path, space);
  SearchHistory history(space, metric, k);
  for (const EvalRecord& r : file.records) history.Append(r);
  std::cout << FormatTopModels(history, top);
  if (!curve.empty()) WriteText(curve, FormatCurve(history));
  return 0;
}

}  // namespace

RunConfig RunConfigFromJson(const nlohmann::json& j) {
  try {
    RunConfig rc;
    rc.dataset = j.at("dataset").get<std::string>();
    rc.task = ParseTask(j.value("task", std::string("rating")));
    if (j.contains("space")) rc.space = SpaceFromJson(j.at("space"));
    rc.seed = j.value("seed", rc.seed);
    nlohmann::json search = j.value("search", nlohmann::json::object());
    rc.search = SearchSpecFromJson(search);
    nlohmann::json train = j.value("train", nlohmann::json::object());
    if (!train.contains("task")) train["task"] = TaskName(rc.task);
    rc.search.train = TrainSpecFromJson(train);
    if (rc.search.train.task != rc.task) {
      throw ConfigError("run config: train.task disagrees with task");
    }
    rc.search.seed = rc.seed;
    rc.search.train.seed = rc.seed;
    rc.output_dir = j.value("output_dir", rc.output_dir.string());
    return rc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("run config: ") + e.what());
  }
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read run config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("run config " + path.string() + ": " + e.what());
  }
  RunConfig rc = RunConfigFromJson(j);
  const auto base = path.parent_path();
  if (rc.dataset.is_relative()) rc.dataset = base / rc.dataset;
  if (rc.output_dir.is_relative()) rc.output_dir = base / rc.output_dir;
  return rc;
}

std::vector<std::size_t> ParseSizeList(const std::string& text) {
  std::vector<std::size_t> out;
  for (const std::string& s : SplitList(text, ',')) {
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || v == 0) {
      throw ConfigError("bad positive integer '" + s + "' in list '" + text +
                        "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

std::vector<double> ParseRealList(const std::string& text) {
  std::vector<double> out;
  for (const std::string& s : SplitList(text, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !(v > 0.0)) {
      throw ConfigError("bad positive number '" + s + "' in list '" + text +
                        "'");
    }
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty list '" + text + "'");
  return out;
}

SplitRatios ParseRatios(const std::string& text) {
  const auto parts = SplitList(text, ':');
  if (parts.size() != 3) {
    throw ConfigError("ratios must look like 8:2:2, got '" + text + "'");
  }
  SplitRatios r;
  try {
    r.train = std::stod(parts[0]);
    r.validation = std::stod(parts[1]);
    r.test = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ConfigError("ratios must look like 8:2:2, got '" + text + "'");
  }
  return r;
}

std::string FormatTopModels(const SearchHistory& history, std::size_t n) {
  std::string out;
  std::size_t rank = 0;
  for (std::size_t pos : history.TopPositions(n)) {
    const EvalRecord& r = history.records()[pos];
    const SearchSpace& space = history.space();
    out += fmt::format("{}\t{}\td={}\tlr={}\t{}={}{}\n", ++rank,
                       r.config.stages.ToTupleString(), space.dim(r.config),
                       FormatReal(space.lr(r.config)), history.metric_name(),
                       Fixed(r.valid_metric), r.failed ? "\t(failed)" : "");
  }
  return out;
}

std::string FormatCurve(const SearchHistory& history) {
  std::string out;
  const auto curve = history.BestCurve();
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out += fmt::format("{} {}\n", i + 1, Fixed(curve[i]));
  }
  return out;
}

int RunCli(int argc, char** argv) {
  CLI::App app{"AutoCF: model search for collaborative filtering"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "debug logging");

  auto* prepare = app.add_subcommand("prepare", "ingest, filter and split");
  std::string p_input, p_format = "ml100k", p_delim, p_ratios = "8:2:2",
                       p_out;
  int p_user = -1, p_item = -1, p_rating = -2, p_ts = -2, p_header = -1;
  std::size_t p_min = 20;
  std::string p_side = "both";
  bool p_implicit = false;
  std::uint64_t p_seed = 0;
  prepare->add_option("--input", p_input, "raw interaction file")->required();
  prepare->add_option("--format", p_format, "ml100k or ml1m preset")
      ->check(CLI::IsMember({"ml100k", "ml1m"}));
  prepare->add_option("--delimiter", p_delim, "field delimiter");
  prepare->add_option("--user-col", p_user, "user column (0-based)");
  prepare->add_option("--item-col", p_item, "item column (0-based)");
  prepare->add_option("--rating-col", p_rating, "rating column, -1 if none");
  prepare->add_option("--ts-col", p_ts, "timestamp column, -1 if none");
  prepare->add_option("--header-lines", p_header, "lines to skip");
  prepare->add_option("--min-count", p_min, "k-core threshold");
  prepare->add_option("--filter-side", p_side, "both, users or items")
      ->check(CLI::IsMember({"both", "users", "items"}));
  prepare->add_option("--ratios", p_ratios, "train:validation:test");
  prepare->add_flag("--implicit", p_implicit, "replace ratings with 1");
  prepare->add_option("--seed", p_seed, "split seed");
  prepare->add_option("--out", p_out, "snapshot path")->required();

  auto* train = app.add_subcommand("train", "train one config");
  std::string t_data, t_config, t_dims = "8,16,32,64",
                                t_lrs = "0.0005,0.001,0.005,0.01", t_out;
  TrainFlags t_flags;
  train->add_option("--data", t_data, "dataset snapshot")->required();
  train->add_option("--config", t_config, "e.g. ID,ID,MAT,MAT,MUL,SUM|d=16|lr=0.005")
      ->required();
  train->add_option("--dims", t_dims, "embedding size set");
  train->add_option("--lrs", t_lrs, "learning rate set");
  train->add_option("--out", t_out, "report JSON path");
  t_flags.Add(train);

  auto* baselines = app.add_subcommand("baselines", "train baseline models");
  std::string b_data, b_dims = "16,64", b_lrs = "0.001,0.005", b_models,
                      b_out = "baselines_out";
  TrainFlags b_flags;
  baselines->add_option("--data", b_data, "dataset snapshot")->required();
  baselines->add_option("--dims", b_dims, "embedding sizes to try");
  baselines->add_option("--lrs", b_lrs, "learning rates to try");
  baselines->add_option("--models", b_models, "comma-separated subset");
  baselines->add_option("--out-dir", b_out, "output directory");
  b_flags.Add(baselines);

  auto* search = app.add_subcommand("search", "run a model search");
  std::string s_config, s_data, s_strategy, s_cache, s_out;
  bool s_resume = false;
  std::optional<std::uint64_t> s_seed;
  std::optional<std::size_t> s_workers, s_cap;
  search->add_option("--config", s_config, "run config JSON")->required();
  search->add_option("--data", s_data, "override dataset snapshot");
  search->add_option("--strategy", s_strategy, "override strategy");
  search->add_option("--cache", s_cache, "evaluate by lookup in a history");
  search->add_flag("--resume", s_resume, "continue an interrupted run");
  search->add_option("--seed", s_seed, "override seed");
  search->add_option("--workers", s_workers, "parallel candidate trainings");
  search->add_option("--cap", s_cap, "override evaluation cap");
  search->add_option("--out-dir", s_out, "override output directory");

  auto* report = app.add_subcommand("report", "summarize a search history");
  std::string r_history, r_curve;
  std::size_t r_top = 3;
  report->add_option("--history", r_history, "history.jsonl")->required();
  report->add_option("--curve", r_curve, "write curve data here");
  report->add_option("--top", r_top, "number of models to list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  try {
    if (*prepare) {
      return CmdPrepare(p_input, p_format, p_delim, p_user, p_item, p_rating,
                        p_ts, p_header, p_min, p_side, p_ratios,
                        p_implicit, p_seed,
                        p_out);
    }
    if (*train) {
      return CmdTrain(t_data, t_config, t_flags, t_dims, t_lrs, t_out);
    }
    if (*baselines) {
      return CmdBaselines(b_data, b_flags, b_dims, b_lrs, b_models, b_out);
    }
    if (*search) {
      return CmdSearch(s_config, s_data, s_strategy, s_cache, s_resume,
                       s_seed, s_workers, s_out, s_cap);
    }
    if (*report) return CmdReport(r_history, r_curve, r_top);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int RunCli(const std::vector<std::string>& args) {
  std::vector<std::string> copy = args;
  std::vector<char*> argv;
  for (std::string& s : copy) argv.push_back(s.data());
  argv.push_back(nullptr);
  return RunCli(static_cast<int>(copy.size()), argv.data());
}

}  // namespace autocf
