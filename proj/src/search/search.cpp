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

#include "autocf/search/search.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include <spdlog/spdlog.h>

#include "autocf/errors.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

namespace {

constexpr std::uint64_t kSearchStream = 11;
constexpr std::uint64_t kPredictorStream = 12;
constexpr std::uint64_t kControllerStream = 13;
constexpr std::uint64_t kFusionStream = 14;

void WriteCheckpoint(const std::filesystem::path& path,
                     const nlohmann::json& state) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw FormatError("cannot write checkpoint " + tmp.string());
    out << state.dump() << '\n';
  }
  std::filesystem::rename(tmp, path);
}

nlohmann::json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("malformed " + path.string() + ": " + e.what() +
                      "; delete it to resume from the history alone");
  }
}

}  // namespace

const char* StrategyName(Strategy s) {
  switch (s) {
    case Strategy::kRand:
      return "rand";
    case Strategy::kRandPredictor:
      return "rand+predictor";
    case Strategy::kReinforce:
      return "reinforce";
    case Strategy::kReinforcePredictor:
      return "reinforce+predictor";
  }
  return "unknown";
}

Strategy ParseStrategy(const std::string& name) {
  for (Strategy s : {Strategy::kRand, Strategy::kRandPredictor,
                     Strategy::kReinforce, Strategy::kReinforcePredictor}) {
    if (name == StrategyName(s)) return s;
  }
  throw ConfigError("unknown strategy '" + name +
                    "'; valid: rand, rand+predictor, reinforce, "
                    "reinforce+predictor");
}

bool UsesPredictor(Strategy s) {
  return s == Strategy::kRandPredictor || s == Strategy::kReinforcePredictor;
}

void SearchSpec::Validate() const {
  if (k1 == 0) throw ConfigError("search: k1 must be at least 1");
  if (stop.cap < k1) throw ConfigError("search: cap must be at least k1");
  train.Validate();
}

nlohmann::json SearchSpecToJson(const SearchSpec& s) {
  return {{"strategy", StrategyName(s.strategy)},
          {"k1", s.k1},
          {"k2", s.k2},
          {"reference", s.stop.reference ? nlohmann::json(*s.stop.reference)
                                         : nlohmann::json(nullptr)},
          {"patience", s.stop.patience},
          {"cap", s.stop.cap},
          {"seed", s.seed},
          {"train", TrainSpecToJson(s.train)},
          {"fuse_top2", s.fuse_top2},
          {"workers", s.workers},
          {"predictor",
           {{"hidden", s.predictor.hidden},
            {"lr", s.predictor.lr},
            {"steps_per_fit", s.predictor.steps_per_fit},
            {"pair_budget_factor", s.predictor.pair_budget_factor}}},
          {"reinforce", {{"lr", s.reinforce.lr}}}};
}

SearchSpec SearchSpecFromJson(const nlohmann::json& j) {
  try {
    SearchSpec s;
    s.strategy = ParseStrategy(
        j.value("strategy", std::string(StrategyName(s.strategy))));
    s.k1 = j.value("k1", s.k1);
    s.k2 = j.value("k2", s.k2);
    if (j.contains("reference") && !j.at("reference").is_null()) {
      s.stop.reference = j.at("reference").get<double>();
    }
    s.stop.patience = j.value("patience", s.stop.patience);
    s.stop.cap = j.value("cap", s.stop.cap);
    s.seed = j.value("seed", s.seed);
    if (j.contains("train")) s.train = TrainSpecFromJson(j.at("train"));
    s.fuse_top2 = j.value("fuse_top2", s.fuse_top2);
    s.workers = j.value("workers", s.workers);
    if (j.contains("predictor")) {
      const auto& p = j.at("predictor");
      s.predictor.hidden = p.value("hidden", s.predictor.hidden);
      s.predictor.lr = p.value("lr", s.predictor.lr);
      s.predictor.steps_per_fit =
          p.value("steps_per_fit", s.predictor.steps_per_fit);
      s.predictor.pair_budget_factor =
          p.value("pair_budget_factor", s.predictor.pair_budget_factor);
    }
    if (j.contains("reinforce")) {
      s.reinforce.lr = j.at("reinforce").value("lr", s.reinforce.lr);
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search spec: ") + e.what());
  }
}

std::filesystem::path CheckpointPath(const std::filesystem::path& history) {
  return history.string() + ".ckpt";
}

nlohmann::json HistoryHeader(const SearchSpace& space, const SearchSpec& spec) {
  nlohmann::json s = SearchSpecToJson(spec);
  s.erase("workers");
  return {{"type", "header"},
          {"format", "autocf-history"},
          {"version", 1},
          {"spec", s},
          {"space", SpaceToJson(space)},
          {"metric",
           MetricName(spec.train.validation_metric, spec.train.top_k)}};
}

SearchResult RunSearch(const SearchSpace& space,
                       const CandidateEvaluator& evaluator,
                       const SearchSpec& spec, const SearchOptions& options) {
  spec.Validate();
  const Metric metric = spec.train.validation_metric;
  SearchResult result{SearchHistory(space, metric, spec.train.top_k),
                      StopReason::kNone, false, 0, std::nullopt};
  SearchHistory& history = result.history;

  Rng rng(MixSeed(spec.seed, kSearchStream));
  std::optional<SurrogatePredictor> own_predictor;
  SurrogatePredictor* predictor = nullptr;
  if (UsesPredictor(spec.strategy)) {
    predictor = options.predictor;
    if (predictor == nullptr) {
      own_predictor.emplace(space.EncodingLength(), HigherIsBetter(metric),
                            MixSeed(spec.seed, kPredictorStream),
                            spec.predictor);
      predictor = &*own_predictor;
    }
  }
  std::optional<ReinforceController> controller;
  if (spec.strategy == Strategy::kReinforce ||
      spec.strategy == Strategy::kReinforcePredictor) {
    controller.emplace(space, MixSeed(spec.seed, kControllerStream),
                       spec.reinforce);
  }

  // Records already on disk past the last checkpoint; reused, not retrained.
  std::map<std::size_t, EvalRecord> pending;
  std::optional<HistoryWriter> writer;
  const nlohmann::json header = HistoryHeader(space, spec);
  if (options.history_path) {
    const auto& path = *options.history_path;
    std::vector<EvalRecord> kept;
    if (options.resume && std::filesystem::exists(path)) {
      HistoryFile file = ReadHistoryFile(path, space);
      if (file.header != header) {
        throw ConfigError("history " + path.string() +
                          " was written by a different search spec; use a "
                          "new output path or the original run config");
      }
      std::size_t keep = 0;
      const auto ckpt_path = CheckpointPath(path);
      if (std::filesystem::exists(ckpt_path)) {
        const nlohmann::json ckpt = ReadJsonFile(ckpt_path);
        try {
          keep = ckpt.at("records").get<std::size_t>();
          result.rounds = ckpt.at("rounds").get<std::size_t>();
          rng.Restore(ckpt.at("rng").get<std::string>());
          if (predictor != nullptr) predictor->LoadJson(ckpt.at("predictor"));
          if (controller) controller->LoadJson(ckpt.at("controller"));
        } catch (const nlohmann::json::exception& e) {
          throw FormatError("malformed checkpoint " + ckpt_path.string() +
                            ": " + e.what() +
                            "; delete it to resume from the history alone");
        }
        if (keep > file.records.size()) {
          throw FormatError("checkpoint " + ckpt_path.string() +
                            " is ahead of the history file; delete it to "
                            "resume from the history alone");
        }
      }
      for (std::size_t i = 0; i < file.records.size(); ++i) {
        if (i < keep) {
          kept.push_back(file.records[i]);
        } else {
          pending[space.CanonicalIndex(file.records[i].config)] =
              file.records[i];
        }
      }
      spdlog::info("resuming search: {} records restored, {} reusable",
                   kept.size(), pending.size());
    }
    writer.emplace(path, header);
    for (EvalRecord& r : kept) {
      writer->Append(r);
      history.Append(std::move(r));
    }
  }

  auto evaluate = [&](const std::vector<ModelConfig>& configs) {
    std::vector<ModelConfig> todo;
    for (const ModelConfig& c : configs) {
      if (!pending.count(space.CanonicalIndex(c))) todo.push_back(c);
    }
    std::vector<EvalRecord> fresh = evaluator.EvaluateBatch(todo, spec.workers);
    std::vector<EvalRecord> out;
    std::size_t f = 0;
    for (const ModelConfig& c : configs) {
      const auto it = pending.find(space.CanonicalIndex(c));
      if (it != pending.end()) {
        out.push_back(it->second);
        pending.erase(it);
      } else {
        out.push_back(std::move(fresh[f++]));
      }
    }
    return out;
  };

  while (true) {
    result.reason = CheckStop(history, spec.stop);
    if (result.reason != StopReason::kNone) break;
    const std::vector<std::size_t> unevaluated = history.Unevaluated();
    const std::size_t budget =
        std::min(spec.k1, spec.stop.cap - history.size());
    const std::size_t extra = predictor != nullptr ? spec.k2 : 0;
    const std::size_t n_sample = std::min(budget + extra, unevaluated.size());

    std::vector<std::size_t> candidates;
    if (controller) {
      std::set<std::size_t> taken;
      const std::size_t attempts = 1000 * n_sample;
      for (std::size_t a = 0; a < attempts && candidates.size() < n_sample;
           ++a) {
        const std::size_t idx = space.CanonicalIndex(controller->Sample());
        if (!history.Contains(idx) && taken.insert(idx).second) {
          candidates.push_back(idx);
        }
      }
      // Concentrated policy: top up uniformly from what is left.
      if (candidates.size() < n_sample) {
        std::vector<std::size_t> rest;
        for (std::size_t idx : unevaluated) {
          if (!taken.count(idx)) rest.push_back(idx);
        }
        for (std::size_t p : rng.SampleWithoutReplacement(
                 rest.size(), n_sample - candidates.size())) {
          candidates.push_back(rest[p]);
        }
      }
    } else {
      for (std::size_t p :
           rng.SampleWithoutReplacement(unevaluated.size(), n_sample)) {
        candidates.push_back(unevaluated[p]);
      }
    }

    std::vector<std::size_t> chosen;
    if (predictor != nullptr) {
      std::vector<std::vector<double>> encodings;
      for (std::size_t idx : candidates) {
        encodings.push_back(space.Encode(space.ConfigAt(idx)).Flat());
      }
      const auto order = predictor->Rank(encodings, candidates);
      for (std::size_t i = 0; i < std::min(budget, order.size()); ++i) {
        chosen.push_back(candidates[order[i]]);
      }
    } else {
      chosen = candidates;
      if (!controller) std::sort(chosen.begin(), chosen.end());
    }

    std::vector<ModelConfig> configs;
    for (std::size_t idx : chosen) configs.push_back(space.ConfigAt(idx));
    std::vector<EvalRecord> records = evaluate(configs);

    std::vector<ModelConfig> rewarded;
    std::vector<double> rewards;
    for (EvalRecord& r : records) {
      if (!r.failed) {
        rewarded.push_back(r.config);
        rewards.push_back(HigherIsBetter(metric) ? r.valid_metric
                                                 : -r.valid_metric);
      }
      if (writer) writer->Append(r);
      history.Append(std::move(r));
      result.reason = CheckStop(history, spec.stop);
      if (result.reason != StopReason::kNone) break;
    }
    ++result.rounds;
    const EvalRecord* best = history.best();
    spdlog::info("round {}: {} evaluated, best {} = {}", result.rounds,
                 history.size(), best ? best->config_text : "-",
                 best ? best->valid_metric : 0.0);
    if (result.reason != StopReason::kNone) break;

    if (predictor != nullptr) predictor->Fit(history.records());
    if (controller) controller->Update(rewarded, rewards);
    if (options.history_path) {
      nlohmann::json ckpt = {{"records", history.size()},
                             {"rounds", result.rounds},
                             {"rng", rng.State()}};
      if (predictor != nullptr) ckpt["predictor"] = predictor->ToJson();
      if (controller) ckpt["controller"] = controller->ToJson();
      WriteCheckpoint(CheckpointPath(*options.history_path), ckpt);
    }
  }
  result.exhausted = history.size() >= space.size();

  if (spec.fuse_top2) {
    std::vector<std::size_t> top;
    for (std::size_t pos : history.TopPositions(history.size())) {
      if (!history.records()[pos].failed) top.push_back(pos);
      if (top.size() == 2) break;
    }
    if (options.dataset == nullptr) {
      spdlog::warn("top-2 fusion skipped: no dataset supplied");
    } else if (top.size() < 2) {
      spdlog::warn("top-2 fusion skipped: fewer than two successful models");
    } else {
      const EvalRecord& a = history.records()[top[0]];
      const EvalRecord& b = history.records()[top[1]];
      TrainSpec train = spec.train;
      train.seed = MixSeed(spec.train.seed, kFusionStream);
      result.fused = TrainFused(
          {{a.config.stages, space.dim(a.config)},
           {b.config.stages, space.dim(b.config)}},
          space.lr(a.config), *options.dataset, train,
          a.config_text + " + " + b.config_text);
    }
  }
  return result;
}

}  // namespace autocf
