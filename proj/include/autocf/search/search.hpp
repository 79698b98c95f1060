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

#ifndef AUTOCF_SEARCH_SEARCH_HPP_
#define AUTOCF_SEARCH_SEARCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/config.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/predictor/predictor.hpp"
#include "autocf/search/evaluator.hpp"
#include "autocf/search/history.hpp"
#include "autocf/search/reinforce.hpp"
#include "autocf/train/trainer.hpp"

namespace autocf {

enum class Strategy { kRand, kRandPredictor, kReinforce, kReinforcePredictor };

const char* StrategyName(Strategy s);
// "rand", "rand+predictor", "reinforce", "reinforce+predictor".
Strategy ParseStrategy(const std::string& name);
bool UsesPredictor(Strategy s);

struct SearchSpec {
  Strategy strategy = Strategy::kRandPredictor;
  std::size_t k1 = 10;
  std::size_t k2 = 10;
  StopRule stop;
  std::uint64_t seed = 0;
  TrainSpec train;
  bool fuse_top2 = false;
  std::size_t workers = 1;
  PredictorOptions predictor;
  ReinforceOptions reinforce;

  // Throws ConfigError unless k1 >= 1 and cap >= k1.
  void Validate() const;
};

nlohmann::json SearchSpecToJson(const SearchSpec& spec);
SearchSpec SearchSpecFromJson(const nlohmann::json& j);

struct SearchOptions {
  // Line-delimited history; a checkpoint is kept next to it (".ckpt").
  std::optional<std::filesystem::path> history_path;
  // Continue from an existing history file instead of starting over.
  bool resume = false;
  // Needed for top-2 fusion.
  const InteractionDataset* dataset = nullptr;
  // Caller-owned predictor replacing the one built from the spec.
  SurrogatePredictor* predictor = nullptr;
};

struct SearchResult {
  SearchHistory history;
  StopReason reason = StopReason::kNone;
  bool exhausted = false;
  std::size_t rounds = 0;
  std::optional<TrainReport> fused;

  const EvalRecord* best() const { return history.best(); }
};

// Algorithm: each round samples K1 + K2 unevaluated configs uniformly (or
// from the controller), keeps the predictor's top K1 (all K1 for plain
// strategies, in canonical order), evaluates them, and refits the predictor.
// Stops on the rule in spec.stop or when the space is exhausted.
SearchResult RunSearch(const SearchSpace& space,
                       const CandidateEvaluator& evaluator,
                       const SearchSpec& spec,
                       const SearchOptions& options = {});

std::filesystem::path CheckpointPath(const std::filesystem::path& history);

// Header line identifying a search; resume requires an identical header.
nlohmann::json HistoryHeader(const SearchSpace& space, const SearchSpec& spec);

}  // namespace autocf

#endif  // AUTOCF_SEARCH_SEARCH_HPP_
