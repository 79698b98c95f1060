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

#ifndef AUTOCF_METRICS_METRICS_HPP_
#define AUTOCF_METRICS_METRICS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "autocf/data/dataset.hpp"

namespace autocf {

enum class Metric { kRmse, kMae, kRecall, kNdcg };

// "rmse", "mae", "recall@20", "ndcg@20".
std::string MetricName(Metric metric, std::size_t k = 20);
// Accepts the names above and bare "recall" / "ndcg"; a cutoff suffix, when
// present, is written to *k. Throws ConfigError for anything else.
Metric ParseMetric(const std::string& name, std::size_t* k = nullptr);
bool HigherIsBetter(Metric metric);
// Strictly better under the metric's orientation.
bool IsBetter(Metric metric, double a, double b);
// Sentinel for a failed candidate: worse than any attainable value.
double WorstValue(Metric metric);

// Throw ConfigError on empty or unequal-length input.
double Rmse(std::span<const double> preds, std::span<const double> targets);
double Mae(std::span<const double> preds, std::span<const double> targets);

// Writes the score of every item for user u into scores (length N).
using UserScorer = std::function<void(UserIndex u, std::span<double> scores)>;

// 1-based position of target among the candidates (excluded[c] == false).
// Higher scores rank first; ties go to the lower item index; NaN ranks last.
std::size_t TargetRank(std::span<const double> scores,
                       std::span<const char> excluded, ItemIndex target);

struct RankingMetrics {
  double recall = 0.0;
  double ndcg = 0.0;
  std::size_t pairs = 0;
};

// Full ranking over every (u, j) in the evaluation split. Candidates are all
// items minus u's train items; for the test split u's validation items are
// removed too.
RankingMetrics EvaluateRanking(const UserScorer& scorer,
                               const InteractionDataset& dataset,
                               SplitKind split, std::size_t k = 20);
double RecallAtK(const UserScorer& scorer, const InteractionDataset& dataset,
                 SplitKind split, std::size_t k = 20);
double NdcgAtK(const UserScorer& scorer, const InteractionDataset& dataset,
               SplitKind split, std::size_t k = 20);

}  // namespace autocf

#endif  // AUTOCF_METRICS_METRICS_HPP_
