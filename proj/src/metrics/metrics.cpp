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

#include "autocf/metrics/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "autocf/errors.hpp"

namespace autocf {

std::string MetricName(Metric metric, std::size_t k) {
  switch (metric) {
    case Metric::kRmse:
      return "rmse";
    case Metric::kMae:
      return "mae";
    case Metric::kRecall:
      return "recall@" + std::to_string(k);
    case Metric::kNdcg:
      return "ndcg@" + std::to_string(k);
  }
  throw InternalError("MetricName: unknown metric");
}

Metric ParseMetric(const std::string& name, std::size_t* k) {
  std::string s = name;
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  std::string base = s;
  const auto at = s.find('@');
  if (at != std::string::npos) {
    base = s.substr(0, at);
    const std::string digits = s.substr(at + 1);
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](unsigned char c) { return std::isdigit(c); }) ||
        std::stoul(digits) == 0) {
      throw ConfigError("bad metric cutoff in '" + name + "'");
    }
    if (k != nullptr) *k = std::stoul(digits);
  }
  if (base == "rmse" && at == std::string::npos) return Metric::kRmse;
  if (base == "mae" && at == std::string::npos) return Metric::kMae;
  if (base == "recall") return Metric::kRecall;
  if (base == "ndcg") return Metric::kNdcg;
  throw ConfigError("unknown metric '" + name +
                    "'; valid: rmse, mae, recall@K, ndcg@K");
}

bool HigherIsBetter(Metric metric) {
  return metric == Metric::kRecall || metric == Metric::kNdcg;
}

bool IsBetter(Metric metric, double a, double b) {
  return HigherIsBetter(metric) ? a > b : a < b;
}

double WorstValue(Metric metric) { return HigherIsBetter(metric) ? -1.0 : 1e300; }

namespace {

void CheckLengths(std::span<const double> a, std::span<const double> b,
                  const char* what) {
  if (a.empty()) throw ConfigError(std::string(what) + ": empty input");
  if (a.size() != b.size()) {
    throw ConfigError(std::string(what) + ": length mismatch");
  }
}

}  // namespace

double Rmse(std::span<const double> preds, std::span<const double> targets) {
  CheckLengths(preds, targets, "rmse");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - targets[i];
    sum += e * e;
  }
  return std::sqrt(sum / static_cast<double>(preds.size()));
}

double Mae(std::span<const double> preds, std::span<const double> targets) {
  CheckLengths(preds, targets, "mae");
  double sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    sum += std::abs(preds[i] - targets[i]);
  }
  return sum / static_cast<double>(preds.size());
}

std::size_t TargetRank(std::span<const double> scores,
                       std::span<const char> excluded, ItemIndex target) {
  auto key = [](double v) {
    return std::isnan(v) ? -std::numeric_limits<double>::infinity() : v;
  };
  const double t = key(scores[target]);
  std::size_t ahead = 0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    if (excluded[c] || c == target) continue;
    const double v = key(scores[c]);
    if (v > t || (v == t && c < target)) ++ahead;
  }
  return ahead + 1;
}

RankingMetrics EvaluateRanking(const UserScorer& scorer,
                               const InteractionDataset& dataset,
                               SplitKind split, std::size_t k) {
  RankingMetrics out;
  const std::size_t n = dataset.num_items();
  std::vector<double> scores(n);
  std::vector<char> excluded(n, 0);
  double hits = 0.0;
  double gain = 0.0;
  for (UserIndex u = 0; u < dataset.num_users(); ++u) {
    const auto targets = dataset.user_items(split, u);
    if (targets.empty()) continue;
    scorer(u, scores);
    std::fill(excluded.begin(), excluded.end(), 0);
    for (ItemIndex i : dataset.user_history(u)) excluded[i] = 1;
    if (split == SplitKind::kTest) {
      for (ItemIndex i : dataset.user_items(SplitKind::kValidation, u)) {
        excluded[i] = 1;
      }
    }
    for (ItemIndex j : targets) {
      const std::size_t rank = TargetRank(scores, excluded, j);
      if (rank <= k) {
        hits += 1.0;
        gain += 1.0 / std::log2(static_cast<double>(rank) + 1.0);
      }
      ++out.pairs;
    }
  }
  if (out.pairs > 0) {
    out.recall = hits / static_cast<double>(out.pairs);
    out.ndcg = gain / static_cast<double>(out.pairs);
  }
  return out;
}

double RecallAtK(const UserScorer& scorer, const InteractionDataset& dataset,
                 SplitKind split, std::size_t k) {
  return EvaluateRanking(scorer, dataset, split, k).recall;
}

double NdcgAtK(const UserScorer& scorer, const InteractionDataset& dataset,
               SplitKind split, std::size_t k) {
  return EvaluateRanking(scorer, dataset, split, k).ndcg;
}

}  // namespace autocf
