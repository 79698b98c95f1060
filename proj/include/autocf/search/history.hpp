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

#ifndef AUTOCF_SEARCH_HISTORY_HPP_
#define AUTOCF_SEARCH_HISTORY_HPP_

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/config.hpp"
#include "autocf/metrics/metrics.hpp"
#include "autocf/predictor/predictor.hpp"

namespace autocf {

enum class StopReason { kNone, kPatience, kCap, kExhausted };

const char* StopReasonName(StopReason reason);

struct StopRule {
  // Metric of the best human-designed model; unset counts as already beaten.
  std::optional<double> reference;
  // Evaluations without improvement tolerated once the reference is beaten.
  std::size_t patience = 100;
  // Hard limit on evaluations.
  std::size_t cap = 200;
};

// Append-only record of evaluated configs with the running best.
class SearchHistory {
 public:
  SearchHistory(const SearchSpace& space, Metric metric, std::size_t k = 20);

  const SearchSpace& space() const { return *space_; }
  Metric metric() const { return metric_; }
  std::string metric_name() const { return MetricName(metric_, k_); }

  // Returns true when the record becomes the new best. Throws InternalError
  // if the config was already evaluated.
  bool Append(EvalRecord record);

  std::size_t size() const { return records_.size(); }
  const std::vector<EvalRecord>& records() const { return records_; }
  bool Contains(std::size_t canonical_index) const;
  // Canonical indices not yet evaluated, ascending.
  std::vector<std::size_t> Unevaluated() const;

  const EvalRecord* best() const;
  std::optional<std::size_t> best_position() const { return best_; }
  std::size_t since_improvement() const { return since_improvement_; }

  // True if a is strictly better than b; failed records lose to any other.
  bool IsBetterRecord(const EvalRecord& a, const EvalRecord& b) const;
  // Positions of the best n records, best first (ties: earlier first).
  std::vector<std::size_t> TopPositions(std::size_t n) const;
  // Best-so-far metric after each evaluation.
  std::vector<double> BestCurve() const;
  // 1-based evaluation index at which config was evaluated.
  std::optional<std::size_t> EvaluationIndexOf(std::size_t canonical) const;

 private:
  const SearchSpace* space_;
  Metric metric_;
  std::size_t k_;
  std::vector<EvalRecord> records_;
  std::vector<char> evaluated_;
  std::optional<std::size_t> best_;
  std::size_t since_improvement_ = 0;
};

StopReason CheckStop(const SearchHistory& history, const StopRule& rule);

// Line-delimited history file: a header object, then one record per line.
struct HistoryFile {
  nlohmann::json header;
  std::vector<EvalRecord> records;
};

// Throws FormatError (with a recovery hint) on malformed content.
HistoryFile ReadHistoryFile(const std::filesystem::path& path,
                            const SearchSpace& space);

class HistoryWriter {
 public:
  // Truncates path and writes the header line.
  HistoryWriter(const std::filesystem::path& path,
                const nlohmann::json& header);
  void Append(const EvalRecord& record);

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

nlohmann::json SpaceToJson(const SearchSpace& space);
SearchSpace SpaceFromJson(const nlohmann::json& j);

}  // namespace autocf

#endif  // AUTOCF_SEARCH_HISTORY_HPP_
