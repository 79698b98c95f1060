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

#include "autocf/search/history.hpp"

#include <algorithm>
#include <numeric>

#include "autocf/errors.hpp"

namespace autocf {

const char* StopReasonName(StopReason reason) {
  switch (reason) {
    case StopReason::kNone:
      return "none";
    case StopReason::kPatience:
      return "patience";
    case StopReason::kCap:
      return "cap";
    case StopReason::kExhausted:
      return "exhausted";
  }
  return "unknown";
}

SearchHistory::SearchHistory(const SearchSpace& space, Metric metric,
                             std::size_t k)
    : space_(&space), metric_(metric), k_(k), evaluated_(space.size(), 0) {}

bool SearchHistory::IsBetterRecord(const EvalRecord& a,
                                   const EvalRecord& b) const {
  if (a.failed) return false;
  if (b.failed) return true;
  return IsBetter(metric_, a.valid_metric, b.valid_metric);
}

bool SearchHistory::Append(EvalRecord record) {
  const std::size_t idx = space_->CanonicalIndex(record.config);
  if (evaluated_[idx]) {
    throw InternalError("config evaluated twice: " + record.config_text);
  }
  evaluated_[idx] = 1;
  records_.push_back(std::move(record));
  const std::size_t pos = records_.size() - 1;
  if (!best_ || IsBetterRecord(records_[pos], records_[*best_])) {
    best_ = pos;
    since_improvement_ = 0;
    return true;
  }
  ++since_improvement_;
  return false;
}

bool SearchHistory::Contains(std::size_t canonical_index) const {
  return canonical_index < evaluated_.size() && evaluated_[canonical_index];
}

std::vector<std::size_t> SearchHistory::Unevaluated() const {
  std::vector<std::size_t> out;
  out.reserve(evaluated_.size() - records_.size());
  for (std::size_t i = 0; i < evaluated_.size(); ++i) {
    if (!evaluated_[i]) out.push_back(i);
  }
  return out;
}

const EvalRecord* SearchHistory::best() const {
  return best_ ? &records_[*best_] : nullptr;
}

std::vector<std::size_t> SearchHistory::TopPositions(std::size_t n) const {
  std::vector<std::size_t> order(records_.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return IsBetterRecord(records_[a], records_[b]);
                   });
  if (order.size() > n) order.resize(n);
  return order;
}

std::vector<double> SearchHistory::BestCurve() const {
  std::vector<double> curve;
  curve.reserve(records_.size());
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (!best || IsBetterRecord(records_[i], records_[*best])) best = i;
    curve.push_back(records_[*best].valid_metric);
  }
  return curve;
}

std::optional<std::size_t> SearchHistory::EvaluationIndexOf(
    std::size_t canonical) const {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (space_->CanonicalIndex(records_[i].config) == canonical) return i + 1;
  }
  return std::nullopt;
}

StopReason CheckStop(const SearchHistory& history, const StopRule& rule) {
  if (history.size() >= history.space().size()) return StopReason::kExhausted;
  if (history.size() >= rule.cap) return StopReason::kCap;
  const EvalRecord* best = history.best();
  if (best != nullptr && !best->failed) {
    const bool beaten =
        !rule.reference ||
        (HigherIsBetter(history.metric()) ? best->valid_metric >= *rule.reference
                                          : best->valid_metric <= *rule.reference);
    if (beaten && history.since_improvement() >= rule.patience) {
      return StopReason::kPatience;
    }
  }
  return StopReason::kNone;
}

nlohmann::json SpaceToJson(const SearchSpace& space) {
  return {{"dims", space.dims()},
          {"lrs", space.lrs()},
          {"allow_plus", space.allow_plus()}};
}

SearchSpace SpaceFromJson(const nlohmann::json& j) {
  try {
    const SearchSpace defaults;
    return SearchSpace(
        j.value("dims", defaults.dims()), j.value("lrs", defaults.lrs()),
        j.value("allow_plus", false));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("search space: ") + e.what());
  }
}

HistoryFile ReadHistoryFile(const std::filesystem::path& path,
                            const SearchSpace& space) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read history file " + path.string());
  const std::string hint =
      "; to recover, delete the damaged line(s) at the end of " +
      path.string() + " and resume, or remove the file to start over";
  HistoryFile file;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw FormatError("history line " + std::to_string(line_no) +
                        " is not valid JSON" + hint);
    }
    const std::string type = j.value("type", std::string());
    if (line_no == 1) {
      if (type != "header") {
        throw FormatError("history file lacks a header line" + hint);
      }
      file.header = j;
      continue;
    }
    if (type != "record") {
      throw FormatError("history line " + std::to_string(line_no) +
                        " is not a record" + hint);
    }
    try {
      file.records.push_back(EvalRecordFromJson(j, space));
    } catch (const FormatError& e) {
      throw FormatError("history line " + std::to_string(line_no) + ": " +
                        e.what() + hint);
    }
  }
  if (line_no == 0) throw FormatError("history file is empty" + hint);
  return file;
}

HistoryWriter::HistoryWriter(const std::filesystem::path& path,
                             const nlohmann::json& header)
    : path_(path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  out_.open(path, std::ios::trunc);
  if (!out_) throw FormatError("cannot write history file " + path.string());
  nlohmann::json h = header;
  h["type"] = "header";
  out_ << h.dump() << '\n';
  out_.flush();
}

void HistoryWriter::Append(const EvalRecord& record) {
  nlohmann::json j = EvalRecordToJson(record);
  j["type"] = "record";
  out_ << j.dump() << '\n';
  out_.flush();
  if (!out_) throw FormatError("write failed for " + path_.string());
}

}  // namespace autocf
