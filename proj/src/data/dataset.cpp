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

#include "autocf/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <utility>

#include <spdlog/spdlog.h>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

constexpr const char* kSnapshotFormat = "autocf-dataset";
constexpr int kSnapshotVersion = 1;

std::uint64_t PairKey(std::uint32_t u, std::uint32_t i) {
  return (static_cast<std::uint64_t>(u) << 32) | i;
}

std::vector<std::vector<ItemIndex>> GroupByUser(
    std::span<const Interaction> records, std::size_t num_users) {
  std::vector<std::vector<ItemIndex>> grouped(num_users);
  for (const auto& r : records) grouped[r.user].push_back(r.item);
  for (auto& items : grouped) std::sort(items.begin(), items.end());
  return grouped;
}

nlohmann::json RecordsToJson(std::span<const Interaction> records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records) arr.push_back({r.user, r.item, r.value});
  return arr;
}

std::vector<Interaction> RecordsFromJson(const nlohmann::json& arr) {
  std::vector<Interaction> out;
  out.reserve(arr.size());
  for (const auto& r : arr) {
    if (!r.is_array() || r.size() != 3) {
      throw FormatError("snapshot: record must be [user, item, value]");
    }
    out.push_back({r[0].get<UserIndex>(), r[1].get<ItemIndex>(),
                   r[2].get<double>()});
  }
  return out;
}

}  // namespace

const char* FormName(Form form) {
  return form == Form::kExplicit ? "explicit" : "implicit";
}

Form ParseForm(const std::string& name) {
  if (name == "explicit") return Form::kExplicit;
  if (name == "implicit") return Form::kImplicit;
  throw ConfigError("unknown dataset form '" + name + "'");
}

InteractionDataset InteractionDataset::FromSplits(
    Form form, std::vector<std::string> user_ids,
    std::vector<std::string> item_ids, std::vector<Interaction> train,
    std::vector<Interaction> validation, std::vector<Interaction> test) {
  InteractionDataset ds;
  ds.form_ = form;
  ds.user_ids_ = std::move(user_ids);
  ds.item_ids_ = std::move(item_ids);
  ds.train_ = std::move(train);
  ds.validation_ = std::move(validation);
  ds.test_ = std::move(test);

  std::unordered_set<std::uint64_t> seen;
  for (const auto* split : {&ds.train_, &ds.validation_, &ds.test_}) {
    for (const auto& r : *split) {
      if (r.user >= ds.num_users() || r.item >= ds.num_items()) {
        throw ConfigError("dataset: record index out of range");
      }
      if (!std::isfinite(r.value)) {
        throw ConfigError("dataset: non-finite interaction value");
      }
      if (form == Form::kImplicit && r.value != 1.0) {
        throw ConfigError("dataset: implicit data must have unit values");
      }
      if (!seen.insert(PairKey(r.user, r.item)).second) {
        throw ConfigError("dataset: duplicate (user, item) pair across splits");
      }
    }
  }
  ds.BuildIndices();
  return ds;
}

void InteractionDataset::BuildIndices() {
  user_history_ = GroupByUser(train_, num_users());
  item_history_.assign(num_items(), {});
  for (const auto& r : train_) item_history_[r.item].push_back(r.user);
  for (auto& users : item_history_) std::sort(users.begin(), users.end());
  user_validation_ = GroupByUser(validation_, num_users());
  user_test_ = GroupByUser(test_, num_users());
}

std::span<const Interaction> InteractionDataset::split(SplitKind kind) const {
  switch (kind) {
    case SplitKind::kTrain:
      return train_;
    case SplitKind::kValidation:
      return validation_;
    case SplitKind::kTest:
      return test_;
  }
  return {};
}

std::span<const ItemIndex> InteractionDataset::user_items(SplitKind kind,
                                                          UserIndex u) const {
  switch (kind) {
    case SplitKind::kTrain:
      return user_history_[u];
    case SplitKind::kValidation:
      return user_validation_[u];
    case SplitKind::kTest:
      return user_test_[u];
  }
  return {};
}

bool InteractionDataset::IsTrainPositive(UserIndex u, ItemIndex j) const {
  const auto& h = user_history_[u];
  return std::binary_search(h.begin(), h.end(), j);
}

DatasetStats InteractionDataset::Stats() const {
  DatasetStats s;
  s.users = num_users();
  s.items = num_items();
  s.train = train_.size();
  s.validation = validation_.size();
  s.test = test_.size();
  s.records = s.train + s.validation + s.test;
  if (s.users > 0 && s.items > 0) {
    s.density = static_cast<double>(s.records) /
                (static_cast<double>(s.users) * static_cast<double>(s.items));
  }
  return s;
}

InteractionDataset InteractionDataset::ToImplicit() const {
  InteractionDataset out = *this;
  out.form_ = Form::kImplicit;
  for (auto* split : {&out.train_, &out.validation_, &out.test_}) {
    for (auto& r : *split) r.value = 1.0;
  }
  return out;
}

InteractionDataset ToImplicit(const InteractionDataset& dataset) {
  if (dataset.form() == Form::kImplicit) {
    spdlog::warn("to_implicit: dataset is already implicit");
    return dataset;
  }
  return dataset.ToImplicit();
}

InteractionDataset Split(const std::vector<RawInteraction>& records,
                         const SplitRatios& ratios, Rng& rng) {
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) ||
      !(ratios.test > 0.0)) {
    throw SplitError("split: all ratios must be positive (train " +
                     std::to_string(ratios.train) + ", validation " +
                     std::to_string(ratios.validation) + ", test " +
                     std::to_string(ratios.test) + ")");
  }

  std::vector<std::string> user_ids;
  std::vector<std::string> item_ids;
  std::unordered_map<std::string, UserIndex> user_index;
  std::unordered_map<std::string, ItemIndex> item_index;
  std::unordered_set<std::uint64_t> seen;
  std::vector<Interaction> unique;
  unique.reserve(records.size());
  bool has_rating = !records.empty();
  std::size_t duplicates = 0;
  for (const auto& r : records) {
    if (!r.rating) has_rating = false;
  }
  for (const auto& r : records) {
    auto [uit, unew] = user_index.try_emplace(
        r.user, static_cast<UserIndex>(user_ids.size()));
    if (unew) user_ids.push_back(r.user);
    auto [iit, inew] = item_index.try_emplace(
        r.item, static_cast<ItemIndex>(item_ids.size()));
    if (inew) item_ids.push_back(r.item);
    if (!seen.insert(PairKey(uit->second, iit->second)).second) {
      ++duplicates;
      continue;
    }
    unique.push_back(
        {uit->second, iit->second, has_rating ? *r.rating : 1.0});
  }
  if (duplicates > 0) {
    spdlog::warn("split: dropped {} duplicate (user, item) record(s)",
                 duplicates);
  }

  const double total = ratios.train + ratios.validation + ratios.test;
  const double fractions[3] = {ratios.train / total,
                               ratios.validation / total, ratios.test / total};
  const std::size_t n = unique.size();
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int s = 0; s < 3; ++s) {
    const double exact = fractions[s] * static_cast<double>(n);
    counts[s] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainders[s] = exact - static_cast<double>(counts[s]);
    assigned += counts[s];
  }
  while (assigned < n) {
    int best = 0;
    for (int s = 1; s < 3; ++s) {
      if (remainders[s] > remainders[best]) best = s;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  const char* names[3] = {"train", "validation", "test"};
  for (int s = 0; s < 3; ++s) {
    if (counts[s] == 0) {
      throw SplitError(std::string("split: ") + names[s] +
                       " split is empty (" + std::to_string(n) +
                       " unique records)");
    }
  }

  rng.Shuffle(unique);
  std::vector<Interaction> parts[3];
  std::size_t offset = 0;
  for (int s = 0; s < 3; ++s) {
    parts[s].assign(unique.begin() + offset,
                    unique.begin() + offset + counts[s]);
    offset += counts[s];
  }
  return InteractionDataset::FromSplits(
      has_rating ? Form::kExplicit : Form::kImplicit, std::move(user_ids),
      std::move(item_ids), std::move(parts[0]), std::move(parts[1]),
      std::move(parts[2]));
}

nlohmann::json SnapshotToJson(const InteractionDataset& dataset) {
  nlohmann::json j;
  j["format"] = kSnapshotFormat;
  j["version"] = kSnapshotVersion;
  j["form"] = FormName(dataset.form());
  j["users"] = dataset.user_ids();
  j["items"] = dataset.item_ids();
  j["train"] = RecordsToJson(dataset.train());
  j["validation"] = RecordsToJson(dataset.validation());
  j["test"] = RecordsToJson(dataset.test());
  return j;
}

InteractionDataset SnapshotFromJson(const nlohmann::json& j) {
  try {
    if (j.at("format").get<std::string>() != kSnapshotFormat ||
        j.at("version").get<int>() != kSnapshotVersion) {
      throw FormatError("snapshot: unsupported format or version");
    }
    return InteractionDataset::FromSplits(
        ParseForm(j.at("form").get<std::string>()),
        j.at("users").get<std::vector<std::string>>(),
        j.at("items").get<std::vector<std::string>>(),
        RecordsFromJson(j.at("train")), RecordsFromJson(j.at("validation")),
        RecordsFromJson(j.at("test")));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
}

void SaveSnapshot(const InteractionDataset& dataset,
                  const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw FormatError("cannot write snapshot '" + path.string() + "'");
  }
  out << SnapshotToJson(dataset).dump() << '\n';
}

InteractionDataset LoadSnapshot(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("cannot read snapshot '" + path.string() + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("snapshot '" + path.string() + "': " + e.what());
  }
  return SnapshotFromJson(j);
}

}  // namespace autocf
