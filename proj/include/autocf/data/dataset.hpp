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

#ifndef AUTOCF_DATA_DATASET_HPP_
#define AUTOCF_DATA_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/data/ingest.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

using UserIndex = std::uint32_t;
using ItemIndex = std::uint32_t;

enum class Form { kExplicit, kImplicit };
enum class SplitKind { kTrain, kValidation, kTest };

const char* FormName(Form form);
Form ParseForm(const std::string& name);

struct Interaction {
  UserIndex user = 0;
  ItemIndex item = 0;
  double value = 1.0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct SplitRatios {
  double train = 8.0;
  double validation = 2.0;
  double test = 2.0;
};

struct DatasetStats {
  std::size_t users = 0;
  std::size_t items = 0;
  std::size_t records = 0;
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  double density = 0.0;  // records / (users * items)
};

// Immutable user-item interaction data with train/validation/test splits.
// Users and items carry contiguous indices; histories are built from the
// train split only and are sorted ascending.
class InteractionDataset {
 public:
  InteractionDataset() = default;

  // Validates indices and pairwise disjointness of the splits. Throws
  // ConfigError on violation, and for implicit data with values != 1.
  static InteractionDataset FromSplits(Form form,
                                       std::vector<std::string> user_ids,
                                       std::vector<std::string> item_ids,
                                       std::vector<Interaction> train,
                                       std::vector<Interaction> validation,
                                       std::vector<Interaction> test);

  Form form() const { return form_; }
  std::size_t num_users() const { return user_ids_.size(); }
  std::size_t num_items() const { return item_ids_.size(); }
  const std::vector<std::string>& user_ids() const { return user_ids_; }
  const std::vector<std::string>& item_ids() const { return item_ids_; }

  std::span<const Interaction> split(SplitKind kind) const;
  std::span<const Interaction> train() const { return train_; }
  std::span<const Interaction> validation() const { return validation_; }
  std::span<const Interaction> test() const { return test_; }

  // r_u: items user u interacted with in train (sorted).
  std::span<const ItemIndex> user_history(UserIndex u) const {
    return user_history_[u];
  }
  // r_j: users that interacted with item j in train (sorted).
  std::span<const UserIndex> item_history(ItemIndex j) const {
    return item_history_[j];
  }
  // Sorted items of user u in the given split.
  std::span<const ItemIndex> user_items(SplitKind kind, UserIndex u) const;

  bool IsTrainPositive(UserIndex u, ItemIndex j) const;

  DatasetStats Stats() const;

  // Same interactions with every value replaced by 1.
  InteractionDataset ToImplicit() const;

 private:
  void BuildIndices();

  Form form_ = Form::kExplicit;
  std::vector<std::string> user_ids_;
  std::vector<std::string> item_ids_;
  std::vector<Interaction> train_;
  std::vector<Interaction> validation_;
  std::vector<Interaction> test_;
  std::vector<std::vector<ItemIndex>> user_history_;
  std::vector<std::vector<UserIndex>> item_history_;
  std::vector<std::vector<ItemIndex>> user_validation_;
  std::vector<std::vector<ItemIndex>> user_test_;
};

// Random record-level split. Ratios are normalized to fractions; split sizes
// use largest-remainder rounding. Duplicate (user, item) pairs keep their
// first occurrence. Records without a rating yield an implicit dataset.
// Throws SplitError if any ratio is non-positive or a split ends up empty.
InteractionDataset Split(const std::vector<RawInteraction>& records,
                         const SplitRatios& ratios, Rng& rng);

// Logs a warning and returns the input unchanged if already implicit.
InteractionDataset ToImplicit(const InteractionDataset& dataset);

nlohmann::json SnapshotToJson(const InteractionDataset& dataset);
InteractionDataset SnapshotFromJson(const nlohmann::json& j);
void SaveSnapshot(const InteractionDataset& dataset,
                  const std::filesystem::path& path);
InteractionDataset LoadSnapshot(const std::filesystem::path& path);

}  // namespace autocf

#endif  // AUTOCF_DATA_DATASET_HPP_
