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

#ifndef AUTOCF_TRAIN_TRAINER_HPP_
#define AUTOCF_TRAIN_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/baselines.hpp"
#include "autocf/cfmodel/cf_model.hpp"
#include "autocf/cfmodel/config.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/metrics/metrics.hpp"

namespace autocf {

enum class Task { kRating, kRanking };

const char* TaskName(Task task);
Task ParseTask(const std::string& name);
// rmse for rating, recall@20 for ranking.
Metric DefaultMetric(Task task);

struct TrainSpec {
  Task task = Task::kRating;
  std::size_t max_epochs = 200;
  std::size_t batch_size = 256;
  std::size_t patience = 10;
  std::size_t negatives_per_positive = 1;
  Metric validation_metric = Metric::kRmse;
  std::size_t top_k = 20;
  std::uint64_t seed = 0;
  // Also report the metric on the training split (rating task only).
  bool report_train_metric = false;

  static TrainSpec For(Task task);
  // Throws ConfigError when patience is 0 or >= max_epochs, batch size or
  // negatives are 0, or the metric does not suit the task.
  void Validate() const;
};

nlohmann::json TrainSpecToJson(const TrainSpec& spec);
TrainSpec TrainSpecFromJson(const nlohmann::json& j);

struct TrainReport {
  std::string config;  // text form; "+"-joined for fused models
  std::uint64_t seed = 0;
  std::string metric;  // name of the validation metric
  double best_validation = 0.0;
  std::size_t best_epoch = 0;  // 1-based; 0 when training failed at once
  std::size_t epochs_run = 0;
  std::vector<double> curve;  // validation metric per epoch
  std::map<std::string, double> test_metrics;
  std::optional<double> train_metric;
  double seconds = 0.0;
  bool failed = false;
  std::string failure;
};

// Wall-clock time is left out unless include_timing is set so that reports
// from repeated seeded runs are byte-identical.
nlohmann::json TrainReportToJson(const TrainReport& report,
                                 bool include_timing = false);
TrainReport TrainReportFromJson(const nlohmann::json& j);

// Trains the components of an additive model (one component for a single
// model) with mini-batch Adam. On return the components hold the parameters
// of the best validation epoch.
class Trainer {
 public:
  // Throws ConfigError if the spec is invalid or the task does not match the
  // dataset form (ranking needs implicit data, rating explicit).
  Trainer(const InteractionDataset& dataset, const TrainSpec& spec);

  TrainReport Train(std::vector<CfModel>& components, double lr) const;

  // Validation (or other split) metric of the current parameters.
  double Evaluate(const std::vector<CfModel>& components, SplitKind split,
                  Metric metric) const;
  std::map<std::string, double> TestMetrics(
      const std::vector<CfModel>& components) const;

 private:
  const InteractionDataset* dataset_;
  TrainSpec spec_;
};

// Scores all items for a user under the additive model, exploiting cached
// item embeddings. Exact for every pair outside the training split.
class ComponentScorer {
 public:
  ComponentScorer(const std::vector<CfModel>& components,
                  const InteractionDataset& dataset);
  void operator()(UserIndex u, std::span<double> scores) const;

 private:
  const std::vector<CfModel>* components_;
  const InteractionDataset* dataset_;
  std::vector<DenseMatrix> item_embeddings_;
};

// Sum of component scores for (u, j), with target exclusion.
double ScorePair(const std::vector<CfModel>& components, UserIndex u,
                 ItemIndex j, const InteractionDataset& dataset);

// Instantiates config (model seed derived from spec.seed) and trains it.
TrainReport TrainConfig(const ModelConfig& config, const SearchSpace& space,
                        const InteractionDataset& dataset,
                        const TrainSpec& spec,
                        std::vector<CfModel>* trained = nullptr,
                        const ModelShape& shape = {});

// Same for a baseline (single or fused) at embedding size dim.
TrainReport TrainBaseline(const Baseline& baseline, std::size_t dim, double lr,
                          const InteractionDataset& dataset,
                          const TrainSpec& spec,
                          std::vector<CfModel>* trained = nullptr,
                          const ModelShape& shape = {});

// One component of a fused model: a stage tuple at its embedding size.
struct FusedComponent {
  StageChoice stages;
  std::size_t dim = 0;
};

// Fresh joint training of several components as one additive model.
TrainReport TrainFused(const std::vector<FusedComponent>& components,
                       double lr, const InteractionDataset& dataset,
                       const TrainSpec& spec, const std::string& label,
                       std::vector<CfModel>* trained = nullptr,
                       const ModelShape& shape = {});

}  // namespace autocf

#endif  // AUTOCF_TRAIN_TRAINER_HPP_
