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

#ifndef AUTOCF_PREDICTOR_PREDICTOR_HPP_
#define AUTOCF_PREDICTOR_PREDICTOR_HPP_

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/config.hpp"
#include "autocf/numcore/adam.hpp"
#include "autocf/numcore/mlp.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

// One evaluated candidate.
struct EvalRecord {
  ModelConfig config;
  std::string config_text;
  ConfigEncoding encoding;
  double valid_metric = 0.0;
  std::map<std::string, double> test_metrics;
  double cost_seconds = 0.0;
  bool failed = false;
};

nlohmann::json EvalRecordToJson(const EvalRecord& record);
// Re-parses config_text against the space and checks the stored encoding.
EvalRecord EvalRecordFromJson(const nlohmann::json& j,
                              const SearchSpace& space);

struct PredictorOptions {
  std::vector<std::size_t> hidden = {8, 4};
  double lr = 0.001;
  std::size_t steps_per_fit = 200;
  // Pairs per fit = min(pair_budget_factor * |H|, |H| (|H| - 1) / 2).
  std::size_t pair_budget_factor = 10;
};

struct FitSummary {
  bool skipped = false;
  std::size_t pairs = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// MLP over a config's concatenated one-hot encoding, trained with a pairwise
// logistic loss so that better configs receive higher scores.
class SurrogatePredictor {
 public:
  SurrogatePredictor(std::size_t encoding_length, bool higher_is_better,
                     std::uint64_t seed, PredictorOptions options = {});

  std::size_t encoding_length() const { return encoding_length_; }
  bool higher_is_better() const { return higher_is_better_; }
  const PredictorOptions& options() const { return options_; }
  const MlpNet& net() const { return net_; }
  MlpNet& mutable_net() { return net_; }

  // Throws ConfigError on a length mismatch.
  double Predict(std::span<const double> encoding) const;
  double Predict(const ConfigEncoding& encoding) const;

  // Warm-started pairwise training on freshly drawn pairs from history.
  // Pairs with equal metrics are skipped; failed records are always the
  // worse side. With fewer than two distinct values this is a no-op.
  FitSummary Fit(const std::vector<EvalRecord>& history);

  // Mean pairwise loss of the current weights on (better, worse) index
  // pairs into encodings.
  double PairLoss(const std::vector<std::vector<double>>& encodings,
                  const std::vector<std::pair<std::size_t, std::size_t>>&
                      pairs) const;

  // Indices of candidates, best predicted first; ties go to the smaller
  // tie_key (canonical config index).
  std::vector<std::size_t> Rank(
      const std::vector<std::vector<double>>& encodings,
      const std::vector<std::size_t>& tie_keys) const;

  nlohmann::json ToJson() const;
  void LoadJson(const nlohmann::json& j);

 private:
  // Mean loss; accumulates gradients into grad when non-null.
  double PairObjective(const std::vector<std::vector<double>>& encodings,
                       const std::vector<std::pair<std::size_t, std::size_t>>&
                           pairs,
                       MlpNet::Gradient* grad) const;

  std::size_t encoding_length_;
  bool higher_is_better_;
  PredictorOptions options_;
  MlpNet net_;
  AdamState adam_;
  Rng rng_;
};

// Orders candidates by a score vector: higher first, ties by tie_keys.
std::vector<std::size_t> RankByScore(std::span<const double> scores,
                                     std::span<const std::size_t> tie_keys);

}  // namespace autocf

#endif  // AUTOCF_PREDICTOR_PREDICTOR_HPP_
