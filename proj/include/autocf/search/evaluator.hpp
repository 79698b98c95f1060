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

#ifndef AUTOCF_SEARCH_EVALUATOR_HPP_
#define AUTOCF_SEARCH_EVALUATOR_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "autocf/cfmodel/cf_model.hpp"
#include "autocf/cfmodel/config.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/predictor/predictor.hpp"
#include "autocf/train/trainer.hpp"

namespace autocf {

// Produces the EvalRecord of a candidate config.
class CandidateEvaluator {
 public:
  virtual ~CandidateEvaluator() = default;
  // Must be safe to call concurrently from several threads.
  virtual EvalRecord Evaluate(const ModelConfig& config) const = 0;
  // Evaluates configs on up to `workers` threads; results keep input order.
  std::vector<EvalRecord> EvaluateBatch(const std::vector<ModelConfig>& configs,
                                        std::size_t workers) const;
};

// Trains each candidate from scratch. The candidate's training seed is
// derived from the base seed and its canonical index, so results do not
// depend on evaluation order.
class TrainingEvaluator : public CandidateEvaluator {
 public:
  TrainingEvaluator(const InteractionDataset& dataset,
                    const SearchSpace& space, const TrainSpec& spec,
                    const ModelShape& shape = {});
  EvalRecord Evaluate(const ModelConfig& config) const override;

 private:
  const InteractionDataset* dataset_;
  const SearchSpace* space_;
  TrainSpec spec_;
  ModelShape shape_;
};

// Looks candidates up in a results file written by an earlier search
// (typically an exhaustive rand run).
class CachedEvaluator : public CandidateEvaluator {
 public:
  CachedEvaluator(const SearchSpace& space, std::vector<EvalRecord> records);
  static CachedEvaluator FromFile(const SearchSpace& space,
                                  const std::filesystem::path& path);

  // Throws ConfigError for configs missing from the cache.
  EvalRecord Evaluate(const ModelConfig& config) const override;
  bool Has(const ModelConfig& config) const;
  std::size_t size() const { return records_.size(); }

 private:
  const SearchSpace* space_;
  std::map<std::size_t, EvalRecord> records_;
};

// Record for a finished training run.
EvalRecord MakeRecord(const ModelConfig& config, const SearchSpace& space,
                      const TrainReport& report);

}  // namespace autocf

#endif  // AUTOCF_SEARCH_EVALUATOR_HPP_
