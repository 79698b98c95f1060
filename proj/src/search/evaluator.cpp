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

#include "autocf/search/evaluator.hpp"

#include <atomic>
#include <exception>
#include <thread>

#include "autocf/errors.hpp"
#include "autocf/numcore/rng.hpp"
#include "autocf/search/history.hpp"

namespace autocf {

std::vector<EvalRecord> CandidateEvaluator::EvaluateBatch(
    const std::vector<ModelConfig>& configs, std::size_t workers) const {
  std::vector<EvalRecord> out(configs.size());
  const std::size_t threads = std::min(std::max<std::size_t>(workers, 1),
                                       configs.size());
  if (threads <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) {
      out[i] = Evaluate(configs[i]);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          out[i] = Evaluate(configs[i]);
        }
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

EvalRecord MakeRecord(const ModelConfig& config, const SearchSpace& space,
                      const TrainReport& report) {
  EvalRecord r;
  r.config = config;
  r.config_text = space.Format(config);
  r.encoding = space.Encode(config);
  r.valid_metric = report.best_validation;
  r.test_metrics = report.test_metrics;
  r.cost_seconds = report.seconds;
  r.failed = report.failed;
  return r;
}

TrainingEvaluator::TrainingEvaluator(const InteractionDataset& dataset,
                                     const SearchSpace& space,
                                     const TrainSpec& spec,
                                     const ModelShape& shape)
    : dataset_(&dataset), space_(&space), spec_(spec), shape_(shape) {
  spec_.Validate();
}

EvalRecord TrainingEvaluator::Evaluate(const ModelConfig& config) const {
  TrainSpec spec = spec_;
  spec.seed = MixSeed(spec_.seed, space_->CanonicalIndex(config));
  const TrainReport report =
      TrainConfig(config, *space_, *dataset_, spec, nullptr, shape_);
  return MakeRecord(config, *space_, report);
}

CachedEvaluator::CachedEvaluator(const SearchSpace& space,
                                 std::vector<EvalRecord> records)
    : space_(&space) {
  for (EvalRecord& r : records) {
    const std::size_t idx = space.CanonicalIndex(r.config);
    records_[idx] = std::move(r);
  }
}

CachedEvaluator CachedEvaluator::FromFile(const SearchSpace& space,
                                          const std::filesystem::path& path) {
  return CachedEvaluator(space, ReadHistoryFile(path, space).records);
}

bool CachedEvaluator::Has(const ModelConfig& config) const {
  return records_.count(space_->CanonicalIndex(config)) > 0;
}

EvalRecord CachedEvaluator::Evaluate(const ModelConfig& config) const {
  const auto it = records_.find(space_->CanonicalIndex(config));
  if (it == records_.end()) {
    throw ConfigError("config " + space_->Format(config) +
                      " is not in the evaluation cache");
  }
  return it->second;
}

}  // namespace autocf
