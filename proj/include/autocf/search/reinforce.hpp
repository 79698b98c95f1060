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

#ifndef AUTOCF_SEARCH_REINFORCE_HPP_
#define AUTOCF_SEARCH_REINFORCE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "json.hpp"

#include "autocf/cfmodel/config.hpp"
#include "autocf/numcore/adam.hpp"
#include "autocf/numcore/dense_matrix.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

struct ReinforceOptions {
  double lr = 0.05;
  // Attempts before Sample gives up on finding a compatible config.
  std::size_t max_attempts = 100000;
};

// Policy over configs: one independent softmax per encoding block, trained
// with REINFORCE against a running-mean reward baseline.
class ReinforceController {
 public:
  ReinforceController(const SearchSpace& space, std::uint64_t seed,
                      ReinforceOptions options = {});

  // Draws each block independently; incompatible tuples are redrawn.
  ModelConfig Sample();
  // Block choices of a config, one index per block.
  std::array<std::size_t, 8> Choices(const ModelConfig& config) const;
  double LogProbability(const ModelConfig& config) const;

  // One Adam step on -mean_i (reward_i - baseline) * log pi(config_i). The
  // baseline is the mean of all earlier rewards (of this batch when none).
  void Update(const std::vector<ModelConfig>& configs,
              const std::vector<double>& rewards);

  std::vector<double> Probabilities(std::size_t block) const;
  const std::array<DenseMatrix, 8>& logits() const { return logits_; }
  std::array<DenseMatrix, 8>& mutable_logits() { return logits_; }
  double baseline() const { return baseline_; }
  std::size_t reward_count() const { return reward_count_; }

  nlohmann::json ToJson() const;
  void LoadJson(const nlohmann::json& j);

 private:
  std::vector<DenseMatrix*> Parameters();

  const SearchSpace* space_;
  ReinforceOptions options_;
  std::array<DenseMatrix, 8> logits_;
  AdamState adam_;
  Rng rng_;
  double baseline_ = 0.0;
  std::size_t reward_count_ = 0;
};

}  // namespace autocf

#endif  // AUTOCF_SEARCH_REINFORCE_HPP_
