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

#ifndef AUTOCF_NUMCORE_ADAM_HPP_
#define AUTOCF_NUMCORE_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "autocf/numcore/dense_matrix.hpp"

namespace autocf {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Moment accumulators for a fixed, ordered list of parameter blocks.
class AdamState {
 public:
  AdamState() = default;
  AdamState(const std::vector<DenseMatrix*>& params, AdamConfig config = {});

  std::int64_t step() const { return step_; }
  const AdamConfig& config() const { return config_; }
  const std::vector<DenseMatrix>& first_moment() const { return first_; }
  const std::vector<DenseMatrix>& second_moment() const { return second_; }

  // Restores a previously saved state; shapes are checked at the next step.
  void Restore(std::int64_t step, std::vector<DenseMatrix> first,
               std::vector<DenseMatrix> second);

 private:
  friend void AdamStep(const std::vector<DenseMatrix*>&,
                       const std::vector<const DenseMatrix*>&, AdamState&,
                       double);
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<DenseMatrix> first_;
  std::vector<DenseMatrix> second_;
};

// One bias-corrected Adam update (descent direction: params -= ...).
// Throws InternalError if params, grads and state disagree in count or shape.
void AdamStep(const std::vector<DenseMatrix*>& params,
              const std::vector<const DenseMatrix*>& grads, AdamState& state,
              double lr);

}  // namespace autocf

#endif  // AUTOCF_NUMCORE_ADAM_HPP_
