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

#ifndef AUTOCF_DATA_NEGATIVE_SAMPLER_HPP_
#define AUTOCF_DATA_NEGATIVE_SAMPLER_HPP_

#include <cstdint>

#include "autocf/data/dataset.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

// Uniform sampler over the items a user has not interacted with in train.
class NegativeSampler {
 public:
  NegativeSampler(const InteractionDataset& dataset, std::uint64_t seed)
      : dataset_(&dataset), rng_(seed) {}

  // Throws SamplingError if u has interacted with every item.
  ItemIndex Sample(UserIndex u);

  Rng& rng() { return rng_; }

 private:
  const InteractionDataset* dataset_;
  Rng rng_;
};

}  // namespace autocf

#endif  // AUTOCF_DATA_NEGATIVE_SAMPLER_HPP_
