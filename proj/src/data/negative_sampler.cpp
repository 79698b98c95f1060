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

#include "autocf/data/negative_sampler.hpp"

#include <string>

#include "autocf/errors.hpp"

namespace autocf {

ItemIndex NegativeSampler::Sample(UserIndex u) {
  const auto history = dataset_->user_history(u);
  const std::size_t n = dataset_->num_items();
  if (history.size() >= n) {
    throw SamplingError("negative sampling: user " + std::to_string(u) +
                        " has interacted with all " + std::to_string(n) +
                        " items");
  }
  // Rejection is cheap while the history is a minority of the catalogue.
  if (2 * history.size() <= n) {
    while (true) {
      const auto j = static_cast<ItemIndex>(rng_.UniformInt(n));
      if (!dataset_->IsTrainPositive(u, j)) return j;
    }
  }
  // Otherwise pick the k-th non-interacted item directly.
  std::uint64_t k = rng_.UniformInt(n - history.size());
  std::size_t h = 0;
  for (ItemIndex j = 0; j < n; ++j) {
    if (h < history.size() && history[h] == j) {
      ++h;
      continue;
    }
    if (k-- == 0) return j;
  }
  throw SamplingError("negative sampling: internal enumeration failure");
}

}  // namespace autocf
