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

#ifndef AUTOCF_CFMODEL_BASELINES_HPP_
#define AUTOCF_CFMODEL_BASELINES_HPP_

#include <string>
#include <vector>

#include "autocf/cfmodel/config.hpp"

namespace autocf {

// A human-designed model written as one stage tuple, or as the additive
// fusion of several.
struct Baseline {
  std::string name;
  std::vector<StageChoice> components;

  bool fused() const { return components.size() > 1; }
};

// MF, FISM, GMF, MLP, CMF, DMF, JNCF-Dot, JNCF-Cat.
const std::vector<Baseline>& SingleBaselines();
// SVD++, NeuMF, DELF.
const std::vector<Baseline>& FusedBaselines();
// Case-insensitive lookup over both lists; throws ConfigError if unknown.
const Baseline& FindBaseline(const std::string& name);

}  // namespace autocf

#endif  // AUTOCF_CFMODEL_BASELINES_HPP_
