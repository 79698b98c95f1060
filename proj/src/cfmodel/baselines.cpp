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

#include "autocf/cfmodel/baselines.hpp"

#include <algorithm>
#include <cctype>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

constexpr InputEncoding kId = InputEncoding::kId;
constexpr InputEncoding kHist = InputEncoding::kHistory;
constexpr EmbeddingFn kMat = EmbeddingFn::kMat;
constexpr EmbeddingFn kMlpEmb = EmbeddingFn::kMlp;

StageChoice Make(InputEncoding ue, InputEncoding ie, EmbeddingFn uf,
                 EmbeddingFn jf, InteractionFn g, PredictionFn h) {
  return StageChoice{ue, ie, uf, jf, g, h};
}

std::string Lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const std::vector<Baseline>& SingleBaselines() {
  static const std::vector<Baseline> kSingles = {
      {"MF", {Make(kId, kId, kMat, kMat, InteractionFn::kMul,
                   PredictionFn::kSum)}},
      {"FISM", {Make(kHist, kId, kMat, kMat, InteractionFn::kMul,
                     PredictionFn::kSum)}},
      {"GMF", {Make(kId, kId, kMat, kMat, InteractionFn::kMul,
                    PredictionFn::kVec)}},
      {"MLP", {Make(kId, kId, kMat, kMat, InteractionFn::kConcat,
                    PredictionFn::kMlp)}},
      {"CMF", {Make(kId, kId, kMat, kMat, InteractionFn::kMinus,
                    PredictionFn::kNorm)}},
      {"DMF", {Make(kHist, kHist, kMlpEmb, kMlpEmb, InteractionFn::kMul,
                    PredictionFn::kSum)}},
      {"JNCF-Dot", {Make(kHist, kHist, kMlpEmb, kMlpEmb, InteractionFn::kMul,
                         PredictionFn::kMlp)}},
      {"JNCF-Cat", {Make(kHist, kHist, kMlpEmb, kMlpEmb,
                         InteractionFn::kConcat, PredictionFn::kMlp)}},
  };
  return kSingles;
}

const std::vector<Baseline>& FusedBaselines() {
  static const std::vector<Baseline> kFused = {
      {"SVD++",
       {Make(kId, kId, kMat, kMat, InteractionFn::kMul, PredictionFn::kSum),
        Make(kHist, kId, kMat, kMat, InteractionFn::kMul,
             PredictionFn::kSum)}},
      {"NeuMF",
       {Make(kId, kId, kMat, kMat, InteractionFn::kMul, PredictionFn::kVec),
        Make(kId, kId, kMat, kMat, InteractionFn::kConcat,
             PredictionFn::kMlp)}},
      // One CONCAT + MLP tower per (user encoding, item encoding) pair.
      {"DELF",
       {Make(kId, kId, kMat, kMat, InteractionFn::kConcat, PredictionFn::kMlp),
        Make(kId, kHist, kMat, kMat, InteractionFn::kConcat,
             PredictionFn::kMlp),
        Make(kHist, kId, kMat, kMat, InteractionFn::kConcat,
             PredictionFn::kMlp),
        Make(kHist, kHist, kMat, kMat, InteractionFn::kConcat,
             PredictionFn::kMlp)}},
  };
  return kFused;
}

const Baseline& FindBaseline(const std::string& name) {
  const std::string key = Lower(name);
  for (const auto* list : {&SingleBaselines(), &FusedBaselines()}) {
    for (const Baseline& b : *list) {
      if (Lower(b.name) == key) return b;
    }
  }
  std::string known;
  for (const auto* list : {&SingleBaselines(), &FusedBaselines()}) {
    for (const Baseline& b : *list) {
      known += known.empty() ? b.name : ", " + b.name;
    }
  }
  throw ConfigError("unknown baseline '" + name + "'; known: " + known);
}

}  // namespace autocf
