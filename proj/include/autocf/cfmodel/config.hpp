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

#ifndef AUTOCF_CFMODEL_CONFIG_HPP_
#define AUTOCF_CFMODEL_CONFIG_HPP_

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace autocf {

enum class InputEncoding : std::uint8_t { kId = 0, kHistory = 1 };
enum class EmbeddingFn : std::uint8_t { kMat = 0, kMlp = 1 };
// kPlus is opt-in (SearchSpace::allow_plus) and sits after the five default
// operations so default encodings are unaffected.
enum class InteractionFn : std::uint8_t {
  kMul = 0,
  kMinus = 1,
  kMin = 2,
  kMax = 3,
  kConcat = 4,
  kPlus = 5,
};
// kNorm (negative L2 norm) exists only for the CMF baseline; it is never part
// of a search space or an encoding.
enum class PredictionFn : std::uint8_t {
  kSum = 0,
  kVec = 1,
  kMlp = 2,
  kNorm = 3,
};

const char* Name(InputEncoding v);
const char* Name(EmbeddingFn v);
const char* Name(InteractionFn v);
const char* Name(PredictionFn v);

// One choice per stage: input encoding and embedding function for each side,
// then interaction and prediction.
struct StageChoice {
  InputEncoding user_encoding = InputEncoding::kId;
  InputEncoding item_encoding = InputEncoding::kId;
  EmbeddingFn user_embedding = EmbeddingFn::kMat;
  EmbeddingFn item_embedding = EmbeddingFn::kMat;
  InteractionFn interaction = InteractionFn::kMul;
  PredictionFn prediction = PredictionFn::kSum;

  // ID encoding admits only the MAT embedding on that side.
  bool IsCompatible() const;
  // "H,ID,MAT,MAT,MUL,SUM"
  std::string ToString() const;
  // "<H,ID,MAT,MAT,multiply,SUM>" with angle brackets, lower-case interaction.
  std::string ToTupleString() const;

  auto operator<=>(const StageChoice&) const = default;
};

// Human-readable statement of the compatibility rule, used in error messages.
extern const char* const kCompatibilityRule;

// Parses "H,ID,MAT,MAT,MUL,SUM" (case-insensitive; "History" and operation
// aliases such as "multiply" are accepted). Does not check compatibility.
// Throws ConfigError listing valid names on failure.
StageChoice ParseStageChoice(const std::string& text);

// All compatible tuples in canonical order (nested loops over the stages in
// declaration order). 135 tuples by default, 162 with allow_plus.
std::vector<StageChoice> EnumerateStageTuples(bool allow_plus = false);

struct ModelConfig {
  StageChoice stages;
  std::size_t dim_index = 0;
  std::size_t lr_index = 0;

  auto operator<=>(const ModelConfig&) const = default;
};

// Eight one-hot blocks: user encoding (2), item encoding (2), user embedding
// (2), item embedding (2), interaction (5, or 6 with plus), prediction (3),
// dimension (|S_dim|), learning rate (|S_lr|).
struct ConfigEncoding {
  std::array<std::vector<std::uint8_t>, 8> blocks;

  std::size_t length() const;
  std::vector<double> Flat() const;
  friend bool operator==(const ConfigEncoding&,
                         const ConfigEncoding&) = default;
};

// The config space: every compatible stage tuple crossed with the embedding
// dimension set and the learning rate set.
class SearchSpace {
 public:
  SearchSpace();
  SearchSpace(std::vector<std::size_t> dims, std::vector<double> lrs,
              bool allow_plus = false);

  const std::vector<std::size_t>& dims() const { return dims_; }
  const std::vector<double>& lrs() const { return lrs_; }
  bool allow_plus() const { return allow_plus_; }
  const std::vector<StageChoice>& stage_tuples() const { return tuples_; }

  std::size_t size() const {
    return tuples_.size() * dims_.size() * lrs_.size();
  }
  // Tuple-major, then dimension, then learning rate.
  ModelConfig ConfigAt(std::size_t canonical_index) const;
  std::size_t CanonicalIndex(const ModelConfig& config) const;
  bool Contains(const ModelConfig& config) const;

  std::size_t dim(const ModelConfig& c) const { return dims_.at(c.dim_index); }
  double lr(const ModelConfig& c) const { return lrs_.at(c.lr_index); }

  std::size_t EncodingLength() const;
  // Representation only; compatibility is not checked. Throws ConfigError for
  // stage values outside this space (kNorm, kPlus without allow_plus) or
  // out-of-range indices.
  ConfigEncoding Encode(const ModelConfig& config) const;
  // Throws ConfigError on malformed blocks (wrong length, not exactly one 1)
  // and, when require_compatible, on incompatible tuples.
  ModelConfig Decode(const ConfigEncoding& encoding,
                     bool require_compatible = true) const;
  ModelConfig DecodeFlat(std::span<const double> flat,
                         bool require_compatible = true) const;

  // "H,H,MLP,MLP,MAX,MLP|d=16|lr=0.001"
  std::string Format(const ModelConfig& config) const;
  // Inverse of Format. Rejects incompatible tuples and d/lr values outside
  // the space with a ConfigError.
  ModelConfig Parse(const std::string& text) const;

  friend bool operator==(const SearchSpace& a, const SearchSpace& b) {
    return a.dims_ == b.dims_ && a.lrs_ == b.lrs_ &&
           a.allow_plus_ == b.allow_plus_;
  }

 private:
  std::size_t TupleIndex(const StageChoice& s) const;

  std::vector<std::size_t> dims_;
  std::vector<double> lrs_;
  bool allow_plus_ = false;
  std::vector<StageChoice> tuples_;
};

// Shortest round-trip decimal text of a learning rate ("0.001").
std::string FormatReal(double value);

}  // namespace autocf

#endif  // AUTOCF_CFMODEL_CONFIG_HPP_
