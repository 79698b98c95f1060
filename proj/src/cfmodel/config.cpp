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

#include "autocf/cfmodel/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

constexpr std::size_t kInteractionDefault = 5;
constexpr std::size_t kPredictionCount = 3;

std::string Upper(std::string s) {
  for (char& c : s) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

std::string TrimCopy(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(TrimCopy(cur));
  if (!s.empty() && s.back() == sep) parts.push_back("");
  return parts;
}

InputEncoding ParseEncoding(const std::string& raw) {
  const std::string t = Upper(raw);
  if (t == "ID") return InputEncoding::kId;
  if (t == "H" || t == "HISTORY") return InputEncoding::kHistory;
  throw ConfigError("unknown input encoding '" + raw +
                    "' (valid: ID, H/History)");
}

EmbeddingFn ParseEmbedding(const std::string& raw) {
  const std::string t = Upper(raw);
  if (t == "MAT") return EmbeddingFn::kMat;
  if (t == "MLP") return EmbeddingFn::kMlp;
  throw ConfigError("unknown embedding function '" + raw +
                    "' (valid: MAT, MLP)");
}

InteractionFn ParseInteraction(const std::string& raw) {
  const std::string t = Upper(raw);
  if (t == "MUL" || t == "MULTIPLY") return InteractionFn::kMul;
  if (t == "MINUS") return InteractionFn::kMinus;
  if (t == "MIN") return InteractionFn::kMin;
  if (t == "MAX") return InteractionFn::kMax;
  if (t == "CONCAT") return InteractionFn::kConcat;
  if (t == "PLUS") return InteractionFn::kPlus;
  throw ConfigError("unknown interaction function '" + raw +
                    "' (valid: MUL, MINUS, MIN, MAX, CONCAT, PLUS)");
}

PredictionFn ParsePrediction(const std::string& raw) {
  const std::string t = Upper(raw);
  if (t == "SUM") return PredictionFn::kSum;
  if (t == "VEC") return PredictionFn::kVec;
  if (t == "MLP") return PredictionFn::kMlp;
  if (t == "NORM") return PredictionFn::kNorm;
  throw ConfigError("unknown prediction function '" + raw +
                    "' (valid: SUM, VEC, MLP)");
}

std::vector<std::uint8_t> OneHot(std::size_t length, std::size_t hot) {
  std::vector<std::uint8_t> v(length, 0);
  v[hot] = 1;
  return v;
}

const char* const kBlockNames[8] = {
    "user encoding",      "item encoding", "user embedding",
    "item embedding",     "interaction",   "prediction",
    "embedding dimension", "learning rate"};

}  // namespace

const char* const kCompatibilityRule =
    "an ID input encoding is only compatible with the MAT embedding function "
    "on the same side";

const char* Name(InputEncoding v) {
  return v == InputEncoding::kId ? "ID" : "H";
}

const char* Name(EmbeddingFn v) {
  return v == EmbeddingFn::kMat ? "MAT" : "MLP";
}

const char* Name(InteractionFn v) {
  switch (v) {
    case InteractionFn::kMul:
      return "MUL";
    case InteractionFn::kMinus:
      return "MINUS";
    case InteractionFn::kMin:
      return "MIN";
    case InteractionFn::kMax:
      return "MAX";
    case InteractionFn::kConcat:
      return "CONCAT";
    case InteractionFn::kPlus:
      return "PLUS";
  }
  return "?";
}

const char* Name(PredictionFn v) {
  switch (v) {
    case PredictionFn::kSum:
      return "SUM";
    case PredictionFn::kVec:
      return "VEC";
    case PredictionFn::kMlp:
      return "MLP";
    case PredictionFn::kNorm:
      return "NORM";
  }
  return "?";
}

bool StageChoice::IsCompatible() const {
  if (user_encoding == InputEncoding::kId &&
      user_embedding != EmbeddingFn::kMat) {
    return false;
  }
  if (item_encoding == InputEncoding::kId &&
      item_embedding != EmbeddingFn::kMat) {
    return false;
  }
  return true;
}

std::string StageChoice::ToString() const {
  return fmt::format("{},{},{},{},{},{}", Name(user_encoding),
                     Name(item_encoding), Name(user_embedding),
                     Name(item_embedding), Name(interaction),
                     Name(prediction));
}

std::string StageChoice::ToTupleString() const {
  const char* inter = "";
  switch (interaction) {
    case InteractionFn::kMul:
      inter = "multiply";
      break;
    case InteractionFn::kMinus:
      inter = "minus";
      break;
    case InteractionFn::kMin:
      inter = "min";
      break;
    case InteractionFn::kMax:
      inter = "max";
      break;
    case InteractionFn::kConcat:
      inter = "concat";
      break;
    case InteractionFn::kPlus:
      inter = "plus";
      break;
  }
  return fmt::format("⟨{},{},{},{},{},{}⟩", Name(user_encoding),
                     Name(item_encoding), Name(user_embedding),
                     Name(item_embedding), inter, Name(prediction));
}

StageChoice ParseStageChoice(const std::string& text) {
  const auto parts = SplitOn(text, ',');
  if (parts.size() != 6) {
    throw ConfigError(
        "stage tuple '" + text +
        "' must have six comma-separated fields: user encoding, item "
        "encoding, user embedding, item embedding, interaction, prediction");
  }
  StageChoice s;
  s.user_encoding = ParseEncoding(parts[0]);
  s.item_encoding = ParseEncoding(parts[1]);
  s.user_embedding = ParseEmbedding(parts[2]);
  s.item_embedding = ParseEmbedding(parts[3]);
  s.interaction = ParseInteraction(parts[4]);
  s.prediction = ParsePrediction(parts[5]);
  return s;
}

std::vector<StageChoice> EnumerateStageTuples(bool allow_plus) {
  const std::size_t interactions = kInteractionDefault + (allow_plus ? 1 : 0);
  std::vector<StageChoice> out;
  for (int ue = 0; ue < 2; ++ue) {
    for (int ie = 0; ie < 2; ++ie) {
      for (int um = 0; um < 2; ++um) {
        for (int im = 0; im < 2; ++im) {
          for (std::size_t g = 0; g < interactions; ++g) {
            for (std::size_t h = 0; h < kPredictionCount; ++h) {
              StageChoice s{static_cast<InputEncoding>(ue),
                            static_cast<InputEncoding>(ie),
                            static_cast<EmbeddingFn>(um),
                            static_cast<EmbeddingFn>(im),
                            static_cast<InteractionFn>(g),
                            static_cast<PredictionFn>(h)};
              if (s.IsCompatible()) out.push_back(s);
            }
          }
        }
      }
    }
  }
  return out;
}

std::size_t ConfigEncoding::length() const {
  std::size_t n = 0;
  for (const auto& b : blocks) n += b.size();
  return n;
}

std::vector<double> ConfigEncoding::Flat() const {
  std::vector<double> flat;
  flat.reserve(length());
  for (const auto& b : blocks) {
    for (std::uint8_t v : b) flat.push_back(v);
  }
  return flat;
}

SearchSpace::SearchSpace()
    : SearchSpace({8, 16, 32, 64}, {0.0005, 0.001, 0.005, 0.01}) {}

SearchSpace::SearchSpace(std::vector<std::size_t> dims, std::vector<double> lrs,
                         bool allow_plus)
    : dims_(std::move(dims)),
      lrs_(std::move(lrs)),
      allow_plus_(allow_plus),
      tuples_(EnumerateStageTuples(allow_plus)) {
  if (dims_.empty() || lrs_.empty()) {
    throw ConfigError("search space: dimension and learning-rate sets must "
                      "be non-empty");
  }
  for (std::size_t d : dims_) {
    if (d == 0) throw ConfigError("search space: zero embedding dimension");
  }
  for (double lr : lrs_) {
    if (!(lr > 0.0) || !std::isfinite(lr)) {
      throw ConfigError("search space: learning rates must be positive");
    }
  }
}

std::size_t SearchSpace::TupleIndex(const StageChoice& s) const {
  const auto it = std::lower_bound(tuples_.begin(), tuples_.end(), s);
  if (it == tuples_.end() || *it != s) {
    throw ConfigError("stage tuple " + s.ToString() +
                      " is not in the search space");
  }
  return static_cast<std::size_t>(it - tuples_.begin());
}

ModelConfig SearchSpace::ConfigAt(std::size_t canonical_index) const {
  if (canonical_index >= size()) {
    throw ConfigError("config index out of range");
  }
  const std::size_t per_tuple = dims_.size() * lrs_.size();
  ModelConfig c;
  c.stages = tuples_[canonical_index / per_tuple];
  const std::size_t rest = canonical_index % per_tuple;
  c.dim_index = rest / lrs_.size();
  c.lr_index = rest % lrs_.size();
  return c;
}

std::size_t SearchSpace::CanonicalIndex(const ModelConfig& c) const {
  if (c.dim_index >= dims_.size() || c.lr_index >= lrs_.size()) {
    throw ConfigError("config dimension/learning-rate index out of range");
  }
  return (TupleIndex(c.stages) * dims_.size() + c.dim_index) * lrs_.size() +
         c.lr_index;
}

bool SearchSpace::Contains(const ModelConfig& c) const {
  if (c.dim_index >= dims_.size() || c.lr_index >= lrs_.size()) return false;
  return std::binary_search(tuples_.begin(), tuples_.end(), c.stages);
}

std::size_t SearchSpace::EncodingLength() const {
  return 2 + 2 + 2 + 2 + kInteractionDefault + (allow_plus_ ? 1 : 0) +
         kPredictionCount + dims_.size() + lrs_.size();
}

ConfigEncoding SearchSpace::Encode(const ModelConfig& c) const {
  const StageChoice& s = c.stages;
  if (s.prediction == PredictionFn::kNorm) {
    throw ConfigError("the NORM prediction head is not part of the search "
                      "space and has no encoding");
  }
  if (s.interaction == InteractionFn::kPlus && !allow_plus_) {
    throw ConfigError("PLUS interaction is disabled in this search space");
  }
  if (c.dim_index >= dims_.size() || c.lr_index >= lrs_.size()) {
    throw ConfigError("config dimension/learning-rate index out of range");
  }
  ConfigEncoding e;
  e.blocks[0] = OneHot(2, static_cast<std::size_t>(s.user_encoding));
  e.blocks[1] = OneHot(2, static_cast<std::size_t>(s.item_encoding));
  e.blocks[2] = OneHot(2, static_cast<std::size_t>(s.user_embedding));
  e.blocks[3] = OneHot(2, static_cast<std::size_t>(s.item_embedding));
  e.blocks[4] = OneHot(kInteractionDefault + (allow_plus_ ? 1 : 0),
                       static_cast<std::size_t>(s.interaction));
  e.blocks[5] = OneHot(kPredictionCount, static_cast<std::size_t>(s.prediction));
  e.blocks[6] = OneHot(dims_.size(), c.dim_index);
  e.blocks[7] = OneHot(lrs_.size(), c.lr_index);
  return e;
}

ModelConfig SearchSpace::Decode(const ConfigEncoding& e,
                                bool require_compatible) const {
  const std::size_t expected[8] = {
      2, 2, 2, 2, kInteractionDefault + (allow_plus_ ? 1 : 0),
      kPredictionCount, dims_.size(), lrs_.size()};
  std::size_t hot[8];
  for (int b = 0; b < 8; ++b) {
    const auto& block = e.blocks[b];
    if (block.size() != expected[b]) {
      throw ConfigError(fmt::format("decode: {} block has length {}, "
                                    "expected {}",
                                    kBlockNames[b], block.size(),
                                    expected[b]));
    }
    std::size_t ones = 0;
    for (std::size_t i = 0; i < block.size(); ++i) {
      if (block[i] == 1) {
        ++ones;
        hot[b] = i;
      } else if (block[i] != 0) {
        ones = 2;
        break;
      }
    }
    if (ones != 1) {
      throw ConfigError(fmt::format(
          "decode: {} block is not one-hot", kBlockNames[b]));
    }
  }
  ModelConfig c;
  c.stages.user_encoding = static_cast<InputEncoding>(hot[0]);
  c.stages.item_encoding = static_cast<InputEncoding>(hot[1]);
  c.stages.user_embedding = static_cast<EmbeddingFn>(hot[2]);
  c.stages.item_embedding = static_cast<EmbeddingFn>(hot[3]);
  c.stages.interaction = static_cast<InteractionFn>(hot[4]);
  c.stages.prediction = static_cast<PredictionFn>(hot[5]);
  c.dim_index = hot[6];
  c.lr_index = hot[7];
  if (require_compatible && !c.stages.IsCompatible()) {
    throw ConfigError("decode: " + c.stages.ToString() +
                      " is incompatible: " + kCompatibilityRule);
  }
  return c;
}

ModelConfig SearchSpace::DecodeFlat(std::span<const double> flat,
                                    bool require_compatible) const {
  if (flat.size() != EncodingLength()) {
    throw ConfigError(fmt::format("decode: encoding length {}, expected {}",
                                  flat.size(), EncodingLength()));
  }
  const std::size_t lengths[8] = {
      2, 2, 2, 2, kInteractionDefault + (allow_plus_ ? 1 : 0),
      kPredictionCount, dims_.size(), lrs_.size()};
  ConfigEncoding e;
  std::size_t offset = 0;
  for (int b = 0; b < 8; ++b) {
    for (std::size_t i = 0; i < lengths[b]; ++i) {
      const double v = flat[offset + i];
      e.blocks[b].push_back(v == 1.0 ? 1 : (v == 0.0 ? 0 : 2));
    }
    offset += lengths[b];
  }
  return Decode(e, require_compatible);
}

std::string FormatReal(double value) { return fmt::format("{}", value); }

std::string SearchSpace::Format(const ModelConfig& c) const {
  return fmt::format("{}|d={}|lr={}", c.stages.ToString(), dim(c),
                     FormatReal(lr(c)));
}

ModelConfig SearchSpace::Parse(const std::string& text) const {
  const auto parts = SplitOn(text, '|');
  if (parts.size() != 3 || parts[1].rfind("d=", 0) != 0 ||
      parts[2].rfind("lr=", 0) != 0) {
    throw ConfigError("config '" + text +
                      "' must look like 'H,H,MLP,MLP,MAX,MLP|d=16|lr=0.001'");
  }
  ModelConfig c;
  c.stages = ParseStageChoice(parts[0]);
  if (!c.stages.IsCompatible()) {
    throw ConfigError("config '" + text + "' is incompatible: " +
                      kCompatibilityRule);
  }
  if (c.stages.interaction == InteractionFn::kPlus && !allow_plus_) {
    throw ConfigError("PLUS interaction is disabled in this search space");
  }
  if (c.stages.prediction == PredictionFn::kNorm) {
    throw ConfigError("the NORM prediction head is baseline-only (valid "
                      "prediction functions: SUM, VEC, MLP)");
  }
  const std::string dim_text = parts[1].substr(2);
  std::size_t d = 0;
  const auto [p1, e1] =
      std::from_chars(dim_text.data(), dim_text.data() + dim_text.size(), d);
  if (e1 != std::errc() || p1 != dim_text.data() + dim_text.size()) {
    throw ConfigError("config '" + text + "': bad embedding dimension");
  }
  const auto dit = std::find(dims_.begin(), dims_.end(), d);
  if (dit == dims_.end()) {
    throw ConfigError(fmt::format("config '{}': d={} is not in S_dim", text, d));
  }
  c.dim_index = static_cast<std::size_t>(dit - dims_.begin());

  const std::string lr_text = parts[2].substr(3);
  double lr = 0.0;
  const auto [p2, e2] =
      std::from_chars(lr_text.data(), lr_text.data() + lr_text.size(), lr);
  if (e2 != std::errc() || p2 != lr_text.data() + lr_text.size()) {
    throw ConfigError("config '" + text + "': bad learning rate");
  }
  const auto lit = std::find_if(lrs_.begin(), lrs_.end(), [lr](double v) {
    return std::abs(v - lr) <= 1e-12 * std::max(1.0, std::abs(v));
  });
  if (lit == lrs_.end()) {
    throw ConfigError("config '" + text + "': lr=" + lr_text +
                      " is not in S_lr");
  }
  c.lr_index = static_cast<std::size_t>(lit - lrs_.begin());
  return c;
}

}  // namespace autocf
