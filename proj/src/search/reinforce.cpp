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

#include "autocf/search/reinforce.hpp"

#include <algorithm>
#include <cmath>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

std::vector<double> Softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp(logits[i] - top);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

ReinforceController::ReinforceController(const SearchSpace& space,
                                         std::uint64_t seed,
                                         ReinforceOptions options)
    : space_(&space), options_(options), rng_(seed) {
  const ConfigEncoding probe = space.Encode(space.ConfigAt(0));
  for (std::size_t b = 0; b < logits_.size(); ++b) {
    logits_[b] = DenseMatrix(1, probe.blocks[b].size());
  }
  adam_ = AdamState(Parameters());
}

std::vector<DenseMatrix*> ReinforceController::Parameters() {
  std::vector<DenseMatrix*> out;
  for (DenseMatrix& m : logits_) out.push_back(&m);
  return out;
}

std::vector<double> ReinforceController::Probabilities(
    std::size_t block) const {
  return Softmax(logits_.at(block).values());
}

ModelConfig ReinforceController::Sample() {
  std::array<std::vector<double>, 8> probs;
  for (std::size_t b = 0; b < probs.size(); ++b) probs[b] = Probabilities(b);
  for (std::size_t attempt = 0; attempt < options_.max_attempts; ++attempt) {
    ConfigEncoding e;
    for (std::size_t b = 0; b < probs.size(); ++b) {
      e.blocks[b].assign(probs[b].size(), 0);
      e.blocks[b][rng_.Categorical(probs[b])] = 1;
    }
    const ModelConfig c = space_->Decode(e, /*require_compatible=*/false);
    if (c.stages.IsCompatible()) return c;
  }
  throw InternalError("controller found no compatible config");
}

std::array<std::size_t, 8> ReinforceController::Choices(
    const ModelConfig& config) const {
  const ConfigEncoding e = space_->Encode(config);
  std::array<std::size_t, 8> out{};
  for (std::size_t b = 0; b < out.size(); ++b) {
    out[b] = static_cast<std::size_t>(
        std::find(e.blocks[b].begin(), e.blocks[b].end(), 1) -
        e.blocks[b].begin());
  }
  return out;
}

double ReinforceController::LogProbability(const ModelConfig& config) const {
  const auto choice = Choices(config);
  double lp = 0.0;
  for (std::size_t b = 0; b < choice.size(); ++b) {
    lp += std::log(Probabilities(b)[choice[b]]);
  }
  return lp;
}

void ReinforceController::Update(const std::vector<ModelConfig>& configs,
                                 const std::vector<double>& rewards) {
  if (configs.size() != rewards.size()) {
    throw ConfigError("reinforce: configs and rewards differ in length");
  }
  if (configs.empty()) return;
  double batch_sum = 0.0;
  for (double r : rewards) batch_sum += r;
  const double n = static_cast<double>(configs.size());
  const double base = reward_count_ == 0 ? batch_sum / n : baseline_;

  std::array<std::vector<double>, 8> probs;
  for (std::size_t b = 0; b < probs.size(); ++b) probs[b] = Probabilities(b);
  std::vector<DenseMatrix> grads;
  for (const DenseMatrix& m : logits_) grads.emplace_back(1, m.cols());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const double adv = rewards[i] - base;
    if (adv == 0.0) continue;
    const auto choice = Choices(configs[i]);
    for (std::size_t b = 0; b < choice.size(); ++b) {
      // d(-adv * log p_c)/dlogit_k = -adv * (1[k == c] - p_k)
      for (std::size_t k = 0; k < probs[b].size(); ++k) {
        const double indicator = k == choice[b] ? 1.0 : 0.0;
        grads[b](0, k) += -adv * (indicator - probs[b][k]) / n;
      }
    }
  }
  std::vector<const DenseMatrix*> refs;
  for (const DenseMatrix& g : grads) refs.push_back(&g);
  AdamStep(Parameters(), refs, adam_, options_.lr);

  baseline_ = (baseline_ * static_cast<double>(reward_count_) + batch_sum) /
              static_cast<double>(reward_count_ + configs.size());
  reward_count_ += configs.size();
}

nlohmann::json ReinforceController::ToJson() const {
  nlohmann::json logits = nlohmann::json::array();
  nlohmann::json m = nlohmann::json::array();
  nlohmann::json v = nlohmann::json::array();
  auto vec = [](const DenseMatrix& x) {
    return std::vector<double>(x.values().begin(), x.values().end());
  };
  for (const DenseMatrix& x : logits_) logits.push_back(vec(x));
  for (const DenseMatrix& x : adam_.first_moment()) m.push_back(vec(x));
  for (const DenseMatrix& x : adam_.second_moment()) v.push_back(vec(x));
  return {{"logits", logits},
          {"adam", {{"step", adam_.step()}, {"m", m}, {"v", v}}},
          {"baseline", baseline_},
          {"reward_count", reward_count_},
          {"rng", rng_.State()}};
}

void ReinforceController::LoadJson(const nlohmann::json& j) {
  try {
    auto load = [this](const nlohmann::json& arr) {
      if (!arr.is_array() || arr.size() != logits_.size()) {
        throw FormatError("controller state must have 8 blocks");
      }
      std::vector<DenseMatrix> out;
      for (std::size_t b = 0; b < logits_.size(); ++b) {
        auto values = arr[b].get<std::vector<double>>();
        if (values.size() != logits_[b].cols()) {
          throw FormatError("controller block size mismatch");
        }
        out.emplace_back(1, values.size(), std::move(values));
      }
      return out;
    };
    std::vector<DenseMatrix> logits = load(j.at("logits"));
    for (std::size_t b = 0; b < logits_.size(); ++b) {
      logits_[b] = std::move(logits[b]);
    }
    adam_.Restore(j.at("adam").at("step").get<std::int64_t>(),
                  load(j.at("adam").at("m")), load(j.at("adam").at("v")));
    baseline_ = j.at("baseline").get<double>();
    reward_count_ = j.at("reward_count").get<std::size_t>();
    rng_.Restore(j.at("rng").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("controller state: ") + e.what());
  }
}

}  // namespace autocf
