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

#include "autocf/predictor/predictor.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include <spdlog/spdlog.h>

#include "autocf/errors.hpp"
#include "autocf/train/losses.hpp"

namespace autocf {

namespace {

nlohmann::json MatrixToJson(const DenseMatrix& m) {
  return {{"rows", m.rows()},
          {"cols", m.cols()},
          {"values", std::vector<double>(m.values().begin(),
                                         m.values().end())}};
}

DenseMatrix MatrixFromJson(const nlohmann::json& j) {
  return DenseMatrix(j.at("rows").get<std::size_t>(),
                     j.at("cols").get<std::size_t>(),
                     j.at("values").get<std::vector<double>>());
}

nlohmann::json EncodingToJson(const ConfigEncoding& e) {
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : e.blocks) blocks.push_back(b);
  return blocks;
}

// -1 when b is better, +1 when a is better, 0 when unordered.
int Compare(const EvalRecord& a, const EvalRecord& b, bool higher_is_better) {
  if (a.failed && b.failed) return 0;
  if (a.failed) return -1;
  if (b.failed) return 1;
  if (a.valid_metric == b.valid_metric) return 0;
  const bool a_better = higher_is_better ? a.valid_metric > b.valid_metric
                                         : a.valid_metric < b.valid_metric;
  return a_better ? 1 : -1;
}

}  // namespace

nlohmann::json EvalRecordToJson(const EvalRecord& r) {
  return {{"config", r.config_text},
          {"encoding", EncodingToJson(r.encoding)},
          {"valid_metric", r.valid_metric},
          {"test", r.test_metrics},
          {"cost_seconds", r.cost_seconds},
          {"failed", r.failed}};
}

EvalRecord EvalRecordFromJson(const nlohmann::json& j,
                              const SearchSpace& space) {
  EvalRecord r;
  try {
    r.config_text = j.at("config").get<std::string>();
    r.config = space.Parse(r.config_text);
    r.encoding = space.Encode(r.config);
    if (j.contains("encoding")) {
      ConfigEncoding stored;
      const auto& blocks = j.at("encoding");
      if (!blocks.is_array() || blocks.size() != stored.blocks.size()) {
        throw FormatError("record encoding must have 8 blocks");
      }
      for (std::size_t b = 0; b < stored.blocks.size(); ++b) {
        stored.blocks[b] = blocks[b].get<std::vector<std::uint8_t>>();
      }
      if (!(stored == r.encoding)) {
        throw FormatError("record encoding does not match config " +
                          r.config_text);
      }
    }
    r.valid_metric = j.at("valid_metric").get<double>();
    r.test_metrics = j.value("test", std::map<std::string, double>{});
    r.cost_seconds = j.value("cost_seconds", 0.0);
    r.failed = j.value("failed", false);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("eval record: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("eval record: ") + e.what());
  }
  return r;
}

SurrogatePredictor::SurrogatePredictor(std::size_t encoding_length,
                                       bool higher_is_better,
                                       std::uint64_t seed,
                                       PredictorOptions options)
    : encoding_length_(encoding_length),
      higher_is_better_(higher_is_better),
      options_(std::move(options)),
      rng_(seed) {
  if (encoding_length == 0) {
    throw ConfigError("SurrogatePredictor: empty encoding");
  }
  std::vector<std::size_t> sizes = {encoding_length};
  sizes.insert(sizes.end(), options_.hidden.begin(), options_.hidden.end());
  sizes.push_back(1);
  Rng init(MixSeed(seed, 1));
  net_ = MlpNet(sizes, init);
  adam_ = AdamState(net_.Parameters());
}

double SurrogatePredictor::Predict(std::span<const double> encoding) const {
  if (encoding.size() != encoding_length_) {
    throw ConfigError("predictor: encoding length " +
                      std::to_string(encoding.size()) + ", expected " +
                      std::to_string(encoding_length_));
  }
  MlpNet::Tape tape;
  return net_.Forward(encoding, tape)[0];
}

double SurrogatePredictor::Predict(const ConfigEncoding& encoding) const {
  const std::vector<double> flat = encoding.Flat();
  return Predict(flat);
}

double SurrogatePredictor::PairObjective(
    const std::vector<std::vector<double>>& encodings,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs,
    MlpNet::Gradient* grad) const {
  if (pairs.empty()) return 0.0;
  std::vector<MlpNet::Tape> tapes(encodings.size());
  std::vector<double> score(encodings.size(), 0.0);
  std::vector<char> used(encodings.size(), 0);
  for (const auto& [a, b] : pairs) used[a] = used[b] = 1;
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    if (!used[i]) continue;
    if (encodings[i].size() != encoding_length_) {
      throw ConfigError("predictor: encoding length mismatch");
    }
    score[i] = net_.Forward(encodings[i], tapes[i])[0];
  }
  const double inv = 1.0 / static_cast<double>(pairs.size());
  std::vector<double> upstream(encodings.size(), 0.0);
  double loss = 0.0;
  for (const auto& [a, b] : pairs) {
    const PairLossGrad pl = BprLoss(score[a], score[b]);
    loss += pl.loss * inv;
    upstream[a] += pl.grad_pos * inv;
    upstream[b] += pl.grad_neg * inv;
  }
  if (grad != nullptr) {
    for (std::size_t i = 0; i < encodings.size(); ++i) {
      if (!used[i]) continue;
      const double g[1] = {upstream[i]};
      net_.Backward(tapes[i], g, *grad);
    }
  }
  return loss;
}

double SurrogatePredictor::PairLoss(
    const std::vector<std::vector<double>>& encodings,
    const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const {
  return PairObjective(encodings, pairs, nullptr);
}

FitSummary SurrogatePredictor::Fit(const std::vector<EvalRecord>& history) {
  FitSummary summary;
  const std::size_t n = history.size();
  const std::size_t total = n < 2 ? 0 : n * (n - 1) / 2;
  const std::size_t budget = std::min(options_.pair_budget_factor * n, total);

  // Unordered index pairs (a < b), drawn without repetition.
  std::vector<std::pair<std::size_t, std::size_t>> drawn;
  if (budget > 0 && 2 * budget >= total) {
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) drawn.emplace_back(a, b);
    }
    const auto picks = rng_.SampleWithoutReplacement(drawn.size(), budget);
    std::vector<std::pair<std::size_t, std::size_t>> chosen;
    chosen.reserve(budget);
    for (std::size_t p : picks) chosen.push_back(drawn[p]);
    drawn = std::move(chosen);
  } else if (budget > 0) {
    std::set<std::pair<std::size_t, std::size_t>> seen;
    while (drawn.size() < budget) {
      std::size_t a = rng_.UniformInt(n);
      std::size_t b = rng_.UniformInt(n);
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (seen.insert({a, b}).second) drawn.emplace_back(a, b);
    }
  }

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& [a, b] : drawn) {
    const int c = Compare(history[a], history[b], higher_is_better_);
    if (c > 0) pairs.emplace_back(a, b);
    if (c < 0) pairs.emplace_back(b, a);
  }
  if (pairs.empty()) {
    spdlog::warn("predictor fit skipped: fewer than two distinct metric "
                 "values among {} records",
                 n);
    summary.skipped = true;
    return summary;
  }

  std::vector<std::vector<double>> encodings;
  encodings.reserve(n);
  for (const EvalRecord& r : history) encodings.push_back(r.encoding.Flat());

  summary.pairs = pairs.size();
  summary.initial_loss = PairObjective(encodings, pairs, nullptr);
  MlpNet::Gradient grad = net_.ZeroGradient();
  for (std::size_t step = 0; step < options_.steps_per_fit; ++step) {
    grad.SetZero();
    PairObjective(encodings, pairs, &grad);
    AdamStep(net_.Parameters(), grad.Refs(), adam_, options_.lr);
    net_.MarkUpdated();
  }
  summary.final_loss = PairObjective(encodings, pairs, nullptr);
  if (summary.final_loss > summary.initial_loss + 1e-6) {
    spdlog::warn("predictor fit increased the pairwise loss: {} -> {}",
                 summary.initial_loss, summary.final_loss);
  }
  return summary;
}

std::vector<std::size_t> RankByScore(std::span<const double> scores,
                                     std::span<const std::size_t> tie_keys) {
  if (scores.size() != tie_keys.size()) {
    throw ConfigError("RankByScore: score/key length mismatch");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return tie_keys[a] < tie_keys[b];
  });
  return order;
}

std::vector<std::size_t> SurrogatePredictor::Rank(
    const std::vector<std::vector<double>>& encodings,
    const std::vector<std::size_t>& tie_keys) const {
  std::vector<double> scores;
  scores.reserve(encodings.size());
  for (const auto& e : encodings) scores.push_back(Predict(e));
  return RankByScore(scores, tie_keys);
}

nlohmann::json SurrogatePredictor::ToJson() const {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t k = 0; k < net_.num_layers(); ++k) {
    layers.push_back({{"weight", MatrixToJson(net_.weight(k))},
                      {"bias", MatrixToJson(net_.bias(k))}});
  }
  nlohmann::json m = nlohmann::json::array();
  nlohmann::json v = nlohmann::json::array();
  for (const DenseMatrix& x : adam_.first_moment()) m.push_back(MatrixToJson(x));
  for (const DenseMatrix& x : adam_.second_moment()) {
    v.push_back(MatrixToJson(x));
  }
  return {{"encoding_length", encoding_length_},
          {"higher_is_better", higher_is_better_},
          {"layers", layers},
          {"adam", {{"step", adam_.step()}, {"m", m}, {"v", v}}},
          {"rng", rng_.State()}};
}

void SurrogatePredictor::LoadJson(const nlohmann::json& j) {
  try {
    if (j.at("encoding_length").get<std::size_t>() != encoding_length_ ||
        j.at("higher_is_better").get<bool>() != higher_is_better_) {
      throw FormatError("predictor state does not match this search");
    }
    std::vector<DenseMatrix> weights;
    std::vector<DenseMatrix> biases;
    for (const auto& layer : j.at("layers")) {
      weights.push_back(MatrixFromJson(layer.at("weight")));
      biases.push_back(MatrixFromJson(layer.at("bias")));
    }
    MlpNet net(std::move(weights), std::move(biases));
    if (net.layer_sizes() != net_.layer_sizes()) {
      throw FormatError("predictor state has different layer sizes");
    }
    std::vector<DenseMatrix> m;
    std::vector<DenseMatrix> v;
    for (const auto& x : j.at("adam").at("m")) m.push_back(MatrixFromJson(x));
    for (const auto& x : j.at("adam").at("v")) v.push_back(MatrixFromJson(x));
    net_ = std::move(net);
    adam_.Restore(j.at("adam").at("step").get<std::int64_t>(), std::move(m),
                  std::move(v));
    rng_.Restore(j.at("rng").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("predictor state: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("predictor state: ") + e.what());
  }
}

}  // namespace autocf
