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

#include "autocf/train/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include <spdlog/spdlog.h>

#include "autocf/data/negative_sampler.hpp"
#include "autocf/errors.hpp"
#include "autocf/numcore/rng.hpp"
#include "autocf/train/losses.hpp"

namespace autocf {

namespace {

// Independent random streams derived from TrainSpec::seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kNegativeStream = 3;

bool IsRatingMetric(Metric m) { return m == Metric::kRmse || m == Metric::kMae; }

}  // namespace

const char* TaskName(Task task) {
  return task == Task::kRating ? "rating" : "ranking";
}

Task ParseTask(const std::string& name) {
  if (name == "rating") return Task::kRating;
  if (name == "ranking") return Task::kRanking;
  throw ConfigError("unknown task '" + name + "'; valid: rating, ranking");
}

Metric DefaultMetric(Task task) {
  return task == Task::kRating ? Metric::kRmse : Metric::kRecall;
}

TrainSpec TrainSpec::For(Task task) {
  TrainSpec spec;
  spec.task = task;
  spec.validation_metric = DefaultMetric(task);
  return spec;
}

void TrainSpec::Validate() const {
  if (patience == 0) throw ConfigError("train: patience must be at least 1");
  if (patience >= max_epochs) {
    throw ConfigError("train: patience must be smaller than max_epochs");
  }
  if (batch_size == 0) throw ConfigError("train: batch_size must be positive");
  if (negatives_per_positive == 0) {
    throw ConfigError("train: negatives_per_positive must be at least 1");
  }
  if (top_k == 0) throw ConfigError("train: top_k must be positive");
  if ((task == Task::kRating) != IsRatingMetric(validation_metric)) {
    throw ConfigError(std::string("train: metric ") +
                      MetricName(validation_metric, top_k) +
                      " does not suit the " + TaskName(task) + " task");
  }
}

nlohmann::json TrainSpecToJson(const TrainSpec& spec) {
  return {{"task", TaskName(spec.task)},
          {"max_epochs", spec.max_epochs},
          {"batch_size", spec.batch_size},
          {"patience", spec.patience},
          {"negatives_per_positive", spec.negatives_per_positive},
          {"metric", MetricName(spec.validation_metric, spec.top_k)},
          {"seed", spec.seed},
          {"report_train_metric", spec.report_train_metric}};
}

TrainSpec TrainSpecFromJson(const nlohmann::json& j) {
  try {
    TrainSpec spec =
        TrainSpec::For(ParseTask(j.value("task", std::string("rating"))));
    spec.max_epochs = j.value("max_epochs", spec.max_epochs);
    spec.batch_size = j.value("batch_size", spec.batch_size);
    spec.patience = j.value("patience", spec.patience);
    spec.negatives_per_positive =
        j.value("negatives_per_positive", spec.negatives_per_positive);
    spec.seed = j.value("seed", spec.seed);
    spec.report_train_metric =
        j.value("report_train_metric", spec.report_train_metric);
    if (j.contains("metric")) {
      spec.validation_metric =
          ParseMetric(j.at("metric").get<std::string>(), &spec.top_k);
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train spec: ") + e.what());
  }
}

nlohmann::json TrainReportToJson(const TrainReport& r, bool include_timing) {
  nlohmann::json j = {{"config", r.config},
                      {"seed", r.seed},
                      {"metric", r.metric},
                      {"best_validation", r.best_validation},
                      {"best_epoch", r.best_epoch},
                      {"epochs_run", r.epochs_run},
                      {"curve", r.curve},
                      {"test", r.test_metrics},
                      {"failed", r.failed}};
  if (r.train_metric) j["train_metric"] = *r.train_metric;
  if (r.failed) j["failure"] = r.failure;
  if (include_timing) j["seconds"] = r.seconds;
  return j;
}

TrainReport TrainReportFromJson(const nlohmann::json& j) {
  try {
    TrainReport r;
    r.config = j.at("config").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.metric = j.at("metric").get<std::string>();
    r.best_validation = j.at("best_validation").get<double>();
    r.best_epoch = j.at("best_epoch").get<std::size_t>();
    r.epochs_run = j.at("epochs_run").get<std::size_t>();
    r.curve = j.at("curve").get<std::vector<double>>();
    r.test_metrics = j.at("test").get<std::map<std::string, double>>();
    r.failed = j.at("failed").get<bool>();
    if (j.contains("train_metric")) {
      r.train_metric = j.at("train_metric").get<double>();
    }
    r.failure = j.value("failure", std::string());
    r.seconds = j.value("seconds", 0.0);
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("train report: ") + e.what());
  }
}

Trainer::Trainer(const InteractionDataset& dataset, const TrainSpec& spec)
    : dataset_(&dataset), spec_(spec) {
  spec_.Validate();
  if (spec_.task == Task::kRanking && dataset.form() != Form::kImplicit) {
    throw ConfigError("the ranking task needs an implicit dataset");
  }
  if (spec_.task == Task::kRating && dataset.form() != Form::kExplicit) {
    throw ConfigError("the rating task needs an explicit dataset");
  }
}

double ScorePair(const std::vector<CfModel>& components, UserIndex u,
                 ItemIndex j, const InteractionDataset& dataset) {
  CfModel::Tape tape;
  double total = 0.0;
  for (const CfModel& c : components) total += c.Forward(u, j, dataset, tape);
  return total;
}

ComponentScorer::ComponentScorer(const std::vector<CfModel>& components,
                                 const InteractionDataset& dataset)
    : components_(&components), dataset_(&dataset) {
  item_embeddings_.reserve(components.size());
  for (const CfModel& c : components) {
    item_embeddings_.push_back(c.ItemEmbeddings(dataset));
  }
}

void ComponentScorer::operator()(UserIndex u, std::span<double> scores) const {
  std::fill(scores.begin(), scores.end(), 0.0);
  CfModel::SideTape side;
  CfModel::Tape tape;
  for (std::size_t c = 0; c < components_->size(); ++c) {
    const CfModel& model = (*components_)[c];
    model.EmbedUser(u, *dataset_, std::nullopt, side);
    for (ItemIndex j = 0; j < scores.size(); ++j) {
      scores[j] += model.ScoreEmbeddings(side.embedding,
                                         item_embeddings_[c].row(j), tape);
    }
  }
}

double Trainer::Evaluate(const std::vector<CfModel>& components,
                         SplitKind split, Metric metric) const {
  if (IsRatingMetric(metric)) {
    const auto records = dataset_->split(split);
    if (records.empty()) return WorstValue(metric);
    std::vector<double> preds;
    std::vector<double> targets;
    preds.reserve(records.size());
    targets.reserve(records.size());
    CfModel::Tape tape;
    for (const Interaction& r : records) {
      double s = 0.0;
      for (const CfModel& c : components) {
        s += c.Forward(r.user, r.item, *dataset_, tape);
      }
      preds.push_back(s);
      targets.push_back(r.value);
    }
    return metric == Metric::kRmse ? Rmse(preds, targets) : Mae(preds, targets);
  }
  const ComponentScorer scorer(components, *dataset_);
  const RankingMetrics m = EvaluateRanking(scorer, *dataset_, split,
                                           spec_.top_k);
  return metric == Metric::kRecall ? m.recall : m.ndcg;
}

std::map<std::string, double> Trainer::TestMetrics(
    const std::vector<CfModel>& components) const {
  std::map<std::string, double> out;
  if (spec_.task == Task::kRating) {
    out["rmse"] = Evaluate(components, SplitKind::kTest, Metric::kRmse);
    out["mae"] = Evaluate(components, SplitKind::kTest, Metric::kMae);
  } else {
    const ComponentScorer scorer(components, *dataset_);
    const RankingMetrics m =
        EvaluateRanking(scorer, *dataset_, SplitKind::kTest, spec_.top_k);
    out[MetricName(Metric::kRecall, spec_.top_k)] = m.recall;
    out[MetricName(Metric::kNdcg, spec_.top_k)] = m.ndcg;
  }
  return out;
}

TrainReport Trainer::Train(std::vector<CfModel>& components, double lr) const {
  if (components.empty()) throw ConfigError("Trainer: no components");
  const auto start = std::chrono::steady_clock::now();
  const Metric metric = spec_.validation_metric;
  TrainReport report;
  report.seed = spec_.seed;
  report.metric = MetricName(metric, spec_.top_k);

  auto fail = [&](const std::string& why) {
    report.failed = true;
    report.failure = why;
    report.best_validation = WorstValue(metric);
    report.test_metrics.clear();
    if (spec_.task == Task::kRating) {
      report.test_metrics["rmse"] = WorstValue(Metric::kRmse);
      report.test_metrics["mae"] = WorstValue(Metric::kMae);
    } else {
      report.test_metrics[MetricName(Metric::kRecall, spec_.top_k)] = -1.0;
      report.test_metrics[MetricName(Metric::kNdcg, spec_.top_k)] = -1.0;
    }
    report.train_metric.reset();
    report.seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return report;
  };

  const auto train = dataset_->train();
  if (train.empty()) return fail("empty training split");
  Rng shuffle_rng(MixSeed(spec_.seed, kShuffleStream));
  NegativeSampler sampler(*dataset_, MixSeed(spec_.seed, kNegativeStream));
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  const std::size_t n_comp = components.size();
  std::vector<CfModel::Gradients> grads;
  for (const CfModel& c : components) grads.push_back(c.ZeroGradients());
  std::vector<CfModel::Tape> pos(n_comp);
  std::vector<CfModel::Tape> neg(n_comp);
  std::optional<std::vector<CfModel>> best;
  const double negs = static_cast<double>(spec_.negatives_per_positive);

  try {
    for (std::size_t epoch = 1; epoch <= spec_.max_epochs; ++epoch) {
      shuffle_rng.Shuffle(order);
      double loss_sum = 0.0;
      for (std::size_t b0 = 0; b0 < order.size(); b0 += spec_.batch_size) {
        const std::size_t b1 = std::min(order.size(), b0 + spec_.batch_size);
        const double scale = 1.0 / static_cast<double>(b1 - b0);
        for (auto& g : grads) g.SetZero();
        for (std::size_t k = b0; k < b1; ++k) {
          const Interaction& r = train[order[k]];
          double sp = 0.0;
          for (std::size_t c = 0; c < n_comp; ++c) {
            sp += components[c].Forward(r.user, r.item, *dataset_, pos[c]);
          }
          if (spec_.task == Task::kRating) {
            const LossGrad lg = RatingLoss(sp, r.value);
            loss_sum += lg.loss;
            for (std::size_t c = 0; c < n_comp; ++c) {
              components[c].Backward(pos[c], lg.grad * scale, grads[c]);
            }
            continue;
          }
          double dpos = 0.0;
          for (std::size_t n = 0; n < spec_.negatives_per_positive; ++n) {
            const ItemIndex j = sampler.Sample(r.user);
            double sn = 0.0;
            for (std::size_t c = 0; c < n_comp; ++c) {
              sn += components[c].Forward(r.user, j, *dataset_, neg[c]);
            }
            const PairLossGrad pl = BprLoss(sp, sn);
            loss_sum += pl.loss / negs;
            dpos += pl.grad_pos;
            for (std::size_t c = 0; c < n_comp; ++c) {
              components[c].Backward(neg[c], pl.grad_neg * scale / negs,
                                     grads[c]);
            }
          }
          for (std::size_t c = 0; c < n_comp; ++c) {
            components[c].Backward(pos[c], dpos * scale / negs, grads[c]);
          }
        }
        if (!std::isfinite(loss_sum)) {
          report.epochs_run = epoch;
          return fail("non-finite training loss in epoch " +
                      std::to_string(epoch));
        }
        for (std::size_t c = 0; c < n_comp; ++c) {
          components[c].ApplyAdam(grads[c], lr);
        }
      }
      const double value =
          Evaluate(components, SplitKind::kValidation, metric);
      report.epochs_run = epoch;
      if (!std::isfinite(value)) {
        return fail("non-finite validation metric in epoch " +
                    std::to_string(epoch));
      }
      report.curve.push_back(value);
      if (report.best_epoch == 0 ||
          IsBetter(metric, value, report.best_validation)) {
        report.best_validation = value;
        report.best_epoch = epoch;
        best = components;
      } else if (epoch - report.best_epoch >= spec_.patience) {
        break;
      }
    }
  } catch (const SamplingError& e) {
    return fail(e.what());
  }

  components = std::move(*best);
  report.test_metrics = TestMetrics(components);
  if (spec_.report_train_metric && spec_.task == Task::kRating) {
    report.train_metric = Evaluate(components, SplitKind::kTrain, metric);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return report;
}

TrainReport TrainFused(const std::vector<FusedComponent>& parts, double lr,
                       const InteractionDataset& dataset,
                       const TrainSpec& spec, const std::string& label,
                       std::vector<CfModel>* trained,
                       const ModelShape& shape) {
  const Trainer trainer(dataset, spec);
  Rng init(MixSeed(spec.seed, kInitStream));
  std::vector<CfModel> components;
  components.reserve(parts.size());
  for (const FusedComponent& p : parts) {
    components.emplace_back(p.stages, p.dim, dataset.num_users(),
                            dataset.num_items(), init, shape);
  }
  TrainReport report = trainer.Train(components, lr);
  report.config = label;
  if (report.failed) {
    spdlog::warn("training {} failed: {}", label, report.failure);
  }
  if (trained != nullptr) *trained = std::move(components);
  return report;
}

TrainReport TrainConfig(const ModelConfig& config, const SearchSpace& space,
                        const InteractionDataset& dataset,
                        const TrainSpec& spec, std::vector<CfModel>* trained,
                        const ModelShape& shape) {
  if (!space.Contains(config)) {
    throw ConfigError("config is not part of the search space");
  }
  return TrainFused({{config.stages, space.dim(config)}}, space.lr(config),
                    dataset, spec, space.Format(config), trained, shape);
}

TrainReport TrainBaseline(const Baseline& baseline, std::size_t dim, double lr,
                          const InteractionDataset& dataset,
                          const TrainSpec& spec, std::vector<CfModel>* trained,
                          const ModelShape& shape) {
  std::vector<FusedComponent> parts;
  for (const StageChoice& s : baseline.components) parts.push_back({s, dim});
  const std::string label = baseline.name + "|d=" + std::to_string(dim) +
                            "|lr=" + FormatReal(lr);
  return TrainFused(parts, lr, dataset, spec, label, trained, shape);
}

}  // namespace autocf
