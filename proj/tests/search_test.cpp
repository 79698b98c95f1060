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

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <gtest/gtest.h>

#include "autocf/errors.hpp"
#include "autocf/search/history.hpp"
#include "autocf/search/reinforce.hpp"
#include "autocf/search/search.hpp"

#include "predictor_oracles.hpp"
#include "test_util.hpp"

namespace autocf {
namespace {

// Metric given by a function of the canonical index; counts calls.
class FunctionEvaluator : public CandidateEvaluator {
 public:
  FunctionEvaluator(const SearchSpace& space,
                    std::function<double(std::size_t)> f)
      : space_(&space), f_(std::move(f)) {}
  EvalRecord Evaluate(const ModelConfig& config) const override {
    const std::size_t idx = space_->CanonicalIndex(config);
    const std::size_t n = ++calls_;
    if (fail_after_ && n > fail_after_) throw std::runtime_error("interrupted");
    EvalRecord r;
    r.config = config;
    r.config_text = space_->Format(config);
    r.encoding = space_->Encode(config);
    r.valid_metric = f_(idx);
    r.test_metrics = {{"rmse", r.valid_metric + 0.01}};
    r.failed = failed_.count(idx) > 0;
    if (r.failed) r.valid_metric = WorstValue(Metric::kRmse);
    return r;
  }
  std::size_t calls() const { return calls_; }
  void FailAfter(std::size_t n) { fail_after_ = n; }
  void MarkFailed(std::size_t idx) { failed_.insert(idx); }

 private:
  const SearchSpace* space_;
  std::function<double(std::size_t)> f_;
  mutable std::atomic<std::size_t> calls_{0};
  std::size_t fail_after_ = 0;
  std::set<std::size_t> failed_;
};

// Planted linear objective over the encoding; lower is better (an RMSE-like
// metric), unique optimum.
struct PlantedSpace {
  SearchSpace space{{8}, {0.005}};
  std::vector<double> metric;
  std::size_t best = 0;
  explicit PlantedSpace(std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(space.EncodingLength());
    for (double& v : w) v = rng.Normal();
    for (std::size_t i = 0; i < space.size(); ++i) {
      const auto f = space.Encode(space.ConfigAt(i)).Flat();
      double s = 1.0;
      for (std::size_t k = 0; k < f.size(); ++k) s += 0.05 * w[k] * f[k];
      metric.push_back(s);
      if (s < metric[best]) best = i;
    }
  }
};

SearchSpec BaseSpec(Strategy strategy, std::uint64_t seed) {
  SearchSpec s;
  s.strategy = strategy;
  s.seed = seed;
  s.stop.cap = 1000000;
  s.stop.patience = 1000000;
  return s;
}

EvalRecord Rec(const SearchSpace& space, std::size_t idx, double metric) {
  EvalRecord r;
  r.config = space.ConfigAt(idx);
  r.config_text = space.Format(r.config);
  r.encoding = space.Encode(r.config);
  r.valid_metric = metric;
  return r;
}

std::string ReadAll(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(StopRuleTest, CapWithoutBeatingReference) {
  const SearchSpace space({8, 16}, {0.001});
  SearchHistory h(space, Metric::kRmse);
  StopRule rule{0.1, 100, 50};
  std::size_t stopped_at = 0;
  StopReason reason = StopReason::kNone;
  for (std::size_t i = 0; i < space.size() && reason == StopReason::kNone;
       ++i) {
    h.Append(Rec(space, i, 1.0 - 0.001 * i));
    reason = CheckStop(h, rule);
    stopped_at = h.size();
  }
  EXPECT_EQ(reason, StopReason::kCap);
  EXPECT_EQ(stopped_at, 50u);
  EXPECT_STREQ(StopReasonName(reason), "cap");
}

std::pair<StopReason, std::size_t> RunStop(const SearchSpace& space,
                                           const std::vector<double>& metric,
                                           const StopRule& rule) {
  SearchHistory h(space, Metric::kRmse);
  for (std::size_t i = 0; i < metric.size(); ++i) {
    h.Append(Rec(space, i, metric[i]));
    const StopReason r = CheckStop(h, rule);
    if (r != StopReason::kNone) return {r, h.size()};
  }
  return {StopReason::kNone, h.size()};
}

TEST(StopRuleTest, PatienceAfterBeatingReference) {
  const SearchSpace space({8, 16}, {0.001});
  std::vector<double> m(space.size(), 0.9);
  m[29] = 0.5;  // evaluation 30 beats the reference 0.6
  const auto [reason, at] = RunStop(space, m, StopRule{0.6, 100, 1000});
  EXPECT_EQ(reason, StopReason::kPatience);
  EXPECT_EQ(at, 130u);
}

TEST(StopRuleTest, ImprovementResetsPatience) {
  const SearchSpace space({8, 16}, {0.001});
  std::vector<double> m(space.size(), 0.9);
  m[29] = 0.5;
  m[128] = 0.4;  // evaluation 129
  const auto [reason, at] = RunStop(space, m, StopRule{0.6, 100, 1000});
  EXPECT_EQ(reason, StopReason::kPatience);
  EXPECT_EQ(at, 229u);
}

TEST(StopRuleTest, HigherIsBetterAndUnsetReference) {
  const SearchSpace space({8, 16}, {0.001});
  SearchHistory h(space, Metric::kRecall);
  h.Append(Rec(space, 0, 0.2));
  h.Append(Rec(space, 1, 0.1));
  EXPECT_EQ(CheckStop(h, StopRule{std::nullopt, 1, 100}), StopReason::kPatience);
  EXPECT_EQ(CheckStop(h, StopRule{0.3, 1, 100}), StopReason::kNone);
  EXPECT_EQ(CheckStop(h, StopRule{0.2, 1, 100}), StopReason::kPatience);
}

TEST(SearchHistoryTest, RunningBestAndDuplicates) {
  const SearchSpace space({8}, {0.005});
  SearchHistory h(space, Metric::kRmse);
  EXPECT_TRUE(h.Append(Rec(space, 3, 0.9)));
  EXPECT_FALSE(h.Append(Rec(space, 4, 0.95)));
  EvalRecord failed = Rec(space, 5, WorstValue(Metric::kRmse));
  failed.failed = true;
  EXPECT_FALSE(h.Append(failed));
  EXPECT_TRUE(h.Append(Rec(space, 6, 0.8)));
  EXPECT_EQ(h.best()->config, space.ConfigAt(6));
  EXPECT_EQ(h.since_improvement(), 0u);
  EXPECT_THROW(h.Append(Rec(space, 3, 0.1)), InternalError);
  EXPECT_EQ(h.BestCurve(), (std::vector<double>{0.9, 0.9, 0.9, 0.8}));
  EXPECT_EQ(h.TopPositions(2), (std::vector<std::size_t>{3, 0}));
  EXPECT_EQ(*h.EvaluationIndexOf(6), 4u);
  EXPECT_EQ(h.Unevaluated().size(), space.size() - 4);
}

TEST(SearchTest, CapEqualsK1GivesExactlyK1) {
  const PlantedSpace ps(1);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  for (Strategy st : {Strategy::kRand, Strategy::kRandPredictor,
                      Strategy::kReinforce, Strategy::kReinforcePredictor}) {
    SearchSpec spec = BaseSpec(st, 3);
    spec.stop.cap = spec.k1;
    const auto res = RunSearch(ps.space, ev, spec);
    EXPECT_EQ(res.history.size(), spec.k1) << StrategyName(st);
    EXPECT_EQ(res.reason, StopReason::kCap);
    EXPECT_EQ(res.rounds, 1u);
  }
}

TEST(SearchTest, ExhaustsWithoutRevisiting) {
  const PlantedSpace ps(2);
  for (Strategy st : {Strategy::kRand, Strategy::kRandPredictor,
                      Strategy::kReinforce, Strategy::kReinforcePredictor}) {
    FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
    const auto res = RunSearch(ps.space, ev, BaseSpec(st, 4));
    EXPECT_TRUE(res.exhausted);
    EXPECT_EQ(res.reason, StopReason::kExhausted);
    EXPECT_EQ(res.history.size(), ps.space.size());
    EXPECT_EQ(ev.calls(), ps.space.size());
    std::set<std::size_t> seen;
    for (const auto& r : res.history.records()) {
      EXPECT_TRUE(seen.insert(ps.space.CanonicalIndex(r.config)).second);
    }
    EXPECT_EQ(res.best()->config, ps.space.ConfigAt(ps.best));
  }
}

TEST(SearchTest, RandEvaluatesCanonicallySortedUniformRounds) {
  const PlantedSpace ps(3);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  SearchSpec spec = BaseSpec(Strategy::kRand, 5);
  spec.stop.cap = 30;
  const auto res = RunSearch(ps.space, ev, spec);
  ASSERT_EQ(res.history.size(), 30u);
  for (std::size_t round = 0; round < 3; ++round) {
    for (std::size_t i = 1; i < 10; ++i) {
      EXPECT_LT(ps.space.CanonicalIndex(res.history.records()[round * 10 + i - 1].config),
                ps.space.CanonicalIndex(res.history.records()[round * 10 + i].config));
    }
  }
}

TEST(SearchTest, ConstantPredictorWithZeroK2MatchesRand) {
  const PlantedSpace ps(4);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  SearchSpec rand = BaseSpec(Strategy::kRand, 11);
  rand.stop.cap = 60;
  SearchSpec pred = rand;
  pred.strategy = Strategy::kRandPredictor;
  pred.k2 = 0;
  PredictorOptions opts;
  opts.steps_per_fit = 0;
  SurrogatePredictor constant(ps.space.EncodingLength(), false, 0, opts);
  MlpNet& net = constant.mutable_net();
  net.mutable_weight(net.num_layers() - 1).SetZero();
  SearchOptions o;
  o.predictor = &constant;
  const auto a = RunSearch(ps.space, ev, rand);
  const auto b = RunSearch(ps.space, ev, pred, o);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history.records()[i].config, b.history.records()[i].config);
  }
}

TEST(SearchTest, FailedCandidatesDoNotStopTheLoop) {
  const PlantedSpace ps(5);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  for (std::size_t i = 0; i < ps.space.size(); i += 3) {
    if (i != ps.best) ev.MarkFailed(i);
  }
  const auto res = RunSearch(ps.space, ev, BaseSpec(Strategy::kRandPredictor, 1));
  EXPECT_TRUE(res.exhausted);
  EXPECT_FALSE(res.best()->failed);
  EXPECT_EQ(res.best()->config, ps.space.ConfigAt(ps.best));
}

TEST(SearchTest, SameSeedSameHistoryFile) {
  const PlantedSpace ps(6);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  const auto dir = test::TempDir("search_repro");
  for (Strategy st : {Strategy::kRandPredictor, Strategy::kReinforcePredictor}) {
    SearchSpec spec = BaseSpec(st, 21);
    spec.stop.cap = 70;
    SearchOptions a, b;
    a.history_path = dir / "a.jsonl";
    b.history_path = dir / "b.jsonl";
    RunSearch(ps.space, ev, spec, a);
    RunSearch(ps.space, ev, spec, b);
    EXPECT_EQ(ReadAll(dir / "a.jsonl"), ReadAll(dir / "b.jsonl"));
    EXPECT_FALSE(ReadAll(dir / "a.jsonl").empty());
  }
}

TEST(SearchTest, ResumeAfterInterruptionReproducesUninterruptedRun) {
  const PlantedSpace ps(7);
  const auto dir = test::TempDir("search_resume");
  for (Strategy st : {Strategy::kRandPredictor, Strategy::kReinforce}) {
    SearchSpec spec = BaseSpec(st, 8);
    spec.stop.cap = 60;
    auto f = [&](std::size_t i) { return ps.metric[i]; };
    FunctionEvaluator full(ps.space, f);
    SearchOptions ref;
    ref.history_path = dir / "full.jsonl";
    const auto want = RunSearch(ps.space, full, spec, ref);

    // Crash during round 4: three rounds are on disk with a checkpoint.
    FunctionEvaluator crashing(ps.space, f);
    crashing.FailAfter(35);
    SearchOptions part;
    part.history_path = dir / "part.jsonl";
    EXPECT_THROW(RunSearch(ps.space, crashing, spec, part), std::runtime_error);

    FunctionEvaluator resumed(ps.space, f);
    part.resume = true;
    const auto got = RunSearch(ps.space, resumed, spec, part);
    EXPECT_EQ(ReadAll(dir / "part.jsonl"), ReadAll(dir / "full.jsonl"))
        << StrategyName(st);
    EXPECT_EQ(resumed.calls(), 30u);
    EXPECT_EQ(got.best()->config, want.best()->config);
  }
}

TEST(SearchTest, ResumeReusesRecordsWrittenAfterCheckpoint) {
  const PlantedSpace ps(8);
  const auto dir = test::TempDir("search_pending");
  SearchSpec spec = BaseSpec(Strategy::kRandPredictor, 9);
  spec.stop.cap = 40;
  auto f = [&](std::size_t i) { return ps.metric[i]; };
  FunctionEvaluator full(ps.space, f);
  SearchOptions ref;
  ref.history_path = dir / "full.jsonl";
  RunSearch(ps.space, full, spec, ref);

  // Interrupted run: lines of round 4 written, checkpoint still at round 3.
  FunctionEvaluator crashing(ps.space, f);
  crashing.FailAfter(30);
  SearchOptions part;
  part.history_path = dir / "part.jsonl";
  EXPECT_THROW(RunSearch(ps.space, crashing, spec, part), std::runtime_error);
  {
    std::ifstream in(dir / "full.jsonl");
    std::ofstream out(dir / "part.jsonl", std::ios::app);
    std::string line;
    for (int i = 0; std::getline(in, line); ++i) {
      if (i >= 31 && i < 36) out << line << '\n';  // records 31..35
    }
  }
  FunctionEvaluator resumed(ps.space, f);
  part.resume = true;
  RunSearch(ps.space, resumed, spec, part);
  EXPECT_EQ(ReadAll(dir / "part.jsonl"), ReadAll(dir / "full.jsonl"));
  EXPECT_EQ(resumed.calls(), 5u);
}

TEST(SearchTest, ResumeRejectsDifferentSpec) {
  const PlantedSpace ps(9);
  const auto dir = test::TempDir("search_mismatch");
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  SearchSpec spec = BaseSpec(Strategy::kRand, 1);
  spec.stop.cap = 20;
  SearchOptions o;
  o.history_path = dir / "h.jsonl";
  RunSearch(ps.space, ev, spec, o);
  spec.seed = 2;
  o.resume = true;
  EXPECT_THROW(RunSearch(ps.space, ev, spec, o), ConfigError);
}

TEST(SearchTest, CorruptHistoryGivesRecoveryHint) {
  const PlantedSpace ps(10);
  const auto dir = test::TempDir("search_corrupt");
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  SearchSpec spec = BaseSpec(Strategy::kRand, 1);
  spec.stop.cap = 20;
  SearchOptions o;
  o.history_path = dir / "h.jsonl";
  RunSearch(ps.space, ev, spec, o);
  {
    std::ofstream out(dir / "h.jsonl", std::ios::app);
    out << "{\"type\":\"record\",\"config\":";  // truncated write
  }
  o.resume = true;
  try {
    RunSearch(ps.space, ev, spec, o);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("to recover"), std::string::npos);
  }
}

TEST(SearchTest, CachedEvaluatorRoundTrip) {
  const PlantedSpace ps(11);
  const auto dir = test::TempDir("search_cache");
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  SearchOptions o;
  o.history_path = dir / "cache.jsonl";
  RunSearch(ps.space, ev, BaseSpec(Strategy::kRand, 1), o);
  const CachedEvaluator cache = CachedEvaluator::FromFile(ps.space, dir / "cache.jsonl");
  EXPECT_EQ(cache.size(), ps.space.size());
  for (std::size_t i = 0; i < ps.space.size(); i += 11) {
    EXPECT_EQ(cache.Evaluate(ps.space.ConfigAt(i)).valid_metric, ps.metric[i]);
  }
  const CachedEvaluator partial(ps.space, {Rec(ps.space, 0, 0.5)});
  EXPECT_THROW(partial.Evaluate(ps.space.ConfigAt(1)), ConfigError);
}

TEST(SearchTest, EvaluateBatchKeepsOrderAcrossWorkers) {
  const PlantedSpace ps(12);
  FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
  std::vector<ModelConfig> configs;
  for (std::size_t i = 0; i < 40; ++i) configs.push_back(ps.space.ConfigAt(134 - i));
  const auto one = ev.EvaluateBatch(configs, 1);
  const auto four = ev.EvaluateBatch(configs, 4);
  for (std::size_t i = 0; i < configs.size(); ++i) {
    EXPECT_EQ(one[i].config, configs[i]);
    EXPECT_EQ(four[i].config, configs[i]);
  }
}

TEST(SearchTest, PredictorReachesPlantedBestSooner) {
  std::vector<double> rand_evals, pred_evals;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PlantedSpace ps(100 + seed);
    FunctionEvaluator ev(ps.space, [&](std::size_t i) { return ps.metric[i]; });
    for (Strategy st : {Strategy::kRand, Strategy::kRandPredictor}) {
      const auto res = RunSearch(ps.space, ev, BaseSpec(st, seed));
      const double at = static_cast<double>(*res.history.EvaluationIndexOf(ps.best));
      (st == Strategy::kRand ? rand_evals : pred_evals).push_back(at);
    }
  }
  EXPECT_LT(test::Median(pred_evals), test::Median(rand_evals));
}

TEST(SearchSpecTest, ValidationAndJson) {
  SearchSpec s;
  s.k1 = 0;
  EXPECT_THROW(s.Validate(), ConfigError);
  s = SearchSpec{};
  s.stop.cap = 5;
  EXPECT_THROW(s.Validate(), ConfigError);
  s = SearchSpec{};
  s.strategy = Strategy::kReinforcePredictor;
  s.stop.reference = 0.91;
  const SearchSpec back = SearchSpecFromJson(SearchSpecToJson(s));
  EXPECT_EQ(SearchSpecToJson(back).dump(), SearchSpecToJson(s).dump());
  EXPECT_EQ(ParseStrategy("rand+predictor"), Strategy::kRandPredictor);
  EXPECT_THROW(ParseStrategy("bayes"), ConfigError);
}

TEST(ReinforceTest, SaturatedBlockIsAlwaysSampled) {
  const SearchSpace space;
  ReinforceController c(space, 1);
  DenseMatrix& g = c.mutable_logits()[4];
  for (std::size_t k = 0; k < g.size(); ++k) g.values()[k] = k == 3 ? 20.0 : -20.0;
  for (int i = 0; i < 2000; ++i) {
    EXPECT_EQ(c.Sample().stages.interaction, InteractionFn::kMax);
  }
  EXPECT_GT(c.Probabilities(4)[3], 1.0 - 1e-15);
}

TEST(ReinforceTest, SamplesAreAlwaysCompatible) {
  const SearchSpace space;
  ReinforceController c(space, 2);
  // Push both sides towards ID and MLP, which never combine.
  c.mutable_logits()[0].values()[0] = 5;
  c.mutable_logits()[2].values()[1] = 5;
  for (int i = 0; i < 2000; ++i) {
    const ModelConfig m = c.Sample();
    EXPECT_TRUE(m.stages.IsCompatible());
    EXPECT_TRUE(space.Contains(m));
  }
}

TEST(ReinforceTest, EqualRewardsLeaveLogitsUnchanged) {
  const SearchSpace space;
  ReinforceController c(space, 3);
  std::vector<ModelConfig> cfgs;
  for (int i = 0; i < 10; ++i) cfgs.push_back(c.Sample());
  c.Update(cfgs, std::vector<double>(10, 0.75));  // baseline becomes 0.75
  const auto before = c.logits();
  c.Update(cfgs, std::vector<double>(10, 0.75));
  for (std::size_t b = 0; b < 8; ++b) EXPECT_EQ(c.logits()[b], before[b]);
  for (std::size_t b = 0; b < 8; ++b) {
    for (double v : before[b].values()) EXPECT_EQ(v, 0.0);
  }
  EXPECT_EQ(c.baseline(), 0.75);
}

TEST(ReinforceTest, LogProbabilityOfUniformPolicy) {
  const SearchSpace space;
  ReinforceController c(space, 4);
  const double want = -std::log(2.0) * 4 - std::log(5.0) - std::log(3.0) -
                      2 * std::log(4.0);
  EXPECT_NEAR(c.LogProbability(space.ConfigAt(17)), want, 1e-12);
}

TEST(ReinforceTest, MassOnBestChoicesGrowsOnPlantedSpace) {
  // Reward = planted objective (negated, lower is better); track the mean
  // probability of the best config's choice in the free blocks.
  std::vector<std::vector<double>> traj;
  for (std::uint64_t seed = 0; seed < 9; ++seed) {
    const PlantedSpace ps(200 + seed);
    ReinforceController c(ps.space, seed);
    const auto best = c.Choices(ps.space.ConfigAt(ps.best));
    auto mass = [&]() {
      double m = 0.0;
      for (std::size_t b = 0; b < 6; ++b) m += c.Probabilities(b)[best[b]];
      return m / 6.0;
    };
    std::vector<double> t = {mass()};
    for (int u = 0; u < 50; ++u) {
      std::vector<ModelConfig> cfgs;
      std::vector<double> rewards;
      for (int i = 0; i < 10; ++i) {
        cfgs.push_back(c.Sample());
        rewards.push_back(-ps.metric[ps.space.CanonicalIndex(cfgs.back())]);
      }
      c.Update(cfgs, rewards);
      t.push_back(mass());
    }
    traj.push_back(t);
  }
  std::vector<double> median;
  for (std::size_t step = 0; step < traj[0].size(); ++step) {
    std::vector<double> col;
    for (const auto& t : traj) col.push_back(t[step]);
    median.push_back(test::Median(col));
  }
  for (std::size_t step = 1; step < median.size(); ++step) {
    EXPECT_GE(median[step], median[step - 1]) << "update " << step;
  }
  EXPECT_GT(median.back(), median.front() + 0.1);
}

TEST(ReinforceTest, JsonRoundTrip) {
  const SearchSpace space;
  ReinforceController a(space, 5), b(space, 77);
  std::vector<ModelConfig> cfgs;
  for (int i = 0; i < 10; ++i) cfgs.push_back(a.Sample());
  a.Update(cfgs, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
  b.LoadJson(a.ToJson());
  EXPECT_EQ(a.ToJson().dump(), b.ToJson().dump());
  EXPECT_EQ(space.CanonicalIndex(a.Sample()), space.CanonicalIndex(b.Sample()));
}

}  // namespace
}  // namespace autocf
