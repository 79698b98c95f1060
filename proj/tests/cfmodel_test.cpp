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

#include <set>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "autocf/cfmodel/baselines.hpp"
#include "autocf/cfmodel/cf_model.hpp"
#include "autocf/cfmodel/config.hpp"
#include "autocf/errors.hpp"

#include "model_oracles.hpp"

namespace autocf {
namespace {

using test::ToyDataset;

StageChoice S(const std::string& text) { return ParseStageChoice(text); }

TEST(StageTupleTest, CountMatchesBruteForce) {
  const auto tuples = EnumerateStageTuples();
  EXPECT_EQ(tuples.size(), 135u);
  std::set<StageChoice> brute;
  for (int ue = 0; ue < 2; ++ue) {
    for (int ie = 0; ie < 2; ++ie) {
      for (int um = 0; um < 2; ++um) {
        for (int im = 0; im < 2; ++im) {
          for (int g = 0; g < 5; ++g) {
            for (int h = 0; h < 3; ++h) {
              StageChoice s{static_cast<InputEncoding>(ue),
                            static_cast<InputEncoding>(ie),
                            static_cast<EmbeddingFn>(um),
                            static_cast<EmbeddingFn>(im),
                            static_cast<InteractionFn>(g),
                            static_cast<PredictionFn>(h)};
              const bool ok =
                  (ue == 1 || um == 0) && (ie == 1 || im == 0);
              if (ok) brute.insert(s);
            }
          }
        }
      }
    }
  }
  EXPECT_EQ(brute.size(), 135u);
  EXPECT_EQ(std::set<StageChoice>(tuples.begin(), tuples.end()), brute);
  for (const auto& t : tuples) EXPECT_TRUE(t.IsCompatible());
  EXPECT_EQ(EnumerateStageTuples(true).size(), 162u);
}

TEST(EncodingTest, ExampleVectorRoundTrips) {
  const SearchSpace space;
  ConfigEncoding e;
  e.blocks = {std::vector<std::uint8_t>{0, 1}, {1, 0}, {1, 0}, {0, 1},
              {0, 0, 1, 0, 0}, {1, 0, 0}, {0, 0, 1, 0}, {0, 1, 0, 0}};
  // The example puts MLP on an ID side, so it only decodes as a raw
  // representation.
  EXPECT_THROW(space.Decode(e), ConfigError);
  const ModelConfig c = space.Decode(e, /*require_compatible=*/false);
  EXPECT_EQ(c.stages.user_encoding, InputEncoding::kHistory);
  EXPECT_EQ(c.stages.item_encoding, InputEncoding::kId);
  EXPECT_EQ(c.stages.user_embedding, EmbeddingFn::kMat);
  EXPECT_EQ(c.stages.item_embedding, EmbeddingFn::kMlp);
  EXPECT_EQ(c.stages.interaction, InteractionFn::kMin);
  EXPECT_EQ(c.stages.prediction, PredictionFn::kSum);
  EXPECT_EQ(c.dim_index, 2u);  // third entry (1-based 3)
  EXPECT_EQ(c.lr_index, 1u);   // second entry (1-based 2)
  EXPECT_EQ(space.Encode(c), e);
}

TEST(EncodingTest, BijectionOverFullSpace) {
  const SearchSpace space;
  ASSERT_EQ(space.size(), 2160u);
  EXPECT_EQ(space.EncodingLength(), 2u + 2 + 2 + 2 + 5 + 3 + 4 + 4);
  std::set<std::vector<double>> flats;
  for (std::size_t i = 0; i < space.size(); ++i) {
    const ModelConfig c = space.ConfigAt(i);
    const ConfigEncoding e = space.Encode(c);
    EXPECT_EQ(e.length(), space.EncodingLength());
    EXPECT_EQ(space.Decode(e), c);
    EXPECT_EQ(space.DecodeFlat(e.Flat()), c);
    EXPECT_EQ(space.CanonicalIndex(c), i);
    flats.insert(e.Flat());
  }
  EXPECT_EQ(flats.size(), space.size());
}

TEST(EncodingTest, MalformedBlocksRejected) {
  const SearchSpace space;
  ConfigEncoding e = space.Encode(space.ConfigAt(0));
  e.blocks[4] = {1, 1, 0, 0, 0};
  EXPECT_THROW(space.Decode(e), ConfigError);
  e = space.Encode(space.ConfigAt(0));
  e.blocks[6] = {0, 0, 0, 0};
  EXPECT_THROW(space.Decode(e), ConfigError);
  e = space.Encode(space.ConfigAt(0));
  e.blocks[5] = {1, 0};
  EXPECT_THROW(space.Decode(e), ConfigError);
}

TEST(EncodingTest, NormHeadNotEncodable) {
  const SearchSpace space;
  ModelConfig c = space.ConfigAt(0);
  c.stages.prediction = PredictionFn::kNorm;
  EXPECT_THROW(space.Encode(c), ConfigError);
}

TEST(ConfigTextTest, FormatParseRoundTrip) {
  const SearchSpace space;
  for (std::size_t i = 0; i < space.size(); i += 7) {
    const ModelConfig c = space.ConfigAt(i);
    EXPECT_EQ(space.Parse(space.Format(c)), c);
  }
  const ModelConfig c = space.Parse("H,H,MLP,MLP,MAX,MLP|d=16|lr=0.001");
  EXPECT_EQ(space.dim(c), 16u);
  EXPECT_EQ(space.lr(c), 0.001);
  EXPECT_EQ(space.Format(c), "H,H,MLP,MLP,MAX,MLP|d=16|lr=0.001");
}

TEST(ConfigTextTest, IncompatibleAndOutOfSpaceRejected) {
  const SearchSpace space;
  try {
    space.Parse("ID,ID,MLP,MAT,MUL,SUM|d=16|lr=0.001");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(kCompatibilityRule),
              std::string::npos);
  }
  EXPECT_THROW(space.Parse("ID,ID,MAT,MAT,MUL,SUM|d=7|lr=0.001"), ConfigError);
  EXPECT_THROW(space.Parse("ID,ID,MAT,MAT,MUL,SUM|d=8|lr=0.3"), ConfigError);
  EXPECT_THROW(ParseStageChoice("ID,ID,MAT,MAT,DIV,SUM"), ConfigError);
}

TEST(InstantiateTest, MfShapes) {
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MUL,SUM"), 8, 5, 7, rng);
  EXPECT_EQ(m.user_table().rows(), 5u);
  EXPECT_EQ(m.user_table().cols(), 8u);
  EXPECT_EQ(m.item_table().rows(), 7u);
  EXPECT_EQ(m.item_table().cols(), 8u);
  EXPECT_EQ(m.Parameters().size(), 2u);
  EXPECT_EQ(m.ParameterCount(), (5u + 7u) * 8u);
}

TEST(InstantiateTest, FismUsesItemIndexedUserTable) {
  Rng rng(0);
  CfModel m(S("H,ID,MAT,MAT,MUL,SUM"), 8, 5, 7, rng);
  EXPECT_EQ(m.user_table().rows(), 7u);
  EXPECT_EQ(m.item_table().rows(), 7u);
}

TEST(InstantiateTest, ConcatVecHeadLength) {
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,CONCAT,VEC"), 8, 5, 7, rng);
  EXPECT_EQ(m.head_vector().size(), 16u);
  EXPECT_EQ(m.interaction_size(), 16u);
}

TEST(InstantiateTest, MlpShapes) {
  Rng rng(0);
  CfModel m(S("H,H,MLP,MLP,CONCAT,MLP"), 4, 5, 7, rng);
  EXPECT_EQ(m.user_mlp().layer_sizes(), (std::vector<std::size_t>{7, 16, 4}));
  EXPECT_EQ(m.item_mlp().layer_sizes(), (std::vector<std::size_t>{5, 16, 4}));
  EXPECT_EQ(m.head_mlp().layer_sizes(),
            (std::vector<std::size_t>{8, 8, 4, 1}));
  EXPECT_TRUE(m.user_table().empty());
}

TEST(InstantiateTest, InitialisationIsBoundedAndSeeded) {
  Rng a(3), b(3);
  CfModel x(S("H,H,MAT,MLP,MUL,VEC"), 8, 10, 12, a);
  CfModel y(S("H,H,MAT,MLP,MUL,VEC"), 8, 10, 12, b);
  const double bound = std::sqrt(6.0 / (12 + 8));
  for (double v : x.user_table().values()) EXPECT_LE(std::abs(v), bound);
  auto px = x.Parameters(), py = y.Parameters();
  for (std::size_t i = 0; i < px.size(); ++i) EXPECT_EQ(*px[i], *py[i]);
}

TEST(InstantiateTest, RejectsIncompatibleAndEmpty) {
  Rng rng(0);
  EXPECT_THROW(CfModel(S("ID,H,MLP,MAT,MUL,SUM"), 4, 3, 3, rng), ConfigError);
  EXPECT_THROW(CfModel(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 0, 3, rng), ConfigError);
  EXPECT_THROW(CfModel(S("ID,ID,MAT,MAT,MUL,SUM"), 0, 3, 3, rng), ConfigError);
}

InteractionDataset TwoByTwo() {
  return InteractionDataset::FromSplits(Form::kExplicit, {"a", "b"},
                                        {"x", "y", "z"},
                                        {{0, 0, 3}, {0, 1, 4}, {1, 2, 5}}, {},
                                        {{1, 0, 2}});
}

TEST(ForwardTest, MfHandArithmetic) {
  const auto ds = TwoByTwo();
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MUL,SUM"), 2, 2, 3, rng);
  m.mutable_user_table().row(0)[0] = 1;
  m.mutable_user_table().row(0)[1] = 2;
  m.mutable_item_table().row(1)[0] = 3;
  m.mutable_item_table().row(1)[1] = 4;
  m.MarkUpdated();
  auto [score, tape] = m.Forward(0, 1, ds);
  EXPECT_EQ(tape.interaction, (std::vector<double>{3, 8}));
  EXPECT_EQ(score, 11.0);
}

TEST(ForwardTest, GmfHandArithmetic) {
  const auto ds = TwoByTwo();
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MUL,VEC"), 2, 2, 3, rng);
  m.mutable_user_table().row(0)[0] = 1;
  m.mutable_user_table().row(0)[1] = 2;
  m.mutable_item_table().row(1)[0] = 3;
  m.mutable_item_table().row(1)[1] = 4;
  m.mutable_head_vector().values()[0] = 1;
  m.mutable_head_vector().values()[1] = 0;
  m.MarkUpdated();
  EXPECT_EQ(m.Forward(0, 1, ds).first, 3.0);
}

TEST(ForwardTest, MinusOfIdenticalEmbeddingsIsZero) {
  const auto ds = TwoByTwo();
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MINUS,SUM"), 3, 2, 3, rng);
  for (std::size_t k = 0; k < 3; ++k) {
    m.mutable_item_table()(2, k) = m.user_table()(1, k);
  }
  m.MarkUpdated();
  auto [score, tape] = m.Forward(1, 2, ds);
  for (double v : tape.interaction) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(score, 0.0);
}

TEST(ForwardTest, HistoryMatMeanPools) {
  const auto ds = TwoByTwo();  // user 0 history {0, 1}
  Rng rng(0);
  CfModel m(S("H,ID,MAT,MAT,MUL,SUM"), 2, 2, 3, rng);
  DenseMatrix& t = m.mutable_user_table();
  t(0, 0) = 2;
  t(0, 1) = 0;
  t(1, 0) = 0;
  t(1, 1) = 2;
  m.MarkUpdated();
  // Pair (0, 2) is not in train, so nothing is excluded.
  auto [score, tape] = m.Forward(0, 2, ds);
  EXPECT_EQ(tape.user.embedding, (std::vector<double>{1, 1}));
  // Pair (0, 1) excludes item 1: only row 0 remains.
  auto [s2, tape2] = m.Forward(0, 1, ds);
  EXPECT_EQ(tape2.user.embedding, (std::vector<double>{2, 0}));
  (void)score;
  (void)s2;
}

TEST(ForwardTest, EmptyHistoryGivesZeroEmbedding) {
  // User b's only train item is 2; excluding it empties the history.
  const auto ds = TwoByTwo();
  Rng rng(0);
  for (const char* s : {"H,ID,MAT,MAT,MUL,SUM", "H,ID,MLP,MAT,MUL,SUM"}) {
    CfModel m(S(s), 3, 2, 3, rng);
    auto [score, tape] = m.Forward(1, 2, ds);
    EXPECT_EQ(tape.user.embedding, (std::vector<double>(3, 0.0))) << s;
    EXPECT_EQ(score, 0.0) << s;
  }
}

TEST(BackwardTest, MfSquaredLossClosedForm) {
  const auto ds = TwoByTwo();
  Rng rng(4);
  CfModel m(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 2, 3, rng);
  auto [pred, tape] = m.Forward(0, 1, ds);
  const double y = 4.0;
  const CfModel::Gradients g = m.Backward(tape, 2.0 * (pred - y));
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(g.user_table(0, k), 2.0 * (pred - y) * m.item_table()(1, k),
                1e-12);
    EXPECT_EQ(g.user_table(1, k), 0.0);
  }
}

TEST(BackwardTest, MinLoserGetsZeroGradient) {
  const auto ds = TwoByTwo();
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MIN,SUM"), 2, 2, 3, rng);
  // User wins dim 0, item wins dim 1.
  m.mutable_user_table()(0, 0) = -1;
  m.mutable_user_table()(0, 1) = 5;
  m.mutable_item_table()(2, 0) = 1;
  m.mutable_item_table()(2, 1) = 2;
  m.MarkUpdated();
  auto [score, tape] = m.Forward(0, 2, ds);
  EXPECT_EQ(score, 1.0);
  const auto g = m.Backward(tape, 1.0);
  EXPECT_EQ(g.user_table(0, 0), 1.0);
  EXPECT_EQ(g.user_table(0, 1), 0.0);
  EXPECT_EQ(g.item_table(2, 0), 0.0);
  EXPECT_EQ(g.item_table(2, 1), 1.0);
}

TEST(BackwardTest, StaleTapeRejected) {
  const auto ds = TwoByTwo();
  Rng rng(0);
  CfModel m(S("ID,ID,MAT,MAT,MUL,SUM"), 2, 2, 3, rng);
  CfModel other(S("ID,ID,MAT,MAT,MUL,SUM"), 2, 2, 3, rng);
  auto [s, tape] = m.Forward(0, 0, ds);
  EXPECT_THROW(other.Backward(tape, 1.0), InternalError);
  m.ApplyAdam(m.ZeroGradients(), 0.01);
  EXPECT_THROW(m.Backward(tape, 1.0), InternalError);
  (void)s;
}

TEST(BackwardTest, AllTuplesMatchFiniteDifferences) {
  const auto ds = InteractionDataset::FromSplits(
      Form::kExplicit, {"a", "b"}, {"x", "y", "z"},
      {{0, 0, 3}, {0, 1, 4}, {1, 1, 2}, {1, 2, 5}}, {}, {{0, 2, 1}});
  const auto pairs = test::AllPairs(ds);
  Rng rng(99);
  for (const StageChoice& s : EnumerateStageTuples(true)) {
    int draws = 0, attempts = 0;
    while (draws < 2 && attempts < 50) {
      ++attempts;
      CfModel m(s, 4, 2, 3, rng);
      test::RandomizeParameters(m, rng);
      std::vector<double> c(pairs.size());
      for (double& v : c) v = rng.Uniform(-1, 1);
      const auto r = test::CheckGradients(m, ds, pairs, c, 1e-4, 1e-6);
      if (r.kink) continue;
      EXPECT_LE(r.max_rel_error, 1e-4) << s.ToString();
      ++draws;
    }
    EXPECT_EQ(draws, 2) << s.ToString();
  }
}

TEST(BackwardTest, NormHeadMatchesFiniteDifferences) {
  const auto ds = ToyDataset();
  const auto pairs = test::AllPairs(ds);
  Rng rng(5);
  CfModel m(S("ID,ID,MAT,MAT,MINUS,NORM"), 4, 3, 4, rng);
  test::RandomizeParameters(m, rng);
  std::vector<double> c(pairs.size(), 0.5);
  const auto r = test::CheckGradients(m, ds, pairs, c, 1e-4, 1e-6);
  EXPECT_FALSE(r.kink);
  EXPECT_LE(r.max_rel_error, 1e-4);
}

TEST(InteractionSymmetryTest, SwapProperties) {
  Rng rng(12);
  const auto ds = ToyDataset();
  std::vector<double> a(3), b(3);
  for (int trial = 0; trial < 20; ++trial) {
    for (double& v : a) v = rng.Uniform(-1, 1);
    for (double& v : b) v = rng.Uniform(-1, 1);
    for (const char* g : {"MUL", "MIN", "MAX", "MINUS", "CONCAT", "PLUS"}) {
      CfModel m(S(std::string("ID,ID,MAT,MAT,") + g + ",SUM"), 3, 3, 4, rng);
      CfModel::Tape t1, t2;
      m.ScoreEmbeddings(a, b, t1);
      m.ScoreEmbeddings(b, a, t2);
      const std::string name = g;
      if (name == "MINUS") {
        for (std::size_t k = 0; k < 3; ++k) {
          EXPECT_EQ(t1.interaction[k], -t2.interaction[k]);
        }
      } else if (name == "CONCAT") {
        for (std::size_t k = 0; k < 3; ++k) {
          EXPECT_EQ(t1.interaction[k], t2.interaction[k + 3]);
          EXPECT_EQ(t1.interaction[k + 3], t2.interaction[k]);
        }
        EXPECT_EQ(t1.interaction[0], a[0]);  // user block first
      } else {
        EXPECT_EQ(t1.interaction, t2.interaction) << name;
      }
    }
  }
}

TEST(HistoryExclusionTest, TargetPairNeverLeaks) {
  // Same data with and without the target pair (0, 3) in train.
  const std::vector<Interaction> base = {{0, 0, 4}, {0, 1, 3}, {1, 3, 2},
                                         {1, 1, 5}, {2, 2, 1}, {2, 3, 4}};
  std::vector<Interaction> with = base;
  with.push_back({0, 3, 5});
  const auto a = InteractionDataset::FromSplits(
      Form::kExplicit, {"a", "b", "c"}, {"w", "x", "y", "z"}, base, {}, {});
  const auto b = InteractionDataset::FromSplits(
      Form::kExplicit, {"a", "b", "c"}, {"w", "x", "y", "z"}, with, {}, {});
  Rng rng(31);
  for (const StageChoice& s : EnumerateStageTuples()) {
    CfModel m(s, 4, 3, 4, rng);
    test::RandomizeParameters(m, rng);
    EXPECT_EQ(m.Forward(0, 3, a).first, m.Forward(0, 3, b).first)
        << s.ToString();
  }
}

TEST(BaselineTest, TableMappings) {
  EXPECT_EQ(FindBaseline("MF").components[0], S("ID,ID,MAT,MAT,MUL,SUM"));
  EXPECT_EQ(FindBaseline("FISM").components[0], S("H,ID,MAT,MAT,MUL,SUM"));
  EXPECT_EQ(FindBaseline("GMF").components[0], S("ID,ID,MAT,MAT,MUL,VEC"));
  EXPECT_EQ(FindBaseline("MLP").components[0], S("ID,ID,MAT,MAT,CONCAT,MLP"));
  EXPECT_EQ(FindBaseline("cmf").components[0], S("ID,ID,MAT,MAT,MINUS,NORM"));
  EXPECT_EQ(FindBaseline("DMF").components[0], S("H,H,MLP,MLP,MUL,SUM"));
  EXPECT_EQ(FindBaseline("JNCF-Dot").components[0], S("H,H,MLP,MLP,MUL,MLP"));
  EXPECT_EQ(FindBaseline("JNCF-Cat").components[0],
            S("H,H,MLP,MLP,CONCAT,MLP"));
  EXPECT_EQ(FindBaseline("SVD++").components,
            (std::vector<StageChoice>{S("ID,ID,MAT,MAT,MUL,SUM"),
                                      S("H,ID,MAT,MAT,MUL,SUM")}));
  EXPECT_EQ(FindBaseline("NeuMF").components,
            (std::vector<StageChoice>{S("ID,ID,MAT,MAT,MUL,VEC"),
                                      S("ID,ID,MAT,MAT,CONCAT,MLP")}));
  EXPECT_EQ(FindBaseline("DELF").components.size(), 4u);
  EXPECT_THROW(FindBaseline("BPRMF"), ConfigError);
  EXPECT_EQ(SingleBaselines().size(), 8u);
}

TEST(BaselineTest, SingleForwardMatchesReference) {
  const auto ds = ToyDataset();
  Rng rng(8);
  for (const Baseline& b : SingleBaselines()) {
    for (int draw = 0; draw < 3; ++draw) {
      CfModel m(b.components[0], 4, ds.num_users(), ds.num_items(), rng);
      test::RandomizeParameters(m, rng);
      for (const auto& [u, j] : test::AllPairs(ds)) {
        EXPECT_NEAR(m.Forward(u, j, ds).first,
                    test::ReferenceScore(b.name, m, ds, u, j), 1e-10)
            << b.name;
      }
    }
  }
}

TEST(FusedModelTest, ScoreIsSumOfComponents) {
  const auto ds = ToyDataset();
  Rng rng(2);
  std::vector<CfModel> parts;
  parts.emplace_back(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 3, 4, rng);
  parts.emplace_back(S("ID,ID,MAT,MAT,MUL,VEC"), 4, 3, 4, rng);
  const double a = parts[0].Forward(1, 2, ds).first;
  const double b = parts[1].Forward(1, 2, ds).first;
  FusedModel f(std::move(parts));
  EXPECT_EQ(f.Score(1, 2, ds), a + b);
}

TEST(FusedModelTest, RejectsMismatchAndSingleton) {
  Rng rng(2);
  std::vector<CfModel> bad;
  bad.emplace_back(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 3, 4, rng);
  bad.emplace_back(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 3, 5, rng);
  EXPECT_THROW(FusedModel(std::move(bad)), ConfigError);
  std::vector<CfModel> one;
  one.emplace_back(S("ID,ID,MAT,MAT,MUL,SUM"), 4, 3, 4, rng);
  EXPECT_THROW(FusedModel(std::move(one)), ConfigError);
}

TEST(FusedModelTest, SvdppAndNeumfMatchReferences) {
  const auto ds = ToyDataset();
  Rng rng(6);
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"SVD++", {"MF", "FISM"}}, {"NeuMF", {"GMF", "MLP"}}};
  for (const auto& [name, refs] : cases) {
    const Baseline& b = FindBaseline(name);
    std::vector<CfModel> parts;
    for (const auto& s : b.components) {
      parts.emplace_back(s, 4, ds.num_users(), ds.num_items(), rng);
      test::RandomizeParameters(parts.back(), rng);
    }
    FusedModel f(std::move(parts));
    for (const auto& [u, j] : test::AllPairs(ds)) {
      const double want =
          test::ReferenceScore(refs[0], f.components()[0], ds, u, j) +
          test::ReferenceScore(refs[1], f.components()[1], ds, u, j);
      EXPECT_NEAR(f.Score(u, j, ds), want, 1e-10) << name;
    }
  }
}

}  // namespace
}  // namespace autocf
