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

#include "autocf/cfmodel/cf_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

void AppendRefs(const DenseMatrix& m, std::vector<const DenseMatrix*>& out) {
  if (!m.empty()) out.push_back(&m);
}

void AppendRefs(const MlpNet::Gradient& g,
                std::vector<const DenseMatrix*>& out) {
  for (const DenseMatrix* m : g.Refs()) out.push_back(m);
}

}  // namespace

void CfModel::Gradients::SetZero() {
  user_table.SetZero();
  user_mlp.SetZero();
  item_table.SetZero();
  item_mlp.SetZero();
  head_vector.SetZero();
  head_mlp.SetZero();
}

std::vector<const DenseMatrix*> CfModel::Gradients::Refs() const {
  std::vector<const DenseMatrix*> out;
  AppendRefs(user_table, out);
  AppendRefs(user_mlp, out);
  AppendRefs(item_table, out);
  AppendRefs(item_mlp, out);
  AppendRefs(head_vector, out);
  AppendRefs(head_mlp, out);
  return out;
}

CfModel::CfModel(const StageChoice& stages, std::size_t dim,
                 std::size_t num_users, std::size_t num_items, Rng& rng,
                 const ModelShape& shape)
    : stages_(stages), dim_(dim), num_users_(num_users),
      num_items_(num_items) {
  if (!stages.IsCompatible()) {
    throw ConfigError("incompatible stage tuple " + stages.ToString() + ": " +
                      kCompatibilityRule);
  }
  if (dim == 0 || num_users == 0 || num_items == 0) {
    throw ConfigError("CfModel: dimension, user count and item count must be "
                      "positive");
  }
  auto build_side = [&](Side& side, InputEncoding enc, EmbeddingFn emb,
                        std::size_t self_count, std::size_t other_count) {
    side.encoding = enc;
    side.embedding = emb;
    if (enc == InputEncoding::kId) {
      side.table = DenseMatrix(self_count, dim);
      GlorotUniform(side.table, self_count, dim, rng);
    } else if (emb == EmbeddingFn::kMat) {
      side.table = DenseMatrix(other_count, dim);
      GlorotUniform(side.table, other_count, dim, rng);
    } else {
      side.mlp = MlpNet(
          {other_count, shape.embedding_hidden_multiplier * dim, dim}, rng);
    }
  };
  build_side(user_, stages.user_encoding, stages.user_embedding, num_users,
             num_items);
  build_side(item_, stages.item_encoding, stages.item_embedding, num_items,
             num_users);

  const std::size_t width = interaction_size();
  switch (stages.prediction) {
    case PredictionFn::kVec:
      head_vector_ = DenseMatrix(1, width);
      GlorotUniform(head_vector_, width, 1, rng);
      break;
    case PredictionFn::kMlp: {
      std::vector<std::size_t> sizes = {width};
      for (std::size_t m : shape.prediction_hidden_multipliers) {
        sizes.push_back(m * dim);
      }
      sizes.push_back(1);
      head_mlp_ = MlpNet(sizes, rng);
      break;
    }
    case PredictionFn::kSum:
    case PredictionFn::kNorm:
      break;
  }
  adam_ = AdamState(Parameters());
}

std::size_t CfModel::interaction_size() const {
  return stages_.interaction == InteractionFn::kConcat ? 2 * dim_ : dim_;
}

void CfModel::Embed(const Side& side, std::uint32_t self,
                    std::span<const std::uint32_t> history,
                    std::optional<std::uint32_t> exclude,
                    SideTape& tape) const {
  tape.embedding.assign(dim_, 0.0);
  tape.active.clear();
  if (side.encoding == InputEncoding::kId) {
    tape.active.push_back(self);
    const auto row = side.table.row(self);
    std::copy(row.begin(), row.end(), tape.embedding.begin());
    return;
  }
  for (std::uint32_t h : history) {
    if (!exclude || h != *exclude) tape.active.push_back(h);
  }
  if (tape.active.empty()) return;
  if (side.embedding == EmbeddingFn::kMat) {
    for (std::uint32_t h : tape.active) Axpy(1.0, side.table.row(h),
                                            tape.embedding);
    const double inv = 1.0 / static_cast<double>(tape.active.size());
    for (double& v : tape.embedding) v *= inv;
  } else {
    const auto out = side.mlp.ForwardMultiHot(tape.active, tape.mlp);
    std::copy(out.begin(), out.end(), tape.embedding.begin());
  }
}

void CfModel::EmbedUser(UserIndex u, const InteractionDataset& dataset,
                        std::optional<ItemIndex> exclude,
                        SideTape& tape) const {
  Embed(user_, u, dataset.user_history(u), exclude, tape);
}

void CfModel::EmbedItem(ItemIndex j, const InteractionDataset& dataset,
                        std::optional<UserIndex> exclude,
                        SideTape& tape) const {
  Embed(item_, j, dataset.item_history(j), exclude, tape);
}

double CfModel::Head(Tape& tape) const {
  const std::vector<double>& s = tape.interaction;
  switch (stages_.prediction) {
    case PredictionFn::kSum: {
      double total = 0.0;
      for (double v : s) total += v;
      return total;
    }
    case PredictionFn::kVec:
      return Dot(head_vector_.values(), s);
    case PredictionFn::kMlp:
      return head_mlp_.Forward(s, tape.head)[0];
    case PredictionFn::kNorm:
      return -std::sqrt(Dot(s, s));
  }
  throw InternalError("CfModel: unknown prediction function");
}

double CfModel::ScoreEmbeddings(std::span<const double> eu,
                                std::span<const double> ei,
                                Tape& tape) const {
  if (eu.size() != dim_ || ei.size() != dim_) {
    throw ConfigError("CfModel::ScoreEmbeddings: embedding length mismatch");
  }
  std::vector<double>& s = tape.interaction;
  s.resize(interaction_size());
  switch (stages_.interaction) {
    case InteractionFn::kMul:
      for (std::size_t k = 0; k < dim_; ++k) s[k] = eu[k] * ei[k];
      break;
    case InteractionFn::kMinus:
      for (std::size_t k = 0; k < dim_; ++k) s[k] = eu[k] - ei[k];
      break;
    case InteractionFn::kMin:
      for (std::size_t k = 0; k < dim_; ++k) s[k] = std::min(eu[k], ei[k]);
      break;
    case InteractionFn::kMax:
      for (std::size_t k = 0; k < dim_; ++k) s[k] = std::max(eu[k], ei[k]);
      break;
    case InteractionFn::kConcat:
      std::copy(eu.begin(), eu.end(), s.begin());
      std::copy(ei.begin(), ei.end(), s.begin() + dim_);
      break;
    case InteractionFn::kPlus:
      for (std::size_t k = 0; k < dim_; ++k) s[k] = eu[k] + ei[k];
      break;
  }
  tape.model = this;
  tape.version = version_;
  tape.score = Head(tape);
  return tape.score;
}

double CfModel::Forward(UserIndex u, ItemIndex j,
                        const InteractionDataset& dataset, Tape& tape) const {
  if (u >= num_users_ || j >= num_items_) {
    throw ConfigError("CfModel::Forward: pair (" + std::to_string(u) + ", " +
                      std::to_string(j) + ") out of range");
  }
  EmbedUser(u, dataset, j, tape.user);
  EmbedItem(j, dataset, u, tape.item);
  return ScoreEmbeddings(tape.user.embedding, tape.item.embedding, tape);
}

std::pair<double, CfModel::Tape> CfModel::Forward(
    UserIndex u, ItemIndex j, const InteractionDataset& dataset) const {
  Tape tape;
  const double score = Forward(u, j, dataset, tape);
  return {score, std::move(tape)};
}

void CfModel::BackwardSide(const Side& side, SideTape& tape,
                           std::span<const double> grad,
                           DenseMatrix& table_grad,
                           MlpNet::Gradient& mlp_grad) const {
  if (tape.active.empty()) return;
  if (side.encoding == InputEncoding::kId) {
    Axpy(1.0, grad, table_grad.row(tape.active[0]));
  } else if (side.embedding == EmbeddingFn::kMat) {
    const double inv = 1.0 / static_cast<double>(tape.active.size());
    for (std::uint32_t h : tape.active) Axpy(inv, grad, table_grad.row(h));
  } else {
    side.mlp.Backward(tape.mlp, grad, mlp_grad);
  }
}

void CfModel::Backward(Tape& tape, double dscore, Gradients& grads) const {
  if (tape.model != this || tape.version != version_) {
    throw InternalError("CfModel::Backward: stale or foreign tape");
  }
  const std::vector<double>& s = tape.interaction;
  std::vector<double>& ds = tape.d_interaction;
  ds.assign(s.size(), 0.0);
  switch (stages_.prediction) {
    case PredictionFn::kSum:
      std::fill(ds.begin(), ds.end(), dscore);
      break;
    case PredictionFn::kVec: {
      const auto w = head_vector_.values();
      for (std::size_t k = 0; k < s.size(); ++k) ds[k] = dscore * w[k];
      Axpy(dscore, s, grads.head_vector.values());
      break;
    }
    case PredictionFn::kMlp: {
      const double g[1] = {dscore};
      head_mlp_.Backward(tape.head, g, grads.head_mlp);
      std::copy(grads.head_mlp.input.begin(), grads.head_mlp.input.end(),
                ds.begin());
      break;
    }
    case PredictionFn::kNorm: {
      const double norm = std::sqrt(Dot(s, s));
      if (norm > 0.0) {
        for (std::size_t k = 0; k < s.size(); ++k) {
          ds[k] = -dscore * s[k] / norm;
        }
      }
      break;
    }
  }

  const std::vector<double>& eu = tape.user.embedding;
  const std::vector<double>& ei = tape.item.embedding;
  std::vector<double>& du = tape.d_user;
  std::vector<double>& di = tape.d_item;
  du.assign(dim_, 0.0);
  di.assign(dim_, 0.0);
  for (std::size_t k = 0; k < dim_; ++k) {
    switch (stages_.interaction) {
      case InteractionFn::kMul:
        du[k] = ds[k] * ei[k];
        di[k] = ds[k] * eu[k];
        break;
      case InteractionFn::kMinus:
        du[k] = ds[k];
        di[k] = -ds[k];
        break;
      // Ties go to the user side.
      case InteractionFn::kMin:
        (eu[k] <= ei[k] ? du[k] : di[k]) = ds[k];
        break;
      case InteractionFn::kMax:
        (eu[k] >= ei[k] ? du[k] : di[k]) = ds[k];
        break;
      case InteractionFn::kConcat:
        du[k] = ds[k];
        di[k] = ds[dim_ + k];
        break;
      case InteractionFn::kPlus:
        du[k] = ds[k];
        di[k] = ds[k];
        break;
    }
  }
  BackwardSide(user_, tape.user, du, grads.user_table, grads.user_mlp);
  BackwardSide(item_, tape.item, di, grads.item_table, grads.item_mlp);
}

CfModel::Gradients CfModel::Backward(Tape& tape, double dscore) const {
  Gradients g = ZeroGradients();
  Backward(tape, dscore, g);
  return g;
}

CfModel::Gradients CfModel::ZeroGradients() const {
  Gradients g;
  g.user_table = DenseMatrix(user_.table.rows(), user_.table.cols());
  g.user_mlp = user_.mlp.ZeroGradient();
  g.item_table = DenseMatrix(item_.table.rows(), item_.table.cols());
  g.item_mlp = item_.mlp.ZeroGradient();
  g.head_vector = DenseMatrix(head_vector_.rows(), head_vector_.cols());
  g.head_mlp = head_mlp_.ZeroGradient();
  return g;
}

std::vector<DenseMatrix*> CfModel::Parameters() {
  std::vector<DenseMatrix*> out;
  auto add = [&out](DenseMatrix& m) {
    if (!m.empty()) out.push_back(&m);
  };
  add(user_.table);
  for (DenseMatrix* m : user_.mlp.Parameters()) out.push_back(m);
  add(item_.table);
  for (DenseMatrix* m : item_.mlp.Parameters()) out.push_back(m);
  add(head_vector_);
  for (DenseMatrix* m : head_mlp_.Parameters()) out.push_back(m);
  return out;
}

std::size_t CfModel::ParameterCount() const {
  std::size_t n = 0;
  for (DenseMatrix* m : const_cast<CfModel*>(this)->Parameters()) {
    n += m->size();
  }
  return n;
}

void CfModel::ApplyAdam(const Gradients& grads, double lr) {
  AdamStep(Parameters(), grads.Refs(), adam_, lr);
  MarkUpdated();
}

void CfModel::MarkUpdated() {
  ++version_;
  user_.mlp.MarkUpdated();
  item_.mlp.MarkUpdated();
  head_mlp_.MarkUpdated();
}

DenseMatrix CfModel::ItemEmbeddings(const InteractionDataset& dataset) const {
  DenseMatrix out(num_items_, dim_);
  SideTape tape;
  for (ItemIndex j = 0; j < num_items_; ++j) {
    EmbedItem(j, dataset, std::nullopt, tape);
    std::copy(tape.embedding.begin(), tape.embedding.end(),
              out.row(j).begin());
  }
  return out;
}

CfModel Instantiate(const ModelConfig& config, const SearchSpace& space,
                    std::size_t num_users, std::size_t num_items, Rng& rng,
                    const ModelShape& shape) {
  if (!space.Contains(config)) {
    throw ConfigError("config is not part of the search space");
  }
  return CfModel(config.stages, space.dim(config), num_users, num_items, rng,
                 shape);
}

FusedModel::FusedModel(std::vector<CfModel> components)
    : components_(std::move(components)) {
  if (components_.size() < 2) {
    throw ConfigError("FusedModel: at least two components are required");
  }
  for (const CfModel& c : components_) {
    if (c.num_users() != components_[0].num_users() ||
        c.num_items() != components_[0].num_items()) {
      throw ConfigError("FusedModel: components disagree on user/item counts");
    }
  }
}

double FusedModel::Score(UserIndex u, ItemIndex j,
                         const InteractionDataset& dataset) const {
  double total = 0.0;
  CfModel::Tape tape;
  for (const CfModel& c : components_) total += c.Forward(u, j, dataset, tape);
  return total;
}

}  // namespace autocf
