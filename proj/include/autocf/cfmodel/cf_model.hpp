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

#ifndef AUTOCF_CFMODEL_CF_MODEL_HPP_
#define AUTOCF_CFMODEL_CF_MODEL_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "autocf/cfmodel/config.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/numcore/adam.hpp"
#include "autocf/numcore/dense_matrix.hpp"
#include "autocf/numcore/mlp.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

// Widths of the MLPs inside a model, as multiples of the embedding size d.
struct ModelShape {
  // History + MLP side: multi-hot -> (multiplier * d) -> d.
  std::size_t embedding_hidden_multiplier = 4;
  // MLP prediction head: interaction -> (m_1 * d) -> ... -> 1.
  std::vector<std::size_t> prediction_hidden_multipliers = {2, 1};
};

// One point of the four-stage model space with its learnable parameters:
//   embeddings  e_u = e_user(c_u), e_j = e_item(c_j)
//   interaction s   = g(e_u, e_j)
//   prediction  O   = h(s)
// A side with ID encoding owns an embedding table indexed by its own entity.
// A History side looks up a table indexed by the opposite entity and
// mean-pools it (MAT), or feeds the multi-hot history through an MLP. For a
// pair (u, j), item j is removed from u's history and user u from j's history
// so a training label never appears in its own input. An empty history gives
// the zero embedding.
class CfModel {
 public:
  struct SideTape {
    std::vector<std::uint32_t> active;  // looked-up rows / multi-hot entries
    MlpNet::Tape mlp;
    std::vector<double> embedding;
  };

  struct Tape {
    SideTape user;
    SideTape item;
    std::vector<double> interaction;
    MlpNet::Tape head;
    double score = 0.0;
    const CfModel* model = nullptr;
    std::uint64_t version = 0;
    // Backward scratch.
    std::vector<double> d_interaction;
    std::vector<double> d_user;
    std::vector<double> d_item;
  };

  struct Gradients {
    DenseMatrix user_table;
    MlpNet::Gradient user_mlp;
    DenseMatrix item_table;
    MlpNet::Gradient item_mlp;
    DenseMatrix head_vector;
    MlpNet::Gradient head_mlp;

    void SetZero();
    // Same order as CfModel::Parameters().
    std::vector<const DenseMatrix*> Refs() const;
  };

  CfModel(const StageChoice& stages, std::size_t dim, std::size_t num_users,
          std::size_t num_items, Rng& rng, const ModelShape& shape = {});

  const StageChoice& stages() const { return stages_; }
  std::size_t dim() const { return dim_; }
  std::size_t num_users() const { return num_users_; }
  std::size_t num_items() const { return num_items_; }
  // Length of the interaction output (d, or 2d for CONCAT).
  std::size_t interaction_size() const;

  // Empty when the side has no table (History + MLP).
  const DenseMatrix& user_table() const { return user_.table; }
  const DenseMatrix& item_table() const { return item_.table; }
  // Zero-layer net when the side has no MLP.
  const MlpNet& user_mlp() const { return user_.mlp; }
  const MlpNet& item_mlp() const { return item_.mlp; }
  const DenseMatrix& head_vector() const { return head_vector_; }
  const MlpNet& head_mlp() const { return head_mlp_; }

  // Score of (u, j); the tape records everything Backward needs.
  double Forward(UserIndex u, ItemIndex j, const InteractionDataset& dataset,
                 Tape& tape) const;
  std::pair<double, Tape> Forward(UserIndex u, ItemIndex j,
                                  const InteractionDataset& dataset) const;

  // Accumulates dscore * dScore/dparams into grads. Throws InternalError if
  // the tape is from another model or predates a parameter update.
  void Backward(Tape& tape, double dscore, Gradients& grads) const;
  Gradients Backward(Tape& tape, double dscore) const;

  Gradients ZeroGradients() const;
  // Every learnable block in a fixed order: user side, item side, head.
  std::vector<DenseMatrix*> Parameters();
  std::size_t ParameterCount() const;

  // One Adam step with the model's own optimizer state.
  void ApplyAdam(const Gradients& grads, double lr);
  const AdamState& adam() const { return adam_; }
  // Invalidates tapes; call after editing parameters directly.
  void MarkUpdated();

  // Embeddings without target exclusion. Valid for scoring any pair (u, j)
  // that is not a training interaction.
  void EmbedUser(UserIndex u, const InteractionDataset& dataset,
                 std::optional<ItemIndex> exclude, SideTape& tape) const;
  void EmbedItem(ItemIndex j, const InteractionDataset& dataset,
                 std::optional<UserIndex> exclude, SideTape& tape) const;
  // N x d matrix of item embeddings (no exclusion).
  DenseMatrix ItemEmbeddings(const InteractionDataset& dataset) const;
  // Interaction + prediction on precomputed embeddings.
  double ScoreEmbeddings(std::span<const double> user_embedding,
                         std::span<const double> item_embedding,
                         Tape& scratch) const;

  // Direct parameter access for tests and baseline references.
  DenseMatrix& mutable_user_table() { return user_.table; }
  DenseMatrix& mutable_item_table() { return item_.table; }
  MlpNet& mutable_user_mlp() { return user_.mlp; }
  MlpNet& mutable_item_mlp() { return item_.mlp; }
  DenseMatrix& mutable_head_vector() { return head_vector_; }
  MlpNet& mutable_head_mlp() { return head_mlp_; }

 private:
  struct Side {
    InputEncoding encoding = InputEncoding::kId;
    EmbeddingFn embedding = EmbeddingFn::kMat;
    DenseMatrix table;
    MlpNet mlp;
  };

  void Embed(const Side& side, std::uint32_t self,
             std::span<const std::uint32_t> history,
             std::optional<std::uint32_t> exclude, SideTape& tape) const;
  void BackwardSide(const Side& side, SideTape& tape,
                    std::span<const double> grad, DenseMatrix& table_grad,
                    MlpNet::Gradient& mlp_grad) const;
  double Head(Tape& tape) const;

  StageChoice stages_;
  std::size_t dim_;
  std::size_t num_users_;
  std::size_t num_items_;
  Side user_;
  Side item_;
  DenseMatrix head_vector_;
  MlpNet head_mlp_;
  AdamState adam_;
  std::uint64_t version_ = 0;
};

// Instantiates config from the space on an M-user, N-item dataset.
CfModel Instantiate(const ModelConfig& config, const SearchSpace& space,
                    std::size_t num_users, std::size_t num_items, Rng& rng,
                    const ModelShape& shape = {});

// Additive fusion of two or more components over the same dataset.
class FusedModel {
 public:
  // Throws ConfigError with fewer than two components or mismatched M/N.
  explicit FusedModel(std::vector<CfModel> components);

  std::vector<CfModel>& components() { return components_; }
  const std::vector<CfModel>& components() const { return components_; }

  // Sum of component scores.
  double Score(UserIndex u, ItemIndex j,
               const InteractionDataset& dataset) const;

 private:
  std::vector<CfModel> components_;
};

}  // namespace autocf

#endif  // AUTOCF_CFMODEL_CF_MODEL_HPP_
