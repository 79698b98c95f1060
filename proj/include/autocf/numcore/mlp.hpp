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

#ifndef AUTOCF_NUMCORE_MLP_HPP_
#define AUTOCF_NUMCORE_MLP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "autocf/numcore/dense_matrix.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf {

// Fully connected network, ReLU on hidden layers and identity on the output
// layer. Layer k maps x (length in_k) to x * W_k + b_k, where W_k is stored
// in_k x out_k so that a multi-hot input reduces to a sum of weight rows.
class MlpNet {
 public:
  // Activation record of one forward pass, plus backward scratch space.
  struct Tape {
    std::vector<double> input;          // dense input; empty when multi_hot
    std::vector<std::uint32_t> active;  // multi-hot input indices
    bool multi_hot = false;
    std::vector<std::vector<double>> outputs;  // post-activation, per layer
    const MlpNet* net = nullptr;
    std::uint64_t version = 0;
    std::vector<double> delta;
    std::vector<double> next_delta;
  };

  struct Gradient {
    std::vector<DenseMatrix> weights;
    std::vector<DenseMatrix> biases;  // 1 x out_k
    std::vector<double> input;        // dL/dinput (dense forward only)

    void SetZero();
    std::vector<const DenseMatrix*> Refs() const;
  };

  MlpNet() = default;
  // Glorot-uniform weights, zero biases. layer_sizes = {in, hidden..., out}.
  MlpNet(std::vector<std::size_t> layer_sizes, Rng& rng);
  // Explicit parameters; throws ConfigError on incompatible shapes.
  MlpNet(std::vector<DenseMatrix> weights, std::vector<DenseMatrix> biases);

  std::size_t input_size() const;
  std::size_t output_size() const;
  std::size_t num_layers() const { return weights_.size(); }
  std::vector<std::size_t> layer_sizes() const;

  const DenseMatrix& weight(std::size_t k) const { return weights_[k]; }
  const DenseMatrix& bias(std::size_t k) const { return biases_[k]; }
  DenseMatrix& mutable_weight(std::size_t k) { return weights_[k]; }
  DenseMatrix& mutable_bias(std::size_t k) { return biases_[k]; }

  // Output is a view into tape.outputs.back().
  std::span<const double> Forward(std::span<const double> input,
                                  Tape& tape) const;
  // Input is the multi-hot vector whose 1-entries are listed in `active`.
  std::span<const double> ForwardMultiHot(
      std::span<const std::uint32_t> active, Tape& tape) const;
  std::vector<double> Forward(std::span<const double> input) const;

  // Accumulates dL/dparams into grad (and sets grad.input for dense tapes).
  // Throws InternalError if the tape was not produced by this net at its
  // current parameter version.
  void Backward(Tape& tape, std::span<const double> output_grad,
                Gradient& grad) const;
  Gradient Backward(Tape& tape, std::span<const double> output_grad) const;

  Gradient ZeroGradient() const;

  // Weights then bias for every layer, in layer order; matches Gradient::Refs.
  std::vector<DenseMatrix*> Parameters();

  // Invalidates outstanding tapes; call after any parameter update.
  void MarkUpdated() { ++version_; }

 private:
  void Validate() const;
  void RunHiddenAndOutput(std::size_t first_layer, Tape& tape) const;

  std::vector<DenseMatrix> weights_;
  std::vector<DenseMatrix> biases_;
  std::uint64_t version_ = 0;
};

// Glorot-uniform fill: U(-b, b), b = sqrt(6 / (fan_in + fan_out)).
void GlorotUniform(DenseMatrix& m, std::size_t fan_in, std::size_t fan_out,
                   Rng& rng);

}  // namespace autocf

#endif  // AUTOCF_NUMCORE_MLP_HPP_
