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

#include "autocf/numcore/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autocf/errors.hpp"

namespace autocf {

namespace {

// out = in * W + b
void DenseLayer(std::span<const double> in, const DenseMatrix& w,
                const DenseMatrix& b, std::vector<double>& out) {
  const std::size_t width = w.cols();
  out.assign(b.values().begin(), b.values().end());
  double* o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double x = in[i];
    if (x == 0.0) continue;
    const double* row = w.row(i).data();
    for (std::size_t c = 0; c < width; ++c) o[c] += x * row[c];
  }
}

void Relu(std::vector<double>& v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

}  // namespace

void GlorotUniform(DenseMatrix& m, std::size_t fan_in, std::size_t fan_out,
                   Rng& rng) {
  const double bound =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (double& v : m.values()) v = rng.Uniform(-bound, bound);
}

void MlpNet::Gradient::SetZero() {
  for (auto& w : weights) w.SetZero();
  for (auto& b : biases) b.SetZero();
  std::fill(input.begin(), input.end(), 0.0);
}

std::vector<const DenseMatrix*> MlpNet::Gradient::Refs() const {
  std::vector<const DenseMatrix*> refs;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    refs.push_back(&weights[k]);
    refs.push_back(&biases[k]);
  }
  return refs;
}

MlpNet::MlpNet(std::vector<std::size_t> layer_sizes, Rng& rng) {
  if (layer_sizes.size() < 2) {
    throw ConfigError("MlpNet: need at least input and output sizes");
  }
  for (std::size_t k = 0; k + 1 < layer_sizes.size(); ++k) {
    const std::size_t in = layer_sizes[k];
    const std::size_t out = layer_sizes[k + 1];
    if (in == 0 || out == 0) throw ConfigError("MlpNet: zero-width layer");
    DenseMatrix w(in, out);
    GlorotUniform(w, in, out, rng);
    weights_.push_back(std::move(w));
    biases_.emplace_back(1, out);
  }
}

MlpNet::MlpNet(std::vector<DenseMatrix> weights,
               std::vector<DenseMatrix> biases)
    : weights_(std::move(weights)), biases_(std::move(biases)) {
  Validate();
}

void MlpNet::Validate() const {
  if (weights_.empty() || weights_.size() != biases_.size()) {
    throw ConfigError("MlpNet: weights/biases count mismatch");
  }
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (biases_[k].rows() != 1 || biases_[k].cols() != weights_[k].cols()) {
      throw ConfigError("MlpNet: bias shape mismatch at layer " +
                        std::to_string(k));
    }
    if (k > 0 && weights_[k].rows() != weights_[k - 1].cols()) {
      throw ConfigError("MlpNet: layer " + std::to_string(k) +
                        " input size does not match previous output size");
    }
  }
}

std::size_t MlpNet::input_size() const {
  return weights_.empty() ? 0 : weights_.front().rows();
}

std::size_t MlpNet::output_size() const {
  return weights_.empty() ? 0 : weights_.back().cols();
}

std::vector<std::size_t> MlpNet::layer_sizes() const {
  std::vector<std::size_t> sizes;
  if (weights_.empty()) return sizes;
  sizes.push_back(weights_.front().rows());
  for (const auto& w : weights_) sizes.push_back(w.cols());
  return sizes;
}

void MlpNet::RunHiddenAndOutput(std::size_t first_layer, Tape& tape) const {
  for (std::size_t k = first_layer; k < weights_.size(); ++k) {
    DenseLayer(tape.outputs[k - 1], weights_[k], biases_[k], tape.outputs[k]);
    if (k + 1 < weights_.size()) Relu(tape.outputs[k]);
  }
}

std::span<const double> MlpNet::Forward(std::span<const double> input,
                                        Tape& tape) const {
  if (input.size() != input_size()) {
    throw ConfigError("MlpNet::Forward: input length " +
                      std::to_string(input.size()) + ", expected " +
                      std::to_string(input_size()));
  }
  tape.multi_hot = false;
  tape.active.clear();
  tape.input.assign(input.begin(), input.end());
  tape.outputs.resize(weights_.size());
  tape.net = this;
  tape.version = version_;
  DenseLayer(tape.input, weights_[0], biases_[0], tape.outputs[0]);
  if (weights_.size() > 1) Relu(tape.outputs[0]);
  RunHiddenAndOutput(1, tape);
  return tape.outputs.back();
}

std::span<const double> MlpNet::ForwardMultiHot(
    std::span<const std::uint32_t> active, Tape& tape) const {
  const std::size_t n = input_size();
  tape.multi_hot = true;
  tape.input.clear();
  tape.active.assign(active.begin(), active.end());
  tape.outputs.resize(weights_.size());
  tape.net = this;
  tape.version = version_;
  auto& first = tape.outputs[0];
  first.assign(biases_[0].values().begin(), biases_[0].values().end());
  const std::size_t width = weights_[0].cols();
  for (std::uint32_t idx : active) {
    if (idx >= n) {
      throw ConfigError("MlpNet::ForwardMultiHot: index out of range");
    }
    const double* row = weights_[0].row(idx).data();
    for (std::size_t c = 0; c < width; ++c) first[c] += row[c];
  }
  if (weights_.size() > 1) Relu(first);
  RunHiddenAndOutput(1, tape);
  return tape.outputs.back();
}

std::vector<double> MlpNet::Forward(std::span<const double> input) const {
  Tape tape;
  auto out = Forward(input, tape);
  return {out.begin(), out.end()};
}

MlpNet::Gradient MlpNet::ZeroGradient() const {
  Gradient g;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    g.weights.emplace_back(weights_[k].rows(), weights_[k].cols());
    g.biases.emplace_back(1, weights_[k].cols());
  }
  g.input.assign(input_size(), 0.0);
  return g;
}

void MlpNet::Backward(Tape& tape, std::span<const double> output_grad,
                      Gradient& grad) const {
  if (tape.net != this || tape.version != version_ ||
      tape.outputs.size() != weights_.size()) {
    throw InternalError("MlpNet::Backward: stale or foreign tape");
  }
  if (output_grad.size() != output_size()) {
    throw InternalError("MlpNet::Backward: output gradient length mismatch");
  }
  if (grad.weights.size() != weights_.size()) {
    throw InternalError("MlpNet::Backward: gradient set does not match net");
  }
  tape.delta.assign(output_grad.begin(), output_grad.end());
  for (std::size_t k = weights_.size(); k-- > 0;) {
    const DenseMatrix& w = weights_[k];
    DenseMatrix& gw = grad.weights[k];
    const std::size_t width = w.cols();
    const double* delta = tape.delta.data();
    Axpy(1.0, tape.delta, grad.biases[k].values());

    if (k == 0 && tape.multi_hot) {
      for (std::uint32_t idx : tape.active) {
        double* g = gw.row(idx).data();
        for (std::size_t c = 0; c < width; ++c) g[c] += delta[c];
      }
      break;
    }

    std::span<const double> in =
        k == 0 ? std::span<const double>(tape.input) : tape.outputs[k - 1];
    tape.next_delta.assign(in.size(), 0.0);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double* row = w.row(i).data();
      double* g = gw.row(i).data();
      const double x = in[i];
      double back = 0.0;
      for (std::size_t c = 0; c < width; ++c) {
        g[c] += x * delta[c];
        back += row[c] * delta[c];
      }
      tape.next_delta[i] = back;
    }
    if (k == 0) {
      grad.input.assign(tape.next_delta.begin(), tape.next_delta.end());
    } else {
      // ReLU derivative of the previous layer's output.
      for (std::size_t i = 0; i < in.size(); ++i) {
        if (!(in[i] > 0.0)) tape.next_delta[i] = 0.0;
      }
    }
    std::swap(tape.delta, tape.next_delta);
  }
}

MlpNet::Gradient MlpNet::Backward(Tape& tape,
                                  std::span<const double> output_grad) const {
  Gradient g = ZeroGradient();
  Backward(tape, output_grad, g);
  return g;
}

std::vector<DenseMatrix*> MlpNet::Parameters() {
  std::vector<DenseMatrix*> refs;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    refs.push_back(&weights_[k]);
    refs.push_back(&biases_[k]);
  }
  return refs;
}

}  // namespace autocf
