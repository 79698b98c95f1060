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

#include "autocf/numcore/adam.hpp"

#include <cmath>

#include "autocf/errors.hpp"

namespace autocf {

AdamState::AdamState(const std::vector<DenseMatrix*>& params,
                     AdamConfig config)
    : config_(config) {
  first_.reserve(params.size());
  second_.reserve(params.size());
  for (const DenseMatrix* p : params) {
    first_.emplace_back(p->rows(), p->cols());
    second_.emplace_back(p->rows(), p->cols());
  }
}

void AdamState::Restore(std::int64_t step, std::vector<DenseMatrix> first,
                        std::vector<DenseMatrix> second) {
  if (first.size() != second.size()) {
    throw FormatError("AdamState::Restore: moment count mismatch");
  }
  step_ = step;
  first_ = std::move(first);
  second_ = std::move(second);
}

void AdamStep(const std::vector<DenseMatrix*>& params,
              const std::vector<const DenseMatrix*>& grads, AdamState& state,
              double lr) {
  if (params.size() != grads.size() || params.size() != state.first_.size()) {
    throw InternalError("AdamStep: parameter/gradient/state count mismatch");
  }
  for (std::size_t b = 0; b < params.size(); ++b) {
    if (!params[b]->SameShape(*grads[b]) ||
        !params[b]->SameShape(state.first_[b]) ||
        !params[b]->SameShape(state.second_[b])) {
      throw InternalError("AdamStep: shape mismatch in block " +
                          std::to_string(b));
    }
  }
  const AdamConfig& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t b = 0; b < params.size(); ++b) {
    double* p = params[b]->values().data();
    const double* g = grads[b]->values().data();
    double* m = state.first_[b].values().data();
    double* v = state.second_[b].values().data();
    const std::size_t n = params[b]->size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g[i];
      v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= lr * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace autocf
