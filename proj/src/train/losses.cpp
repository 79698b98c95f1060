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

#include "autocf/train/losses.hpp"

#include <algorithm>
#include <cmath>

namespace autocf {

LossGrad RatingLoss(double pred, double target) {
  const double e = pred - target;
  return {e * e, 2.0 * e};
}

double Sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double z = std::exp(x);
  return z / (1.0 + z);
}

PairLossGrad BprLoss(double s_pos, double s_neg) {
  const double x = s_pos - s_neg;
  // -ln sigmoid(x) = softplus(-x) = max(-x, 0) + log1p(exp(-|x|))
  const double loss = std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
  const double g = 1.0 - Sigmoid(x);
  return {loss, -g, g};
}

}  // namespace autocf
