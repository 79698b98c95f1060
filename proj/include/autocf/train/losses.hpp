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

#ifndef AUTOCF_TRAIN_LOSSES_HPP_
#define AUTOCF_TRAIN_LOSSES_HPP_

namespace autocf {

struct LossGrad {
  double loss = 0.0;
  double grad = 0.0;  // dloss/dpred
};

struct PairLossGrad {
  double loss = 0.0;
  double grad_pos = 0.0;
  double grad_neg = 0.0;
};

// (pred - target)^2.
LossGrad RatingLoss(double pred, double target);

// -ln sigmoid(s_pos - s_neg), evaluated without overflow for any gap.
PairLossGrad BprLoss(double s_pos, double s_neg);

// Numerically stable logistic function.
double Sigmoid(double x);

}  // namespace autocf

#endif  // AUTOCF_TRAIN_LOSSES_HPP_
