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

#include "autocf/numcore/dense_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "autocf/errors.hpp"

namespace autocf {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows * cols) {
    throw ConfigError("DenseMatrix: " + std::to_string(values_.size()) +
                      " values for a " + std::to_string(rows) + "x" +
                      std::to_string(cols) + " matrix");
  }
}

void DenseMatrix::SetZero() { std::fill(values_.begin(), values_.end(), 0.0); }

bool DenseMatrix::AllFinite() const {
  return std::all_of(values_.begin(), values_.end(),
                     [](double v) { return std::isfinite(v); });
}

void CheckSameShape(const DenseMatrix& a, const DenseMatrix& b,
                    const char* what) {
  if (!a.SameShape(b)) {
    throw ConfigError(std::string(what) + ": shape " +
                      std::to_string(a.rows()) + "x" +
                      std::to_string(a.cols()) + " vs " +
                      std::to_string(b.rows()) + "x" +
                      std::to_string(b.cols()));
  }
}

double Dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ConfigError("Dot: length mismatch");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

void Axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) {
    throw ConfigError("Axpy: length mismatch");
  }
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace autocf
