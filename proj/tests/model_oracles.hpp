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

#ifndef AUTOCF_TESTS_MODEL_ORACLES_HPP_
#define AUTOCF_TESTS_MODEL_ORACLES_HPP_

// Independent reference computations for model scores and gradients. Nothing
// here calls CfModel::Forward internals beyond reading parameters.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "autocf/cfmodel/cf_model.hpp"
#include "autocf/data/dataset.hpp"
#include "autocf/numcore/mlp.hpp"
#include "autocf/numcore/rng.hpp"

namespace autocf::test {

using Vec = std::vector<double>;

inline Vec RefMlp(const MlpNet& net, Vec x) {
  for (std::size_t k = 0; k < net.num_layers(); ++k) {
    const DenseMatrix& w = net.weight(k);
    Vec z(w.cols());
    for (std::size_t o = 0; o < w.cols(); ++o) {
      double s = net.bias(k)(0, o);
      for (std::size_t i = 0; i < w.rows(); ++i) s += x[i] * w(i, o);
      z[o] = (k + 1 < net.num_layers()) ? std::max(s, 0.0) : s;
    }
    x = std::move(z);
  }
  return x;
}

// Training histories rebuilt from the raw train list, excluding the target.
inline std::vector<std::uint32_t> RefUserHistory(const InteractionDataset& ds,
                                                 UserIndex u, ItemIndex j) {
  std::vector<std::uint32_t> h;
  for (const auto& r : ds.train()) {
    if (r.user == u && r.item != j) h.push_back(r.item);
  }
  std::sort(h.begin(), h.end());
  return h;
}

inline std::vector<std::uint32_t> RefItemHistory(const InteractionDataset& ds,
                                                 ItemIndex j, UserIndex u) {
  std::vector<std::uint32_t> h;
  for (const auto& r : ds.train()) {
    if (r.item == j && r.user != u) h.push_back(r.user);
  }
  std::sort(h.begin(), h.end());
  return h;
}

inline Vec Row(const DenseMatrix& m, std::size_t r) {
  return Vec(m.row(r).begin(), m.row(r).end());
}

inline Vec MeanRows(const DenseMatrix& m, const std::vector<std::uint32_t>& rows,
                    std::size_t d) {
  Vec out(d, 0.0);
  if (rows.empty()) return out;
  for (auto r : rows) {
    for (std::size_t k = 0; k < d; ++k) out[k] += m(r, k);
  }
  for (double& v : out) v /= static_cast<double>(rows.size());
  return out;
}

inline Vec MultiHotMlp(const MlpNet& net, const std::vector<std::uint32_t>& on,
                       std::size_t width, std::size_t d) {
  if (on.empty()) return Vec(d, 0.0);
  Vec x(width, 0.0);
  for (auto i : on) x[i] = 1.0;
  return RefMlp(net, x);
}

inline double DotV(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

inline Vec Hadamard(const Vec& a, const Vec& b) {
  Vec o(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) o[k] = a[k] * b[k];
  return o;
}

inline Vec Concat(const Vec& a, const Vec& b) {
  Vec o = a;
  o.insert(o.end(), b.begin(), b.end());
  return o;
}

// Hand-written score of a named single baseline.
inline double ReferenceScore(const std::string& name, const CfModel& m,
                             const InteractionDataset& ds, UserIndex u,
                             ItemIndex j) {
  const std::size_t d = m.dim();
  const std::size_t M = ds.num_users(), N = ds.num_items();
  if (name == "MF") return DotV(Row(m.user_table(), u), Row(m.item_table(), j));
  if (name == "FISM") {
    return DotV(MeanRows(m.user_table(), RefUserHistory(ds, u, j), d),
                Row(m.item_table(), j));
  }
  if (name == "GMF") {
    const Vec s = Hadamard(Row(m.user_table(), u), Row(m.item_table(), j));
    const auto h = m.head_vector().values();
    return DotV(s, Vec(h.begin(), h.end()));
  }
  if (name == "MLP") {
    return RefMlp(m.head_mlp(),
                  Concat(Row(m.user_table(), u), Row(m.item_table(), j)))[0];
  }
  if (name == "CMF") {
    const Vec p = Row(m.user_table(), u), q = Row(m.item_table(), j);
    double s = 0.0;
    for (std::size_t k = 0; k < d; ++k) s += (p[k] - q[k]) * (p[k] - q[k]);
    return -std::sqrt(s);
  }
  const Vec eu = MultiHotMlp(m.user_mlp(), RefUserHistory(ds, u, j), N, d);
  const Vec ej = MultiHotMlp(m.item_mlp(), RefItemHistory(ds, j, u), M, d);
  if (name == "DMF") return DotV(eu, ej);
  if (name == "JNCF-Dot") return RefMlp(m.head_mlp(), Hadamard(eu, ej))[0];
  if (name == "JNCF-Cat") return RefMlp(m.head_mlp(), Concat(eu, ej))[0];
  throw std::invalid_argument("no reference for " + name);
}

// Overwrites every parameter with U(-scale, scale) so biases are nonzero too.
inline void RandomizeParameters(CfModel& m, Rng& rng, double scale = 1.0) {
  for (DenseMatrix* p : m.Parameters()) {
    for (double& v : p->values()) v = rng.Uniform(-scale, scale);
  }
  m.MarkUpdated();
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  bool kink = false;  // a nondifferentiable point fell inside the stencil
  std::size_t checked = 0;
};

// Signature of every piecewise branch taken by the forward passes.
inline std::vector<char> BranchPattern(
    const CfModel& m, const InteractionDataset& ds,
    const std::vector<std::pair<UserIndex, ItemIndex>>& pairs) {
  std::vector<char> p;
  CfModel::Tape t;
  auto relu = [&](const MlpNet::Tape& mt) {
    for (std::size_t k = 0; k + 1 < mt.outputs.size(); ++k) {
      for (double v : mt.outputs[k]) p.push_back(v > 0.0);
    }
  };
  for (const auto& [u, j] : pairs) {
    m.Forward(u, j, ds, t);
    relu(t.user.mlp);
    relu(t.item.mlp);
    relu(t.head);
    for (std::size_t k = 0; k < t.user.embedding.size(); ++k) {
      p.push_back(t.user.embedding[k] >= t.item.embedding[k]);
    }
  }
  return p;
}

// L = sum_p c_p * score_p; compares the analytic gradient of every parameter
// element with a central difference of step h.
inline GradCheckResult CheckGradients(
    CfModel& m, const InteractionDataset& ds,
    const std::vector<std::pair<UserIndex, ItemIndex>>& pairs,
    const std::vector<double>& coeff, double h, double floor) {
  auto loss = [&]() {
    double s = 0.0;
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      s += coeff[p] * m.Forward(pairs[p].first, pairs[p].second, ds).first;
    }
    return s;
  };
  CfModel::Gradients g = m.ZeroGradients();
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    CfModel::Tape t;
    m.Forward(pairs[p].first, pairs[p].second, ds, t);
    m.Backward(t, coeff[p], g);
  }
  const auto base = BranchPattern(m, ds, pairs);
  GradCheckResult res;
  auto params = m.Parameters();
  const auto grads = g.Refs();
  for (std::size_t b = 0; b < params.size(); ++b) {
    for (std::size_t i = 0; i < params[b]->size(); ++i) {
      double& v = params[b]->values()[i];
      const double saved = v;
      v = saved + h;
      const double lp = loss();
      if (BranchPattern(m, ds, pairs) != base) res.kink = true;
      v = saved - h;
      const double lm = loss();
      if (BranchPattern(m, ds, pairs) != base) res.kink = true;
      v = saved;
      const double num = (lp - lm) / (2.0 * h);
      const double ana = grads[b]->values()[i];
      const double rel = std::abs(ana - num) /
                         std::max({std::abs(ana), std::abs(num), floor});
      res.max_rel_error = std::max(res.max_rel_error, rel);
      ++res.checked;
    }
  }
  return res;
}

// 3 users x 4 items; every user has at least two train items and one item
// has a single user, so exclusion can empty a history.
inline InteractionDataset ToyDataset() {
  std::vector<Interaction> train = {{0, 0, 4}, {0, 1, 3}, {0, 2, 5},
                                    {1, 0, 2}, {1, 3, 1}, {2, 1, 4},
                                    {2, 2, 3}};
  std::vector<Interaction> valid = {{1, 1, 3}};
  std::vector<Interaction> test = {{2, 3, 2}};
  return InteractionDataset::FromSplits(Form::kExplicit, {"a", "b", "c"},
                                        {"w", "x", "y", "z"}, train, valid,
                                        test);
}

inline std::vector<std::pair<UserIndex, ItemIndex>> AllPairs(
    const InteractionDataset& ds) {
  std::vector<std::pair<UserIndex, ItemIndex>> out;
  for (UserIndex u = 0; u < ds.num_users(); ++u) {
    for (ItemIndex j = 0; j < ds.num_items(); ++j) out.push_back({u, j});
  }
  return out;
}

}  // namespace autocf::test

#endif  // AUTOCF_TESTS_MODEL_ORACLES_HPP_
