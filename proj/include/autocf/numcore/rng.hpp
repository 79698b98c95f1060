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

#ifndef AUTOCF_NUMCORE_RNG_HPP_
#define AUTOCF_NUMCORE_RNG_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace autocf {

// Seeded generator. The engine is the standard 64-bit Mersenne twister (its
// output sequence is fixed by the C++ standard); all distributions are
// implemented here so draw sequences do not depend on the standard library
// vendor.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t UniformInt(std::uint64_t n);

  // Standard normal via Box-Muller (one draw per call, no caching).
  double Normal();

  // Index drawn with probability proportional to weights[i]. Zero-weight
  // entries are never returned. Throws ConfigError if no weight is positive.
  std::size_t Categorical(std::span<const double> weights);

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[UniformInt(i)]);
    }
  }

  // k distinct indices from [0, n), in draw order (partial Fisher-Yates).
  std::vector<std::size_t> SampleWithoutReplacement(std::size_t n,
                                                    std::size_t k);

  // Independent child seed; advances this generator.
  std::uint64_t Fork() { return NextU64(); }

  // Engine state as text, restorable with Restore.
  std::string State() const;
  void Restore(const std::string& state);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// Deterministic mix of a base seed with a stream id (splitmix64 finalizer).
std::uint64_t MixSeed(std::uint64_t base, std::uint64_t stream);

}  // namespace autocf

#endif  // AUTOCF_NUMCORE_RNG_HPP_
