// Copyright 2026 The sparsenorm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPARSENORM_RNG_HPP_
#define SPARSENORM_RNG_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace sparsenorm {

/// xoshiro256++ stream seeded through splitmix64.
///
/// Every derived quantity (uniforms, normals, integers) is computed with code
/// in this class rather than <random> distributions, whose algorithms are
/// implementation-defined; a seed therefore reproduces the same sequence on
/// every platform. A stream is single-owner: parallel work derives
/// independent streams with split().
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);
  /// Uses the raw 256-bit state directly (reference-vector tests).
  static RngStream from_state(const std::array<std::uint64_t, 4>& state);
  /// Independent stream for (seed, stream_index).
  static RngStream split(std::uint64_t seed, std::uint64_t stream_index);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();
  std::uint64_t operator()() { return next_u64(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~std::uint64_t{0}; }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n), unbiased (Lemire rejection).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via the Marsaglia polar method.
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }

  std::vector<double> normal_vector(std::size_t n, double stddev = 1.0);

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  RngStream() = default;

  std::uint64_t seed_ = 0;
  std::array<std::uint64_t, 4> s_{};
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace sparsenorm

#endif  // SPARSENORM_RNG_HPP_
