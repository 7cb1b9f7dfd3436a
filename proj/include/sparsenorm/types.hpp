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

#ifndef SPARSENORM_TYPES_HPP_
#define SPARSENORM_TYPES_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace sparsenorm {

/// A finite, non-empty vector of real scores. Every normalizer takes one.
class LogitVector {
 public:
  /// Throws InvalidInput if `values` is empty or has a non-finite entry.
  explicit LogitVector(std::vector<double> values);
  LogitVector(std::initializer_list<double> values);

  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }
  const std::vector<double>& vec() const { return values_; }

  double max() const;
  /// Arithmetic mean, computed order-independently and clamped to max() so
  /// that the largest entry always lies at or above it.
  double mean() const;

 private:
  std::vector<double> values_;
};

/// A point on the probability simplex together with its support mask.
///
/// Invariants: probs.size() == support.size(); probs[k] >= 0; probs sum to 1
/// within 1e-12; support[k] is true exactly when probs[k] > 0.
struct Distribution {
  std::vector<double> probs;
  std::vector<bool> support;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t k) const { return probs[k]; }
  std::size_t support_size() const;

  /// Builds a distribution from nonnegative weights with a positive sum. The
  /// support mask is derived from the normalized probabilities. Throws
  /// InvalidInput on a negative or non-finite weight or a zero sum.
  static Distribution from_weights(std::span<const double> weights);
  static Distribution uniform(std::size_t k);
  static Distribution one_hot(std::size_t k, std::size_t index);
};

/// Checks the Distribution invariants. Returns false instead of throwing so
/// fuzzers can count violations.
bool is_valid(const Distribution& p, double sum_tol = 1e-12);

/// Dense K x K Jacobian, rows indexed by output component, columns by input.
class Jacobian {
 public:
  explicit Jacobian(std::size_t k) : k_(k), entries_(k * k, 0.0) {}

  std::size_t size() const { return k_; }
  double& operator()(std::size_t i, std::size_t j) { return entries_[i * k_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * k_ + j]; }

  double row_sum(std::size_t i) const;
  /// Computes J^T g.
  std::vector<double> transpose_times(std::span<const double> g) const;

 private:
  std::size_t k_;
  std::vector<double> entries_;
};

/// Relaxation strength for the training-time normalizers. Must be positive.
class Epsilon {
 public:
  static constexpr double kDefault = 1e-6;

  Epsilon() = default;
  /// Throws InvalidInput unless value > 0 and finite.
  explicit Epsilon(double value);

  double value() const { return value_; }

 private:
  double value_ = kDefault;
};

/// Sums values in ascending order. The result does not depend on the order of
/// the input, which makes the normalizers exactly permutation-equivariant.
double ordered_sum(std::span<const double> values);

}  // namespace sparsenorm

#endif  // SPARSENORM_TYPES_HPP_
