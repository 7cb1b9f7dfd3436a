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

#include "sparsenorm/types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sparsenorm/errors.hpp"

namespace sparsenorm {

LogitVector::LogitVector(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw InvalidInput("logit vector must have at least one entry");
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw InvalidInput("logit " + std::to_string(k) + " is not finite");
    }
  }
}

LogitVector::LogitVector(std::initializer_list<double> values)
    : LogitVector(std::vector<double>(values)) {}

double LogitVector::max() const { return *std::max_element(values_.begin(), values_.end()); }

double LogitVector::mean() const {
  // Shifting by the max makes constant vectors produce their value exactly.
  const double top = max();
  std::vector<double> shifted(values_.size());
  for (std::size_t k = 0; k < values_.size(); ++k) shifted[k] = values_[k] - top;
  const double m = top + ordered_sum(shifted) / static_cast<double>(values_.size());
  return std::min(m, top);
}

std::size_t Distribution::support_size() const {
  return static_cast<std::size_t>(std::count(support.begin(), support.end(), true));
}

Distribution Distribution::from_weights(std::span<const double> weights) {
  for (double w : weights) {
    if (!(w >= 0.0 && std::isfinite(w))) throw InvalidInput("weights must be finite and nonnegative");
  }
  const double total = ordered_sum(weights);
  if (!(total > 0.0 && std::isfinite(total))) throw InvalidInput("weights must have a positive finite sum");
  Distribution out;
  out.probs.resize(weights.size());
  out.support.resize(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    out.probs[k] = weights[k] / total;
    out.support[k] = out.probs[k] > 0.0;
  }
  return out;
}

Distribution Distribution::uniform(std::size_t k) {
  Distribution out;
  out.probs.assign(k, 1.0 / static_cast<double>(k));
  out.support.assign(k, true);
  return out;
}

Distribution Distribution::one_hot(std::size_t k, std::size_t index) {
  Distribution out;
  out.probs.assign(k, 0.0);
  out.support.assign(k, false);
  out.probs[index] = 1.0;
  out.support[index] = true;
  return out;
}

bool is_valid(const Distribution& p, double sum_tol) {
  if (p.probs.empty() || p.probs.size() != p.support.size()) return false;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double x = p.probs[k];
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) return false;
    if ((x > 0.0) != static_cast<bool>(p.support[k])) return false;
  }
  return std::abs(ordered_sum(p.probs) - 1.0) <= sum_tol;
}

double Jacobian::row_sum(std::size_t i) const {
  double s = 0.0;
  for (std::size_t j = 0; j < k_; ++j) s += (*this)(i, j);
  return s;
}

std::vector<double> Jacobian::transpose_times(std::span<const double> g) const {
  std::vector<double> out(k_, 0.0);
  for (std::size_t i = 0; i < k_; ++i) {
    if (g[i] == 0.0) continue;
    for (std::size_t j = 0; j < k_; ++j) out[j] += (*this)(i, j) * g[i];
  }
  return out;
}

Epsilon::Epsilon(double value) : value_(value) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw InvalidInput("epsilon must be positive and finite");
  }
}

double ordered_sum(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  double s = 0.0;
  for (double x : sorted) s += x;
  return s;
}

}  // namespace sparsenorm
