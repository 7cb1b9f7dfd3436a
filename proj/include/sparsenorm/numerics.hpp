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

#ifndef SPARSENORM_NUMERICS_HPP_
#define SPARSENORM_NUMERICS_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sparsenorm/rng.hpp"
#include "sparsenorm/types.hpp"

namespace sparsenorm {

using VectorMap = std::function<std::vector<double>(std::span<const double>)>;
using Normalizer = std::function<Distribution(const LogitVector&)>;

inline constexpr double kDefaultFiniteDiffStep = 1e-5;

/// Central differences, column j = (f(v + h e_j) - f(v - h e_j)) / 2h.
Jacobian finite_diff_jacobian(const VectorMap& f, std::span<const double> v,
                              double h = kDefaultFiniteDiffStep);
/// Convenience overload for normalizers.
Jacobian finite_diff_jacobian(const Normalizer& f, const LogitVector& v,
                              double h = kDefaultFiniteDiffStep);

/// Largest |a(i, j) - b(i, j)|.
double max_abs_diff(const Jacobian& a, const Jacobian& b);

/// Half the L1 distance; equals W1 under the 0-1 ground metric.
double tv_distance(const Distribution& p, const Distribution& q);

/// W1 with classes at integer positions 0..K-1: sum_k |CDF_p(k) - CDF_q(k)|.
double w1_line(const Distribution& p, const Distribution& q);

/// sum_k p_k log(p_k / q'_k) with q' = (q + eps) / sum(q + eps); 0 log 0 = 0.
double eps_kl(const Distribution& p, const Distribution& q, double eps);

/// Plain KL(p || q); +infinity when p puts mass where q has none.
double kl_divergence(const Distribution& p, const Distribution& q);

struct DistanceReport {
  double tv = 0.0;
  double w1_line = 0.0;
  double kl = 0.0;
  bool kl_infinite = false;
  double eps_kl = 0.0;
};

DistanceReport compare_distributions(const Distribution& p, const Distribution& q,
                                     double eps = 1e-6);

struct LipschitzReport {
  double max_ratio = 0.0;
  std::size_t pairs = 0;     // same-support pairs evaluated
  std::size_t attempts = 0;  // pairs drawn, including rejected ones
};

/// Draws random nearby pairs (v1, v2), keeps those whose outputs share a
/// support mask, and reports max ||f(v1) - f(v2)||_2 / ||v1 - v2||_2. Stops
/// after `trials` accepted pairs or 50 * trials draws.
LipschitzReport lipschitz_probe(const Normalizer& f, RngStream& rng, std::size_t trials);

/// |v| / ||v||_1: scale-invariant, hence not Lipschitz near the origin. Used
/// to show the probe detects a violation.
Distribution abs_renormalize(const LogitVector& v);

}  // namespace sparsenorm

#endif  // SPARSENORM_NUMERICS_HPP_
