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

// Normalization functions mapping score vectors onto the probability simplex:
//
//   softmax(v)_k           ∝ exp(v_k)
//   ev_softmax(v)_k        ∝ 1{v_k >= mean(v)} exp(v_k)
//   ev_softmax_train(v)_k  ∝ (1{v_k >= mean(v)} + eps) exp(v_k)
//   sparsemax(v)           = argmin_{p in simplex} ||p - v||^2
//   entmax15(v)_k          = max(0, v_k / 2 - tau)^2
//
// plus their Jacobians and the log-likelihood / loss gradients used for
// training. All exponentials are taken after subtracting max(v), and every
// reduction is order-independent so that outputs are exactly
// permutation-equivariant.

#ifndef SPARSENORM_NORMALIZE_HPP_
#define SPARSENORM_NORMALIZE_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

#include "sparsenorm/types.hpp"

namespace sparsenorm {

/// Scores closer than this to the mean make the ev-softmax Jacobian undefined.
inline constexpr double kBoundaryMargin = 1e-9;

/// v - mean(v).
LogitVector center(const LogitVector& v);

Distribution softmax(const LogitVector& v);

/// Keeps classes scoring at or above the mean. The top-scoring class always
/// survives, so the output is never empty.
Distribution ev_softmax(const LogitVector& v);

/// Strict-inequality variant: keeps classes strictly above the mean and
/// returns the uniform distribution when v is constant. Agrees with
/// ev_softmax except when some score equals the mean exactly.
Distribution ev_softmax_strict(const LogitVector& v);

/// Full-support relaxation of ev_softmax. Tends to ev_softmax as eps -> 0 and
/// to softmax as eps -> infinity.
Distribution ev_softmax_train(const LogitVector& v, Epsilon eps = Epsilon{});

/// Euclidean projection onto the simplex (sort and threshold). Ties in the
/// sort are broken by ascending index.
Distribution sparsemax(const LogitVector& v);
/// The sparsemax threshold tau with sparsemax(v)_k = max(0, v_k - tau).
double sparsemax_threshold(const LogitVector& v);

/// 1.5-entmax. The threshold is found by bisection run until the bracket
/// collapses, which leaves a normalization residual far below 1e-12.
Distribution entmax15(const LogitVector& v);
/// The entmax threshold tau with entmax15(v)_k = max(0, v_k / 2 - tau)^2.
double entmax15_threshold(const LogitVector& v);

/// Throws BoundaryError if some |v_k - mean(v)| <= margin. K = 1 never throws:
/// the indicator is then identically one.
void require_off_boundary(const LogitVector& v, double margin = kBoundaryMargin);

Jacobian jacobian_softmax(const LogitVector& v);

/// p_i (delta_ij - p_j) with p = ev_softmax(v). Rows and columns of classes
/// outside the support are zero. Throws BoundaryError at the indicator
/// boundary, where the map is not differentiable.
Jacobian jacobian_ev_softmax(const LogitVector& v, double margin = kBoundaryMargin);

/// Same form as jacobian_ev_softmax with p = ev_softmax_train(v, eps); the
/// indicator is locally constant away from the boundary.
Jacobian jacobian_ev_softmax_train(const LogitVector& v, Epsilon eps = Epsilon{},
                                   double margin = kBoundaryMargin);

/// diag(s) - s s^T / |S| where s is the support indicator.
Jacobian jacobian_sparsemax(const LogitVector& v);

/// diag(g) - g g^T / sum(g) with g = sqrt(entmax15(v)).
Jacobian jacobian_entmax15(const LogitVector& v);

/// Gradient of log ev_softmax_train(v, eps)_target with respect to v, i.e.
/// delta_target - ev_softmax_train(v, eps). As eps -> 0 this approaches
/// delta_target - ev_softmax(v).
LogitVector grad_log_ev_softmax_train(const LogitVector& v, std::size_t target,
                                      Epsilon eps = Epsilon{});

/// Gradient of the sparsemax loss: sparsemax(v) - delta_target.
LogitVector grad_loss_sparsemax(const LogitVector& v, std::size_t target);

/// Gradient of the 1.5-Tsallis loss: entmax15(v) - delta_target.
LogitVector grad_loss_entmax15(const LogitVector& v, std::size_t target);

/// The four normalizers compared in the mixture benchmark.
enum class NormalizerKind { kSoftmax, kEvSoftmax, kSparsemax, kEntmax15 };

std::string_view to_string(NormalizerKind kind);
std::optional<NormalizerKind> parse_normalizer(std::string_view name);

/// Test-time (sparse) form: ev_softmax is used without relaxation.
Distribution normalize(NormalizerKind kind, const LogitVector& v);
/// Training form: ev_softmax_train for ev-softmax, the plain map otherwise.
Distribution normalize_train(NormalizerKind kind, const LogitVector& v, Epsilon eps);
/// Jacobian of normalize_train.
Jacobian jacobian_train(NormalizerKind kind, const LogitVector& v, Epsilon eps);

}  // namespace sparsenorm

#endif  // SPARSENORM_NORMALIZE_HPP_
