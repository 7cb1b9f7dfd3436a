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

#include "sparsenorm/normalize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "sparsenorm/errors.hpp"

namespace sparsenorm {

namespace {

// exp(v_k - max(v)); the top entry maps to exactly 1.
std::vector<double> shifted_exp(const LogitVector& v) {
  const double top = v.max();
  std::vector<double> e(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) e[k] = std::exp(v[k] - top);
  return e;
}

bool at_or_above(double x, double threshold) {
#ifdef SPARSENORM_FAULT_STRICT_INDICATOR
  // Mutation used by the test suite to prove the golden fixtures are
  // sensitive to the tie rule.
  return x > threshold;
#else
  return x >= threshold;
#endif
}

// Builds p_i (delta_ij - p_j).
Jacobian softmax_form_jacobian(const Distribution& p) {
  Jacobian jac(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    for (std::size_t j = 0; j < p.size(); ++j) {
      jac(i, j) = p[i] * ((i == j ? 1.0 : 0.0) - p[j]);
    }
  }
  return jac;
}

void require_target(const LogitVector& v, std::size_t target) {
  if (target >= v.size()) {
    throw InvalidInput("target class " + std::to_string(target) + " out of range for K = " +
                       std::to_string(v.size()));
  }
}

LogitVector residual(const Distribution& p, std::size_t target) {
  std::vector<double> g(p.probs);
  g[target] -= 1.0;
  return LogitVector(std::move(g));
}

// Sorted copy of v - max(v), descending.
std::vector<double> sorted_shifted(const LogitVector& v) {
  const double top = v.max();
  std::vector<double> z(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) z[k] = v[k] - top;
  std::sort(z.begin(), z.end(), std::greater<>());
  return z;
}

// Sparsemax probabilities at or below this are rounding noise from a
// score sitting on the threshold, and are set to zero.
constexpr double kSparseSupportTol = 4.0 * std::numeric_limits<double>::epsilon();

// Sparsemax threshold of z (already shifted so max(z) = 0).
double sparsemax_tau_shifted(const std::vector<double>& z_desc) {
  double cumsum = 0.0;
  double tau = 0.0;
  for (std::size_t j = 0; j < z_desc.size(); ++j) {
    cumsum += z_desc[j];
    const double rank = static_cast<double>(j + 1);
    if (1.0 + rank * z_desc[j] - cumsum > rank * kSparseSupportTol) tau = (cumsum - 1.0) / rank;
  }
  return tau;
}

// Entmax threshold for half-scores z (max(z) = 0): solves
// sum_k max(0, z_k - tau)^2 = 1 on [-1, 0].
double entmax_tau_shifted(const std::vector<double>& z_desc) {
  auto mass = [&](double tau) {
    double s = 0.0;
    for (double z : z_desc) {
      if (z <= tau) break;
      s += (z - tau) * (z - tau);
    }
    return s;
  };
  double lo = -1.0;  // mass(lo) >= 1
  double hi = 0.0;   // mass(hi) == 0
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (mass(mid) >= 1.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::abs(mass(lo) - 1.0) <= std::abs(mass(hi) - 1.0) ? lo : hi;
}

}  // namespace

LogitVector center(const LogitVector& v) {
  const double m = v.mean();
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = v[k] - m;
  return LogitVector(std::move(out));
}

Distribution softmax(const LogitVector& v) { return Distribution::from_weights(shifted_exp(v)); }

Distribution ev_softmax(const LogitVector& v) {
  const double threshold = v.mean();
  std::vector<double> w = shifted_exp(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!at_or_above(v[k], threshold)) w[k] = 0.0;
  }
#ifdef SPARSENORM_FAULT_STRICT_INDICATOR
  // Like the strict variant, the mutant stays total on constant inputs.
  if (std::all_of(w.begin(), w.end(), [](double x) { return x == 0.0; })) {
    return Distribution::uniform(v.size());
  }
#endif
  return Distribution::from_weights(w);
}

Distribution ev_softmax_strict(const LogitVector& v) {
  const LogitVector centered = center(v);
  const auto& c = centered.vec();
  if (std::all_of(c.begin(), c.end(), [](double x) { return x == 0.0; })) {
    return Distribution::uniform(v.size());
  }
  std::vector<double> w = shifted_exp(v);
  bool any = false;
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (c[k] > 0.0) {
      any = true;
    } else {
      w[k] = 0.0;
    }
  }
  if (!any) {
    // The mean rounded onto the max although v is not constant. The exact
    // mean is strictly below the max, so the argmax set is the support.
    const double top = v.max();
    w = shifted_exp(v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] != top) w[k] = 0.0;
    }
  }
  return Distribution::from_weights(w);
}

Distribution ev_softmax_train(const LogitVector& v, Epsilon eps) {
  const double threshold = v.mean();
  std::vector<double> w = shifted_exp(v);
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double indicator = v[k] >= threshold ? 1.0 : 0.0;
    w[k] *= indicator + eps.value();
  }
  return Distribution::from_weights(w);
}

double sparsemax_threshold(const LogitVector& v) {
  return v.max() + sparsemax_tau_shifted(sorted_shifted(v));
}

Distribution sparsemax(const LogitVector& v) {
  const double top = v.max();
  const double tau = sparsemax_tau_shifted(sorted_shifted(v));
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double r = (v[k] - top) - tau;
    w[k] = r > kSparseSupportTol ? r : 0.0;
  }
  return Distribution::from_weights(w);
}

double entmax15_threshold(const LogitVector& v) {
  std::vector<double> z = sorted_shifted(v);
  for (double& x : z) x *= 0.5;
  return 0.5 * v.max() + entmax_tau_shifted(z);
}

Distribution entmax15(const LogitVector& v) {
  const double top = v.max();
  std::vector<double> z = sorted_shifted(v);
  for (double& x : z) x *= 0.5;
  const double tau = entmax_tau_shifted(z);
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    const double r = std::max(0.0, 0.5 * (v[k] - top) - tau);
    w[k] = r * r;
  }
  return Distribution::from_weights(w);
}

void require_off_boundary(const LogitVector& v, double margin) {
  if (v.size() == 1) return;
  const double m = v.mean();
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (std::abs(v[k] - m) <= margin) {
      throw BoundaryError("score " + std::to_string(k) +
                              " lies on the mean; ev-softmax is not differentiable here",
                          k);
    }
  }
}

Jacobian jacobian_softmax(const LogitVector& v) { return softmax_form_jacobian(softmax(v)); }

Jacobian jacobian_ev_softmax(const LogitVector& v, double margin) {
  require_off_boundary(v, margin);
  return softmax_form_jacobian(ev_softmax(v));
}

Jacobian jacobian_ev_softmax_train(const LogitVector& v, Epsilon eps, double margin) {
  require_off_boundary(v, margin);
  return softmax_form_jacobian(ev_softmax_train(v, eps));
}

Jacobian jacobian_sparsemax(const LogitVector& v) {
  const Distribution p = sparsemax(v);
  const double support = static_cast<double>(p.support_size());
  Jacobian jac(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!p.support[i]) continue;
    for (std::size_t j = 0; j < v.size(); ++j) {
      if (!p.support[j]) continue;
      jac(i, j) = (i == j ? 1.0 : 0.0) - 1.0 / support;
    }
  }
  return jac;
}

Jacobian jacobian_entmax15(const LogitVector& v) {
  const Distribution p = entmax15(v);
  std::vector<double> g(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) g[k] = std::sqrt(p[k]);
  const double total = ordered_sum(g);
  Jacobian jac(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (g[i] == 0.0) continue;
    for (std::size_t j = 0; j < v.size(); ++j) {
      jac(i, j) = (i == j ? g[i] : 0.0) - g[i] * g[j] / total;
    }
  }
  return jac;
}

LogitVector grad_log_ev_softmax_train(const LogitVector& v, std::size_t target, Epsilon eps) {
  require_target(v, target);
  if (v.size() == 1) return LogitVector{0.0};
  require_off_boundary(v);
  std::vector<double> g(v.size());
  const Distribution p = ev_softmax_train(v, eps);
  for (std::size_t k = 0; k < v.size(); ++k) g[k] = (k == target ? 1.0 : 0.0) - p[k];
  return LogitVector(std::move(g));
}

LogitVector grad_loss_sparsemax(const LogitVector& v, std::size_t target) {
  require_target(v, target);
  return residual(sparsemax(v), target);
}

LogitVector grad_loss_entmax15(const LogitVector& v, std::size_t target) {
  require_target(v, target);
  return residual(entmax15(v), target);
}

std::string_view to_string(NormalizerKind kind) {
  switch (kind) {
    case NormalizerKind::kSoftmax: return "softmax";
    case NormalizerKind::kEvSoftmax: return "ev_softmax";
    case NormalizerKind::kSparsemax: return "sparsemax";
    case NormalizerKind::kEntmax15: return "entmax15";
  }
  return "unknown";
}

std::optional<NormalizerKind> parse_normalizer(std::string_view name) {
  if (name == "softmax") return NormalizerKind::kSoftmax;
  if (name == "ev_softmax" || name == "ev-softmax" || name == "ev") {
    return NormalizerKind::kEvSoftmax;
  }
  if (name == "sparsemax") return NormalizerKind::kSparsemax;
  if (name == "entmax15" || name == "entmax-1.5" || name == "entmax") {
    return NormalizerKind::kEntmax15;
  }
  return std::nullopt;
}

Distribution normalize(NormalizerKind kind, const LogitVector& v) {
  switch (kind) {
    case NormalizerKind::kSoftmax: return softmax(v);
    case NormalizerKind::kEvSoftmax: return ev_softmax(v);
    case NormalizerKind::kSparsemax: return sparsemax(v);
    case NormalizerKind::kEntmax15: return entmax15(v);
  }
  throw InvalidInput("unknown normalizer");
}

Distribution normalize_train(NormalizerKind kind, const LogitVector& v, Epsilon eps) {
  if (kind == NormalizerKind::kEvSoftmax) return ev_softmax_train(v, eps);
  return normalize(kind, v);
}

Jacobian jacobian_train(NormalizerKind kind, const LogitVector& v, Epsilon eps) {
  switch (kind) {
    case NormalizerKind::kSoftmax: return jacobian_softmax(v);
    case NormalizerKind::kEvSoftmax: return jacobian_ev_softmax_train(v, eps);
    case NormalizerKind::kSparsemax: return jacobian_sparsemax(v);
    case NormalizerKind::kEntmax15: return jacobian_entmax15(v);
  }
  throw InvalidInput("unknown normalizer");
}

}  // namespace sparsenorm
