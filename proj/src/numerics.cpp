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

#include "sparsenorm/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sparsenorm/errors.hpp"

namespace sparsenorm {

namespace {

void require_same_size(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) throw ShapeError("distributions have different lengths");
}

}  // namespace

Jacobian finite_diff_jacobian(const VectorMap& f, std::span<const double> v, double h) {
  const std::size_t k = v.size();
  Jacobian jac(k);
  std::vector<double> plus(v.begin(), v.end());
  std::vector<double> minus(v.begin(), v.end());
  for (std::size_t j = 0; j < k; ++j) {
    plus[j] = v[j] + h;
    minus[j] = v[j] - h;
    const std::vector<double> fp = f(plus);
    const std::vector<double> fm = f(minus);
    for (std::size_t i = 0; i < k; ++i) jac(i, j) = (fp[i] - fm[i]) / (2.0 * h);
    plus[j] = v[j];
    minus[j] = v[j];
  }
  return jac;
}

Jacobian finite_diff_jacobian(const Normalizer& f, const LogitVector& v, double h) {
  return finite_diff_jacobian(
      [&f](std::span<const double> x) {
        return f(LogitVector(std::vector<double>(x.begin(), x.end()))).probs;
      },
      v.values(), h);
}

double max_abs_diff(const Jacobian& a, const Jacobian& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < a.size(); ++j) worst = std::max(worst, std::abs(a(i, j) - b(i, j)));
  }
  return worst;
}

double tv_distance(const Distribution& p, const Distribution& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += std::abs(p[k] - q[k]);
  return 0.5 * s;
}

double w1_line(const Distribution& p, const Distribution& q) {
  require_same_size(p, q);
  double cdf_p = 0.0, cdf_q = 0.0, s = 0.0;
  // The last CDF difference is 0 up to rounding and carries no transport.
  for (std::size_t k = 0; k + 1 < p.size(); ++k) {
    cdf_p += p[k];
    cdf_q += q[k];
    s += std::abs(cdf_p - cdf_q);
  }
  return s;
}

double eps_kl(const Distribution& p, const Distribution& q, double eps) {
  require_same_size(p, q);
  if (!(eps > 0.0)) throw InvalidInput("eps_kl requires eps > 0");
  std::vector<double> smoothed(q.probs);
  for (double& x : smoothed) x += eps;
  const double total = ordered_sum(smoothed);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] > 0.0) s += p[k] * std::log(p[k] * total / smoothed[k]);
  }
  return s;
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  require_same_size(p, q);
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    if (p[k] == 0.0) continue;
    if (q[k] == 0.0) return std::numeric_limits<double>::infinity();
    s += p[k] * std::log(p[k] / q[k]);
  }
  return s;
}

DistanceReport compare_distributions(const Distribution& p, const Distribution& q, double eps) {
  DistanceReport r;
  r.tv = tv_distance(p, q);
  r.w1_line = w1_line(p, q);
  r.kl = kl_divergence(p, q);
  r.kl_infinite = std::isinf(r.kl);
  r.eps_kl = eps_kl(p, q, eps);
  return r;
}

LipschitzReport lipschitz_probe(const Normalizer& f, RngStream& rng, std::size_t trials) {
  LipschitzReport report;
  const std::size_t max_attempts = 50 * trials;
  while (report.pairs < trials && report.attempts < max_attempts) {
    ++report.attempts;
    const std::size_t k = 2 + static_cast<std::size_t>(rng.below(7));
    const double scale = std::exp(rng.uniform(-2.0, 2.0));
    const double step = scale * std::exp(rng.uniform(-8.0, 0.0));
    std::vector<double> a = rng.normal_vector(k, scale);
    std::vector<double> b(a);
    for (double& x : b) x += step * rng.normal();

    const Distribution pa = f(LogitVector(a));
    const Distribution pb = f(LogitVector(b));
    if (pa.support != pb.support) continue;
    ++report.pairs;

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      num += (pa[i] - pb[i]) * (pa[i] - pb[i]);
      den += (a[i] - b[i]) * (a[i] - b[i]);
    }
    if (den > 0.0) report.max_ratio = std::max(report.max_ratio, std::sqrt(num / den));
  }
  return report;
}

Distribution abs_renormalize(const LogitVector& v) {
  std::vector<double> w(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) w[k] = std::abs(v[k]);
  if (ordered_sum(w) == 0.0) return Distribution::uniform(v.size());
  return Distribution::from_weights(w);
}

}  // namespace sparsenorm
