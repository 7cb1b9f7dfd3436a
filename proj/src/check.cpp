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

#include "sparsenorm/check.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <utility>

#include "sparsenorm/errors.hpp"
#include "sparsenorm/evidential.hpp"
#include "sparsenorm/normalize.hpp"
#include "sparsenorm/numerics.hpp"

namespace sparsenorm::check {

namespace {

struct Named {
  const char* name;
  Normalizer f;
};

std::vector<Named> all_normalizers() {
  return {
      {"softmax", softmax},
      {"ev_softmax", ev_softmax},
      {"ev_softmax_strict", ev_softmax_strict},
      {"ev_softmax_train", [](const LogitVector& v) { return ev_softmax_train(v); }},
      {"sparsemax", sparsemax},
      {"entmax15", entmax15},
  };
}

std::vector<Named> shift_invariant_normalizers() {
  return {{"softmax", softmax},
          {"ev_softmax", ev_softmax},
          {"sparsemax", sparsemax},
          {"entmax15", entmax15}};
}

std::size_t draw_size(RngStream& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

// Gaussian scores at a random scale in [e^-2, e^2], with occasional ties.
std::vector<double> draw_scores(RngStream& rng, std::size_t k) {
  const double scale = std::exp(rng.uniform(-2.0, 2.0));
  std::vector<double> v = rng.normal_vector(k, scale);
  if (k >= 2 && rng.bernoulli(0.1)) v[rng.below(k)] = v[rng.below(k)];
  return v;
}

double distance_to_mean(const LogitVector& v) {
  const double m = v.mean();
  double d = INFINITY;
  for (double x : v.values()) d = std::min(d, std::abs(x - m));
  return d;
}

PropertyResult finish(PropertyResult r) {
  r.pass = r.pass && r.worst <= r.tolerance;
  return r;
}

// Scores with every entry at least `margin` away from the mean and from the
// sparsemax and entmax thresholds.
LogitVector draw_with_margin(RngStream& rng, double margin) {
  while (true) {
    const std::size_t k = draw_size(rng, 2, 8);
    const double scale = std::exp(rng.uniform(-1.0, 1.0));
    LogitVector v(rng.normal_vector(k, scale));
    if (distance_to_mean(v) <= margin) continue;
    const double tau_sp = sparsemax_threshold(v);
    const double tau_ent = entmax15_threshold(v);
    bool ok = true;
    for (double x : v.values()) {
      if (std::abs(x - tau_sp) <= margin || std::abs(0.5 * x - tau_ent) <= margin) ok = false;
    }
    if (ok) return v;
  }
}

struct JacobianCase {
  const char* name;
  Normalizer f;
  std::function<Jacobian(const LogitVector&)> jac;
};

std::vector<JacobianCase> jacobian_cases() {
  return {
      {"softmax", softmax, jacobian_softmax},
      {"ev_softmax", ev_softmax, [](const LogitVector& v) { return jacobian_ev_softmax(v); }},
      {"ev_softmax_train", [](const LogitVector& v) { return ev_softmax_train(v); },
       [](const LogitVector& v) { return jacobian_ev_softmax_train(v); }},
      {"sparsemax", sparsemax, jacobian_sparsemax},
      {"entmax15", entmax15, jacobian_entmax15},
  };
}

}  // namespace

bool SuiteReport::all_pass() const {
  return std::all_of(properties.begin(), properties.end(),
                     [](const PropertyResult& p) { return p.pass; });
}

PropertyResult monotonicity(RngStream& rng, std::size_t trials) {
  PropertyResult r{"monotonicity", true, 0.0, 0.0, 0};
  const auto fns = all_normalizers();
  for (std::size_t t = 0; t < trials; ++t) {
    const LogitVector v(draw_scores(rng, draw_size(rng, 1, 10)));
    for (const Named& n : fns) {
      const Distribution p = n.f(v);
      ++r.cases;
      for (std::size_t i = 0; i < v.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) {
          if (v[i] >= v[j]) r.worst = std::max(r.worst, p[j] - p[i]);
        }
      }
    }
  }
  return finish(r);
}

PropertyResult translation_invariance(RngStream& rng, std::size_t trials) {
  PropertyResult r{"translation_invariance", true, 0.0, 1e-12, 0};
  const auto fns = shift_invariant_normalizers();
  for (std::size_t t = 0; t < trials; ++t) {
    std::vector<double> raw = rng.normal_vector(draw_size(rng, 1, 10), 2.0);
    const double c = rng.uniform(-50.0, 50.0);
    std::vector<double> shifted(raw);
    for (double& x : shifted) x += c;
    const LogitVector v(std::move(raw));
    const LogitVector w(std::move(shifted));
    // A score within rounding of the mean may legitimately change side.
    if (distance_to_mean(v) < 1e-9 && v.size() > 1) continue;
    for (const Named& n : fns) {
      const Distribution a = n.f(v);
      const Distribution b = n.f(w);
      ++r.cases;
      for (std::size_t k = 0; k < v.size(); ++k) r.worst = std::max(r.worst, std::abs(a[k] - b[k]));
    }
  }
  return finish(r);
}

PropertyResult permutation_equivariance(RngStream& rng, std::size_t trials) {
  PropertyResult r{"permutation_equivariance", true, 0.0, 0.0, 0};
  const auto fns = all_normalizers();
  for (std::size_t t = 0; t < trials; ++t) {
    const std::vector<double> raw = draw_scores(rng, draw_size(rng, 1, 10));
    std::vector<std::size_t> perm(raw.size());
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<double> permuted(raw.size());
    for (std::size_t k = 0; k < raw.size(); ++k) permuted[k] = raw[perm[k]];
    const LogitVector v(raw);
    const LogitVector w(permuted);
    for (const Named& n : fns) {
      const Distribution a = n.f(v);
      const Distribution b = n.f(w);
      ++r.cases;
      for (std::size_t k = 0; k < raw.size(); ++k) {
        if (b[k] != a[perm[k]] || b.support[k] != a.support[perm[k]]) r.worst += 1.0;
      }
    }
  }
  return finish(r);
}

PropertyResult full_domain(RngStream& rng, std::size_t trials) {
  PropertyResult r{"full_domain", true, 0.0, 0.0, 0};
  const auto fns = all_normalizers();
  for (std::size_t t = 0; t < trials; ++t) {
    std::size_t k = draw_size(rng, 1, 12);
    std::vector<double> v(k);
    switch (t % 6) {
      case 0:  // single class
        v.assign(1, rng.uniform(-700.0, 700.0));
        break;
      case 1: {  // wide dynamic range
        const double scale = std::exp(rng.uniform(-5.0, 6.5));
        for (double& x : v) x = std::clamp(scale * rng.normal(), -700.0, 700.0);
        break;
      }
      case 2:  // constant
        std::fill(v.begin(), v.end(), rng.uniform(-700.0, 700.0));
        break;
      case 3:  // many ties
        for (double& x : v) x = static_cast<double>(rng.below(3)) - 1.0;
        break;
      case 4:  // extremes
        for (double& x : v) {
          const auto pick = rng.below(3);
          x = pick == 0 ? -700.0 : pick == 1 ? 700.0 : rng.uniform(-700.0, 700.0);
        }
        break;
      default:  // tiny, including subnormal
        for (double& x : v) x = rng.normal() * 1e-310;
        break;
    }
    const LogitVector lv(v);
    for (const Named& n : fns) {
      ++r.cases;
      try {
        const Distribution p = n.f(lv);
        if (!is_valid(p) || p.size() != lv.size()) r.worst += 1.0;
      } catch (const std::exception&) {
        r.worst += 1.0;
      }
    }
  }
  return finish(r);
}

PropertyResult jacobian_accuracy(RngStream& rng, std::size_t points) {
  PropertyResult r{"jacobian_vs_finite_difference", true, 0.0, 1e-6, 0};
  for (const JacobianCase& c : jacobian_cases()) {
    for (std::size_t t = 0; t < points; ++t) {
      const LogitVector v = draw_with_margin(rng, 1e-3);
      const Jacobian closed = c.jac(v);
      const Jacobian fd = finite_diff_jacobian(c.f, v, 1e-5);
      r.worst = std::max(r.worst, max_abs_diff(closed, fd));
      ++r.cases;
    }
  }
  return finish(r);
}

PropertyResult jacobian_row_sums(RngStream& rng, std::size_t points) {
  PropertyResult r{"jacobian_row_sums", true, 0.0, 1e-10, 0};
  for (const JacobianCase& c : jacobian_cases()) {
    for (std::size_t t = 0; t < points; ++t) {
      const LogitVector v = draw_with_margin(rng, 1e-3);
      const Jacobian closed = c.jac(v);
      for (std::size_t i = 0; i < v.size(); ++i) {
        r.worst = std::max(r.worst, std::abs(closed.row_sum(i)));
      }
      ++r.cases;
    }
  }
  return finish(r);
}

PropertyResult lipschitz(RngStream& rng, std::size_t trials) {
  PropertyResult r{"lipschitz", true, 0.0, 1.0 + 1e-9, 0};
  for (const Named& n : shift_invariant_normalizers()) {
    const LipschitzReport rep = lipschitz_probe(n.f, rng, trials);
    r.worst = std::max(r.worst, rep.max_ratio);
    r.cases += rep.pairs;
    if (rep.pairs < trials) r.pass = false;
  }
  return finish(r);
}

PropertyResult eps_limits(RngStream& rng, std::size_t trials) {
  PropertyResult r{"eps_limits", true, 0.0, 1e-6, 0};
  for (std::size_t t = 0; t < trials; ++t) {
    const LogitVector v(draw_scores(rng, draw_size(rng, 1, 10)));
    const Distribution small = ev_softmax_train(v, Epsilon(1e-12));
    const Distribution large = ev_softmax_train(v, Epsilon(1e12));
    const Distribution ev = ev_softmax(v);
    const Distribution soft = softmax(v);
    for (std::size_t k = 0; k < v.size(); ++k) {
      r.worst = std::max({r.worst, std::abs(small[k] - ev[k]), std::abs(large[k] - soft[k])});
    }
    ++r.cases;
  }
  return finish(r);
}

PropertyResult gradient_limit(RngStream& rng, std::size_t pairs) {
  PropertyResult r{"gradient_limit", true, 0.0, 10.0, 0};
  static constexpr std::array<double, 7> kEps = {1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8};
  while (r.cases < pairs) {
    const std::size_t k = draw_size(rng, 2, 10);
    const LogitVector v(rng.normal_vector(k, std::exp(rng.uniform(-1.0, 1.0))));
    if (distance_to_mean(v) <= 1e-6) continue;
    const Distribution p = ev_softmax(v);
    std::vector<std::size_t> support;
    for (std::size_t i = 0; i < k; ++i) {
      if (p.support[i]) support.push_back(i);
    }
    const std::size_t target = support[rng.below(support.size())];
    double previous = INFINITY;
    for (double e : kEps) {
      const LogitVector g = grad_log_ev_softmax_train(v, target, Epsilon(e));
      double err = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double limit = (j == target ? 1.0 : 0.0) - p[j];
        err = std::max(err, std::abs(g[j] - limit));
      }
      r.worst = std::max(r.worst, err / e);
      if (err > previous) r.pass = false;
      previous = err;
    }
    ++r.cases;
  }
  return finish(r);
}

PropertyResult non_idempotence_witness() {
  PropertyResult r{"non_idempotence_witness", true, 0.0, 0.0, 1};
  const Distribution once = ev_softmax(LogitVector{0.4, 1.4, -0.8});
  const Distribution twice = ev_softmax(LogitVector(once.probs));
  double gap = 0.0;
  for (std::size_t k = 0; k < once.size(); ++k) gap = std::max(gap, std::abs(once[k] - twice[k]));
  // Passing means the two outputs differ; report the gap as the residual.
  r.worst = gap;
  r.pass = gap > 0.0;
  return r;
}

SuiteReport run_suite(std::uint64_t seed, std::size_t trials) {
  if (trials == 0) throw InvalidInput("trials must be positive");
  SuiteReport report;
  std::uint64_t stream = 0;
  auto next = [&] { return RngStream::split(seed, stream++); };
  const std::size_t jac_points = std::max<std::size_t>(1, trials / 10);
  const std::size_t grad_pairs = std::max<std::size_t>(1, trials / 100);

  RngStream r1 = next(), r2 = next(), r3 = next(), r4 = next(), r5 = next(), r6 = next(),
            r7 = next(), r8 = next(), r9 = next();
  report.properties.push_back(monotonicity(r1, trials));
  report.properties.push_back(translation_invariance(r2, trials));
  report.properties.push_back(permutation_equivariance(r3, trials));
  report.properties.push_back(full_domain(r4, 10 * trials));
  report.properties.push_back(jacobian_accuracy(r5, jac_points));
  report.properties.push_back(jacobian_row_sums(r6, jac_points));
  report.properties.push_back(lipschitz(r7, trials));
  report.properties.push_back(eps_limits(r8, trials));
  report.properties.push_back(gradient_limit(r9, grad_pairs));
  report.properties.push_back(non_idempotence_witness());
  return report;
}

OracleReport equivalence_fuzz(std::uint64_t seed, std::size_t trials, std::size_t classes,
                          std::size_t features) {
  if (trials == 0 || classes == 0 || features == 0) {
    throw InvalidInput("trials, classes and features must be positive");
  }
  RngStream rng(seed);
  OracleReport rep;
  rep.tolerance = 1e-12;
  for (std::size_t t = 0; t < trials; ++t) {
    const std::vector<double> phi = rng.normal_vector(features);
    std::vector<double> beta = rng.normal_vector(features * classes);
    std::vector<double> alpha = rng.normal_vector(classes);
    const evidential::LinearLayer layer(features, classes, std::move(beta), std::move(alpha));
    const Distribution filtered = evidential::posthoc_filter(phi, layer);
    const Distribution direct = ev_softmax(LogitVector(layer.scores(phi)));
    for (std::size_t k = 0; k < classes; ++k) {
      rep.max_deviation = std::max(rep.max_deviation, std::abs(filtered[k] - direct[k]));
    }
    if (filtered.support != direct.support) ++rep.support_mismatches;
    ++rep.trials;
  }
  rep.pass = rep.max_deviation <= rep.tolerance && rep.support_mismatches == 0;
  return rep;
}

OracleReport lattice_fuzz(std::uint64_t seed, std::size_t trials, std::size_t classes) {
  if (trials == 0) throw InvalidInput("trials must be positive");
  if (classes == 0 || classes > evidential::kMaxLatticeClasses) {
    throw InvalidInput("lattice fuzz supports 1 to 16 classes");
  }
  RngStream rng(seed);
  OracleReport rep;
  rep.tolerance = 1e-10;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto ew = evidential::EvidentialWeights::from_weights(rng.normal_vector(classes, 1.5));
    const std::vector<double> closed = evidential::closed_form_masses(ew);
    const evidential::MassFunction combined = evidential::fused_mass(ew);
    const std::vector<double>& fused = combined.masses();
    for (std::size_t a = 0; a < closed.size(); ++a) {
      const double scale = std::max(std::abs(closed[a]), std::abs(fused[a]));
      if (scale == 0.0) continue;
      rep.max_deviation = std::max(rep.max_deviation, std::abs(closed[a] - fused[a]) / scale);
      if ((closed[a] == 0.0) != (fused[a] == 0.0)) ++rep.support_mismatches;
    }
    ++rep.trials;
  }
  rep.pass = rep.max_deviation <= rep.tolerance && rep.support_mismatches == 0;
  return rep;
}

}  // namespace sparsenorm::check
