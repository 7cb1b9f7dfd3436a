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

#include "sparsenorm/evidential.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "sparsenorm/errors.hpp"

namespace sparsenorm::evidential {

namespace {

void require_finite(std::span<const double> xs, const char* what) {
  for (double x : xs) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + " has a non-finite entry");
  }
}

void require_lattice_size(std::size_t classes) {
  if (classes == 0 || classes > kMaxLatticeClasses) {
    throw InvalidInput("subset lattice supports 1 to 16 classes, got " + std::to_string(classes));
  }
}

// 1 - exp(-x) without cancellation for small x.
double one_minus_exp_neg(double x) { return -std::expm1(-x); }

}  // namespace

LinearLayer::LinearLayer(std::size_t features, std::size_t classes, std::vector<double> weights,
                         std::vector<double> bias)
    : features_(features), classes_(classes), weights_(std::move(weights)), bias_(std::move(bias)) {
  if (features_ == 0 || classes_ == 0) throw ShapeError("linear layer needs J >= 1 and K >= 1");
  if (weights_.size() != features_ * classes_) {
    throw ShapeError("weight matrix must hold J * K entries");
  }
  if (bias_.size() != classes_) throw ShapeError("bias must hold K entries");
  require_finite(weights_, "weight matrix");
  require_finite(bias_, "bias");
}

std::vector<double> LinearLayer::scores(std::span<const double> phi) const {
  if (phi.size() != features_) {
    throw ShapeError("feature vector has length " + std::to_string(phi.size()) + ", layer expects " +
                     std::to_string(features_));
  }
  std::vector<double> out(bias_);
  for (std::size_t j = 0; j < features_; ++j) {
    for (std::size_t k = 0; k < classes_; ++k) out[k] += weight(j, k) * phi[j];
  }
  return out;
}

EvidentialWeights EvidentialWeights::from_weights(std::vector<double> w) {
  EvidentialWeights ew;
  ew.w_plus.resize(w.size());
  ew.w_minus.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    ew.w_plus[k] = std::max(0.0, w[k]);
    ew.w_minus[k] = std::max(0.0, -w[k]);
  }
  ew.w = std::move(w);
  return ew;
}

EvidentialWeights evidential_weights(std::span<const double> phi, const LinearLayer& layer) {
  const std::size_t J = layer.features();
  const std::size_t K = layer.classes();
  if (phi.size() != J) {
    throw ShapeError("feature vector has length " + std::to_string(phi.size()) + ", layer expects " +
                     std::to_string(J));
  }
  require_finite(phi, "feature vector");
  const double kinv = 1.0 / static_cast<double>(K);

  // Center the bias and every weight row across classes, then apply to phi.
  double bias_mean = 0.0;
  for (std::size_t k = 0; k < K; ++k) bias_mean += layer.bias(k);
  bias_mean *= kinv;
  std::vector<double> w(K);
  for (std::size_t k = 0; k < K; ++k) w[k] = layer.bias(k) - bias_mean;

  for (std::size_t j = 0; j < J; ++j) {
    double row_mean = 0.0;
    for (std::size_t k = 0; k < K; ++k) row_mean += layer.weight(j, k);
    row_mean *= kinv;
    for (std::size_t k = 0; k < K; ++k) w[k] += (layer.weight(j, k) - row_mean) * phi[j];
  }
  return EvidentialWeights::from_weights(std::move(w));
}

std::vector<double> singleton_masses(const EvidentialWeights& ew) {
  const std::size_t K = ew.size();
  std::vector<double> m(K);
  for (std::size_t k = 0; k < K; ++k) {
    double conflict_free = 1.0;
    for (std::size_t l = 0; l < K; ++l) {
      if (l != k) conflict_free *= one_minus_exp_neg(ew.w_minus[l]);
    }
    m[k] = std::exp(-ew.w_minus[k]) * (std::expm1(ew.w_plus[k]) + conflict_free);
  }
  return m;
}

double subset_mass(const EvidentialWeights& ew, Subset subset) {
  require_lattice_size(ew.size());
  if (std::popcount(subset) <= 1) {
    throw SubsetError("subset_mass is defined for sets with more than one class");
  }
  if (subset >> ew.size() != 0) throw SubsetError("subset names a class beyond K");
  double m = 1.0;
  for (std::size_t k = 0; k < ew.size(); ++k) {
    const bool member = (subset >> k) & 1U;
    m *= member ? std::exp(-ew.w_minus[k]) : one_minus_exp_neg(ew.w_minus[k]);
  }
  return m;
}

MassFunction MassFunction::vacuous(std::size_t classes) {
  require_lattice_size(classes);
  std::vector<double> masses(std::size_t{1} << classes, 0.0);
  masses.back() = 1.0;
  return MassFunction(classes, std::move(masses));
}

MassFunction MassFunction::simple(std::size_t classes, Subset focal, double mass) {
  return simple(classes, focal, mass, 1.0 - mass);
}

MassFunction MassFunction::simple(std::size_t classes, Subset focal, double mass,
                                  double remainder) {
  MassFunction m = vacuous(classes);
  if (!(mass >= 0.0 && mass <= 1.0) || !(remainder >= 0.0 && remainder <= 1.0) ||
      std::abs(mass + remainder - 1.0) > 1e-12) {
    throw InvalidInput("simple mass function needs mass + remainder = 1 with both in [0, 1]");
  }
  if (mass == 0.0) return m;
  if (focal == 0) throw InvalidInput("the empty set cannot carry mass");
  if (focal >> classes != 0) throw InvalidInput("focal set names a class beyond K");
  m.masses_[focal] += mass;
  m.masses_.back() = remainder;
  if (focal == m.full_set()) m.masses_.back() = 1.0;
  return m;
}

MassFunction MassFunction::from_masses(std::size_t classes, std::vector<double> masses) {
  require_lattice_size(classes);
  if (masses.size() != (std::size_t{1} << classes)) {
    throw ShapeError("mass vector must have 2^K entries");
  }
  if (masses[0] != 0.0) throw InvalidInput("the empty set cannot carry mass");
  double total = 0.0;
  for (double x : masses) {
    if (!(x >= 0.0 && x <= 1.0)) throw InvalidInput("masses must lie in [0, 1]");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-10) throw InvalidInput("masses must sum to 1");
  return MassFunction(classes, std::move(masses));
}

std::vector<std::pair<Subset, double>> MassFunction::focal_elements() const {
  std::vector<std::pair<Subset, double>> out;
  for (std::size_t a = 0; a < masses_.size(); ++a) {
    if (masses_[a] != 0.0) out.emplace_back(static_cast<Subset>(a), masses_[a]);
  }
  return out;
}

Combination dempster_combine_with_conflict(const MassFunction& a, const MassFunction& b) {
  if (a.classes() != b.classes()) throw ShapeError("mass functions are over different frames");
  const auto fa = a.focal_elements();
  const auto fb = b.focal_elements();
  std::vector<double> out(a.masses().size(), 0.0);
  for (const auto& [sa, ma] : fa) {
    for (const auto& [sb, mb] : fb) out[sa & sb] += ma * mb;
  }
  const double conflict = out[0];
  out[0] = 0.0;
  // Normalize by the retained mass rather than 1 - kappa to avoid
  // cancellation when the conflict is large.
  double retained = 0.0;
  for (double x : out) retained += x;
  if (conflict >= kTotalConflict || retained <= 1.0 - kTotalConflict) {
    throw TotalConflictError("mass functions are in total conflict");
  }
  for (double& x : out) x /= retained;
  return {MassFunction::from_masses(a.classes(), std::move(out)), conflict};
}

MassFunction dempster_combine(const MassFunction& a, const MassFunction& b) {
  return dempster_combine_with_conflict(a, b).mass;
}

std::vector<MassFunction> simple_masses(const EvidentialWeights& ew) {
  const std::size_t K = ew.size();
  require_lattice_size(K);
  const Subset all = static_cast<Subset>((std::size_t{1} << K) - 1);
  std::vector<MassFunction> out;
  out.reserve(2 * K);
  for (std::size_t k = 0; k < K; ++k) {
    const Subset singleton = Subset{1} << k;
    out.push_back(MassFunction::simple(K, singleton, one_minus_exp_neg(ew.w_plus[k]),
                                       std::exp(-ew.w_plus[k])));
    out.push_back(MassFunction::simple(K, all & ~singleton, one_minus_exp_neg(ew.w_minus[k]),
                                       std::exp(-ew.w_minus[k])));
  }
  return out;
}

MassFunction fused_mass(const EvidentialWeights& ew) {
  MassFunction m = MassFunction::vacuous(ew.size());
  for (const MassFunction& s : simple_masses(ew)) m = dempster_combine(m, s);
  return m;
}

std::vector<double> closed_form_masses(const EvidentialWeights& ew) {
  const std::size_t K = ew.size();
  require_lattice_size(K);
  std::vector<double> masses(std::size_t{1} << K, 0.0);
  const std::vector<double> singles = singleton_masses(ew);
  for (std::size_t k = 0; k < K; ++k) masses[std::size_t{1} << k] = singles[k];
  for (std::size_t a = 1; a < masses.size(); ++a) {
    if (std::popcount(a) > 1) masses[a] = subset_mass(ew, static_cast<Subset>(a));
  }
  double total = 0.0;
  for (double x : masses) total += x;
  for (double& x : masses) x /= total;
  return masses;
}

Distribution posthoc_filter(std::span<const double> phi, const LinearLayer& layer) {
  const std::vector<double> scores = layer.scores(phi);
  const EvidentialWeights ew = evidential_weights(phi, layer);
  const std::vector<double> masses = singleton_masses(ew);
  const std::size_t K = scores.size();

  if (std::all_of(masses.begin(), masses.end(), [](double m) { return m == 0.0; })) {
    return Distribution::uniform(K);
  }

  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> soft(K);
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    soft[k] = std::exp(scores[k] - top);
    z += soft[k];
  }
  std::vector<double> kept(K);
  for (std::size_t k = 0; k < K; ++k) kept[k] = masses[k] != 0.0 ? soft[k] / z : 0.0;
  return Distribution::from_weights(kept);
}

}  // namespace sparsenorm::evidential
