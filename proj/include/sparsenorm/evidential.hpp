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

// Post-hoc evidential sparsification built from explicit Dempster-Shafer
// machinery. A linear output layer is read as an evidential classifier: each
// centered class weight w_k is evidence for {z_k} (w_k > 0) or for its
// complement (w_k < 0). Fusing the per-class simple mass functions with
// Dempster's rule gives the singleton masses
//
//   m({z_k}) ∝ exp(-w_k^-) (exp(w_k^+) - 1 + prod_{l != k} (1 - exp(-w_l^-)))
//
// and the filtered distribution keeps softmax mass only where m({z_k}) != 0.
// This module deliberately does not call into normalize.hpp so it can serve
// as an independent oracle for ev_softmax.

#ifndef SPARSENORM_EVIDENTIAL_HPP_
#define SPARSENORM_EVIDENTIAL_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "sparsenorm/types.hpp"

namespace sparsenorm::evidential {

/// Subsets of {0, ..., K-1} as bitmasks; bit k set means z_k is in the set.
using Subset = std::uint32_t;

inline constexpr std::size_t kMaxLatticeClasses = 16;
inline constexpr double kTotalConflict = 1.0 - 1e-12;

/// Output layer: pre-activation_k = bias_k + sum_j weights(j, k) * phi_j.
class LinearLayer {
 public:
  /// `weights` is row-major J x K. Throws ShapeError / InvalidInput.
  LinearLayer(std::size_t features, std::size_t classes, std::vector<double> weights,
              std::vector<double> bias);

  std::size_t features() const { return features_; }
  std::size_t classes() const { return classes_; }
  double weight(std::size_t j, std::size_t k) const { return weights_[j * classes_ + k]; }
  double bias(std::size_t k) const { return bias_[k]; }

  /// Raw (uncentered) pre-activations for feature vector phi.
  std::vector<double> scores(std::span<const double> phi) const;

 private:
  std::size_t features_;
  std::size_t classes_;
  std::vector<double> weights_;
  std::vector<double> bias_;
};

struct EvidentialWeights {
  std::vector<double> w;
  std::vector<double> w_plus;   // max(0, w)
  std::vector<double> w_minus;  // max(0, -w)

  std::size_t size() const { return w.size(); }
  static EvidentialWeights from_weights(std::vector<double> w);
};

/// Centers the layer parameters across classes first and then applies them
/// to phi, so w sums to zero. Throws ShapeError if phi has the wrong length.
EvidentialWeights evidential_weights(std::span<const double> phi, const LinearLayer& layer);

/// Unnormalized m({z_k}) for every k; all entries are >= 0.
std::vector<double> singleton_masses(const EvidentialWeights& ew);

/// Unnormalized m(A) for |A| > 1:
/// prod_{k not in A} (1 - exp(-w_k^-)) * prod_{k in A} exp(-w_k^-).
/// Throws SubsetError when |A| <= 1.
double subset_mass(const EvidentialWeights& ew, Subset subset);

/// Dense mass function over the 2^K subsets of K <= 16 classes.
class MassFunction {
 public:
  /// All mass on the full set Z.
  static MassFunction vacuous(std::size_t classes);
  /// `mass` on `focal`, 1 - mass on Z.
  static MassFunction simple(std::size_t classes, Subset focal, double mass);
  /// As above with the mass on Z given explicitly, so that a remainder like
  /// exp(-w) keeps full relative precision when it is tiny.
  static MassFunction simple(std::size_t classes, Subset focal, double mass, double remainder);
  /// Validates m(empty) = 0, entries in [0, 1], sum 1 within 1e-10.
  static MassFunction from_masses(std::size_t classes, std::vector<double> masses);

  std::size_t classes() const { return classes_; }
  Subset full_set() const { return static_cast<Subset>((std::size_t{1} << classes_) - 1); }
  double operator[](Subset a) const { return masses_[a]; }
  const std::vector<double>& masses() const { return masses_; }

  /// Nonzero entries as (subset, mass) pairs, ascending by subset.
  std::vector<std::pair<Subset, double>> focal_elements() const;

 private:
  MassFunction(std::size_t classes, std::vector<double> masses)
      : classes_(classes), masses_(std::move(masses)) {}

  std::size_t classes_;
  std::vector<double> masses_;
};

struct Combination {
  MassFunction mass;
  double conflict;  // degree of conflict kappa
};

/// Dempster's rule. Throws ShapeError on mismatched K and TotalConflictError
/// when kappa >= 1 - 1e-12.
Combination dempster_combine_with_conflict(const MassFunction& a, const MassFunction& b);
MassFunction dempster_combine(const MassFunction& a, const MassFunction& b);

/// The 2K simple mass functions m+_k({z_k}) = 1 - exp(-w_k^+) and
/// m-_k(complement of {z_k}) = 1 - exp(-w_k^-), each with the remainder on Z.
std::vector<MassFunction> simple_masses(const EvidentialWeights& ew);

/// Combines simple_masses(ew) left to right over the full subset lattice.
MassFunction fused_mass(const EvidentialWeights& ew);

/// Closed-form masses for every subset (singletons via singleton_masses,
/// larger sets via subset_mass, empty set 0), normalized to sum to 1.
std::vector<double> closed_form_masses(const EvidentialWeights& ew);

/// Softmax of the raw pre-activations, zeroed where m({z_k}) == 0 and
/// renormalized; uniform when every singleton mass vanishes (w == 0).
Distribution posthoc_filter(std::span<const double> phi, const LinearLayer& layer);

}  // namespace sparsenorm::evidential

#endif  // SPARSENORM_EVIDENTIAL_HPP_
