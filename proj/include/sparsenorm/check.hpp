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

// Randomized property checks over the normalizers and fuzz drivers for the
// evidential oracle. Every check is deterministic in its RNG stream.

#ifndef SPARSENORM_CHECK_HPP_
#define SPARSENORM_CHECK_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sparsenorm/rng.hpp"

namespace sparsenorm::check {

struct PropertyResult {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // largest residual seen (meaning depends on the check)
  double tolerance = 0.0;
  std::size_t cases = 0;
};

struct SuiteReport {
  std::vector<PropertyResult> properties;
  bool all_pass() const;
};

/// v[i] >= v[j] implies p[i] >= p[j] for every normalizer. `worst` is the
/// largest p[j] - p[i] over ordered pairs.
PropertyResult monotonicity(RngStream& rng, std::size_t trials);

/// |f(v + c) - f(v)| <= 1e-12 for softmax, ev_softmax, sparsemax, entmax15.
PropertyResult translation_invariance(RngStream& rng, std::size_t trials);

/// f(sigma(v)) == sigma(f(v)) bit for bit. `worst` counts mismatching entries.
PropertyResult permutation_equivariance(RngStream& rng, std::size_t trials);

/// Valid distributions, no exceptions, for random inputs including K = 1,
/// ties, constants and entries of magnitude 700. `worst` counts failures.
PropertyResult full_domain(RngStream& rng, std::size_t trials);

/// Closed-form Jacobians against central differences (h = 1e-5, tol 1e-6)
/// at `points` random inputs per normalizer with every score more than 1e-3
/// from the mean (and, for the sort-based maps, from the threshold).
PropertyResult jacobian_accuracy(RngStream& rng, std::size_t points);
/// Same sampling as jacobian_accuracy; every closed-form row sums to within
/// 1e-10 of zero.
PropertyResult jacobian_row_sums(RngStream& rng, std::size_t points);

/// lipschitz_probe for softmax, ev_softmax, sparsemax and entmax15;
/// `worst` is the largest ratio, pass iff <= 1 + 1e-9.
PropertyResult lipschitz(RngStream& rng, std::size_t trials);

/// ev_softmax_train at eps = 1e-12 against ev_softmax and at eps = 1e12
/// against softmax, entrywise within 1e-6.
PropertyResult eps_limits(RngStream& rng, std::size_t trials);

/// For eps in {1e-2, ..., 1e-8} and random (v, i in support):
/// ||grad log ev_softmax_train - (delta_i - ev_softmax(v))||_inf <= 10 eps,
/// nonincreasing as eps decreases. `worst` is the largest error / eps.
PropertyResult gradient_limit(RngStream& rng, std::size_t pairs);

/// ev_softmax applied twice to (0.4, 1.4, -0.8) differs from applying it once.
PropertyResult non_idempotence_witness();

/// Runs every property above. `trials` drives the sampled checks: full domain
/// uses 10 * trials inputs, Jacobians trials / 10 points per normalizer and
/// the gradient limit trials / 100 pairs (each at least 1).
SuiteReport run_suite(std::uint64_t seed, std::size_t trials);

struct OracleReport {
  std::size_t trials = 0;
  double max_deviation = 0.0;
  std::size_t support_mismatches = 0;
  double tolerance = 0.0;
  bool pass = true;
};

/// Gaussian (phi, beta, alpha) draws with phi of length `features` and
/// `classes` outputs; compares posthoc_filter with ev_softmax of the raw
/// pre-activations. Pass iff max deviation <= 1e-12 with identical supports.
OracleReport equivalence_fuzz(std::uint64_t seed, std::size_t trials, std::size_t classes,
                          std::size_t features);

/// Random weight vectors w ~ N(0, 1.5^2) of length `classes` <= 16; compares
/// closed-form subset masses with the Dempster combination of the 2K simple
/// masses. Reports the largest relative deviation; pass iff <= 1e-10.
OracleReport lattice_fuzz(std::uint64_t seed, std::size_t trials, std::size_t classes);

}  // namespace sparsenorm::check

#endif  // SPARSENORM_CHECK_HPP_
