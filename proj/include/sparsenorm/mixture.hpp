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

// Desk-scale conditional mixture benchmark.
//
// Data: M binary prototypes of D bits; each sample is a prototype with
// independent bit flips, queried by the parity of its prototype index. The
// true conditional prior p(prototype | query) is uniform over M/2 prototypes.
//
// Model, with K latent classes and query y in {0 (even), 1 (odd)}:
//   prior      p(z | y)    = normalize(prior_logits[y])
//   posterior  q(z | x, y) = normalize(W^T [x; onehot(y)])
//   decoder    p(x | z=k)  = prod_d Bernoulli(x_d; sigmoid(decoder_logits[k][d]))
//
// The ELBO  E_q log p(x|z) - KL(q || p(.|y))  is computed by exact summation
// over the latent classes with q_k > eps^2; the KL term uses the eps-smoothed
// prior (numerics eps_kl). Training runs plain full-batch gradient ascent on
// the exact analytic gradient, assembled from the normalizer Jacobians. At
// test time the prior is evaluated with the sparse (unrelaxed) normalizer.

#ifndef SPARSENORM_MIXTURE_HPP_
#define SPARSENORM_MIXTURE_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "sparsenorm/normalize.hpp"
#include "sparsenorm/rng.hpp"
#include "sparsenorm/types.hpp"

namespace sparsenorm::mixture {

inline constexpr std::size_t kQueries = 2;

struct DatasetConfig {
  std::size_t prototypes = 10;
  std::size_t bits = 16;
  double noise_rate = 0.05;
  std::size_t samples = 2000;
  std::uint64_t seed = 42;
  /// Minimum pairwise Hamming distance; 0 means bits / 4.
  std::size_t min_separation = 0;
  std::size_t max_attempts = 1000;
};

struct Sample {
  std::vector<std::uint8_t> x;
  int query = 0;  // parity of `prototype`
  std::size_t prototype = 0;
};

struct SyntheticDataset {
  std::vector<std::vector<std::uint8_t>> prototypes;
  double noise_rate = 0.0;
  std::uint64_t seed = 0;
  std::vector<Sample> samples;

  std::size_t bits() const { return prototypes.empty() ? 0 : prototypes.front().size(); }
  std::size_t size() const { return samples.size(); }
};

/// Deterministic in config.seed. Sample i is drawn from prototype i mod M and
/// the samples are then shuffled, so prototype counts differ by at most one
/// and the two queries are balanced. Throws ConfigError
/// when the prototype count is odd or separation fails max_attempts times.
SyntheticDataset gen_dataset(const DatasetConfig& config);

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

class MixtureModel {
 public:
  MixtureModel(std::size_t classes, std::size_t bits);
  /// Every parameter drawn from N(0, scale^2).
  static MixtureModel random(std::size_t classes, std::size_t bits, RngStream& rng, double scale);

  std::size_t classes() const { return classes_; }
  std::size_t bits() const { return bits_; }

  double& prior_logit(int query, std::size_t k) { return prior_[query * classes_ + k]; }
  double prior_logit(int query, std::size_t k) const { return prior_[query * classes_ + k]; }
  /// Rows 0..D-1 weight the bits, rows D and D+1 the one-hot query.
  double& encoder_weight(std::size_t row, std::size_t k) { return encoder_[row * classes_ + k]; }
  double encoder_weight(std::size_t row, std::size_t k) const { return encoder_[row * classes_ + k]; }
  double& decoder_logit(std::size_t k, std::size_t d) { return decoder_[k * bits_ + d]; }
  double decoder_logit(std::size_t k, std::size_t d) const { return decoder_[k * bits_ + d]; }

  LogitVector prior_logits(int query) const;
  LogitVector encoder_logits(std::span<const std::uint8_t> x, int query) const;

  /// All parameters as one flat view: prior, then encoder, then decoder.
  std::size_t parameter_count() const;
  double& parameter(std::size_t i);
  double parameter(std::size_t i) const;

  /// this += scale * other (same shape required).
  void add_scaled(const MixtureModel& other, double scale);
  double squared_norm() const;

  std::vector<double>& prior_block() { return prior_; }
  std::vector<double>& encoder_block() { return encoder_; }
  std::vector<double>& decoder_block() { return decoder_; }
  const std::vector<double>& prior_block() const { return prior_; }
  const std::vector<double>& encoder_block() const { return encoder_; }
  const std::vector<double>& decoder_block() const { return decoder_; }

 private:
  std::size_t classes_;
  std::size_t bits_;
  std::vector<double> prior_;    // 2 x K
  std::vector<double> encoder_;  // (D + 2) x K
  std::vector<double> decoder_;  // K x D
};

/// Gradients share the model's shape.
using ModelGradient = MixtureModel;

/// Mean ELBO over the batch. Throws ShapeError on mismatched bit counts.
double elbo(const MixtureModel& model, std::span<const Sample> batch, NormalizerKind normalizer,
            Epsilon eps);

/// Exact gradient of elbo() with respect to every parameter. On a
/// BoundaryError from an ev-softmax Jacobian the offending logit vector is
/// perturbed by 1e-9 * (k + 1) at entry k and retried once; a second failure
/// propagates the BoundaryError.
ModelGradient elbo_grad(const MixtureModel& model, std::span<const Sample> batch,
                        NormalizerKind normalizer, Epsilon eps, double* elbo_out = nullptr);

enum class ModelInit {
  /// See seeded_init().
  kSeeded,
  /// Every parameter drawn from N(0, init_scale^2).
  kRandom,
};

std::string_view to_string(ModelInit init);
std::optional<ModelInit> parse_model_init(std::string_view name);

/// Data-dependent initialization. Decoder rows start at distinct data
/// patterns chosen greedily by (pattern count) x (Hamming distance to the
/// nearest chosen pattern), so frequent, well-separated patterns win over
/// isolated noisy ones; logits are +-decoder_scale plus N(0, jitter^2). The
/// encoder starts at the exact posterior of that decoder under a uniform
/// prior, and the prior logits at N(0, jitter^2). The jitter keeps encoder
/// logits off the integer lattice that binary centers would otherwise give.
MixtureModel seeded_init(const SyntheticDataset& dataset, std::size_t classes, RngStream& rng,
                         double decoder_scale, double jitter);

struct TrainConfig {
  NormalizerKind normalizer = NormalizerKind::kEvSoftmax;
  Epsilon eps{};
  double learning_rate = 0.1;
  std::size_t steps = 2000;
  std::size_t batch_size = 2000;
  std::uint64_t seed = 42;
  std::size_t classes = 10;
  ModelInit init = ModelInit::kSeeded;
  double init_scale = 0.1;
  double decoder_scale = 2.0;
  std::size_t record_every = 50;

  /// Throws ConfigError on steps == 0, batch_size == 0, a non-positive
  /// learning rate, classes == 0 or record_every == 0.
  void validate() const;
};

struct BenchMetrics {
  /// Distances between the prior pushed onto prototypes and the uniform
  /// distribution over the query's true prototypes, per query and averaged.
  std::vector<double> prior_tv_per_query;
  std::vector<double> prior_w1_per_query;
  double prior_tv = 0.0;
  double prior_w1 = 0.0;
  /// Number of latent classes with nonzero test-time prior mass, per query.
  std::vector<std::size_t> prior_support_size;
  /// True when the support maps one-to-one onto the query's true prototypes.
  std::vector<bool> modes_recovered;
  /// Test-time prior over latent classes, per query.
  std::vector<std::vector<double>> prior;
  std::vector<double> elbo_curve;
  std::vector<std::size_t> elbo_steps;
  double final_elbo = 0.0;
  /// mode_assignment[k] = prototype nearest to latent class k's decoder.
  std::vector<std::size_t> mode_assignment;
};

struct TrainResult {
  MixtureModel model;
  BenchMetrics metrics;
};

/// Gradient ascent with a fixed learning rate. Minibatches (when
/// batch_size < dataset size) are consecutive slices taken cyclically.
/// Throws DivergenceError if the ELBO or a parameter becomes non-finite.
TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config);

/// Test-time metrics; elbo fields are left empty.
BenchMetrics evaluate(const MixtureModel& model, const SyntheticDataset& dataset,
                      NormalizerKind normalizer);

struct CompareRow {
  TrainConfig config;
  BenchMetrics metrics;
};

/// Runs train + evaluate for every config on the shared dataset. Runs are
/// independent and execute concurrently; the result does not depend on
/// scheduling.
std::vector<CompareRow> compare(const SyntheticDataset& dataset,
                                std::span<const TrainConfig> configs);

}  // namespace sparsenorm::mixture

#endif  // SPARSENORM_MIXTURE_HPP_
