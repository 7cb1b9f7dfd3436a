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

#include "sparsenorm/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>

#include "sparsenorm/errors.hpp"
#include "sparsenorm/numerics.hpp"

namespace sparsenorm::mixture {

namespace {

// log(1 + e^t) without overflow.
double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

double sigmoid(double t) {
  if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
  const double e = std::exp(t);
  return e / (1.0 + e);
}

struct Forward {
  Distribution p;
  std::optional<Jacobian> jac;
};

Forward forward(NormalizerKind kind, const LogitVector& v, Epsilon eps, bool with_jacobian) {
  if (!with_jacobian) return {normalize_train(kind, v, eps), std::nullopt};
  try {
    Jacobian j = jacobian_train(kind, v, eps);
    return {normalize_train(kind, v, eps), std::move(j)};
  } catch (const BoundaryError&) {
    std::vector<double> nudged = v.vec();
    for (std::size_t k = 0; k < nudged.size(); ++k) nudged[k] += 1e-9 * static_cast<double>(k + 1);
    const LogitVector w(std::move(nudged));
    Jacobian j = jacobian_train(kind, w, eps);
    return {normalize_train(kind, w, eps), std::move(j)};
  }
}

// Per-query prior state shared by every sample with that query.
struct PriorState {
  Forward fwd;
  std::vector<double> smoothed;  // r + eps
  double total = 0.0;            // sum of smoothed, ordered
  std::vector<double> grad;      // d ELBO / d r, summed over samples
};

// Shared forward pass for elbo() and elbo_grad(); `grad` may be null.
double accumulate(const MixtureModel& model, std::span<const Sample> batch, NormalizerKind kind,
                  Epsilon eps, ModelGradient* grad) {
  const std::size_t K = model.classes();
  const std::size_t D = model.bits();
  if (batch.empty()) throw InvalidInput("ELBO needs a non-empty batch");
  const bool with_grad = grad != nullptr;
  const double e = eps.value();
  const double keep = e * e;

  std::vector<PriorState> priors;
  priors.reserve(kQueries);
  for (std::size_t y = 0; y < kQueries; ++y) {
    PriorState s{forward(kind, model.prior_logits(static_cast<int>(y)), eps, with_grad), {}, 0.0,
                 std::vector<double>(K, 0.0)};
    s.smoothed = s.fwd.p.probs;
    for (double& x : s.smoothed) x += e;
    s.total = ordered_sum(s.smoothed);
    priors.push_back(std::move(s));
  }

  // Decoder tables, computed once per call.
  std::vector<double> sp(K * D), sg(with_grad ? K * D : 0);
  for (std::size_t i = 0; i < K * D; ++i) {
    const double t = model.decoder_block()[i];
    sp[i] = softplus(t);
    if (with_grad) sg[i] = sigmoid(t);
  }

  double sum = 0.0;
  std::vector<double> recon(K), gq(K);
  for (const Sample& s : batch) {
    if (s.x.size() != D) throw ShapeError("sample has the wrong number of bits");
    if (s.query < 0 || s.query >= static_cast<int>(kQueries)) {
      throw InvalidInput("sample query must be 0 or 1");
    }
    PriorState& prior = priors[s.query];
    const Forward q = forward(kind, model.encoder_logits(s.x, s.query), eps, with_grad);

    double value = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double qk = q.p[k];
      gq[k] = 0.0;
      if (qk > keep) {
        double l = 0.0;
        for (std::size_t d = 0; d < D; ++d) {
          l += (s.x[d] ? model.decoder_logit(k, d) : 0.0) - sp[k * D + d];
        }
        recon[k] = l;
        value += qk * l;
        gq[k] = l;
      }
      if (qk > 0.0) {
        const double log_ratio = std::log(qk * prior.total / prior.smoothed[k]);
        value -= qk * log_ratio;
        gq[k] -= log_ratio + 1.0;
      }
    }
    sum += value;
    if (!with_grad) continue;

    const std::vector<double> gu = q.jac->transpose_times(gq);
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t d = 0; d < D; ++d) {
        if (s.x[d]) grad->encoder_weight(d, k) += gu[k];
      }
      grad->encoder_weight(D + s.query, k) += gu[k];

      const double qk = q.p[k];
      if (qk > keep) {
        for (std::size_t d = 0; d < D; ++d) {
          grad->decoder_logit(k, d) += qk * (static_cast<double>(s.x[d]) - sg[k * D + d]);
        }
      }
      if (qk > 0.0) prior.grad[k] += qk / prior.smoothed[k];
      prior.grad[k] -= 1.0 / prior.total;
    }
  }

  const double n = static_cast<double>(batch.size());
  if (with_grad) {
    for (std::size_t y = 0; y < kQueries; ++y) {
      const std::vector<double> gv = priors[y].fwd.jac->transpose_times(priors[y].grad);
      for (std::size_t k = 0; k < K; ++k) grad->prior_logit(static_cast<int>(y), k) += gv[k];
    }
    for (std::size_t i = 0; i < grad->parameter_count(); ++i) grad->parameter(i) /= n;
  }
  return sum / n;
}

std::vector<std::size_t> assign_modes(const MixtureModel& model, const SyntheticDataset& data) {
  std::vector<std::size_t> out(model.classes());
  std::vector<std::uint8_t> bits(model.bits());
  for (std::size_t k = 0; k < model.classes(); ++k) {
    for (std::size_t d = 0; d < model.bits(); ++d) bits[d] = model.decoder_logit(k, d) >= 0.0;
    std::size_t best = 0, best_dist = model.bits() + 1;
    for (std::size_t m = 0; m < data.prototypes.size(); ++m) {
      const std::size_t dist = hamming(bits, data.prototypes[m]);
      if (dist < best_dist) {
        best = m;
        best_dist = dist;
      }
    }
    out[k] = best;
  }
  return out;
}

}  // namespace

SyntheticDataset gen_dataset(const DatasetConfig& config) {
  const std::size_t M = config.prototypes;
  const std::size_t D = config.bits;
  if (M < 2 || M % 2 != 0) throw ConfigError("prototype count must be even and at least 2");
  if (D == 0) throw ConfigError("prototypes need at least one bit");
  if (config.samples == 0) throw ConfigError("dataset needs at least one sample");
  if (!(config.noise_rate >= 0.0 && config.noise_rate < 0.5)) {
    throw ConfigError("noise rate must lie in [0, 0.5)");
  }
  const std::size_t separation = config.min_separation == 0 ? D / 4 : config.min_separation;

  RngStream rng = RngStream::split(config.seed, 0);
  SyntheticDataset data;
  data.noise_rate = config.noise_rate;
  data.seed = config.seed;

  std::size_t attempts = 0;
  while (data.prototypes.size() < M) {
    if (attempts++ >= config.max_attempts) {
      throw ConfigError("could not place " + std::to_string(M) + " prototypes at separation " +
                        std::to_string(separation));
    }
    std::vector<std::uint8_t> candidate(D);
    for (auto& b : candidate) b = static_cast<std::uint8_t>(rng.below(2));
    const bool separated =
        std::all_of(data.prototypes.begin(), data.prototypes.end(),
                    [&](const auto& p) { return hamming(p, candidate) >= separation; });
    if (separated) data.prototypes.push_back(std::move(candidate));
  }

  std::vector<std::size_t> labels(config.samples);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = i % M;
  rng.shuffle(labels);

  data.samples.reserve(config.samples);
  for (std::size_t label : labels) {
    Sample s;
    s.prototype = label;
    s.query = static_cast<int>(label % 2);
    s.x = data.prototypes[label];
    for (auto& b : s.x) {
      if (rng.bernoulli(config.noise_rate)) b ^= 1U;
    }
    data.samples.push_back(std::move(s));
  }
  return data;
}

std::size_t hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw ShapeError("hamming distance needs equal lengths");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] != b[i]);
  return n;
}

MixtureModel::MixtureModel(std::size_t classes, std::size_t bits)
    : classes_(classes),
      bits_(bits),
      prior_(kQueries * classes, 0.0),
      encoder_((bits + kQueries) * classes, 0.0),
      decoder_(classes * bits, 0.0) {
  if (classes == 0 || bits == 0) throw ShapeError("model needs K >= 1 and D >= 1");
}

MixtureModel MixtureModel::random(std::size_t classes, std::size_t bits, RngStream& rng,
                                  double scale) {
  MixtureModel m(classes, bits);
  for (std::size_t i = 0; i < m.parameter_count(); ++i) m.parameter(i) = scale * rng.normal();
  return m;
}

LogitVector MixtureModel::prior_logits(int query) const {
  return LogitVector(std::vector<double>(prior_.begin() + query * classes_,
                                         prior_.begin() + (query + 1) * classes_));
}

LogitVector MixtureModel::encoder_logits(std::span<const std::uint8_t> x, int query) const {
  if (x.size() != bits_) throw ShapeError("input has the wrong number of bits");
  std::vector<double> u(encoder_.begin() + (bits_ + query) * classes_,
                        encoder_.begin() + (bits_ + query + 1) * classes_);
  for (std::size_t d = 0; d < bits_; ++d) {
    if (!x[d]) continue;
    for (std::size_t k = 0; k < classes_; ++k) u[k] += encoder_[d * classes_ + k];
  }
  return LogitVector(std::move(u));
}

std::size_t MixtureModel::parameter_count() const {
  return prior_.size() + encoder_.size() + decoder_.size();
}

double& MixtureModel::parameter(std::size_t i) {
  if (i < prior_.size()) return prior_[i];
  i -= prior_.size();
  if (i < encoder_.size()) return encoder_[i];
  return decoder_.at(i - encoder_.size());
}

double MixtureModel::parameter(std::size_t i) const {
  return const_cast<MixtureModel*>(this)->parameter(i);
}

void MixtureModel::add_scaled(const MixtureModel& other, double scale) {
  if (other.classes_ != classes_ || other.bits_ != bits_) throw ShapeError("model shapes differ");
  for (std::size_t i = 0; i < prior_.size(); ++i) prior_[i] += scale * other.prior_[i];
  for (std::size_t i = 0; i < encoder_.size(); ++i) encoder_[i] += scale * other.encoder_[i];
  for (std::size_t i = 0; i < decoder_.size(); ++i) decoder_[i] += scale * other.decoder_[i];
}

double MixtureModel::squared_norm() const {
  double s = 0.0;
  for (std::size_t i = 0; i < parameter_count(); ++i) s += parameter(i) * parameter(i);
  return s;
}

double elbo(const MixtureModel& model, std::span<const Sample> batch, NormalizerKind normalizer,
            Epsilon eps) {
  return accumulate(model, batch, normalizer, eps, nullptr);
}

ModelGradient elbo_grad(const MixtureModel& model, std::span<const Sample> batch,
                        NormalizerKind normalizer, Epsilon eps, double* elbo_out) {
  ModelGradient g(model.classes(), model.bits());
  const double value = accumulate(model, batch, normalizer, eps, &g);
  if (elbo_out != nullptr) *elbo_out = value;
  return g;
}

std::string_view to_string(ModelInit init) {
  return init == ModelInit::kRandom ? "random" : "seeded";
}

std::optional<ModelInit> parse_model_init(std::string_view name) {
  if (name == "random") return ModelInit::kRandom;
  if (name == "seeded") return ModelInit::kSeeded;
  return std::nullopt;
}

MixtureModel seeded_init(const SyntheticDataset& dataset, std::size_t classes, RngStream& rng,
                         double decoder_scale, double jitter) {
  const std::size_t D = dataset.bits();
  if (dataset.samples.empty()) throw ConfigError("dataset is empty");
  MixtureModel model(classes, D);

  // Distinct patterns in order of first appearance, with their counts.
  std::map<std::vector<std::uint8_t>, std::size_t> index;
  std::vector<const std::vector<std::uint8_t>*> patterns;
  std::vector<double> counts;
  for (const Sample& s : dataset.samples) {
    const auto [it, fresh] = index.try_emplace(s.x, patterns.size());
    if (fresh) {
      patterns.push_back(&it->first);
      counts.push_back(0.0);
    }
    counts[it->second] += 1.0;
  }

  // Score = count * distance to the nearest chosen center; before the first
  // pick every distance counts as D.
  std::vector<double> nearest(patterns.size(), static_cast<double>(D));
  for (std::size_t k = 0; k < classes; ++k) {
    std::size_t pick = 0;
    for (std::size_t i = 1; i < patterns.size(); ++i) {
      if (counts[i] * nearest[i] > counts[pick] * nearest[pick]) pick = i;
    }
    const auto& x = *patterns[pick];
    for (std::size_t d = 0; d < D; ++d) {
      model.decoder_logit(k, d) = (x[d] ? decoder_scale : -decoder_scale) + jitter * rng.normal();
    }
    for (std::size_t i = 0; i < patterns.size(); ++i) {
      nearest[i] = std::min(nearest[i], static_cast<double>(hamming(*patterns[i], x)));
    }
  }

  // Encoder logits then equal log p(x | z = k) for every x and either query.
  for (std::size_t k = 0; k < classes; ++k) {
    double log_norm = 0.0;
    for (std::size_t d = 0; d < D; ++d) {
      model.encoder_weight(d, k) = model.decoder_logit(k, d);
      log_norm += softplus(model.decoder_logit(k, d));
    }
    for (std::size_t y = 0; y < kQueries; ++y) model.encoder_weight(D + y, k) = -log_norm;
  }
  for (double& r : model.prior_block()) r = jitter * rng.normal();
  return model;
}

void TrainConfig::validate() const {
  if (steps == 0) throw ConfigError("steps must be positive");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be positive and finite");
  }
  if (classes == 0) throw ConfigError("classes must be positive");
  if (record_every == 0) throw ConfigError("record_every must be positive");
  if (!(init_scale >= 0.0) || !std::isfinite(init_scale)) {
    throw ConfigError("init_scale must be nonnegative and finite");
  }
  if (!(decoder_scale > 0.0) || !std::isfinite(decoder_scale)) {
    throw ConfigError("decoder_scale must be positive and finite");
  }
}

TrainResult train(const SyntheticDataset& dataset, const TrainConfig& config) {
  config.validate();
  if (dataset.samples.empty()) throw ConfigError("dataset is empty");
  const std::size_t N = dataset.size();
  const std::size_t batch = std::min(config.batch_size, N);

  RngStream rng = RngStream::split(config.seed, 1);
  MixtureModel model =
      config.init == ModelInit::kRandom
          ? MixtureModel::random(config.classes, dataset.bits(), rng, config.init_scale)
          : seeded_init(dataset, config.classes, rng, config.decoder_scale, config.init_scale);

  std::vector<double> curve;
  std::vector<std::size_t> curve_steps;
  std::vector<Sample> wrapped;
  for (std::size_t step = 0; step < config.steps; ++step) {
    std::span<const Sample> slice(dataset.samples);
    if (batch < N) {
      const std::size_t start = (step * batch) % N;
      if (start + batch <= N) {
        slice = slice.subspan(start, batch);
      } else {
        wrapped.assign(dataset.samples.begin() + start, dataset.samples.end());
        wrapped.insert(wrapped.end(), dataset.samples.begin(),
                       dataset.samples.begin() + (start + batch - N));
        slice = wrapped;
      }
    }
    double value = 0.0;
    const ModelGradient g = elbo_grad(model, slice, config.normalizer, config.eps, &value);
    if (!std::isfinite(value)) {
      throw DivergenceError("ELBO became non-finite at step " + std::to_string(step));
    }
    if (step % config.record_every == 0) {
      curve.push_back(value);
      curve_steps.push_back(step);
    }
    model.add_scaled(g, config.learning_rate);
    if (!std::isfinite(model.squared_norm())) {
      throw DivergenceError("parameters became non-finite at step " + std::to_string(step));
    }
  }
  const double final_value = elbo(model, dataset.samples, config.normalizer, config.eps);
  if (!std::isfinite(final_value)) throw DivergenceError("final ELBO is non-finite");
  curve.push_back(final_value);
  curve_steps.push_back(config.steps);

  BenchMetrics metrics = evaluate(model, dataset, config.normalizer);
  metrics.elbo_curve = std::move(curve);
  metrics.elbo_steps = std::move(curve_steps);
  metrics.final_elbo = final_value;
  return {std::move(model), std::move(metrics)};
}

BenchMetrics evaluate(const MixtureModel& model, const SyntheticDataset& dataset,
                      NormalizerKind normalizer) {
  if (model.bits() != dataset.bits()) throw ShapeError("model and dataset bit counts differ");
  const std::size_t M = dataset.prototypes.size();
  BenchMetrics out;
  out.mode_assignment = assign_modes(model, dataset);

  for (std::size_t y = 0; y < kQueries; ++y) {
    const Distribution prior = normalize(normalizer, model.prior_logits(static_cast<int>(y)));
    std::vector<double> pushed(M, 0.0), truth(M, 0.0);
    for (std::size_t k = 0; k < model.classes(); ++k) pushed[out.mode_assignment[k]] += prior[k];
    for (std::size_t m = y; m < M; m += 2) truth[m] = 1.0;
    const Distribution p = Distribution::from_weights(pushed);
    const Distribution t = Distribution::from_weights(truth);

    out.prior_tv_per_query.push_back(tv_distance(p, t));
    out.prior_w1_per_query.push_back(w1_line(p, t));
    out.prior_support_size.push_back(prior.support_size());

    std::vector<bool> hit(M, false);
    bool recovered = prior.support_size() == M / 2;
    for (std::size_t k = 0; k < model.classes() && recovered; ++k) {
      if (!prior.support[k]) continue;
      const std::size_t m = out.mode_assignment[k];
      if (m % 2 != y || hit[m]) recovered = false;
      hit[m] = true;
    }
    out.modes_recovered.push_back(recovered);
    out.prior.push_back(prior.probs);
  }
  out.prior_tv = 0.5 * (out.prior_tv_per_query[0] + out.prior_tv_per_query[1]);
  out.prior_w1 = 0.5 * (out.prior_w1_per_query[0] + out.prior_w1_per_query[1]);
  return out;
}

std::vector<CompareRow> compare(const SyntheticDataset& dataset,
                                std::span<const TrainConfig> configs) {
  for (const TrainConfig& c : configs) c.validate();
  std::vector<std::future<BenchMetrics>> runs;
  runs.reserve(configs.size());
  for (const TrainConfig& c : configs) {
    runs.push_back(std::async(std::launch::async, [&dataset, c] {
      try {
        return train(dataset, c).metrics;
      } catch (const DivergenceError& e) {
        throw DivergenceError("run " + std::string(to_string(c.normalizer)) + ": " + e.what());
      }
    }));
  }
  std::vector<CompareRow> rows;
  rows.reserve(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) rows.push_back({configs[i], runs[i].get()});
  return rows;
}

}  // namespace sparsenorm::mixture
