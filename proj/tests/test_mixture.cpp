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


#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "sparsenorm/errors.hpp"
#include "sparsenorm/mixture.hpp"
#include "sparsenorm/normalize.hpp"
#include "sparsenorm/rng.hpp"

namespace sn = sparsenorm;
namespace mx = sparsenorm::mixture;
using sn::NormalizerKind;

namespace {

constexpr NormalizerKind kAllKinds[] = {NormalizerKind::kSoftmax, NormalizerKind::kEvSoftmax,
                                        NormalizerKind::kSparsemax, NormalizerKind::kEntmax15};

// Full-K enumeration of the bound for one sample, written from scratch:
// sum_k q_k log p(x | k) - KL(q || (r + eps) / sum(r + eps)).
double enumerate_elbo(const mx::MixtureModel& m, const mx::Sample& s, NormalizerKind kind,
                      double eps) {
  const std::size_t K = m.classes(), D = m.bits();
  std::vector<double> enc(K), pri(K);
  for (std::size_t k = 0; k < K; ++k) {
    enc[k] = m.encoder_weight(D + s.query, k);
    for (std::size_t d = 0; d < D; ++d) enc[k] += s.x[d] * m.encoder_weight(d, k);
    pri[k] = m.prior_logit(s.query, k);
  }
  auto q = sn::normalize_train(kind, sn::LogitVector(enc), sn::Epsilon(eps));
  auto r = sn::normalize_train(kind, sn::LogitVector(pri), sn::Epsilon(eps));
  double total = 0;
  for (std::size_t k = 0; k < K; ++k) total += r[k] + eps;
  double out = 0;
  for (std::size_t k = 0; k < K; ++k) {
    if (q[k] == 0.0) continue;
    double ll = 0;
    for (std::size_t d = 0; d < D; ++d) {
      double p1 = 1 / (1 + std::exp(-m.decoder_logit(k, d)));
      ll += s.x[d] ? std::log(p1) : std::log1p(-p1);
    }
    out += q[k] * ll - q[k] * std::log(q[k] / ((r[k] + eps) / total));
  }
  return out;
}

double enumerate_mean(const mx::MixtureModel& m, const std::vector<mx::Sample>& batch,
                      NormalizerKind kind, double eps) {
  double s = 0;
  for (const auto& x : batch) s += enumerate_elbo(m, x, kind, eps);
  return s / batch.size();
}

mx::SyntheticDataset small_dataset(std::size_t prototypes, std::size_t bits, std::size_t samples,
                                   std::uint64_t seed = 5) {
  mx::DatasetConfig c;
  c.prototypes = prototypes;
  c.bits = bits;
  c.samples = samples;
  c.seed = seed;
  return mx::gen_dataset(c);
}

// Decoder rows at +-5 on the prototype bits.
mx::MixtureModel oracle_model(const mx::SyntheticDataset& data) {
  const std::size_t M = data.prototypes.size(), D = data.bits();
  mx::MixtureModel m(M, D);
  for (std::size_t k = 0; k < M; ++k)
    for (std::size_t d = 0; d < D; ++d) m.decoder_logit(k, d) = data.prototypes[k][d] ? 5.0 : -5.0;
  return m;
}

double slope(const std::vector<std::size_t>& xs, const std::vector<double>& ys) {
  double mx_ = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx_ += xs[i];
    my += ys[i];
  }
  mx_ /= xs.size();
  my /= ys.size();
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - mx_) * (ys[i] - my);
    den += (xs[i] - mx_) * (xs[i] - mx_);
  }
  return num / den;
}

}  // namespace

TEST_CASE("dataset generation") {
  mx::DatasetConfig c;
  c.noise_rate = 0.0;
  c.samples = 500;
  auto clean = mx::gen_dataset(c);
  CHECK(clean.size() == 500);
  CHECK(clean.prototypes.size() == 10);
  for (const auto& s : clean.samples) {
    CHECK(s.x == clean.prototypes[s.prototype]);
    CHECK(s.query == static_cast<int>(s.prototype % 2));
  }
  for (std::size_t a = 0; a < 10; ++a)
    for (std::size_t b = a + 1; b < 10; ++b)
      CHECK(mx::hamming(clean.prototypes[a], clean.prototypes[b]) >= 4);

  auto again = mx::gen_dataset(c);
  CHECK(again.prototypes == clean.prototypes);
  bool same = true;
  for (std::size_t i = 0; i < 500; ++i) same = same && again.samples[i].x == clean.samples[i].x;
  CHECK(same);
}

TEST_CASE("noise rate matches the configured flip probability") {
  mx::DatasetConfig c;
  c.samples = 10000;
  auto data = mx::gen_dataset(c);
  std::size_t flips = 0;
  for (const auto& s : data.samples) flips += mx::hamming(s.x, data.prototypes[s.prototype]);
  double rate = static_cast<double>(flips) / (10000.0 * 16);
  CHECK(rate == doctest::Approx(0.05).epsilon(0.1));
}

TEST_CASE("dataset configuration errors") {
  mx::DatasetConfig odd;
  odd.prototypes = 3;
  CHECK_THROWS_AS(mx::gen_dataset(odd), sn::ConfigError);
  mx::DatasetConfig noisy;
  noisy.noise_rate = 0.5;
  CHECK_THROWS_AS(mx::gen_dataset(noisy), sn::ConfigError);
  mx::DatasetConfig crowded;
  crowded.bits = 4;
  crowded.min_separation = 4;
  CHECK_THROWS_AS(mx::gen_dataset(crowded), sn::ConfigError);
}

TEST_CASE("flat decoder gives -D log 2 reconstruction") {
  auto data = small_dataset(2, 8, 20);
  mx::MixtureModel m(3, 8);
  // Encoder equal to the prior for every input, so the KL term vanishes
  // up to the eps smoothing.
  for (std::size_t k = 0; k < 3; ++k) {
    for (int y = 0; y < 2; ++y) {
      m.prior_logit(y, k) = 0.3 * k - y;
      m.encoder_weight(8 + y, k) = 0.3 * k - y;
    }
  }
  double v = mx::elbo(m, data.samples, NormalizerKind::kSoftmax, sn::Epsilon(1e-9));
  CHECK(v == doctest::Approx(-8 * std::log(2.0)).epsilon(1e-8));
}

TEST_CASE("bound matches hand enumeration for a K = 2 model") {
  mx::MixtureModel m(2, 3);
  const double enc[] = {0.7, -0.4, 1.1, 0.2, -0.3, 0.5, 0.9, -1.2, 0.1, 0.4};
  for (std::size_t i = 0; i < 10; ++i) m.encoder_block()[i] = enc[i];
  m.prior_block() = {0.2, -0.6, -0.1, 0.8};
  m.decoder_block() = {1.5, -0.5, 0.25, -2.0, 0.75, 1.0};
  mx::Sample s{{1, 0, 1}, 1, 1};
  std::vector<mx::Sample> batch{s};
  for (auto kind : kAllKinds) {
    CAPTURE(sn::to_string(kind));
    double lib = mx::elbo(m, batch, kind, sn::Epsilon(1e-6));
    CHECK(std::fabs(lib - enumerate_elbo(m, s, kind, 1e-6)) <= 1e-12);
  }
}

TEST_CASE("property: restricted marginalization equals full enumeration") {
  sn::RngStream rng(41);
  auto data = small_dataset(4, 6, 32);
  for (int t = 0; t < 20; ++t) {
    auto m = mx::MixtureModel::random(5, 6, rng, 1.0);
    for (auto kind : {NormalizerKind::kSoftmax, NormalizerKind::kEvSoftmax}) {
      double lib = mx::elbo(m, data.samples, kind, sn::Epsilon(1e-6));
      CHECK(std::fabs(lib - enumerate_mean(m, data.samples, kind, 1e-6)) <= 1e-12);
    }
  }
}

TEST_CASE("analytic gradient matches central differences") {
  auto data = small_dataset(4, 6, 64, 17);
  sn::RngStream rng(42);
  const double h = 1e-5;
  for (auto kind : kAllKinds) {
    CAPTURE(sn::to_string(kind));
    auto m = mx::MixtureModel::random(4, 6, rng, 1.0);
    auto g = mx::elbo_grad(m, data.samples, kind, sn::Epsilon(1e-6));
    double worst = 0;
    for (std::size_t i = 0; i < m.parameter_count(); ++i) {
      auto up = m, dn = m;
      up.parameter(i) += h;
      dn.parameter(i) -= h;
      double fd = (mx::elbo(up, data.samples, kind, sn::Epsilon(1e-6)) -
                   mx::elbo(dn, data.samples, kind, sn::Epsilon(1e-6))) /
                  (2 * h);
      double scale = std::max({std::fabs(fd), std::fabs(g.parameter(i)), 1e-3});
      worst = std::max(worst, std::fabs(fd - g.parameter(i)) / scale);
    }
    CHECK(worst <= 1e-5);
  }
}

TEST_CASE("property: prior gradient rows sum to zero") {
  sn::RngStream rng(43);
  auto data = small_dataset(4, 6, 40);
  for (int t = 0; t < 10; ++t) {
    auto m = mx::MixtureModel::random(6, 6, rng, 1.0);
    for (auto kind : kAllKinds) {
      auto g = mx::elbo_grad(m, data.samples, kind, sn::Epsilon(1e-6));
      for (int y = 0; y < 2; ++y) {
        double s = 0;
        for (std::size_t k = 0; k < 6; ++k) s += g.prior_logit(y, k);
        CHECK(std::fabs(s) <= 1e-10);
      }
    }
  }
}

TEST_CASE("zero learning signal at the optimum") {
  mx::MixtureModel m(3, 4);
  const std::uint8_t bits[] = {1, 0, 0, 1};
  for (std::size_t k = 0; k < 3; ++k)
    for (std::size_t d = 0; d < 4; ++d) m.decoder_logit(k, d) = (k == 1) == (bits[d] == 1) ? 40 : -40;
  m.encoder_weight(4, 1) = 10;  // query 0 routes to class 1
  m.prior_logit(0, 1) = 10;
  mx::Sample s{{1, 0, 0, 1}, 0, 0};
  std::vector<mx::Sample> batch{s};
  auto g = mx::elbo_grad(m, batch, NormalizerKind::kSparsemax, sn::Epsilon(1e-6));
  CHECK(std::sqrt(g.squared_norm()) <= 1e-8);
}

TEST_CASE("gradient block shapes and value output") {
  auto data = small_dataset(2, 5, 10);
  sn::RngStream rng(44);
  auto m = mx::MixtureModel::random(3, 5, rng, 0.5);
  double v = 0;
  auto g = mx::elbo_grad(m, data.samples, NormalizerKind::kEntmax15, sn::Epsilon(1e-6), &v);
  CHECK(v == mx::elbo(m, data.samples, NormalizerKind::kEntmax15, sn::Epsilon(1e-6)));
  CHECK(g.parameter_count() == 2 * 3 + 7 * 3 + 3 * 5);
  mx::Sample bad{{1, 0}, 0, 0};
  std::vector<mx::Sample> b{bad};
  CHECK_THROWS_AS(mx::elbo(m, b, NormalizerKind::kSoftmax, sn::Epsilon(1e-6)), sn::ShapeError);
}

TEST_CASE("evaluate examples") {
  mx::DatasetConfig c;
  c.samples = 50;
  auto data = mx::gen_dataset(c);
  auto m = oracle_model(data);
  for (std::size_t k = 0; k < 10; ++k) {
    m.prior_logit(0, k) = k % 2 == 0 ? 1.0 : -1.0;
    m.prior_logit(1, k) = k % 2 == 1 ? 1.0 : -1.0;
  }
  auto good = mx::evaluate(m, data, NormalizerKind::kEvSoftmax);
  for (std::size_t k = 0; k < 10; ++k) CHECK(good.mode_assignment[k] == k);
  CHECK(good.prior_tv == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(good.prior_w1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(good.prior_support_size == std::vector<std::size_t>{5, 5});
  CHECK(good.modes_recovered == std::vector<bool>{true, true});

  auto soft = mx::evaluate(m, data, NormalizerKind::kSoftmax);
  CHECK(soft.prior_support_size == std::vector<std::size_t>{10, 10});
  CHECK(soft.modes_recovered == std::vector<bool>{false, false});

  for (std::size_t k = 0; k < 10; ++k) {
    m.prior_logit(0, k) = k == 0 ? 5.0 : 0.0;
    m.prior_logit(1, k) = k == 1 ? 5.0 : 0.0;
  }
  auto collapsed = mx::evaluate(m, data, NormalizerKind::kSparsemax);
  CHECK(collapsed.prior_support_size == std::vector<std::size_t>{1, 1});
  CHECK(collapsed.prior_tv == doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("train config validation") {
  mx::TrainConfig c;
  c.validate();
  auto bad = [](auto mutate) {
    mx::TrainConfig x;
    mutate(x);
    CHECK_THROWS_AS(x.validate(), sn::ConfigError);
  };
  bad([](mx::TrainConfig& x) { x.steps = 0; });
  bad([](mx::TrainConfig& x) { x.batch_size = 0; });
  bad([](mx::TrainConfig& x) { x.learning_rate = 0; });
  bad([](mx::TrainConfig& x) { x.learning_rate = -1; });
  bad([](mx::TrainConfig& x) { x.classes = 0; });
  bad([](mx::TrainConfig& x) { x.record_every = 0; });
  CHECK(mx::parse_model_init("seeded") == mx::ModelInit::kSeeded);
  CHECK(mx::parse_model_init("random") == mx::ModelInit::kRandom);
  CHECK_FALSE(mx::parse_model_init("zeros").has_value());
}

TEST_CASE("training is deterministic and does not diverge") {
  auto data = small_dataset(10, 16, 400, 8);
  mx::TrainConfig c;
  c.steps = 400;
  c.record_every = 10;
  auto a = mx::train(data, c);
  auto b = mx::train(data, c);
  CHECK(a.metrics.elbo_curve == b.metrics.elbo_curve);
  CHECK(a.model.prior_block() == b.model.prior_block());
  CHECK(a.metrics.elbo_steps.back() == 400);
  CHECK(a.metrics.elbo_steps.front() == 0);

  // Linear-fit slope over the last quarter of the recorded curve.
  const std::size_t n = a.metrics.elbo_curve.size();
  std::vector<std::size_t> xs(a.metrics.elbo_steps.begin() + 3 * n / 4, a.metrics.elbo_steps.end());
  std::vector<double> ys(a.metrics.elbo_curve.begin() + 3 * n / 4, a.metrics.elbo_curve.end());
  CHECK(slope(xs, ys) >= -1e-4);
  CHECK(a.metrics.final_elbo > a.metrics.elbo_curve.front());
}

TEST_CASE("test-time support sits inside the relaxed training mass") {
  auto data = small_dataset(10, 16, 400, 8);
  mx::TrainConfig c;
  c.steps = 200;
  auto r = mx::train(data, c);
  for (int y = 0; y < 2; ++y) {
    auto v = r.model.prior_logits(y);
    auto sparse = sn::ev_softmax(v);
    auto relaxed = sn::ev_softmax_train(v, c.eps);
    double lowest_in = 1, highest_out = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (sparse.support[k]) {
        lowest_in = std::min(lowest_in, relaxed[k]);
      } else {
        highest_out = std::max(highest_out, relaxed[k]);
      }
    }
    CHECK(lowest_in > highest_out);
  }
}

TEST_CASE("divergence is reported") {
  auto data = small_dataset(4, 8, 50);
  mx::TrainConfig c;
  c.classes = 4;
  c.steps = 50;
  c.learning_rate = 1e300;
  CHECK_THROWS_AS(mx::train(data, c), sn::DivergenceError);
}

TEST_CASE("compare runs each config on the shared dataset") {
  auto data = small_dataset(4, 8, 100);
  mx::TrainConfig c;
  c.classes = 4;
  c.steps = 20;
  std::vector<mx::TrainConfig> one{c};
  auto rows = mx::compare(data, one);
  CHECK(rows.size() == 1);

  std::vector<mx::TrainConfig> all;
  for (auto kind : kAllKinds) {
    c.normalizer = kind;
    all.push_back(c);
  }
  auto first = mx::compare(data, all);
  auto second = mx::compare(data, all);
  REQUIRE(first.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(first[i].config.normalizer == kAllKinds[i]);
    CHECK(first[i].metrics.elbo_curve == second[i].metrics.elbo_curve);
    CHECK(first[i].metrics.prior_tv == second[i].metrics.prior_tv);
  }
  CHECK(first[0].metrics.prior_support_size == std::vector<std::size_t>{4, 4});
}
