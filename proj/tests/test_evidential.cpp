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


#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include <doctest.h>

#include "sparsenorm/errors.hpp"
#include "sparsenorm/evidential.hpp"
#include "sparsenorm/normalize.hpp"
#include "sparsenorm/rng.hpp"

namespace sn = sparsenorm;
namespace ev = sparsenorm::evidential;

namespace {

ev::LinearLayer identity_layer(std::size_t k) {
  std::vector<double> w(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) w[i * k + i] = 1.0;
  return ev::LinearLayer(k, k, w, std::vector<double>(k, 0.0));
}

using SparseMass = std::map<std::uint32_t, double>;

// Independent Dempster combination over sparse focal sets.
SparseMass combine(const SparseMass& a, const SparseMass& b) {
  SparseMass out;
  double conflict = 0;
  for (auto [x, mx] : a) {
    for (auto [y, my] : b) {
      std::uint32_t z = x & y;
      if (z == 0) {
        conflict += mx * my;
      } else {
        out[z] += mx * my;
      }
    }
  }
  for (auto& [s, m] : out) m /= 1 - conflict;
  return out;
}

// Fuses the 2K simple masses built straight from the weights.
SparseMass brute_force(const std::vector<double>& w) {
  const std::uint32_t full = (1u << w.size()) - 1;
  SparseMass m{{full, 1.0}};
  for (std::size_t k = 0; k < w.size(); ++k) {
    double plus = std::max(0.0, w[k]), minus = std::max(0.0, -w[k]);
    std::uint32_t single = 1u << k;
    m = combine(m, {{single, -std::expm1(-plus)}, {full, std::exp(-plus)}});
    m = combine(m, {{full & ~single, -std::expm1(-minus)}, {full, std::exp(-minus)}});
  }
  return m;
}

std::vector<double> centered(std::vector<double> w) {
  double mean = 0;
  for (double x : w) mean += x;
  mean /= w.size();
  for (auto& x : w) x -= mean;
  return w;
}

}  // namespace

TEST_CASE("evidential weights examples") {
  std::vector<double> phi{0.4, 1.4, -0.8};
  auto ew = ev::evidential_weights(phi, identity_layer(3));
  CHECK(ew.w[0] == doctest::Approx(0.0667).epsilon(1e-3));
  CHECK(ew.w[1] == doctest::Approx(1.0667).epsilon(1e-4));
  CHECK(ew.w[2] == doctest::Approx(-1.1333).epsilon(1e-4));
  CHECK(ew.w_plus[2] == 0.0);
  CHECK(ew.w_minus[2] == doctest::Approx(1.1333).epsilon(1e-4));

  ev::LinearLayer flat(2, 3, std::vector<double>(6, 0.0), {4.0, 4.0, 4.0});
  std::vector<double> any{3.0, -2.0};
  auto zero = ev::evidential_weights(any, flat);
  for (double x : zero.w) CHECK(x == 0.0);

  CHECK_THROWS_AS(ev::evidential_weights(any, identity_layer(3)), sn::ShapeError);
}

TEST_CASE("property: evidential weights sum to zero") {
  sn::RngStream rng(31);
  for (int t = 0; t < 500; ++t) {
    std::size_t j = 1 + rng.below(6), k = 1 + rng.below(10);
    ev::LinearLayer layer(j, k, rng.normal_vector(j * k), rng.normal_vector(k));
    auto ew = ev::evidential_weights(rng.normal_vector(j), layer);
    double s = 0, scale = 0;
    for (double x : ew.w) {
      s += x;
      scale += std::fabs(x);
    }
    CHECK(std::fabs(s) <= 1e-12 * (1 + scale));
  }
}

TEST_CASE("singleton mass examples") {
  auto a = ev::singleton_masses(ev::EvidentialWeights::from_weights({1, -0.5, -0.5}));
  CHECK(a[1] == 0.0);
  CHECK(a[2] == 0.0);
  double expected = std::exp(1.0) - 1 + std::pow(1 - std::exp(-0.5), 2);
  CHECK(a[0] == doctest::Approx(expected).epsilon(1e-14));

  auto z = ev::singleton_masses(ev::EvidentialWeights::from_weights({0, 0, 0}));
  for (double m : z) CHECK(m == 0.0);

  auto b = ev::singleton_masses(ev::EvidentialWeights::from_weights({2, -1, -1}));
  CHECK(b[0] > 0.0);
  CHECK(b[1] == 0.0);
  CHECK(b[2] == 0.0);
}

TEST_CASE("subset mass examples") {
  auto a = ev::EvidentialWeights::from_weights({1, -0.5, -0.5});
  CHECK(ev::subset_mass(a, 0b110) == 0.0);
  auto b = ev::EvidentialWeights::from_weights({-1, -1, 2});
  CHECK(ev::subset_mass(b, 0b011) == 0.0);
  auto z = ev::EvidentialWeights::from_weights({0, 0, 0});
  auto cf = ev::closed_form_masses(z);
  CHECK(cf[0b111] == doctest::Approx(1.0));
  CHECK_THROWS_AS(ev::subset_mass(a, 0b001), sn::SubsetError);
  CHECK_THROWS_AS(ev::subset_mass(a, 0), sn::SubsetError);
  CHECK_THROWS_AS(ev::subset_mass(a, 0b1001), sn::SubsetError);
}

TEST_CASE("Dempster's rule basics") {
  auto m = ev::MassFunction::simple(3, 0b011, 0.6);
  auto v = ev::MassFunction::vacuous(3);
  auto c = ev::dempster_combine(m, v);
  for (ev::Subset s = 0; s < 8; ++s) CHECK(c[s] == doctest::Approx(m[s]));

  auto x = ev::MassFunction::simple(2, 0b01, 1.0);
  auto y = ev::MassFunction::simple(2, 0b10, 1.0);
  CHECK_THROWS_AS(ev::dempster_combine(x, y), sn::TotalConflictError);

  auto p = ev::MassFunction::simple(2, 0b01, 0.5);
  auto q = ev::MassFunction::simple(2, 0b10, 0.5);
  auto r = ev::dempster_combine_with_conflict(p, q);
  CHECK(r.conflict == doctest::Approx(0.25));
  CHECK(r.mass[0b01] == doctest::Approx(1.0 / 3));
  CHECK(r.mass[0b11] == doctest::Approx(1.0 / 3));

  CHECK_THROWS_AS(ev::dempster_combine(p, ev::MassFunction::vacuous(3)), sn::ShapeError);
  CHECK_THROWS_AS(ev::MassFunction::from_masses(2, {0.1, 0.4, 0.5, 0.0}), sn::InvalidInput);
}

TEST_CASE("property: Dempster's rule is commutative and associative") {
  sn::RngStream rng(32);
  for (int t = 0; t < 200; ++t) {
    auto rand_simple = [&] {
      return ev::MassFunction::simple(4, static_cast<ev::Subset>(1 + rng.below(15)), 0.9 * rng.uniform());
    };
    auto a = rand_simple(), b = rand_simple(), c = rand_simple();
    auto ab = ev::dempster_combine(a, b), ba = ev::dempster_combine(b, a);
    auto l = ev::dempster_combine(ab, c);
    auto r = ev::dempster_combine(a, ev::dempster_combine(b, c));
    for (ev::Subset s = 0; s < 16; ++s) {
      CHECK(std::fabs(ab[s] - ba[s]) <= 1e-14);
      CHECK(std::fabs(l[s] - r[s]) <= 1e-12);
    }
  }
}

TEST_CASE("closed-form masses match an independent lattice combination") {
  sn::RngStream rng(33);
  for (std::size_t k = 2; k <= 6; ++k) {
    for (int t = 0; t < 50; ++t) {
      auto w = centered(rng.normal_vector(k, 1.5));
      auto cf = ev::closed_form_masses(ev::EvidentialWeights::from_weights(w));
      auto bf = brute_force(w);
      CHECK(cf[0] == 0.0);
      for (std::uint32_t s = 1; s < (1u << k); ++s) {
        double ref = bf.count(s) ? bf[s] : 0.0;
        CHECK(std::fabs(cf[s] - ref) <= 1e-10 * std::max(1e-300, std::fabs(ref)) + 1e-15);
      }
    }
  }
}

TEST_CASE("library lattice combination agrees with the independent one") {
  sn::RngStream rng(34);
  for (int t = 0; t < 30; ++t) {
    auto w = centered(rng.normal_vector(4, 1.5));
    auto fused = ev::fused_mass(ev::EvidentialWeights::from_weights(w));
    auto bf = brute_force(w);
    for (ev::Subset s = 1; s < 16; ++s) {
      double ref = bf.count(s) ? bf[s] : 0.0;
      CHECK(fused[s] == doctest::Approx(ref).epsilon(1e-10));
    }
  }
}

TEST_CASE("posthoc filter examples") {
  std::vector<double> phi{0.4, 1.4, -0.8};
  auto p = ev::posthoc_filter(phi, identity_layer(3));
  CHECK(p[0] == doctest::Approx(0.27).epsilon(0.01));
  CHECK(p[1] == doctest::Approx(0.73).epsilon(0.01));
  CHECK(p[2] == 0.0);

  ev::LinearLayer flat(2, 4, std::vector<double>(8, 0.0), {1, 1, 1, 1});
  std::vector<double> any{0.3, 9.0};
  auto u = ev::posthoc_filter(any, flat);
  for (std::size_t k = 0; k < 4; ++k) CHECK(u[k] == 0.25);
}

TEST_CASE("property: posthoc filter equals ev_softmax of the raw scores") {
  sn::RngStream rng(35);
  for (int t = 0; t < 2000; ++t) {
    std::size_t j = 1 + rng.below(8), k = 1 + rng.below(10);
    ev::LinearLayer layer(j, k, rng.normal_vector(j * k), rng.normal_vector(k));
    auto phi = rng.normal_vector(j);
    auto a = ev::posthoc_filter(phi, layer);
    auto b = sn::ev_softmax(sn::LogitVector(layer.scores(phi)));
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(std::fabs(a[i] - b[i]) <= 1e-12);
      CHECK(a.support[i] == b.support[i]);
    }
  }
}
