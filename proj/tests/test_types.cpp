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
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "sparsenorm/errors.hpp"
#include "sparsenorm/rng.hpp"
#include "sparsenorm/types.hpp"

namespace sn = sparsenorm;

TEST_CASE("LogitVector mean and max") {
  sn::LogitVector v{0.4, 1.4, -0.8};
  CHECK(v.size() == 3);
  CHECK(v.max() == 1.4);
  CHECK(v.mean() == doctest::Approx(1.0 / 3).epsilon(1e-15));
  // The mean never exceeds the largest entry, even with rounding.
  sn::LogitVector flat{0.1, 0.1, 0.1};
  CHECK(flat.mean() <= flat.max());
}

TEST_CASE("Distribution constructors") {
  std::vector<double> w{1, 0, 3};
  auto d = sn::Distribution::from_weights(w);
  CHECK(d[0] == 0.25);
  CHECK(d[2] == 0.75);
  CHECK(d.support_size() == 2);
  CHECK_FALSE(d.support[1]);
  CHECK(sn::is_valid(d));

  auto u = sn::Distribution::uniform(4);
  CHECK(u.support_size() == 4);
  CHECK(u[3] == 0.25);

  auto o = sn::Distribution::one_hot(5, 2);
  CHECK(o[2] == 1.0);
  CHECK(o.support_size() == 1);

  std::vector<double> zero{0, 0};
  CHECK_THROWS_AS(sn::Distribution::from_weights(zero), sn::InvalidInput);
  std::vector<double> neg{1, -1, 1};
  CHECK_THROWS_AS(sn::Distribution::from_weights(neg), sn::InvalidInput);
}

TEST_CASE("is_valid catches broken invariants") {
  sn::Distribution d{{0.5, 0.6}, {true, true}};
  CHECK_FALSE(sn::is_valid(d));
  sn::Distribution mask{{0.5, 0.5}, {true, false}};
  CHECK_FALSE(sn::is_valid(mask));
  sn::Distribution nan{{std::nan(""), 1.0}, {true, true}};
  CHECK_FALSE(sn::is_valid(nan));
}

TEST_CASE("Jacobian helpers") {
  sn::Jacobian j(2);
  j(0, 0) = 1;
  j(0, 1) = 2;
  j(1, 0) = 3;
  j(1, 1) = 4;
  CHECK(j.row_sum(1) == 7);
  std::vector<double> g{1, 1};
  auto t = j.transpose_times(g);
  CHECK(t[0] == 4);
  CHECK(t[1] == 6);
}

TEST_CASE("property: ordered_sum ignores input order") {
  sn::RngStream rng(3);
  for (int t = 0; t < 500; ++t) {
    auto v = rng.normal_vector(1 + rng.below(20), 1e3);
    double s = sn::ordered_sum(v);
    rng.shuffle(v);
    CHECK(sn::ordered_sum(v) == s);
  }
}
