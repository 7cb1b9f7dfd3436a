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
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "sparsenorm/rng.hpp"

namespace sn = sparsenorm;

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// Straight transcription of the reference xoshiro256++ step.
struct RefXoshiro {
  std::array<std::uint64_t, 4> s;
  std::uint64_t next() {
    const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    const std::uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }
};

}  // namespace

TEST_CASE("xoshiro256++ reference output") {
  auto rng = sn::RngStream::from_state({1, 2, 3, 4});
  CHECK(rng.next_u64() == 41943041u);
  RefXoshiro ref{{1, 2, 3, 4}};
  ref.next();
  for (int i = 0; i < 1000; ++i) CHECK(rng.next_u64() == ref.next());
}

TEST_CASE("equal seeds give equal streams") {
  sn::RngStream a(123), b(123);
  bool same = true;
  for (int i = 0; i < 1000000; ++i) same = same && (a.next_u64() == b.next_u64());
  CHECK(same);
  sn::RngStream c(124);
  sn::RngStream d(123);
  CHECK(c.next_u64() != d.next_u64());
}

TEST_CASE("split streams are deterministic and distinct") {
  auto a = sn::RngStream::split(42, 0);
  auto b = sn::RngStream::split(42, 0);
  auto c = sn::RngStream::split(42, 1);
  auto x = a.next_u64();
  CHECK(x == b.next_u64());
  CHECK(x != c.next_u64());
}

TEST_CASE("distribution helpers") {
  sn::RngStream rng(7);
  double sum = 0, sq = 0;
  bool in_range = true;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    double u = rng.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(in_range);
  // Five standard errors.
  CHECK(std::fabs(sum / n) < 5 / std::sqrt(n));
  CHECK(std::fabs(sq / n - 1) < 5 * std::sqrt(2.0 / n));

  std::array<int, 7> counts{};
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
}

TEST_CASE("shuffle is a permutation") {
  sn::RngStream rng(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(v);
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
