// Copyright 2026 The fedtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fedtwin/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

namespace fedtwin {
namespace {

TEST_CASE("identical seeds reproduce identical draw sequences") {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 1000; ++i) {
    CHECK(a.next_u64() == b.next_u64());
  }
}

TEST_CASE("uniform01 stays in [0,1) and fills the range") {
  Rng rng(7);
  double lo = 1.0;
  double hi = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = rng.uniform01();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("uniform_int is inclusive on both endpoints and in-range") {
  Rng rng(3);
  std::vector<int> counts(5, 0);
  for (int i = 0; i < 20000; ++i) {
    const int v = rng.uniform_int(2, 6);
    REQUIRE(v >= 2);
    REQUIRE(v <= 6);
    ++counts[v - 2];
  }
  for (int c : counts) CHECK(c > 3000);  // crude uniformity: expected 4000 each
}

TEST_CASE("shuffle produces a permutation and differs across seeds") {
  std::vector<int> base(50);
  std::iota(base.begin(), base.end(), 0);

  Rng r1(11);
  std::vector<int> v1 = base;
  r1.shuffle(v1);
  std::vector<int> sorted = v1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == base);

  Rng r2(12);
  std::vector<int> v2 = base;
  r2.shuffle(v2);
  CHECK(v1 != v2);
}

TEST_CASE("normal draws have approximately standard moments") {
  Rng rng(99);
  const int n = 100000;
  double sum = 0.0;
  double sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.03);
}

TEST_CASE("stream derivation separates purposes and frames") {
  Rng a = stream_rng(5, Stream::kChannel, 1);
  Rng b = stream_rng(5, Stream::kChannel, 2);
  Rng c = stream_rng(5, Stream::kImportance, 1);
  Rng a2 = stream_rng(5, Stream::kChannel, 1);
  CHECK(a.next_u64() != b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  Rng a3 = stream_rng(5, Stream::kChannel, 1);
  CHECK(a2.next_u64() == a3.next_u64());
}

}  // namespace
}  // namespace fedtwin
