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
//
// Deferred-acceptance checks. The stability audit here is written from the
// definition (a pair blocks when both sides strictly prefer each other over
// their current situation) on purpose: it must not share code with the
// library's own blocking-pair scan.

#include "fedtwin/matching.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "fedtwin/rng.hpp"
#include "fedtwin/types.hpp"

namespace fedtwin {
namespace {

PreferenceLists random_prefs(int dts, int ess, Rng& rng) {
  PreferenceLists p;
  p.num_dts = dts;
  p.num_ess = ess;
  p.dt_pref.resize(static_cast<std::size_t>(dts) * ess);
  p.es_pref.resize(static_cast<std::size_t>(ess) * dts);
  for (double& v : p.dt_pref) v = rng.uniform01();
  for (double& v : p.es_pref) v = rng.uniform01();
  return p;
}

// Definition-level stability: es_of_dt is stable iff no (c, b) with
//   dt_pref(c,b) > dt_pref(c, current partner of c), and
//   es_pref(b,c) > es_pref(b, current DT of b)     (any DT beats a free ES).
bool stable_by_definition(const PreferenceLists& p,
                          const std::vector<int>& es_of_dt) {
  std::vector<int> dt_of_es(p.num_ess, -1);
  for (int c = 0; c < p.num_dts; ++c) dt_of_es[es_of_dt[c]] = c;
  for (int c = 0; c < p.num_dts; ++c) {
    for (int b = 0; b < p.num_ess; ++b) {
      if (b == es_of_dt[c]) continue;
      if (p.dt_at(c, b) <= p.dt_at(c, es_of_dt[c])) continue;
      const int cur = dt_of_es[b];
      if (cur == -1 || p.es_at(b, c) > p.es_at(b, cur)) return false;
    }
  }
  return true;
}

// All stable DT->ES injections, by exhaustive enumeration. Only sane for
// |B| <= 4 or so.
std::vector<std::vector<int>> all_stable_matchings(const PreferenceLists& p) {
  std::vector<int> perm(p.num_ess);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::vector<int>> stable;
  do {
    std::vector<int> es_of_dt(perm.begin(), perm.begin() + p.num_dts);
    if (stable_by_definition(p, es_of_dt) &&
        std::find(stable.begin(), stable.end(), es_of_dt) == stable.end()) {
      stable.push_back(es_of_dt);
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return stable;
}

TEST_CASE("deferred acceptance yields complete, injective, stable matchings") {
  Rng rng = stream_rng(2024, Stream::kFuzz);
  for (int i = 0; i < 1000; ++i) {
    const int k = rng.uniform_int(3, 6);
    const int ess = k + rng.uniform_int(0, 2);  // sometimes rectangular
    const PreferenceLists p = random_prefs(k, ess, rng);
    const Matching m = gale_shapley(p);

    REQUIRE(static_cast<int>(m.es_of_dt.size()) == k);
    REQUIRE(static_cast<int>(m.dt_of_es.size()) == ess);
    std::vector<int> seen(ess, 0);
    for (int c = 0; c < k; ++c) {
      REQUIRE(m.es_of_dt[c] >= 0);
      REQUIRE(m.es_of_dt[c] < ess);
      ++seen[m.es_of_dt[c]];
      CHECK(m.dt_of_es[m.es_of_dt[c]] == c);
    }
    for (int s : seen) CHECK(s <= 1);

    CHECK(find_blocking_pairs(p, m).empty());
    CHECK(stable_by_definition(p, m.es_of_dt));
  }
}

TEST_CASE("the result lies in the enumerated stable set and is DT-optimal") {
  Rng rng = stream_rng(77, Stream::kFuzz);
  for (int i = 0; i < 200; ++i) {
    const int k = rng.uniform_int(2, 4);
    const PreferenceLists p = random_prefs(k, k, rng);
    const Matching m = gale_shapley(p);
    const auto stable = all_stable_matchings(p);

    REQUIRE_FALSE(stable.empty());
    CHECK(std::find(stable.begin(), stable.end(), m.es_of_dt) != stable.end());

    // With DTs proposing, every DT weakly prefers its partner over its
    // partner in any other stable matching.
    for (const auto& other : stable) {
      for (int c = 0; c < k; ++c) {
        CHECK(p.dt_at(c, m.es_of_dt[c]) >= p.dt_at(c, other[c]));
      }
    }
  }
}

TEST_CASE("matching is deterministic, including under ties") {
  PreferenceLists p;
  p.num_dts = 3;
  p.num_ess = 3;
  p.dt_pref.assign(9, 0.5);
  p.es_pref.assign(9, 0.5);
  const Matching a = gale_shapley(p);
  const Matching b = gale_shapley(p);
  CHECK(a.es_of_dt == b.es_of_dt);
  // With all-equal preferences nothing strictly blocks anything.
  CHECK(find_blocking_pairs(p, a).empty());
}

TEST_CASE("the blocking-pair scan flags a planted instability") {
  // Classic 2x2: both DTs love ES 0, both ESs love DT 0.
  PreferenceLists p;
  p.num_dts = 2;
  p.num_ess = 2;
  p.dt_pref = {0.9, 0.1, 0.9, 0.1};
  p.es_pref = {0.9, 0.1, 0.9, 0.1};
  Matching bad;
  bad.es_of_dt = {1, 0};  // the best-loved pair (0, 0) is split up
  bad.dt_of_es = {1, 0};
  const auto pairs = find_blocking_pairs(p, bad);
  REQUIRE(pairs.size() == 1);
  CHECK(pairs[0] == std::pair<int, int>{0, 0});
  // Deferred acceptance pairs them.
  const Matching good = gale_shapley(p);
  CHECK(good.es_of_dt == std::vector<int>{0, 1});
  CHECK(find_blocking_pairs(p, good).empty());
}

TEST_CASE("rejected inputs throw instead of mis-matching") {
  Rng rng = stream_rng(5, Stream::kFuzz);
  PreferenceLists p = random_prefs(3, 2, rng);  // more DTs than hosts
  CHECK_THROWS_AS(gale_shapley(p), std::invalid_argument);

  p = random_prefs(3, 3, rng);
  p.dt_pref[4] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(gale_shapley(p), std::invalid_argument);

  p = random_prefs(3, 3, rng);
  p.es_pref.pop_back();
  CHECK_THROWS_AS(gale_shapley(p), std::invalid_argument);
}

TEST_CASE("apply_matching writes the assignment matrix") {
  Matching m;
  m.es_of_dt = {2, 0};
  m.dt_of_es = {1, -1, 0};
  FrameDecision d = FrameDecision::zero(2, 3, 4, 2);
  d.x(0, 1) = 1;  // stale bit that must be cleared
  apply_matching(m, d);
  CHECK(d.x(0, 2) == 1);
  CHECK(d.x(1, 0) == 1);
  CHECK(d.x(0, 1) == 0);
  CHECK(d.host_of(0) == 2);
  CHECK(d.host_of(1) == 0);
  CHECK(d.dt_at(1) == -1);
}

}  // namespace
}  // namespace fedtwin
