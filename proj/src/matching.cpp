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

#include "fedtwin/matching.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace fedtwin {

namespace {

void validate_prefs(const PreferenceLists& p) {
  if (p.num_dts <= 0 || p.num_ess < p.num_dts) {
    throw std::invalid_argument(
        "preferences: need num_ess >= num_dts >= 1 for a full matching");
  }
  const auto expect = [](const std::vector<double>& v, std::size_t n,
                         const char* name) {
    if (v.size() != n) {
      throw std::invalid_argument(std::string("preferences: ") + name +
                                  " grid incomplete");
    }
    for (double x : v) {
      if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        throw std::invalid_argument(std::string("preferences: ") + name +
                                    " values must be finite and in [0,1]");
      }
    }
  };
  expect(p.dt_pref, static_cast<std::size_t>(p.num_dts) * p.num_ess, "DT");
  expect(p.es_pref, static_cast<std::size_t>(p.num_ess) * p.num_dts, "ES");
}

// Strict "prefers left over right" with the deterministic low-index tiebreak.
bool es_prefers(const PreferenceLists& p, int b, int c_new, int c_old) {
  const double vn = p.es_at(b, c_new), vo = p.es_at(b, c_old);
  if (vn != vo) return vn > vo;
  return c_new < c_old;
}

}  // namespace

Matching gale_shapley(const PreferenceLists& prefs) {
  validate_prefs(prefs);
  const int C = prefs.num_dts, B = prefs.num_ess;

  // Per-DT proposal order: ESs by descending value, low index first on ties.
  std::vector<std::vector<int>> order(C, std::vector<int>(B));
  for (int c = 0; c < C; ++c) {
    auto& row = order[c];
    for (int b = 0; b < B; ++b) row[b] = b;
    std::stable_sort(row.begin(), row.end(), [&](int lhs, int rhs) {
      return prefs.dt_at(c, lhs) > prefs.dt_at(c, rhs);
    });
  }

  Matching m;
  m.es_of_dt.assign(C, -1);
  m.dt_of_es.assign(B, -1);
  std::vector<int> next_proposal(C, 0);
  std::deque<int> free_dts;
  for (int c = 0; c < C; ++c) free_dts.push_back(c);

  while (!free_dts.empty()) {
    const int c = free_dts.front();
    free_dts.pop_front();
    // |B| >= |C| guarantees c is accepted before exhausting its list.
    const int b = order[c][next_proposal[c]++];
    const int holder = m.dt_of_es[b];
    if (holder < 0) {
      m.dt_of_es[b] = c;
      m.es_of_dt[c] = b;
    } else if (es_prefers(prefs, b, c, holder)) {
      m.dt_of_es[b] = c;
      m.es_of_dt[c] = b;
      m.es_of_dt[holder] = -1;
      free_dts.push_back(holder);
    } else {
      free_dts.push_back(c);
    }
  }
  return m;
}

std::vector<std::pair<int, int>> find_blocking_pairs(const PreferenceLists& prefs,
                                                     const Matching& m) {
  std::vector<std::pair<int, int>> blocking;
  for (int c = 0; c < prefs.num_dts; ++c) {
    const int current = m.es_of_dt[c];
    for (int b = 0; b < prefs.num_ess; ++b) {
      if (b == current) continue;
      if (!(prefs.dt_at(c, b) > prefs.dt_at(c, current))) continue;
      const int holder = m.dt_of_es[b];
      if (holder < 0 || prefs.es_at(b, c) > prefs.es_at(b, holder)) {
        blocking.emplace_back(c, b);
      }
    }
  }
  return blocking;
}

void apply_matching(const Matching& m, FrameDecision& d) {
  std::fill(d.assignment.begin(), d.assignment.end(), 0);
  for (int c = 0; c < d.num_dts; ++c) {
    d.x(c, m.es_of_dt[c]) = 1;
  }
}

}  // namespace fedtwin
