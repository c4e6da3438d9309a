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
// Upper-layer assignment subgame: numeric preference grids between partial
// DTs and ESs, deferred-acceptance matching, and blocking-pair auditing.

#ifndef FEDTWIN_MATCHING_HPP_
#define FEDTWIN_MATCHING_HPP_

#include <utility>
#include <vector>

#include "fedtwin/types.hpp"

namespace fedtwin {

// Preference values in [0,1]; higher is better. Equal values are resolved
// deterministically in favor of the lower index, so identical inputs always
// produce identical matchings.
struct PreferenceLists {
  int num_dts = 0;
  int num_ess = 0;
  std::vector<double> dt_pref;  // |C|x|B|: how DT c ranks ES b
  std::vector<double> es_pref;  // |B|x|C|: how ES b ranks DT c

  double dt_at(int c, int b) const {
    return dt_pref[static_cast<std::size_t>(c) * num_ess + b];
  }
  double es_at(int b, int c) const {
    return es_pref[static_cast<std::size_t>(b) * num_dts + c];
  }
};

// One-to-one assignment; every DT matched, ESs may stay free (|B| >= |C|).
struct Matching {
  std::vector<int> es_of_dt;  // size |C|
  std::vector<int> dt_of_es;  // size |B|, -1 when unmatched
};

// Deferred acceptance with DTs proposing (DT-optimal stable matching).
// Throws std::invalid_argument on missing/non-finite/out-of-range preference
// values or when |B| < |C|.
Matching gale_shapley(const PreferenceLists& prefs);

// Every pair (c,b) that would mutually and strictly (on raw values) prefer
// each other over their partners; a free ES accepts any strict improvement
// for the DT. Empty result == stable.
std::vector<std::pair<int, int>> find_blocking_pairs(const PreferenceLists& prefs,
                                                     const Matching& m);

// Writes the matching into the decision's assignment matrix.
void apply_matching(const Matching& m, FrameDecision& d);

}  // namespace fedtwin

#endif  // FEDTWIN_MATCHING_HPP_
