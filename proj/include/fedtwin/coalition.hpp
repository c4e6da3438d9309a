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
// Lower-layer association subgame: overlapping sensor coalitions per ES,
// three switch rules (transfer / join / quit) with member-protection
// conditions, and the iterative formation algorithm that converges to a
// switch-stable partition.
//
// The game evaluates hypothetical coalitions through a frozen frame context:
// per-link rates use the dedicated-subcarrier interference-free figure, each
// member is assumed to hold exactly one subcarrier, and each ES's training
// rounds scale as a fixed fraction of its useful-round bound. Under this
// context an ES's utility depends only on its own coalition, which makes the
// sum of ES utilities an exact potential: every admissible switch changes the
// potential by exactly the switching sensor's utility delta.

#ifndef FEDTWIN_COALITION_HPP_
#define FEDTWIN_COALITION_HPP_

#include <cstdint>
#include <map>
#include <vector>

#include "fedtwin/types.hpp"

namespace fedtwin {

// Overlapping partition: one sensor set per ES; a sensor may appear in up to
// max_assoc_per_sensor of them.
struct CoalitionPartition {
  int num_ess = 0;
  int num_sensors = 0;
  std::vector<std::vector<int>> members;   // per ES, ascending sensor ids
  std::vector<std::uint8_t> member_bits;   // |B|x|N| membership lookup

  static CoalitionPartition empty(int ess, int sensors);
  static CoalitionPartition from_association(int ess, int sensors,
                                             const std::vector<std::uint8_t>& y);
  std::vector<std::uint8_t> to_association() const;

  bool contains(int b, int n) const {
    return member_bits[static_cast<std::size_t>(b) * num_sensors + n] != 0;
  }
  void add(int b, int n);
  void remove(int b, int n);
  int association_count(int n) const;
  // ESs whose coalition currently includes n, ascending.
  std::vector<int> coalitions_of(int n) const;
};

enum class SwitchKind { kTransfer, kJoin, kQuit };

// Admissibility verdict with the evaluated conditions, for audits and traces.
struct SwitchAudit {
  SwitchKind kind = SwitchKind::kTransfer;
  int sensor = -1;
  int from_es = -1;  // -1 for joins
  int to_es = -1;    // -1 for quits
  bool admissible = false;
  bool feasible_ok = false;       // capacity, caps, eligibility, live target
  bool gain_ok = false;           // the mover strictly improves (quit: <= 0)
  bool target_members_ok = true;  // nobody in the target coalition loses
  bool source_members_ok = true;  // nobody left behind loses
  double mover_before = 0.0;      // mover's contribution at the source (if any)
  double mover_after = 0.0;       // mover's contribution at the target (if any)
  // Exact potential delta the switch would cause (mover_after - mover_before
  // for transfers, mover_after for joins, -mover_before for quits).
  double potential_delta = 0.0;
};

// Frozen per-frame evaluation context for the coalition game.
struct LowerGameContext {
  const ScenarioConfig* cfg = nullptr;
  int frame = 1;
  std::vector<int> dt_at_es;              // hosted DT per ES under the
                                          // assignment in force, -1 if none
  std::vector<double> importance;         // I_c(t)
  std::vector<double> data_bits;          // d_{n,c}(t), |N|x|C|
  std::vector<double> cumulative_bits;    // per DT, before this frame
  std::vector<std::uint8_t> prev_assoc;   // y(t-1), |B|x|N|
  std::vector<double> round_fraction;     // r_b in [0,1]
  std::vector<std::vector<double>> link_rate;  // dedicated-link bps, |B|x|N|
  std::vector<double> fixed_energy_j;     // per-ES coalition-independent energy

  double data(int n, int c) const {
    return data_bits[static_cast<std::size_t>(n) * cfg->num_partial_dts + c];
  }
  bool was_member(int b, int n) const {
    return prev_assoc[static_cast<std::size_t>(b) * cfg->num_sensors + n] != 0;
  }
  bool eligible(int b, int n) const {
    return link_rate[b][n] >= cfg->min_rate_bps[b];
  }

  // Utility of ES b if its coalition were exactly `members`: weighted quality
  // of its hosted DT at proportionally rescaled rounds, minus weighted
  // transmission + creation + fixed energies, minus the configuration cost of
  // the association changes relative to the previous frame. Pure in its
  // arguments; results are memoized because the switch-rule audits revisit
  // the same hypothetical coalitions many times per formation run.
  double coalition_utility(int b, const std::vector<int>& members) const;

  // Marginal contribution of member n: coalition_utility with n minus
  // without. n must be in `members`.
  double member_contribution(int b, const std::vector<int>& members, int n) const;

 private:
  double coalition_utility_uncached(int b, const std::vector<int>& members) const;
  mutable std::map<std::pair<int, std::vector<int>>, double> utility_cache_;
};

// Builds the context from frame state. `assignment_x` is the |C|x|B| matrix
// in force during the lower game (the previous frame's assignment when run
// inside the per-frame orchestration). Round fractions derive from `rounds`
// relative to each ES's useful-round bound at its previous coalition.
LowerGameContext make_lower_game_context(const ScenarioConfig& cfg,
                                         const FrameDraws& draws,
                                         const HistoryState& hist,
                                         const std::vector<std::uint8_t>& assignment_x,
                                         const std::vector<double>& rounds);

// Sensors whose dedicated-link rate toward ES b clears that ES's minimum.
std::vector<int> eligible_sensors(const ScenarioConfig& cfg,
                                  const ChannelState& channel, int b);

// Switch admissibility. Transfer moves n from coalition a to coalition b and
// requires: room at b, eligibility, live target, strict improvement for n
// over both zero and its contribution at a, and no loss for any member of b
// or remaining member of a. Join adds a membership (subject to the per-sensor
// cap) with strict positive contribution and no loss at the target. Quit
// removes n when its contribution is <= 0 and nobody left behind loses.
SwitchAudit can_transfer(const LowerGameContext& ctx, const CoalitionPartition& cp,
                         int n, int from_es, int to_es);
SwitchAudit can_join(const LowerGameContext& ctx, const CoalitionPartition& cp,
                     int n, int to_es);
SwitchAudit can_quit(const LowerGameContext& ctx, const CoalitionPartition& cp,
                     int n, int from_es);

// Exact potential: sum of all ES utilities under the context.
double potential(const LowerGameContext& ctx, const CoalitionPartition& cp);

// One applied switch in the iteration trace.
struct SwitchRecord {
  SwitchKind kind;
  int sensor;
  int from_es;  // -1 for joins
  int to_es;    // -1 for quits
  double delta_utility;    // switching sensor's utility change
  double potential_after;  // potential once applied
};

struct SocfTrace {
  std::uint64_t init_seed = 0;
  std::vector<std::vector<int>> initial_members;  // after seeding + random fill
  double initial_potential = 0.0;
  std::vector<SwitchRecord> switches;
  int passes = 0;
  int transfers = 0;
  int joins = 0;
  int quits = 0;
};

struct SocfResult {
  CoalitionPartition partition;
  SocfTrace trace;
};

// Iterative formation. Seeds each live ES's coalition with its still-eligible
// previous members (hostless ESs stay empty), randomly tops it up with
// eligible candidates within capacity and per-sensor caps, then repeatedly
// scans sensors in ascending order applying the first admissible switch
// (transfer targets first, then joins, then quits) until a full pass applies
// none. The returned partition admits no admissible switch. Throws
// std::runtime_error if the safety bound of 10*|N|*|B| passes is exceeded.
SocfResult socf(const LowerGameContext& ctx, std::uint64_t init_seed);

}  // namespace fedtwin

#endif  // FEDTWIN_COALITION_HPP_
