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
// Comparison schemes: alternative construction frameworks (centralized cloud
// collection, non-overlapping association) and alternative per-frame
// optimizers (myopic greedy, tabular Q-learning).

#ifndef FEDTWIN_BASELINES_HPP_
#define FEDTWIN_BASELINES_HPP_

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "fedtwin/rng.hpp"
#include "fedtwin/types.hpp"

namespace fedtwin {

// The comparison schemes. Framework kinds alter the feasible decision set;
// optimizer kinds alter only the decision rule on the federated set.
enum class PolicyKind {
  kDmo,
  kGre,
  kTabularQ,
  kSocf,  // standalone coalition-formation stack under a held assignment
  kCentraFramework,
  kNonOverlapFramework,
};

std::string policy_kind_name(PolicyKind k);

// ---------------------------------------------------------------------------
// GRE: maximize the frame utility U(t) = xi*gain - kappa*energy greedily,
// ignoring configuration costs, the deadline penalty, and future frames.
//
// Assignment ranks partial DTs by importance and ESs by (total fresh data of
// rate-eligible sensors) x (CPU speed), pairing rank for rank. Each hosting
// ES then greedily admits sensors — best-gain free subcarrier, training
// rounds re-optimized per candidate — while the exact marginal U(t) of the
// best candidate stays positive. Fully deterministic; ties break toward the
// lower index.
FrameDecision gre_policy(const ScenarioConfig& cfg, const FrameDraws& draws,
                         const HistoryState& hist);

// Best training-round count for ES b in `d` by scanning T in {0..bound}:
// maximizes xi*I_c*quality - kappa*T*per_round_creation_energy, the only
// U(t) terms that depend on T. Exposed for tests.
int gre_best_rounds(const ScenarioConfig& cfg, const FrameDraws& draws,
                    const FrameDecision& d, const HistoryState& hist, int b);

// ---------------------------------------------------------------------------
// Centra: every sensor ships all of its fresh data straight to the cloud;
// partial DTs are created and integrated there. No edge servers, hence no
// migration and no model upload.

// Cross-frame state of a centralized run (the cloud's view of history).
struct CentraHistory {
  int frame = 1;
  std::vector<double> cumulative_bits;      // per DT
  std::vector<std::uint8_t> prev_admitted;  // per sensor

  static CentraHistory initial(const ScenarioConfig& cfg);
  void advance(const std::vector<std::uint8_t>& admitted,
               const std::vector<double>& collected_bits);
};

struct CentraResult {
  std::vector<std::uint8_t> admitted;  // per sensor
  std::vector<int> subcarrier_of;      // per sensor, -1 when not admitted
  std::vector<double> rounds;          // per DT, at the cloud
  FrameOutcome outcome;  // per-stage vectors have one entry: the cloud
};

// One centralized frame. Uploading is the framework's defining behavior,
// not an optimized choice: every sensor whose dedicated cloud link clears
// the rate floor transmits its whole fresh batch, the largest payloads
// first when more sensors qualify than the |W| cloud subcarriers can carry.
// The cloud then trains every partial DT to its quality cap and integrates.
// Rates use the cloud receiver row of the channel tensor; creation runs
// serially on the cloud CPU; the outcome is scored by the shared
// frame-scoring code with configuration changes counted on the admitted set.
CentraResult centra_simulate(const ScenarioConfig& cfg, const FrameDraws& draws,
                             const CentraHistory& hist);

// ---------------------------------------------------------------------------
// Non-Overlap: the federated pipeline with every sensor limited to a single
// association. A pure config transform; the association cap does the rest.
ScenarioConfig non_overlap_config(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Tabular Q-learning over a coarse state/action space.
//
// State key: per-DT cap-reachability bit (is the data already rich enough to
// reach the required quality?), a global association-load bucket, and the
// previous frame's deadline-slack bucket. Actions: assignment template x
// association template x training-round level. Updates use the same shaped
// per-frame reward as the deep agents.

struct TabularQConfig {
  double learning_rate = 0.2;
  double discount = 0.92;
  double epsilon_start = 0.3;
  double epsilon_floor = 0.01;
  double epsilon_decay = 0.988;  // multiplicative, per decision in learn mode
};

class TabularQPolicy {
 public:
  static constexpr int kAssignmentTemplates = 3;   // rank / keep / identity
  static constexpr int kAssociationTemplates = 3;  // greedy fill / keep / none
  static constexpr int kRoundLevels = 4;           // fractions 0, 1/3, 2/3, 1
  static constexpr int kNumActions =
      kAssignmentTemplates * kAssociationTemplates * kRoundLevels;

  explicit TabularQPolicy(const TabularQConfig& cfg = {});

  // Emits a feasible decision for the frame. In learn mode the action is
  // epsilon-greedy and the pending (state, action) is remembered; the caller
  // must follow up with observe_reward before the next act. Greedy mode
  // breaks value ties toward the lower action id.
  FrameDecision act(const ScenarioConfig& cfg, const FrameDraws& draws,
                    const HistoryState& hist, bool learn, Rng& rng);

  // Q-update for the pending action: the target bootstraps on the best value
  // of the *next* decision state, folded in by the next act() call.
  void observe_reward(const ScenarioConfig& cfg, const FrameOutcome& outcome);

  // Flushes the pending update without a bootstrap term (episode end).
  void finish_episode();

  int state_key(const ScenarioConfig& cfg, const HistoryState& hist) const;
  const std::array<double, kNumActions>& action_values(int key);
  double epsilon() const { return epsilon_; }

 private:
  FrameDecision build_decision(const ScenarioConfig& cfg,
                               const FrameDraws& draws,
                               const HistoryState& hist, int action) const;
  std::array<double, kNumActions>& row(int key);

  TabularQConfig cfg_;
  std::unordered_map<int, std::array<double, kNumActions>> table_;
  double epsilon_ = 0.3;

  bool has_pending_ = false;
  int pending_key_ = 0;
  int pending_action_ = 0;
  double pending_reward_ = 0.0;
  int slack_bucket_ = 0;  // previous frame's deadline slack, part of the key
};

// Trains a Q table with the same per-episode world seeds the deep optimizer
// uses, so both see identical training exposure.
TabularQPolicy train_tabular_q(const ScenarioConfig& tmpl,
                               std::uint64_t train_seed, int episodes,
                               int frames_per_episode,
                               const TabularQConfig& qcfg = {});

}  // namespace fedtwin

#endif  // FEDTWIN_BASELINES_HPP_
