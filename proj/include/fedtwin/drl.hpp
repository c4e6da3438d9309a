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
// Learned two-stage per-frame orchestration. Stage 1 (resource layer): one
// agent per ES emits subcarrier priorities and a training-round knob, the
// coalition game is run, and the loop repeats until the decoded discrete
// decision reaches a fixed point or an iteration cap. Stage 2 (matching
// layer): one agent emits the partial-DT side preference grid, another the
// ES side grid, and deferred acceptance produces the assignment. The frame
// is then evaluated and every agent receives a shaped reward.

#ifndef FEDTWIN_DRL_HPP_
#define FEDTWIN_DRL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fedtwin/coalition.hpp"
#include "fedtwin/matching.hpp"
#include "fedtwin/ppo.hpp"
#include "fedtwin/scenario.hpp"
#include "fedtwin/types.hpp"

namespace fedtwin {

// Bumped whenever a state-encoding layout or checkpoint schema changes;
// checkpoints from other versions are rejected.
inline constexpr int kCheckpointVersion = 1;

struct OrchestratorConfig {
  PpoConfig ppo;
  // Stage-1 inner iterations per frame (decode -> coalition formation ->
  // re-encode) before the loop is cut even without a fixed point.
  int stage1_iteration_cap = 3;
  // Optimizer step cadence, in episodes.
  int update_every_episodes = 4;
  // Evaluate stage 1 under every feasible assignment and keep the best
  // context instead of using the previous frame's assignment. Exponential;
  // only allowed when num_partial_dts <= 3 and num_ess <= 3.
  bool exhaustive_stage1 = false;
};

// ---------------------------------------------------------------------------
// State encodings. All features are min-max normalized into [0,1]: importance
// values are native [0,1]; per-frame data volumes divide by
// num_sensors*data_max_bits; cumulative volumes additionally divide by the
// number of elapsed frames; round counts divide by the round clamp;
// membership/assignment entries are 0/1 bits. Layouts are fixed and guarded
// by kCheckpointVersion.

// (4 + |B|) + |B|*|N|: [hosted flag, hosted-DT importance, hosted-DT data of
// the previous frame, hosted-DT cumulative data] for ES b under
// `assignment_ctx`, the per-ES hosted-DT importance vector, then the current
// association matrix.
int resource_state_dim(const ScenarioConfig& cfg);
Eigen::VectorXd encode_resource_state(const ScenarioConfig& cfg,
                                      const FrameDraws& draws,
                                      const HistoryState& hist, int b,
                                      const std::vector<std::uint8_t>& assignment_ctx,
                                      const std::vector<std::uint8_t>& association);

// |C|*(4 + |B|): per partial DT, [importance, previous-frame data, cumulative
// data, matched-last-frame flag] followed by the one-hot previous host.
int matching_state_dim(const ScenarioConfig& cfg);
Eigen::VectorXd encode_matching_state(const ScenarioConfig& cfg,
                                      const FrameDraws& draws,
                                      const HistoryState& hist);

// 3|C| + |B|*(1 + |N|*(|W|+1)): per partial DT [importance, previous-frame
// data, cumulative data]; per ES its round count and subcarrier-grant block
// from the stage-1 decision; then the association matrix.
int cloud_state_dim(const ScenarioConfig& cfg);
Eigen::VectorXd encode_cloud_state(const ScenarioConfig& cfg,
                                   const FrameDraws& draws,
                                   const HistoryState& hist,
                                   const FrameDecision& stage1);

// ---------------------------------------------------------------------------
// Action decodings (total functions: any raw vector yields a feasible piece).

// Writes ES b's subcarrier grants and round count into *d. Coalition members
// are served in descending score order (scores = first |N| raw entries; ties
// by lower sensor id), each receiving its best-gain free subcarrier at b
// while capacity lasts. The last raw entry is squashed by the logistic
// function and scaled to an integer round count in [0, round_bound]
// (rounding half up).
void decode_resource_action(const ScenarioConfig& cfg, const ChannelState& channel,
                            int b, const std::vector<int>& members,
                            const Eigen::VectorXd& raw, int round_bound,
                            FrameDecision* d);

// Squashes both raw grids elementwise into [0,1] preference values.
// dt_raw is laid out [c * |B| + b], es_raw [b * |C| + c].
PreferenceLists decode_preference_action(const ScenarioConfig& cfg,
                                         const Eigen::VectorXd& dt_raw,
                                         const Eigen::VectorXd& es_raw);

// ---------------------------------------------------------------------------
// Rewards: pure function of the frame outcome. Base reward — per-ES utility
// for resource agents, global utility for the cloud agent, summed ES
// utilities for the matching agent — is granted only when the frame met its
// deadline (zero otherwise); every agent is then charged the deadline
// penalty penalty_psi * max(0, tau_total - deadline).
struct AgentRewards {
  double cloud = 0.0;
  double matcher = 0.0;
  std::vector<double> resource;
};
AgentRewards compute_rewards(const ScenarioConfig& cfg, const FrameOutcome& out);

// ---------------------------------------------------------------------------
// Agents.

struct DmoAgents {
  PpoAgent cloud;    // emits the partial-DT preference grid, |B||C| outputs
  PpoAgent matcher;  // emits the ES preference grid, |B||C| outputs
  std::vector<PpoAgent> resource;  // one per ES, |N|+1 outputs
};

// Fresh agents with deterministically derived initial weights.
DmoAgents make_dmo_agents(const ScenarioConfig& cfg, const OrchestratorConfig& ocfg,
                          std::uint64_t seed);

// JSON checkpoints: all parameters, optimizer moments, and layout dims.
// load throws std::runtime_error on version/layout mismatch or parse errors.
void save_agents(const DmoAgents& agents, const std::string& path);
DmoAgents load_agents(const std::string& path);

// ---------------------------------------------------------------------------
// One frame.

struct DmoStepOptions {
  bool deterministic = false;      // act on policy means (evaluation mode)
  bool store_transitions = true;   // append to every agent's buffer
};

struct DmoStepResult {
  FrameDecision decision;
  FrameOutcome outcome;
  PreferenceLists prefs;
  Matching matching;
  AgentRewards rewards;
  int stage1_iterations = 0;
  bool stage1_converged = false;
  std::vector<SocfTrace> socf_traces;  // one per stage-1 iteration
  // Lower-game context actually used: the assignment in force during stage 1
  // and the per-ES rounds entering each coalition call. Together with the
  // traces above this is enough to rebuild and audit every formation run.
  std::vector<std::uint8_t> stage1_assignment;     // |C|x|B|
  std::vector<std::vector<double>> stage1_rounds;  // one vector per call
};

// Runs both stages for the frame `hist.frame`, evaluates the final decision,
// computes rewards, and (optionally) stores one transition per agent. The
// stage-1 assignment context is the previous frame's assignment (an identity
// assignment on the first frame, when no previous one exists). Stored
// next_state vectors snapshot the post-frame observation using the current
// frame's importance draws — the update rule never reads them; they complete
// the buffer record. Throws on coalition-formation nonconvergence.
DmoStepResult dmo_step(const ScenarioConfig& cfg, const OrchestratorConfig& ocfg,
                       DmoAgents& agents, const FrameDraws& draws,
                       const HistoryState& hist, std::uint64_t run_seed,
                       const DmoStepOptions& options);

// ---------------------------------------------------------------------------
// Training.

struct DmoTrainResult {
  DmoAgents agents;
  std::vector<double> episode_return;  // cumulative shaped utility per episode
  std::vector<double> actor_objective; // diagnostics, one entry per update
  std::vector<double> critic_loss;
};

// World seed of training episode e: derived from the training seed with the
// top bit forced, so training worlds never collide with small user-chosen
// evaluation seeds.
std::uint64_t episode_world_seed(std::uint64_t train_seed, int episode);

// Runs `episodes` episodes of `frames_per_episode` frames, each on the world
// of episode_world_seed(train_seed, e) generated from `tmpl`, updating every
// agent each update_every_episodes episodes. Deterministic in
// (tmpl, ocfg, train_seed). Throws std::runtime_error on non-finite losses.
DmoTrainResult dmo_train(const ScenarioConfig& tmpl, const OrchestratorConfig& ocfg,
                         std::uint64_t train_seed, int episodes,
                         int frames_per_episode);

}  // namespace fedtwin

#endif  // FEDTWIN_DRL_HPP_
