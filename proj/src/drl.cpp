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

#include "fedtwin/drl.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <utility>

#include <json.hpp>

#include "fedtwin/model.hpp"
#include "fedtwin/rng.hpp"

namespace fedtwin {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// Largest per-DT data volume one frame can deliver; cumulative volumes
// additionally scale by elapsed frames.
double frame_data_norm(const ScenarioConfig& cfg) {
  return cfg.num_sensors * cfg.data_max_bits;
}

double cumulative_data_norm(const ScenarioConfig& cfg, int frame) {
  return frame_data_norm(cfg) * std::max(1, frame - 1);
}

int ctx_dt_at(const ScenarioConfig& cfg, const std::vector<std::uint8_t>& x_ctx,
              int b) {
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    if (x_ctx[static_cast<std::size_t>(c) * cfg.num_ess + b]) return c;
  }
  return -1;
}

}  // namespace

int resource_state_dim(const ScenarioConfig& cfg) {
  return 4 + cfg.num_ess + cfg.num_ess * cfg.num_sensors;
}

Eigen::VectorXd encode_resource_state(const ScenarioConfig& cfg,
                                      const FrameDraws& draws,
                                      const HistoryState& hist, int b,
                                      const std::vector<std::uint8_t>& assignment_ctx,
                                      const std::vector<std::uint8_t>& association) {
  const std::size_t bn =
      static_cast<std::size_t>(cfg.num_ess) * cfg.num_sensors;
  if (assignment_ctx.size() !=
          static_cast<std::size_t>(cfg.num_partial_dts) * cfg.num_ess ||
      association.size() != bn || b < 0 || b >= cfg.num_ess) {
    throw std::invalid_argument("resource-state context dimensions mismatch");
  }
  const double dnorm = frame_data_norm(cfg);
  const double cnorm = cumulative_data_norm(cfg, hist.frame);

  Eigen::VectorXd s = Eigen::VectorXd::Zero(resource_state_dim(cfg));
  Eigen::Index at = 0;
  const int c = ctx_dt_at(cfg, assignment_ctx, b);
  s[at++] = c >= 0 ? 1.0 : 0.0;
  s[at++] = c >= 0 ? draws.importance[c] : 0.0;
  s[at++] = c >= 0 ? clamp01(hist.prev_collected_bits[c] / dnorm) : 0.0;
  s[at++] = c >= 0 ? clamp01(hist.cumulative_bits[c] / cnorm) : 0.0;
  for (int b2 = 0; b2 < cfg.num_ess; ++b2) {
    const int c2 = ctx_dt_at(cfg, assignment_ctx, b2);
    s[at++] = c2 >= 0 ? draws.importance[c2] : 0.0;
  }
  for (std::size_t i = 0; i < bn; ++i) s[at++] = association[i] ? 1.0 : 0.0;
  return s;
}

int matching_state_dim(const ScenarioConfig& cfg) {
  return cfg.num_partial_dts * (4 + cfg.num_ess);
}

Eigen::VectorXd encode_matching_state(const ScenarioConfig& cfg,
                                      const FrameDraws& draws,
                                      const HistoryState& hist) {
  const double dnorm = frame_data_norm(cfg);
  const double cnorm = cumulative_data_norm(cfg, hist.frame);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(matching_state_dim(cfg));
  Eigen::Index at = 0;
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    const int host = hist.prev_host_of(c);
    s[at++] = draws.importance[c];
    s[at++] = clamp01(hist.prev_collected_bits[c] / dnorm);
    s[at++] = clamp01(hist.cumulative_bits[c] / cnorm);
    s[at++] = host >= 0 ? 1.0 : 0.0;
    for (int b = 0; b < cfg.num_ess; ++b) s[at++] = host == b ? 1.0 : 0.0;
  }
  return s;
}

int cloud_state_dim(const ScenarioConfig& cfg) {
  return 3 * cfg.num_partial_dts +
         cfg.num_ess * (1 + cfg.num_sensors * (cfg.num_subcarriers + 1));
}

Eigen::VectorXd encode_cloud_state(const ScenarioConfig& cfg,
                                   const FrameDraws& draws,
                                   const HistoryState& hist,
                                   const FrameDecision& stage1) {
  if (stage1.num_ess != cfg.num_ess || stage1.num_sensors != cfg.num_sensors ||
      stage1.num_subcarriers != cfg.num_subcarriers) {
    throw std::invalid_argument("cloud-state context dimensions mismatch");
  }
  const double dnorm = frame_data_norm(cfg);
  const double cnorm = cumulative_data_norm(cfg, hist.frame);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(cloud_state_dim(cfg));
  Eigen::Index at = 0;
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    s[at++] = draws.importance[c];
    s[at++] = clamp01(hist.prev_collected_bits[c] / dnorm);
    s[at++] = clamp01(hist.cumulative_bits[c] / cnorm);
  }
  for (int b = 0; b < cfg.num_ess; ++b) {
    s[at++] = clamp01(stage1.training_rounds[b] / cfg.max_rounds_clamp);
    for (int n = 0; n < cfg.num_sensors; ++n) {
      for (int w = 0; w < cfg.num_subcarriers; ++w) {
        s[at++] = stage1.z(b, n, w) ? 1.0 : 0.0;
      }
    }
  }
  for (int b = 0; b < cfg.num_ess; ++b) {
    for (int n = 0; n < cfg.num_sensors; ++n) {
      s[at++] = stage1.y(b, n) ? 1.0 : 0.0;
    }
  }
  return s;
}

void decode_resource_action(const ScenarioConfig& cfg, const ChannelState& channel,
                            int b, const std::vector<int>& members,
                            const Eigen::VectorXd& raw, int round_bound,
                            FrameDecision* d) {
  if (raw.size() != cfg.num_sensors + 1) {
    throw std::invalid_argument("resource action must have |N|+1 entries");
  }
  for (int n = 0; n < cfg.num_sensors; ++n) {
    for (int w = 0; w < cfg.num_subcarriers; ++w) d->z(b, n, w) = 0;
  }

  std::vector<int> order = members;  // ascending ids; stable sort keeps ties so
  std::stable_sort(order.begin(), order.end(),
                   [&raw](int lhs, int rhs) { return raw[lhs] > raw[rhs]; });

  std::vector<char> used(cfg.num_subcarriers, 0);
  int granted = 0;
  for (int n : order) {
    if (granted >= cfg.num_subcarriers) break;
    int best_w = -1;
    double best_gain = -1.0;
    for (int w = 0; w < cfg.num_subcarriers; ++w) {
      if (!used[w] && channel.at(b, n, w) > best_gain) {
        best_gain = channel.at(b, n, w);
        best_w = w;
      }
    }
    if (best_w < 0) break;
    used[best_w] = 1;
    d->z(b, n, best_w) = 1;
    ++granted;
  }

  const double squash = sigmoid(raw[cfg.num_sensors]);
  const int rounds = static_cast<int>(std::floor(squash * round_bound + 0.5));
  d->training_rounds[b] = std::clamp(rounds, 0, round_bound);
}

PreferenceLists decode_preference_action(const ScenarioConfig& cfg,
                                         const Eigen::VectorXd& dt_raw,
                                         const Eigen::VectorXd& es_raw) {
  const Eigen::Index expected =
      static_cast<Eigen::Index>(cfg.num_partial_dts) * cfg.num_ess;
  if (dt_raw.size() != expected || es_raw.size() != expected) {
    throw std::invalid_argument("preference action must have |B||C| entries");
  }
  PreferenceLists p;
  p.num_dts = cfg.num_partial_dts;
  p.num_ess = cfg.num_ess;
  p.dt_pref.resize(expected);
  p.es_pref.resize(expected);
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    for (int b = 0; b < cfg.num_ess; ++b) {
      p.dt_pref[static_cast<std::size_t>(c) * cfg.num_ess + b] =
          sigmoid(dt_raw[static_cast<Eigen::Index>(c) * cfg.num_ess + b]);
    }
  }
  for (int b = 0; b < cfg.num_ess; ++b) {
    for (int c = 0; c < cfg.num_partial_dts; ++c) {
      p.es_pref[static_cast<std::size_t>(b) * cfg.num_partial_dts + c] =
          sigmoid(es_raw[static_cast<Eigen::Index>(b) * cfg.num_partial_dts + c]);
    }
  }
  return p;
}

AgentRewards compute_rewards(const ScenarioConfig& cfg, const FrameOutcome& out) {
  AgentRewards r;
  const double penalty = cfg.penalty_psi * out.deadline_excess_s;
  double es_sum = 0.0;
  r.resource.resize(out.es_utility.size());
  for (std::size_t b = 0; b < out.es_utility.size(); ++b) {
    es_sum += out.es_utility[b];
    r.resource[b] = (out.deadline_met ? out.es_utility[b] : 0.0) - penalty;
  }
  r.cloud = (out.deadline_met ? out.cloud_utility : 0.0) - penalty;
  r.matcher = (out.deadline_met ? es_sum : 0.0) - penalty;
  return r;
}

DmoAgents make_dmo_agents(const ScenarioConfig& cfg, const OrchestratorConfig& ocfg,
                          std::uint64_t seed) {
  Rng rng = stream_rng(seed, Stream::kPolicy, 0);
  const int grid = cfg.num_ess * cfg.num_partial_dts;
  DmoAgents a{PpoAgent("cloud", cloud_state_dim(cfg), grid, ocfg.ppo, rng),
              PpoAgent("matcher", matching_state_dim(cfg), grid, ocfg.ppo, rng),
              {}};
  a.resource.reserve(cfg.num_ess);
  for (int b = 0; b < cfg.num_ess; ++b) {
    a.resource.emplace_back("resource_" + std::to_string(b),
                            resource_state_dim(cfg), cfg.num_sensors + 1,
                            ocfg.ppo, rng);
  }
  return a;
}

namespace {

// Per-iteration stage-1 products; the last iteration's samples become the
// stored transitions.
struct Stage1Out {
  std::vector<std::uint8_t> association;
  std::vector<std::uint8_t> subcarriers;
  std::vector<double> rounds;
  std::vector<Eigen::VectorXd> states;
  std::vector<Eigen::VectorXd> actions;
  std::vector<double> log_probs;
  std::vector<SocfTrace> traces;
  std::vector<std::vector<double>> ctx_rounds;  // game input, one per trace
  int iterations = 0;
  bool converged = false;
};

Stage1Out run_stage1(const ScenarioConfig& cfg, const OrchestratorConfig& ocfg,
                     DmoAgents& agents, const FrameDraws& draws,
                     const HistoryState& hist,
                     const std::vector<std::uint8_t>& x_ctx,
                     std::uint64_t socf_seed, Rng& act_rng, bool deterministic) {
  const int B = cfg.num_ess;

  // Useful-round bound at game entry: the previous association's members.
  std::vector<int> entry_bound(B, 0);
  for (int b = 0; b < B; ++b) {
    const int c = ctx_dt_at(cfg, x_ctx, b);
    if (c < 0) continue;
    double batch = 0.0;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (hist.prev_y(b, n)) batch += draws.data(n, c, cfg.num_partial_dts);
    }
    entry_bound[b] =
        max_training_rounds(cfg, c, hist.cumulative_bits[c] + batch, hist.frame);
  }

  Stage1Out out;
  std::vector<std::uint8_t> cur_assoc = hist.prev_association;
  for (int k = 1; k <= ocfg.stage1_iteration_cap; ++k) {
    out.iterations = k;
    FrameDecision stage1 = FrameDecision::zero(cfg.num_partial_dts, B,
                                               cfg.num_sensors,
                                               cfg.num_subcarriers);
    std::vector<Eigen::VectorXd> states(B);
    std::vector<Eigen::VectorXd> actions(B);
    std::vector<double> log_probs(B, 0.0);
    std::vector<double> rounds(B, 0.0);
    for (int b = 0; b < B; ++b) {
      states[b] = encode_resource_state(cfg, draws, hist, b, x_ctx, cur_assoc);
      if (deterministic) {
        actions[b] = agents.resource[b].policy.mean_action(states[b]);
        log_probs[b] = agents.resource[b].policy.log_prob(states[b], actions[b]);
      } else {
        actions[b] = agents.resource[b].act(states[b], act_rng, &log_probs[b]);
      }
      const double squash = sigmoid(actions[b][cfg.num_sensors]);
      rounds[b] = std::clamp(
          static_cast<int>(std::floor(squash * entry_bound[b] + 0.5)), 0,
          entry_bound[b]);
    }

    LowerGameContext ctx =
        make_lower_game_context(cfg, draws, hist, x_ctx, rounds);
    out.ctx_rounds.push_back(rounds);
    SocfResult socf_res = socf(ctx, socf_seed);
    for (int b = 0; b < B; ++b) {
      decode_resource_action(cfg, draws.channel, b,
                             socf_res.partition.members[b], actions[b],
                             entry_bound[b], &stage1);
    }
    stage1.association = socf_res.partition.to_association();
    out.traces.push_back(std::move(socf_res.trace));

    const bool fixed_point = k > 1 && stage1.association == out.association &&
                             stage1.subcarriers == out.subcarriers &&
                             stage1.training_rounds == out.rounds;
    out.association = stage1.association;
    out.subcarriers = stage1.subcarriers;
    out.rounds = stage1.training_rounds;
    out.states = std::move(states);
    out.actions = std::move(actions);
    out.log_probs = std::move(log_probs);
    if (fixed_point) {
      out.converged = true;
      break;
    }
    cur_assoc = stage1.association;
  }
  return out;
}

std::vector<std::uint8_t> identity_assignment(const ScenarioConfig& cfg) {
  std::vector<std::uint8_t> x(
      static_cast<std::size_t>(cfg.num_partial_dts) * cfg.num_ess, 0);
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    x[static_cast<std::size_t>(c) * cfg.num_ess + c] = 1;
  }
  return x;
}

// All injective DT->ES assignments (tiny instances only).
void enumerate_assignments(const ScenarioConfig& cfg, int c,
                           std::vector<int>& host_of,
                           std::vector<bool>& es_used,
                           std::vector<std::vector<std::uint8_t>>* out) {
  if (c == cfg.num_partial_dts) {
    std::vector<std::uint8_t> x(
        static_cast<std::size_t>(cfg.num_partial_dts) * cfg.num_ess, 0);
    for (int i = 0; i < cfg.num_partial_dts; ++i) {
      x[static_cast<std::size_t>(i) * cfg.num_ess + host_of[i]] = 1;
    }
    out->push_back(std::move(x));
    return;
  }
  for (int b = 0; b < cfg.num_ess; ++b) {
    if (es_used[b]) continue;
    es_used[b] = true;
    host_of[c] = b;
    enumerate_assignments(cfg, c + 1, host_of, es_used, out);
    es_used[b] = false;
  }
}

}  // namespace

DmoStepResult dmo_step(const ScenarioConfig& cfg, const OrchestratorConfig& ocfg,
                       DmoAgents& agents, const FrameDraws& draws,
                       const HistoryState& hist, std::uint64_t run_seed,
                       const DmoStepOptions& options) {
  if (static_cast<int>(agents.resource.size()) != cfg.num_ess ||
      agents.cloud.state_dim() != cloud_state_dim(cfg) ||
      agents.matcher.state_dim() != matching_state_dim(cfg) ||
      agents.resource.front().state_dim() != resource_state_dim(cfg)) {
    throw std::invalid_argument("agents do not match the scenario dimensions");
  }

  Rng act_rng = stream_rng(run_seed, Stream::kPolicy, hist.frame);
  const std::uint64_t socf_seed =
      stream_seed(run_seed, Stream::kCoalitionInit, hist.frame);

  // Assignment in force during stage 1: last frame's, or the identity
  // default when there is none yet.
  std::vector<std::uint8_t> x_ctx = hist.prev_assignment;
  if (std::find(x_ctx.begin(), x_ctx.end(), std::uint8_t{1}) == x_ctx.end()) {
    x_ctx = identity_assignment(cfg);
  }

  if (ocfg.exhaustive_stage1) {
    if (cfg.num_partial_dts > 3 || cfg.num_ess > 3) {
      throw std::invalid_argument(
          "exhaustive stage-1 enumeration allowed only for <=3 DTs and ESs");
    }
    // Score every context by the utility of the frame it would produce if
    // the matching stage simply committed that context.
    std::vector<std::vector<std::uint8_t>> candidates;
    std::vector<int> host_of(cfg.num_partial_dts, -1);
    std::vector<bool> es_used(cfg.num_ess, false);
    enumerate_assignments(cfg, 0, host_of, es_used, &candidates);
    double best = 0.0;
    bool have_best = false;
    for (const auto& cand : candidates) {
      Stage1Out s1 = run_stage1(cfg, ocfg, agents, draws, hist, cand, socf_seed,
                                act_rng, /*deterministic=*/true);
      FrameDecision d = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                            cfg.num_sensors, cfg.num_subcarriers);
      d.assignment = cand;
      d.association = s1.association;
      d.subcarriers = s1.subcarriers;
      d.training_rounds = s1.rounds;
      const auto bounds = per_es_round_bounds(cfg, draws, d, hist);
      for (int b = 0; b < cfg.num_ess; ++b) {
        d.training_rounds[b] =
            std::min(d.training_rounds[b], static_cast<double>(bounds[b]));
      }
      const FrameOutcome probe = evaluate_frame(cfg, draws, d, hist);
      if (!have_best || probe.utility > best) {
        best = probe.utility;
        have_best = true;
        x_ctx = cand;
      }
    }
  }

  Stage1Out s1 = run_stage1(cfg, ocfg, agents, draws, hist, x_ctx, socf_seed,
                            act_rng, options.deterministic);

  // Stage-1 decision snapshot feeds the cloud agent's observation.
  FrameDecision stage1 = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                             cfg.num_sensors, cfg.num_subcarriers);
  stage1.association = s1.association;
  stage1.subcarriers = s1.subcarriers;
  stage1.training_rounds = s1.rounds;

  const Eigen::VectorXd cloud_state =
      encode_cloud_state(cfg, draws, hist, stage1);
  const Eigen::VectorXd matcher_state = encode_matching_state(cfg, draws, hist);
  Eigen::VectorXd cloud_action;
  Eigen::VectorXd matcher_action;
  double cloud_lp = 0.0;
  double matcher_lp = 0.0;
  if (options.deterministic) {
    cloud_action = agents.cloud.policy.mean_action(cloud_state);
    cloud_lp = agents.cloud.policy.log_prob(cloud_state, cloud_action);
    matcher_action = agents.matcher.policy.mean_action(matcher_state);
    matcher_lp = agents.matcher.policy.log_prob(matcher_state, matcher_action);
  } else {
    cloud_action = agents.cloud.act(cloud_state, act_rng, &cloud_lp);
    matcher_action = agents.matcher.act(matcher_state, act_rng, &matcher_lp);
  }

  DmoStepResult res;
  res.prefs = decode_preference_action(cfg, cloud_action, matcher_action);
  res.matching = gale_shapley(res.prefs);
  res.stage1_iterations = s1.iterations;
  res.stage1_converged = s1.converged;
  res.socf_traces = std::move(s1.traces);
  res.stage1_assignment = x_ctx;
  res.stage1_rounds = std::move(s1.ctx_rounds);

  res.decision = std::move(stage1);
  apply_matching(res.matching, res.decision);

  // The committed assignment can move training to a different data context
  // than stage 1 assumed; re-clamp rounds to the enforced bound.
  const auto bounds = per_es_round_bounds(cfg, draws, res.decision, hist);
  for (int b = 0; b < cfg.num_ess; ++b) {
    res.decision.training_rounds[b] = std::min(
        res.decision.training_rounds[b], static_cast<double>(bounds[b]));
  }

  res.outcome = evaluate_frame(cfg, draws, res.decision, hist);
  res.rewards = compute_rewards(cfg, res.outcome);

  if (options.store_transitions) {
    HistoryState next_hist = hist;
    next_hist.advance(res.decision, res.outcome.collected_bits);
    const bool first = hist.frame == 1;
    for (int b = 0; b < cfg.num_ess; ++b) {
      Transition tr;
      tr.state = s1.states[b];
      tr.action = s1.actions[b];
      tr.reward = res.rewards.resource[b];
      tr.log_prob = s1.log_probs[b];
      tr.first_in_episode = first;
      tr.next_state = encode_resource_state(cfg, draws, next_hist, b,
                                            res.decision.assignment,
                                            res.decision.association);
      agents.resource[b].buffer.push_back(std::move(tr));
    }
    Transition tc;
    tc.state = cloud_state;
    tc.action = cloud_action;
    tc.reward = res.rewards.cloud;
    tc.log_prob = cloud_lp;
    tc.first_in_episode = first;
    tc.next_state = encode_cloud_state(cfg, draws, next_hist, res.decision);
    agents.cloud.buffer.push_back(std::move(tc));

    Transition tm;
    tm.state = matcher_state;
    tm.action = matcher_action;
    tm.reward = res.rewards.matcher;
    tm.log_prob = matcher_lp;
    tm.first_in_episode = first;
    tm.next_state = encode_matching_state(cfg, draws, next_hist);
    agents.matcher.buffer.push_back(std::move(tm));
  }
  return res;
}

std::uint64_t episode_world_seed(std::uint64_t train_seed, int episode) {
  return hash_combine(train_seed, 0xE715000ULL + static_cast<std::uint64_t>(episode)) |
         0x8000000000000000ULL;
}

DmoTrainResult dmo_train(const ScenarioConfig& tmpl, const OrchestratorConfig& ocfg,
                         std::uint64_t train_seed, int episodes,
                         int frames_per_episode) {
  if (episodes < 1 || frames_per_episode < 1) {
    throw std::invalid_argument("training needs >= 1 episode and frame");
  }
  DmoTrainResult out{make_dmo_agents(tmpl, ocfg, train_seed), {}, {}, {}};

  const auto update_all = [&](std::vector<PpoAgent*> list) {
    double actor = 0.0;
    double critic = 0.0;
    for (PpoAgent* agent : list) {
      const PpoLosses losses = update_agent(*agent);
      if (!std::isfinite(losses.actor_objective) ||
          !std::isfinite(losses.critic_loss)) {
        throw std::runtime_error("non-finite loss for agent " + agent->id());
      }
      actor += losses.actor_objective;
      critic += losses.critic_loss;
    }
    out.actor_objective.push_back(actor);
    out.critic_loss.push_back(critic);
  };

  std::vector<PpoAgent*> all = {&out.agents.cloud, &out.agents.matcher};
  for (auto& agent : out.agents.resource) all.push_back(&agent);

  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t world = episode_world_seed(train_seed, e);
    const ScenarioConfig cfg = generate_scenario(world, tmpl);
    HistoryState hist = HistoryState::initial(cfg);
    double episode_return = 0.0;
    for (int t = 1; t <= frames_per_episode; ++t) {
      const FrameDraws draws = frame_draws(cfg, world, t);
      const DmoStepResult step = dmo_step(cfg, ocfg, out.agents, draws, hist,
                                          world, DmoStepOptions{});
      episode_return += step.outcome.shaped_utility;
      hist.advance(step.decision, step.outcome.collected_bits);
    }
    out.episode_return.push_back(episode_return);
    if ((e + 1) % ocfg.update_every_episodes == 0) update_all(all);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Checkpoints.

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j[i][c].get<double>();
  }
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Eigen::VectorXd vector_from_json(const json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

json array_to_json(const Eigen::ArrayXd& v) {
  return vector_to_json(v.matrix());
}

json mlp_to_json(const Mlp& m) {
  json j;
  j["sizes"] = m.sizes();
  j["weights"] = json::array();
  j["biases"] = json::array();
  for (int l = 0; l < m.num_layers(); ++l) {
    j["weights"].push_back(matrix_to_json(m.weights[l]));
    j["biases"].push_back(vector_to_json(m.biases[l]));
  }
  return j;
}

Mlp mlp_from_json(const json& j) {
  std::vector<int> sizes = j.at("sizes").get<std::vector<int>>();
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  for (const auto& w : j.at("weights")) weights.push_back(matrix_from_json(w));
  for (const auto& b : j.at("biases")) biases.push_back(vector_from_json(b));
  return Mlp::from_parts(std::move(sizes), std::move(weights), std::move(biases));
}

json adam_to_json(const Adam& a) {
  json j;
  j["learning_rate"] = a.learning_rate;
  j["beta1"] = a.beta1;
  j["beta2"] = a.beta2;
  j["epsilon"] = a.epsilon;
  j["steps"] = a.steps;
  j["first_moment"] = array_to_json(a.first_moment);
  j["second_moment"] = array_to_json(a.second_moment);
  return j;
}

Adam adam_from_json(const json& j) {
  Adam a;
  a.learning_rate = j.at("learning_rate").get<double>();
  a.beta1 = j.at("beta1").get<double>();
  a.beta2 = j.at("beta2").get<double>();
  a.epsilon = j.at("epsilon").get<double>();
  a.steps = j.at("steps").get<long>();
  a.first_moment = vector_from_json(j.at("first_moment")).array();
  a.second_moment = vector_from_json(j.at("second_moment")).array();
  return a;
}

json agent_to_json(const PpoAgent& agent) {
  json j;
  j["id"] = agent.id();
  j["clip_epsilon"] = agent.config.clip_epsilon;
  j["learning_rate"] = agent.config.learning_rate;
  j["discount"] = agent.config.discount;
  j["initial_action_std"] = agent.config.initial_action_std;
  j["hidden_sizes"] = agent.config.hidden_sizes;
  j["actor_mean"] = mlp_to_json(agent.policy.mean);
  j["actor_log_std"] = vector_to_json(agent.policy.log_std);
  j["critic"] = mlp_to_json(agent.critic);
  j["actor_optimizer"] = adam_to_json(agent.actor_optimizer);
  j["critic_optimizer"] = adam_to_json(agent.critic_optimizer);
  return j;
}

PpoAgent agent_from_json(const json& j) {
  PpoConfig cfg;
  cfg.clip_epsilon = j.at("clip_epsilon").get<double>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.discount = j.at("discount").get<double>();
  cfg.initial_action_std = j.at("initial_action_std").get<double>();
  cfg.hidden_sizes = j.at("hidden_sizes").get<std::vector<int>>();

  Mlp mean = mlp_from_json(j.at("actor_mean"));
  Mlp critic = mlp_from_json(j.at("critic"));
  Rng dummy(0);
  PpoAgent agent(j.at("id").get<std::string>(), mean.input_size(),
                 mean.output_size(), cfg, dummy);
  agent.policy.mean = std::move(mean);
  agent.policy.log_std = vector_from_json(j.at("actor_log_std"));
  agent.critic = std::move(critic);
  agent.actor_optimizer = adam_from_json(j.at("actor_optimizer"));
  agent.critic_optimizer = adam_from_json(j.at("critic_optimizer"));
  return agent;
}

}  // namespace

void save_agents(const DmoAgents& agents, const std::string& path) {
  json j;
  j["version"] = kCheckpointVersion;
  j["cloud"] = agent_to_json(agents.cloud);
  j["matcher"] = agent_to_json(agents.matcher);
  j["resource"] = json::array();
  for (const auto& agent : agents.resource) {
    j["resource"].push_back(agent_to_json(agent));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out << j.dump(1) << "\n";
}

DmoAgents load_agents(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw std::runtime_error("corrupt checkpoint " + path + ": " + e.what());
  }
  if (!j.contains("version") || j["version"].get<int>() != kCheckpointVersion) {
    throw std::runtime_error("checkpoint version mismatch: " + path);
  }
  DmoAgents agents{agent_from_json(j.at("cloud")),
                   agent_from_json(j.at("matcher")),
                   {}};
  for (const auto& r : j.at("resource")) {
    agents.resource.push_back(agent_from_json(r));
  }
  return agents;
}

}  // namespace fedtwin
