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

#include "fedtwin/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fedtwin/coalition.hpp"
#include "fedtwin/drl.hpp"
#include "fedtwin/model.hpp"
#include "fedtwin/scenario.hpp"

namespace fedtwin {

std::string policy_kind_name(PolicyKind k) {
  switch (k) {
    case PolicyKind::kDmo: return "dmo";
    case PolicyKind::kGre: return "gre";
    case PolicyKind::kTabularQ: return "ql";
    case PolicyKind::kSocf: return "socf";
    case PolicyKind::kCentraFramework: return "centra";
    case PolicyKind::kNonOverlapFramework: return "nonoverlap";
  }
  return "unknown";
}

namespace {

// Partial DTs by descending importance, ties toward the lower id.
std::vector<int> rank_dts(const ScenarioConfig& cfg, const FrameDraws& draws) {
  std::vector<int> order(cfg.num_partial_dts);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return draws.importance[a] > draws.importance[b];
  });
  return order;
}

// ESs by descending (fresh data reachable through rate-eligible sensors) x
// (CPU speed), ties toward the lower id.
std::vector<int> rank_ess(const ScenarioConfig& cfg, const FrameDraws& draws) {
  std::vector<double> score(cfg.num_ess, 0.0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    double data = 0.0;
    for (int n : eligible_sensors(cfg, draws.channel, b)) {
      for (int c = 0; c < cfg.num_partial_dts; ++c) {
        data += draws.data(n, c, cfg.num_partial_dts);
      }
    }
    score[b] = data * cfg.cpu_speed_es_hz;
  }
  std::vector<int> order(cfg.num_ess);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] > score[b]; });
  return order;
}

// Highest-gain subcarrier at ES b not yet granted to anyone, or -1. Ties
// keep the lowest index.
int best_free_subcarrier(const ScenarioConfig& cfg, const ChannelState& channel,
                         const FrameDecision& d, int b, int n) {
  int best_w = -1;
  double best_gain = -1.0;
  for (int w = 0; w < cfg.num_subcarriers; ++w) {
    bool used = false;
    for (int m = 0; m < cfg.num_sensors && !used; ++m) used = d.z(b, m, w);
    if (!used && channel.at(b, n, w) > best_gain) {
      best_gain = channel.at(b, n, w);
      best_w = w;
    }
  }
  return best_w;
}

int grants_at(const ScenarioConfig& cfg, const FrameDecision& d, int b) {
  int k = 0;
  for (int n = 0; n < cfg.num_sensors; ++n) {
    for (int w = 0; w < cfg.num_subcarriers; ++w) k += d.z(b, n, w);
  }
  return k;
}

}  // namespace

int gre_best_rounds(const ScenarioConfig& cfg, const FrameDraws& draws,
                    const FrameDecision& d, const HistoryState& hist, int b) {
  const int c = d.dt_at(b);
  if (c < 0) return 0;
  const std::vector<double> collected = live_collected_bits(cfg, draws, d);
  const double cum = hist.cumulative_bits[c] + collected[c];
  const int bound = max_training_rounds(cfg, c, cum, hist.frame);
  const double e_round = creation_energy_per_round(cfg);

  int best_t = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int t = 0; t <= bound; ++t) {
    const double quality = partial_dt_quality(cfg, c, cum, hist.frame, t);
    const double value = cfg.gain_weight_xi * draws.importance[c] * quality -
                         cfg.cost_weight_kappa * t * e_round;
    if (value > best) {
      best = value;
      best_t = t;
    }
  }
  return best_t;
}

FrameDecision gre_policy(const ScenarioConfig& cfg, const FrameDraws& draws,
                         const HistoryState& hist) {
  FrameDecision d = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                        cfg.num_sensors, cfg.num_subcarriers);
  const std::vector<int> dts = rank_dts(cfg, draws);
  const std::vector<int> ess = rank_ess(cfg, draws);
  for (int i = 0; i < cfg.num_partial_dts; ++i) d.x(dts[i], ess[i]) = 1;

  for (int i = 0; i < cfg.num_partial_dts; ++i) {
    const int b = ess[i];
    d.training_rounds[b] = gre_best_rounds(cfg, draws, d, hist, b);
    double current = evaluate_frame(cfg, draws, d, hist).utility;

    const std::vector<int> eligible = eligible_sensors(cfg, draws.channel, b);
    while (true) {
      int pick_n = -1;
      int pick_w = -1;
      double pick_rounds = 0.0;
      double pick_utility = current;
      for (int n : eligible) {
        if (d.y(b, n) || d.association_count(n) >= cfg.max_assoc_per_sensor) {
          continue;
        }
        const int w = best_free_subcarrier(cfg, draws.channel, d, b, n);
        if (w < 0) break;  // ES out of subcarriers; no candidate fits
        const double saved_rounds = d.training_rounds[b];
        d.y(b, n) = 1;
        d.z(b, n, w) = 1;
        d.training_rounds[b] = gre_best_rounds(cfg, draws, d, hist, b);
        const double utility = evaluate_frame(cfg, draws, d, hist).utility;
        if (utility > pick_utility) {
          pick_utility = utility;
          pick_n = n;
          pick_w = w;
          pick_rounds = d.training_rounds[b];
        }
        d.y(b, n) = 0;
        d.z(b, n, w) = 0;
        d.training_rounds[b] = saved_rounds;
      }
      if (pick_n < 0) break;
      d.y(b, pick_n) = 1;
      d.z(b, pick_n, pick_w) = 1;
      d.training_rounds[b] = pick_rounds;
      current = pick_utility;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------
// Centra.

CentraHistory CentraHistory::initial(const ScenarioConfig& cfg) {
  CentraHistory h;
  h.frame = 1;
  h.cumulative_bits.assign(cfg.num_partial_dts, 0.0);
  h.prev_admitted.assign(cfg.num_sensors, 0);
  return h;
}

void CentraHistory::advance(const std::vector<std::uint8_t>& admitted,
                            const std::vector<double>& collected_bits) {
  for (std::size_t c = 0; c < cumulative_bits.size(); ++c) {
    cumulative_bits[c] += collected_bits[c];
  }
  prev_admitted = admitted;
  ++frame;
}

namespace {

// Dedicated-link rate of sensor n toward the cloud on subcarrier w. The
// cloud is a single receiver, so there is no co-channel interference; its
// radio constants reuse the first ES entry of the config.
double cloud_rate(const ScenarioConfig& cfg, const ChannelState& channel, int n,
                  int w) {
  const double snr = cfg.sensor_tx_power_w[n] *
                     channel.at(cfg.num_ess, n, w) / cfg.noise_power_w[0];
  return cfg.subcarrier_bandwidth_hz * std::log2(1.0 + snr);
}

double cloud_creation_energy_per_round(const ScenarioConfig& cfg) {
  return cfg.switched_capacitance * cfg.cpu_speed_cloud_hz *
         cfg.cpu_speed_cloud_hz * cfg.cpu_cycles_per_bit_cloud;
}

FrameOutcome centra_evaluate(const ScenarioConfig& cfg, const FrameDraws& draws,
                             const CentraHistory& hist,
                             const std::vector<std::uint8_t>& admitted,
                             const std::vector<int>& subcarrier_of,
                             const std::vector<double>& rounds) {
  const int C = cfg.num_partial_dts;
  FrameOutcome out;
  out.collected_bits.assign(C, 0.0);
  out.quality.assign(C, 0.0);
  out.tau_dtr.assign(1, 0.0);
  out.tau_back.assign(1, 0.0);
  out.tau_cre.assign(1, 0.0);
  out.tau_mtr.assign(1, 0.0);
  out.e_dtr.assign(1, 0.0);
  out.e_back.assign(1, 0.0);
  out.e_cre.assign(1, 0.0);
  out.e_mtr.assign(1, 0.0);

  for (int n = 0; n < cfg.num_sensors; ++n) {
    if (!admitted[n]) continue;
    double payload = 0.0;
    for (int c = 0; c < C; ++c) {
      const double bits = draws.data(n, c, C);
      out.collected_bits[c] += bits;
      payload += bits;
    }
    const double rate = cloud_rate(cfg, draws.channel, n, subcarrier_of[n]);
    out.tau_dtr[0] = std::max(out.tau_dtr[0], payload / rate);
    out.e_dtr[0] += cfg.sensor_tx_power_w[n] * payload / rate;
  }

  // Serial creation on the cloud CPU; no migration, no model upload.
  const double e_round = cloud_creation_energy_per_round(cfg);
  for (int c = 0; c < C; ++c) {
    const double cum = hist.cumulative_bits[c] + out.collected_bits[c];
    out.tau_cre[0] += rounds[c] * out.collected_bits[c] *
                      cfg.cpu_cycles_per_bit_cloud / cfg.cpu_speed_cloud_hz;
    out.e_cre[0] += rounds[c] * e_round;
    out.quality[c] = partial_dt_quality(cfg, c, cum, hist.frame, rounds[c]);
    out.global_quality += draws.importance[c] * out.quality[c];
  }

  out.tau_integration = integration_latency(cfg);
  out.e_integration = integration_energy(cfg);
  out.tau_total = out.tau_dtr[0] + out.tau_cre[0] + out.tau_integration;
  out.e_total = out.e_dtr[0] + out.e_cre[0] + out.e_integration;

  out.config_changes = 0;
  for (int n = 0; n < cfg.num_sensors; ++n) {
    out.config_changes += admitted[n] != hist.prev_admitted[n] ? 1 : 0;
  }
  out.config_changes_per_es.assign(1, out.config_changes);

  const UtilityScore score =
      score_frame(cfg, out.global_quality, out.e_total, out.config_changes,
                  out.tau_total);
  out.utility = score.utility;
  out.cloud_utility = score.utility;
  out.deadline_met = score.deadline_met;
  out.deadline_excess_s = score.deadline_excess_s;
  out.shaped_utility = score.shaped_utility;
  return out;
}

}  // namespace

CentraResult centra_simulate(const ScenarioConfig& cfg, const FrameDraws& draws,
                             const CentraHistory& hist) {
  const int C = cfg.num_partial_dts;
  CentraResult res;
  res.admitted.assign(cfg.num_sensors, 0);
  res.subcarrier_of.assign(cfg.num_sensors, -1);

  // Sensors whose best dedicated cloud link clears the rate floor, largest
  // fresh payload first (ties toward the lower id); the top |W| transmit.
  std::vector<int> eligible;
  std::vector<double> payload(cfg.num_sensors, 0.0);
  for (int n = 0; n < cfg.num_sensors; ++n) {
    for (int c = 0; c < C; ++c) payload[n] += draws.data(n, c, C);
    double best = 0.0;
    for (int w = 0; w < cfg.num_subcarriers; ++w) {
      best = std::max(best, cloud_rate(cfg, draws.channel, n, w));
    }
    if (best >= cfg.min_rate_bps[0]) eligible.push_back(n);
  }
  std::stable_sort(eligible.begin(), eligible.end(),
                   [&](int a, int b) { return payload[a] > payload[b]; });
  if (static_cast<int>(eligible.size()) > cfg.num_subcarriers) {
    eligible.resize(cfg.num_subcarriers);
  }

  std::vector<char> used_w(cfg.num_subcarriers, 0);
  for (int n : eligible) {
    int w = -1;
    double best_gain = -1.0;
    for (int v = 0; v < cfg.num_subcarriers; ++v) {
      if (!used_w[v] && draws.channel.at(cfg.num_ess, n, v) > best_gain) {
        best_gain = draws.channel.at(cfg.num_ess, n, v);
        w = v;
      }
    }
    res.admitted[n] = 1;
    res.subcarrier_of[n] = w;
    used_w[w] = 1;
  }

  // The cloud constructs every partial DT up to its quality cap.
  res.rounds.assign(C, 0.0);
  for (int c = 0; c < C; ++c) {
    double cum = hist.cumulative_bits[c];
    for (int n : eligible) cum += draws.data(n, c, C);
    res.rounds[c] = max_training_rounds(cfg, c, cum, hist.frame);
  }

  res.outcome = centra_evaluate(cfg, draws, hist, res.admitted,
                                res.subcarrier_of, res.rounds);
  return res;
}

ScenarioConfig non_overlap_config(const ScenarioConfig& cfg) {
  ScenarioConfig restricted = cfg;
  restricted.max_assoc_per_sensor = 1;
  return restricted;
}

// ---------------------------------------------------------------------------
// Tabular Q-learning.

TabularQPolicy::TabularQPolicy(const TabularQConfig& cfg)
    : cfg_(cfg), epsilon_(cfg.epsilon_start) {}

int TabularQPolicy::state_key(const ScenarioConfig& cfg,
                              const HistoryState& hist) const {
  // Cap-reachability bit per DT (first 20 DTs at most, which covers any
  // realistic config while keeping the key within int range).
  int bits = 0;
  const int tracked = std::min(cfg.num_partial_dts, 20);
  for (int c = 0; c < tracked; ++c) {
    const double gamma =
        gamma_factor(cfg, hist.cumulative_bits[c], hist.frame);
    if (gamma >= cfg.required_quality[c]) bits |= 1 << c;
  }

  int assoc = 0;
  for (std::uint8_t y : hist.prev_association) assoc += y;
  const double cap =
      static_cast<double>(cfg.num_sensors) * cfg.max_assoc_per_sensor;
  const int load_bucket =
      std::min(3, static_cast<int>(4.0 * static_cast<double>(assoc) / cap));

  return (bits * 4 + load_bucket) * 3 + slack_bucket_;
}

std::array<double, TabularQPolicy::kNumActions>& TabularQPolicy::row(int key) {
  auto [it, inserted] = table_.try_emplace(key);
  if (inserted) it->second.fill(0.0);
  return it->second;
}

const std::array<double, TabularQPolicy::kNumActions>&
TabularQPolicy::action_values(int key) {
  return row(key);
}

FrameDecision TabularQPolicy::build_decision(const ScenarioConfig& cfg,
                                             const FrameDraws& draws,
                                             const HistoryState& hist,
                                             int action) const {
  const int assign_t = action / (kAssociationTemplates * kRoundLevels);
  const int assoc_t = (action / kRoundLevels) % kAssociationTemplates;
  const int round_level = action % kRoundLevels;

  FrameDecision d = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                        cfg.num_sensors, cfg.num_subcarriers);

  const bool has_prev =
      std::find(hist.prev_assignment.begin(), hist.prev_assignment.end(),
                std::uint8_t{1}) != hist.prev_assignment.end();
  switch (assign_t) {
    case 0: {  // importance-ranked DTs onto data-ranked ESs
      const std::vector<int> dts = rank_dts(cfg, draws);
      const std::vector<int> ess = rank_ess(cfg, draws);
      for (int i = 0; i < cfg.num_partial_dts; ++i) d.x(dts[i], ess[i]) = 1;
      break;
    }
    case 1: {  // keep previous hosts (identity before any exist)
      if (has_prev) {
        d.assignment = hist.prev_assignment;
      } else {
        for (int c = 0; c < cfg.num_partial_dts; ++c) d.x(c, c) = 1;
      }
      break;
    }
    default: {  // identity
      for (int c = 0; c < cfg.num_partial_dts; ++c) d.x(c, c) = 1;
      break;
    }
  }

  switch (assoc_t) {
    case 0: {  // greedy fill: best-rate eligible sensors up to the caps
      for (int b = 0; b < cfg.num_ess; ++b) {
        if (d.dt_at(b) < 0) continue;
        std::vector<int> cands = eligible_sensors(cfg, draws.channel, b);
        std::stable_sort(cands.begin(), cands.end(), [&](int lhs, int rhs) {
          return proxy_rate(cfg, draws.channel, lhs, b) >
                 proxy_rate(cfg, draws.channel, rhs, b);
        });
        for (int n : cands) {
          if (grants_at(cfg, d, b) >= cfg.num_subcarriers) break;
          if (d.association_count(n) >= cfg.max_assoc_per_sensor) continue;
          const int w = best_free_subcarrier(cfg, draws.channel, d, b, n);
          if (w < 0) break;
          d.y(b, n) = 1;
          d.z(b, n, w) = 1;
        }
      }
      break;
    }
    case 1: {  // keep previous associations; re-grant subcarriers by gain
      d.association = hist.prev_association;
      for (int b = 0; b < cfg.num_ess; ++b) {
        for (int n = 0; n < cfg.num_sensors; ++n) {
          if (!d.y(b, n)) continue;
          if (grants_at(cfg, d, b) >= cfg.num_subcarriers) break;
          const int w = best_free_subcarrier(cfg, draws.channel, d, b, n);
          if (w >= 0) d.z(b, n, w) = 1;
        }
      }
      break;
    }
    default:  // no associations
      break;
  }

  const std::vector<int> bounds = per_es_round_bounds(cfg, draws, d, hist);
  const double fraction = static_cast<double>(round_level) / (kRoundLevels - 1);
  for (int b = 0; b < cfg.num_ess; ++b) {
    d.training_rounds[b] = std::floor(fraction * bounds[b]);
  }
  return d;
}

FrameDecision TabularQPolicy::act(const ScenarioConfig& cfg,
                                  const FrameDraws& draws,
                                  const HistoryState& hist, bool learn,
                                  Rng& rng) {
  const int key = state_key(cfg, hist);

  if (learn && has_pending_) {
    // unordered_map references stay valid across inserts, so taking both
    // rows up front is safe even when `key` is new.
    const auto& next_values = row(key);
    auto& prev = row(pending_key_);
    const double bootstrap =
        *std::max_element(next_values.begin(), next_values.end());
    prev[pending_action_] +=
        cfg_.learning_rate *
        (pending_reward_ + cfg_.discount * bootstrap - prev[pending_action_]);
  }
  has_pending_ = false;

  const auto& values = row(key);
  int action = 0;
  if (learn && rng.uniform01() < epsilon_) {
    action = rng.uniform_int(0, kNumActions - 1);
  } else if (learn) {
    // Exploit: among maximal actions pick uniformly (an untrained row is all
    // ties, making the untrained policy uniform over the coarse actions).
    std::vector<int> arg;
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < kNumActions; ++a) {
      if (values[a] > best) {
        best = values[a];
        arg.assign(1, a);
      } else if (values[a] == best) {
        arg.push_back(a);
      }
    }
    action = arg[arg.size() == 1
                     ? 0
                     : static_cast<std::size_t>(rng.uniform_int(
                           0, static_cast<int>(arg.size()) - 1))];
  } else {
    for (int a = 1; a < kNumActions; ++a) {
      if (values[a] > values[action]) action = a;
    }
  }

  if (learn) {
    epsilon_ = std::max(cfg_.epsilon_floor, epsilon_ * cfg_.epsilon_decay);
    pending_key_ = key;
    pending_action_ = action;
  }
  return build_decision(cfg, draws, hist, action);
}

void TabularQPolicy::observe_reward(const ScenarioConfig& cfg,
                                    const FrameOutcome& outcome) {
  pending_reward_ = outcome.shaped_utility;
  has_pending_ = true;
  if (!outcome.deadline_met) {
    slack_bucket_ = 2;
  } else if (outcome.tau_total > 0.8 * cfg.frame_deadline_s) {
    slack_bucket_ = 1;  // met, but within 20% of the wire
  } else {
    slack_bucket_ = 0;
  }
}

void TabularQPolicy::finish_episode() {
  if (!has_pending_) return;
  auto& prev = row(pending_key_);
  prev[pending_action_] +=
      cfg_.learning_rate * (pending_reward_ - prev[pending_action_]);
  has_pending_ = false;
}

TabularQPolicy train_tabular_q(const ScenarioConfig& tmpl,
                               std::uint64_t train_seed, int episodes,
                               int frames_per_episode,
                               const TabularQConfig& qcfg) {
  TabularQPolicy policy(qcfg);
  for (int e = 0; e < episodes; ++e) {
    const std::uint64_t world = episode_world_seed(train_seed, e);
    const ScenarioConfig cfg = generate_scenario(world, tmpl);
    HistoryState hist = HistoryState::initial(cfg);
    for (int t = 1; t <= frames_per_episode; ++t) {
      const FrameDraws draws = frame_draws(cfg, world, t);
      Rng rng = stream_rng(world, Stream::kQlearn, t);
      const FrameDecision d = policy.act(cfg, draws, hist, /*learn=*/true, rng);
      const FrameOutcome out = evaluate_frame(cfg, draws, d, hist);
      policy.observe_reward(cfg, out);
      hist.advance(d, out.collected_bits);
    }
    policy.finish_episode();
  }
  return policy;
}

}  // namespace fedtwin
