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

#include "fedtwin/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "strformat.hpp"

namespace fedtwin {

namespace {

// Exponential decay rate of the residual training error per round; positive
// because the config invariant pins learning_rate_delta < 2 / lipschitz_l.
double round_decay(const ScenarioConfig& cfg) {
  return (2.0 - cfg.lipschitz_l * cfg.learning_rate_delta) *
         cfg.learning_rate_delta * cfg.strong_convexity_gamma / 2.0;
}

}  // namespace

double gamma_factor(const ScenarioConfig& cfg, double cumulative_bits, int frame) {
  const double u = cumulative_bits / (static_cast<double>(frame) * cfg.beta_bits());
  const double l = std::log2(u + 1.0);
  return l * l;
}

double round_quality(const ScenarioConfig& cfg, double rounds) {
  return 1.0 - std::exp2(-rounds * round_decay(cfg));
}

double partial_dt_quality(const ScenarioConfig& cfg, int c, double cumulative_bits,
                          int frame, double rounds) {
  const double raw =
      gamma_factor(cfg, cumulative_bits, frame) * round_quality(cfg, rounds);
  return std::min(cfg.required_quality[c], raw);
}

int max_training_rounds(const ScenarioConfig& cfg, int c, double cumulative_bits,
                        int frame) {
  const double gamma = gamma_factor(cfg, cumulative_bits, frame);
  const double target = cfg.required_quality[c];
  if (gamma <= target) return cfg.max_rounds_clamp;  // cap unreachable
  // Smallest T with gamma * (1 - 2^(-T*decay)) >= target:
  //   T = -log2(1 - target/gamma) / decay, rounded up.
  const double exact = -std::log2(1.0 - target / gamma) / round_decay(cfg);
  int rounds = static_cast<int>(std::ceil(exact));
  if (rounds < 1) rounds = 1;
  // Guard the ceil against floating-point shortfall at the crossing point.
  if (gamma * round_quality(cfg, rounds) < target) ++rounds;
  return std::min(rounds, cfg.max_rounds_clamp);
}

int max_training_rounds_at_es(const ScenarioConfig& cfg, const FrameDecision& d,
                              int b,
                              const std::vector<double>& cumulative_with_new,
                              int frame) {
  const int c = d.dt_at(b);
  if (c < 0) return 0;
  return max_training_rounds(cfg, c, cumulative_with_new[c], frame);
}

namespace {

// Interference power observed at `receiver` on subcarrier w, excluding every
// term of transmitter `self`.
double interference_at(const ScenarioConfig& cfg, const ChannelState& channel,
                       const std::vector<std::vector<int>>& holders_per_w,
                       int receiver, int w, int self) {
  double sum = 0.0;
  for (int n : holders_per_w[w]) {
    if (n == self) continue;
    sum += cfg.sensor_tx_power_w[n] * channel.at(receiver, n, w);
  }
  return sum;
}

// Sensors transmitting on each subcarrier, anywhere in the system,
// de-duplicated (a sensor granted the same subcarrier at two ESs emits one
// waveform on it).
std::vector<std::vector<int>> subcarrier_holders(const FrameDecision& d) {
  std::vector<std::vector<int>> holders(d.num_subcarriers);
  for (int w = 0; w < d.num_subcarriers; ++w) {
    for (int n = 0; n < d.num_sensors; ++n) {
      for (int b = 0; b < d.num_ess; ++b) {
        if (d.z(b, n, w)) {
          holders[w].push_back(n);
          break;
        }
      }
    }
  }
  return holders;
}

double rate_for_pair(const ScenarioConfig& cfg, const ChannelState& channel,
                     const FrameDecision& d,
                     const std::vector<std::vector<int>>& holders_per_w, int n,
                     int b) {
  if (!d.y(b, n)) return 0.0;
  double rate = 0.0;
  for (int w = 0; w < d.num_subcarriers; ++w) {
    if (!d.z(b, n, w)) continue;
    const double signal = cfg.sensor_tx_power_w[n] * channel.at(b, n, w);
    const double disturb =
        interference_at(cfg, channel, holders_per_w, b, w, n) +
        cfg.noise_power_w[b];
    rate += cfg.subcarrier_bandwidth_hz * std::log2(1.0 + signal / disturb);
  }
  return rate;
}

}  // namespace

double transmission_rate(const ScenarioConfig& cfg, const ChannelState& channel,
                         const FrameDecision& d, int n, int b) {
  return rate_for_pair(cfg, channel, d, subcarrier_holders(d), n, b);
}

std::vector<std::vector<double>> transmission_rates(const ScenarioConfig& cfg,
                                                    const ChannelState& channel,
                                                    const FrameDecision& d) {
  const auto holders = subcarrier_holders(d);
  std::vector<std::vector<double>> rates(
      d.num_ess, std::vector<double>(d.num_sensors, 0.0));
  for (int b = 0; b < d.num_ess; ++b) {
    for (int n = 0; n < d.num_sensors; ++n) {
      rates[b][n] = rate_for_pair(cfg, channel, d, holders, n, b);
    }
  }
  return rates;
}

double proxy_rate(const ScenarioConfig& cfg, const ChannelState& channel, int n,
                  int receiver) {
  double best_gain = 0.0;
  for (int w = 0; w < channel.num_subcarriers; ++w) {
    best_gain = std::max(best_gain, channel.at(receiver, n, w));
  }
  const double noise = receiver < cfg.num_ess
                           ? cfg.noise_power_w[receiver]
                           : cfg.noise_power_w.front();
  return cfg.subcarrier_bandwidth_hz *
         std::log2(1.0 + cfg.sensor_tx_power_w[n] * best_gain / noise);
}

std::vector<double> collected_data(const FrameDecision& d,
                                   const std::vector<double>& data_bits) {
  std::vector<double> out(d.num_dts, 0.0);
  for (int c = 0; c < d.num_dts; ++c) {
    for (int b = 0; b < d.num_ess; ++b) {
      if (!d.x(c, b)) continue;
      for (int n = 0; n < d.num_sensors; ++n) {
        if (d.y(b, n)) {
          out[c] += data_bits[static_cast<std::size_t>(n) * d.num_dts + c];
        }
      }
    }
  }
  return out;
}

double creation_energy_per_round(const ScenarioConfig& cfg) {
  return cfg.switched_capacitance * cfg.cpu_speed_es_hz * cfg.cpu_speed_es_hz *
         cfg.cpu_cycles_per_bit_es;
}

std::vector<double> live_collected_bits(const ScenarioConfig& cfg,
                                        const FrameDraws& draws,
                                        const FrameDecision& d) {
  const auto rates = transmission_rates(cfg, draws.channel, d);
  std::vector<double> out(cfg.num_partial_dts, 0.0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    const int c = d.dt_at(b);
    if (c < 0) continue;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (d.y(b, n) && rates[b][n] > 0.0) {
        out[c] += draws.data(n, c, cfg.num_partial_dts);
      }
    }
  }
  return out;
}

std::vector<int> per_es_round_bounds(const ScenarioConfig& cfg,
                                     const FrameDraws& draws,
                                     const FrameDecision& d,
                                     const HistoryState& hist) {
  const auto collected = live_collected_bits(cfg, draws, d);
  std::vector<double> cum_with_new(cfg.num_partial_dts);
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    cum_with_new[c] = hist.cumulative_bits[c] + collected[c];
  }
  std::vector<int> bounds(cfg.num_ess, 0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    bounds[b] = max_training_rounds_at_es(cfg, d, b, cum_with_new, hist.frame);
  }
  return bounds;
}

double integration_latency(const ScenarioConfig& cfg) {
  double tau = 0.0;
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    tau += cfg.model_size_bits[c] * cfg.cpu_cycles_per_bit_cloud /
           cfg.cpu_speed_cloud_hz;
  }
  return tau;
}

double integration_energy(const ScenarioConfig& cfg) {
  double e = 0.0;
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    e += cfg.cloud_access_rate_s * cfg.cloud_instr_per_dt[c] *
         cfg.cloud_power_max_w;
  }
  return e + integration_latency(cfg) *
                 (cfg.cloud_power_idle_w + cfg.cloud_power_leak_w);
}

UtilityScore score_frame(const ScenarioConfig& cfg, double global_quality,
                         double e_total, int config_changes, double tau_total) {
  UtilityScore s;
  s.utility = cfg.gain_weight_xi * global_quality -
              cfg.cost_weight_kappa * e_total;
  s.deadline_met = tau_total <= cfg.frame_deadline_s;
  s.deadline_excess_s = std::max(0.0, tau_total - cfg.frame_deadline_s);
  s.shaped_utility = s.utility - cfg.config_cost * config_changes -
                     cfg.penalty_psi * s.deadline_excess_s;
  return s;
}

FrameOutcome evaluate_frame(const ScenarioConfig& cfg, const FrameDraws& draws,
                            const FrameDecision& d, const HistoryState& hist) {
  {
    const auto violations = decision_violations(cfg, d);
    if (!violations.empty()) {
      std::string msg = "infeasible decision:";
      for (const auto& v : violations) msg += " [" + v + "]";
      throw std::invalid_argument(msg);
    }
  }

  const int B = cfg.num_ess;
  const int C = cfg.num_partial_dts;
  const int t = hist.frame;

  FrameOutcome out;
  out.collected_bits.assign(C, 0.0);
  out.quality.assign(C, 0.0);
  out.tau_dtr.assign(B, 0.0);
  out.tau_back.assign(B, 0.0);
  out.tau_cre.assign(B, 0.0);
  out.tau_mtr.assign(B, 0.0);
  out.e_dtr.assign(B, 0.0);
  out.e_back.assign(B, 0.0);
  out.e_cre.assign(B, 0.0);
  out.e_mtr.assign(B, 0.0);
  out.es_utility.assign(B, 0.0);
  out.config_changes_per_es.assign(B, 0);

  const auto rates = transmission_rates(cfg, draws.channel, d);

  // Data volumes actually moved this frame: association alone is not enough,
  // the member must also hold a live subcarrier (rate > 0).
  for (int b = 0; b < B; ++b) {
    const int c = d.dt_at(b);
    if (c < 0) continue;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (d.y(b, n) && rates[b][n] > 0.0) {
        out.collected_bits[c] += draws.data(n, c, C);
      }
    }
  }

  // Round bound check needs cumulative data including this frame's batch.
  std::vector<double> cum_with_new(C);
  for (int c = 0; c < C; ++c) {
    cum_with_new[c] = hist.cumulative_bits[c] + out.collected_bits[c];
  }
  for (int b = 0; b < B; ++b) {
    const int bound = max_training_rounds_at_es(cfg, d, b, cum_with_new, t);
    if (d.training_rounds[b] > static_cast<double>(bound)) {
      throw std::invalid_argument(
          strformat("infeasible decision: ES %d trains %.3f rounds, bound is %d",
                    b, d.training_rounds[b], bound));
    }
  }

  const double creation_j_per_round = creation_energy_per_round(cfg);

  for (int b = 0; b < B; ++b) {
    const int c = d.dt_at(b);
    const double rounds = d.training_rounds[b];

    if (c >= 0) {
      // Uplink collection: pipeline latency is the slowest member, energy the
      // sum over members.
      for (int n = 0; n < cfg.num_sensors; ++n) {
        if (!d.y(b, n) || rates[b][n] <= 0.0) continue;
        const double secs = draws.data(n, c, C) / rates[b][n];
        out.tau_dtr[b] = std::max(out.tau_dtr[b], secs);
        out.e_dtr[b] += cfg.sensor_tx_power_w[n] * secs;
      }

      // Migration of the previously accumulated feature data when the DT
      // moved host since last frame.
      const int prev_host = hist.prev_host_of(c);
      if (prev_host >= 0 && prev_host != b) {
        const double vol = hist.cumulative_bits[c];
        const double fiber = cfg.fiber_es_es_bps[prev_host][b];
        out.tau_back[b] = vol / fiber;
        out.e_back[b] = cfg.es_tx_power_w[prev_host] * vol / fiber;
      }

      // Model creation over the fresh batch.
      out.tau_cre[b] = rounds * out.collected_bits[c] *
                       cfg.cpu_cycles_per_bit_es / cfg.cpu_speed_es_hz;

      // Partial-DT upload to the cloud; energy is metered over the
      // cloud-to-ES leg of the fiber.
      out.tau_mtr[b] = cfg.model_size_bits[c] / cfg.fiber_es_cloud_bps[b];
      out.e_mtr[b] = cfg.es_tx_power_w[b] * cfg.model_size_bits[c] /
                     cfg.fiber_cloud_es_bps[b];

      out.quality[c] = partial_dt_quality(cfg, c, cum_with_new[c], t, rounds);
      out.global_quality += draws.importance[c] * out.quality[c];
    }

    // Creation energy scales with rounds regardless of batch size (CPU at
    // full tilt for the round); zero only when no rounds run.
    out.e_cre[b] = rounds * creation_j_per_round;
  }

  // Cloud integration of all uploaded partial DTs (every DT has a host).
  out.tau_integration = integration_latency(cfg);
  out.e_integration = integration_energy(cfg);

  double slowest_pipeline = 0.0;
  for (int b = 0; b < B; ++b) {
    slowest_pipeline =
        std::max(slowest_pipeline, out.tau_dtr[b] + out.tau_back[b] +
                                       out.tau_cre[b] + out.tau_mtr[b]);
    out.e_total += out.e_dtr[b] + out.e_back[b] + out.e_cre[b] + out.e_mtr[b];
  }
  out.tau_total = slowest_pipeline + out.tau_integration;
  out.e_total += out.e_integration;

  // Association churn per ES and in total.
  for (int b = 0; b < B; ++b) {
    int changes = 0;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      changes += d.y(b, n) != hist.prev_y(b, n) ? 1 : 0;
    }
    out.config_changes_per_es[b] = changes;
    out.config_changes += changes;
  }

  const UtilityScore score = score_frame(cfg, out.global_quality, out.e_total,
                                         out.config_changes, out.tau_total);
  out.utility = score.utility;
  out.cloud_utility = out.utility;
  for (int b = 0; b < B; ++b) {
    const int c = d.dt_at(b);
    const double quality_term =
        c >= 0 ? draws.importance[c] * out.quality[c] : 0.0;
    const double es_energy =
        out.e_dtr[b] + out.e_back[b] + out.e_cre[b] + out.e_mtr[b];
    out.es_utility[b] = cfg.gain_weight_xi * quality_term -
                        cfg.cost_weight_kappa * es_energy -
                        cfg.config_cost * out.config_changes_per_es[b];
  }

  out.deadline_met = score.deadline_met;
  out.deadline_excess_s = score.deadline_excess_s;
  out.shaped_utility = score.shaped_utility;
  return out;
}

double sensor_contribution(const ScenarioConfig& cfg, const FrameDraws& draws,
                           const FrameDecision& d, const HistoryState& hist,
                           int b, int n) {
  if (!d.y(b, n)) {
    throw std::invalid_argument(strformat(
        "sensor_contribution: sensor %d is not a member at ES %d", n, b));
  }

  // Fresh association costs one configuration change; dropping a kept member
  // would cost one, so keeping it is worth +config_cost relative to removal.
  const double config_delta =
      cfg.config_cost * (hist.prev_y(b, n) ? -1.0 : 1.0);

  const int c = d.dt_at(b);
  if (c < 0) return -config_delta;  // memberships at hostless ESs only touch churn

  const auto rates = transmission_rates(cfg, draws.channel, d);
  const int t = hist.frame;
  const int C = cfg.num_partial_dts;

  double collected = 0.0;
  for (int m = 0; m < cfg.num_sensors; ++m) {
    if (d.y(b, m) && rates[b][m] > 0.0) collected += draws.data(m, c, C);
  }
  const double with_bits = hist.cumulative_bits[c] + collected;
  const bool live = rates[b][n] > 0.0;
  const double without_bits = live ? with_bits - draws.data(n, c, C) : with_bits;

  const double rounds = d.training_rounds[b];
  const int bound_with = max_training_rounds(cfg, c, with_bits, t);
  const int bound_without = max_training_rounds(cfg, c, without_bits, t);
  const double rescaled = rounds * bound_without / bound_with;

  const double quality_delta =
      partial_dt_quality(cfg, c, with_bits, t, rounds) -
      partial_dt_quality(cfg, c, without_bits, t, rescaled);
  const double creation_delta =
      (rounds - rescaled) * creation_energy_per_round(cfg);
  const double transmit_energy =
      live ? cfg.sensor_tx_power_w[n] * draws.data(n, c, C) / rates[b][n] : 0.0;

  return cfg.gain_weight_xi * draws.importance[c] * quality_delta -
         cfg.cost_weight_kappa * (creation_delta + transmit_energy) -
         config_delta;
}

}  // namespace fedtwin
