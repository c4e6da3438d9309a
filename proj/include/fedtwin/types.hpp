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
// Core domain types of the federated digital-twin construction simulator.
//
// The system: a cloud server, |B| edge servers (ES), |N| wireless sensors.
// Each time frame the global DT is rebuilt from |C| partial DTs; each partial
// DT is hosted by exactly one ES, trained on feature data uplinked by that
// ES's sensor coalition, then uploaded to the cloud for integration. Sensors
// may serve several coalitions at once (overlap), bounded per sensor.
//
// Conventions: all data volumes in bits, rates in bit/s, powers in watts,
// energies in joules, latencies in seconds. Frames are 1-based.

#ifndef FEDTWIN_TYPES_HPP_
#define FEDTWIN_TYPES_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace fedtwin {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

// Immutable description of one simulated world. Default values reproduce the
// reference parameter table (counts 5/5/20/10, 64 MHz edge CPUs, 7.6 s
// deadline, ...); interval-valued parameters are filled in per seed by the
// scenario generator.
struct ScenarioConfig {
  // Topology sizes.
  int num_partial_dts = 5;   // |C|
  int num_ess = 5;           // |B|
  int num_sensors = 20;      // |N|
  int num_subcarriers = 10;  // |W| per ES
  int max_assoc_per_sensor = 3;  // L_n, uniform across sensors

  // Radio. noise_power_w is total in-band noise per ES: the noise spectral
  // density (-104 dBm/Hz by default) times the subcarrier bandwidth.
  double subcarrier_bandwidth_hz = 2e6;
  std::vector<double> sensor_tx_power_w;  // P_n, size |N|
  std::vector<double> noise_power_w;      // sigma^2_b, size |B|
  std::vector<double> min_rate_bps;       // R_Min per ES, size |B|

  // Wired backhaul.
  std::vector<double> es_tx_power_w;            // P_b, size |B|
  std::vector<double> fiber_es_cloud_bps;       // ES -> cloud, size |B|
  std::vector<double> fiber_cloud_es_bps;       // cloud -> ES, size |B|
  std::vector<std::vector<double>> fiber_es_es_bps;  // |B|x|B|, diagonal unused

  // Compute.
  double cpu_cycles_per_bit_es = 120.0;   // cycles per bit of training data
  double cpu_speed_es_hz = 64e6;
  double cpu_cycles_per_bit_cloud = 120.0;
  double cpu_speed_cloud_hz = 3e9;
  double switched_capacitance = 1e-16;    // effective capacitance coefficient
  double cloud_access_rate_s = 1e-7;      // seconds per cloud instruction
  std::vector<double> cloud_instr_per_dt;  // integration instructions, size |C|
  double cloud_power_max_w = 30.0;
  double cloud_power_idle_w = 5.0;
  double cloud_power_leak_w = 1.0;

  // Model-quality curve. Quality of a partial DT after T training rounds on
  // S cumulative bits at frame t:
  //   A = min(required_quality, Gamma(S) * (1 - 2^(-T*(2-L*delta)*delta*gamma/2)))
  //   Gamma(S) = (log2(S / (t*beta) + 1))^2
  // beta is expressed in beta_unit_scale bits (default: kilobits).
  double lipschitz_l = 8.0;
  double learning_rate_delta = 0.02;
  double strong_convexity_gamma = 2.0;
  double log_norm_beta = 200.0;
  double beta_unit_scale = 1000.0;
  std::vector<double> required_quality;  // A_c in (0,1], size |C|
  std::vector<double> model_size_bits;   // D_c, size |C|
  int max_rounds_clamp = 200;  // rounds bound when the cap is unreachable

  // Utility weights and shaping.
  double gain_weight_xi = 15.0;
  double cost_weight_kappa = 0.1;
  double config_cost = 1.0;        // charged per association change
  double frame_deadline_s = 7.6;
  double discount_eta = 0.92;
  double penalty_psi = 10.0;       // deadline-violation slope

  // Geometry. Inert in the rate formulas (channel gains are drawn, not
  // derived from distance) but part of the world description.
  double area_side_m = 1000.0;
  std::vector<Vec2> es_pos;      // size |B|
  std::vector<Vec2> sensor_pos;  // size |N|

  // Per-frame draw supports.
  std::vector<double> gain_levels = {0.2, 0.4, 0.6};  // channel gain values
  double data_min_bits = 200e3;  // d_{n,c}(t) lower bound
  double data_max_bits = 600e3;  // d_{n,c}(t) upper bound

  double beta_bits() const { return log_norm_beta * beta_unit_scale; }

  // Throws std::invalid_argument on any violated invariant (sizes, ranges,
  // delta in (0, 2/L), |B| >= |C|, positivity).
  void validate() const;
};

// Channel gains for one frame. gains are indexed [receiver][sensor][subcarrier]
// where receivers 0..|B|-1 are the ESs and receiver |B| is the cloud (used by
// the centralized baseline only; drawn from the same stream so that every
// framework sees the same world for a given seed).
struct ChannelState {
  int frame = 0;
  int num_receivers = 0;
  int num_sensors = 0;
  int num_subcarriers = 0;
  std::vector<double> gains;  // flattened, size num_receivers*|N|*|W|

  double at(int receiver, int n, int w) const {
    return gains[(static_cast<std::size_t>(receiver) * num_sensors + n) *
                     num_subcarriers +
                 w];
  }
  double& at(int receiver, int n, int w) {
    return gains[(static_cast<std::size_t>(receiver) * num_sensors + n) *
                     num_subcarriers +
                 w];
  }
};

// Everything the world throws at frame t: channel, importance weights,
// fresh sensor data volumes.
struct FrameDraws {
  ChannelState channel;
  std::vector<double> importance;   // I_c(t) in [0,1], size |C|
  std::vector<double> data_bits;    // d_{n,c}(t), flattened |N|x|C|

  double data(int n, int c, int num_dts) const {
    return data_bits[static_cast<std::size_t>(n) * num_dts + c];
  }
};

// All decision variables of one frame: partial-DT assignment x, ES-sensor
// association y, subcarrier grants z, per-ES training rounds T.
//
// training_rounds is integer-valued for every decision emitted by a policy in
// this codebase; the field is real because the coalition game evaluates
// hypothetical coalitions at proportionally rescaled (non-integral) round
// counts and both paths share the frame evaluator.
struct FrameDecision {
  int num_dts = 0;
  int num_ess = 0;
  int num_sensors = 0;
  int num_subcarriers = 0;
  std::vector<std::uint8_t> assignment;   // x, |C|x|B|
  std::vector<std::uint8_t> association;  // y, |B|x|N|
  std::vector<std::uint8_t> subcarriers;  // z, |B|x|N|x|W|
  std::vector<double> training_rounds;    // T_b >= 0, size |B|

  static FrameDecision zero(int dts, int ess, int sensors, int subcarriers);

  std::uint8_t x(int c, int b) const {
    return assignment[static_cast<std::size_t>(c) * num_ess + b];
  }
  std::uint8_t& x(int c, int b) {
    return assignment[static_cast<std::size_t>(c) * num_ess + b];
  }
  std::uint8_t y(int b, int n) const {
    return association[static_cast<std::size_t>(b) * num_sensors + n];
  }
  std::uint8_t& y(int b, int n) {
    return association[static_cast<std::size_t>(b) * num_sensors + n];
  }
  std::uint8_t z(int b, int n, int w) const {
    return subcarriers[(static_cast<std::size_t>(b) * num_sensors + n) *
                           num_subcarriers +
                       w];
  }
  std::uint8_t& z(int b, int n, int w) {
    return subcarriers[(static_cast<std::size_t>(b) * num_sensors + n) *
                           num_subcarriers +
                       w];
  }

  // Partial-DT hosted by ES b, or -1.
  int dt_at(int b) const {
    for (int c = 0; c < num_dts; ++c) {
      if (x(c, b)) return c;
    }
    return -1;
  }
  // ES hosting partial-DT c, or -1.
  int host_of(int c) const {
    for (int b = 0; b < num_ess; ++b) {
      if (x(c, b)) return b;
    }
    return -1;
  }
  int association_count(int n) const {
    int k = 0;
    for (int b = 0; b < num_ess; ++b) k += y(b, n);
    return k;
  }
};

// Structural feasibility: every DT hosted exactly once, at most one DT per
// ES, per-sensor association cap, per-ES subcarrier budget, z implies y, at
// most one sensor per (ES, subcarrier), rounds finite and nonnegative.
// Returns human-readable violations; empty means feasible. The round upper
// bound (T_b <= max useful rounds) depends on frame context and is enforced
// by the frame evaluator, not here.
std::vector<std::string> decision_violations(const ScenarioConfig& cfg,
                                             const FrameDecision& d);

// Carry-over state between frames. At t=1 the previous decision matrices are
// all zero: no migration sources, and every initial association counts as a
// configuration change.
struct HistoryState {
  int frame = 1;  // index t of the frame about to be evaluated
  std::vector<double> cumulative_bits;     // sum_{i<t} d_c(i), size |C|
  std::vector<double> prev_collected_bits;     // d_c(t-1), size |C|
  std::vector<std::uint8_t> prev_assignment;   // x(t-1), |C|x|B|
  std::vector<std::uint8_t> prev_association;  // y(t-1), |B|x|N|

  static HistoryState initial(const ScenarioConfig& cfg);

  std::uint8_t prev_x(int c, int b) const {
    return prev_assignment[static_cast<std::size_t>(c) * num_ess_ + b];
  }
  std::uint8_t prev_y(int b, int n) const {
    return prev_association[static_cast<std::size_t>(b) * num_sensors_ + n];
  }
  int prev_host_of(int c) const {
    for (int b = 0; b < num_ess_; ++b) {
      if (prev_x(c, b)) return b;
    }
    return -1;
  }

  // Fold a completed frame into the history: cumulative data grows by the
  // frame's collected volumes and the decision becomes the new "previous".
  void advance(const FrameDecision& d, const std::vector<double>& collected_bits);

  int num_ess_ = 0;
  int num_sensors_ = 0;
};

// Every computed quantity of one frame.
struct FrameOutcome {
  std::vector<double> collected_bits;  // d_c(t), size |C|
  std::vector<double> quality;         // A_c(t) at its host, size |C|
  double global_quality = 0.0;         // importance-weighted sum

  // Per-ES stage latencies (s) and energies (J), size |B| each.
  std::vector<double> tau_dtr, tau_back, tau_cre, tau_mtr;
  std::vector<double> e_dtr, e_back, e_cre, e_mtr;
  double tau_integration = 0.0;
  double e_integration = 0.0;
  double tau_total = 0.0;  // max over ES pipelines + integration
  double e_total = 0.0;    // sum over all stages

  double utility = 0.0;        // gain_weight*global_quality - cost_weight*e_total
  double cloud_utility = 0.0;  // identical by construction; kept for audits
  std::vector<double> es_utility;          // size |B|
  std::vector<int> config_changes_per_es;  // association changes at each ES
  int config_changes = 0;                  // total F(t)
  bool deadline_met = true;
  double deadline_excess_s = 0.0;  // max(0, tau_total - deadline)

  // utility - config_cost*F - penalty_psi*deadline_excess: the per-frame term
  // of the cumulative score used across experiments.
  double shaped_utility = 0.0;
};

}  // namespace fedtwin

#endif  // FEDTWIN_TYPES_HPP_
