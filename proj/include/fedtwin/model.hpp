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
// Closed-form frame accounting: uplink rates with co-channel interference,
// collected-data volumes, partial-DT quality as a function of cumulative data
// and training rounds, per-stage latencies/energies (data transfer, model
// migration, model creation, model transfer, cloud integration), utilities,
// and the marginal contribution of one sensor to one coalition.
//
// Everything here is a pure function of its inputs.

#ifndef FEDTWIN_MODEL_HPP_
#define FEDTWIN_MODEL_HPP_

#include <vector>

#include "fedtwin/types.hpp"

namespace fedtwin {

// ---------------------------------------------------------------------------
// Quality curve.

// Diminishing-returns data factor: (log2(S / (t*beta) + 1))^2 for S cumulative
// bits at frame t. Zero when S == 0.
double gamma_factor(const ScenarioConfig& cfg, double cumulative_bits, int frame);

// Convergence factor of T (possibly fractional) training rounds:
// 1 - 2^(-T * (2 - L*delta) * delta * gamma / 2). Zero at T == 0, tends to 1.
double round_quality(const ScenarioConfig& cfg, double rounds);

// Quality of partial DT c: min(required_quality_c, gamma_factor * round_quality).
double partial_dt_quality(const ScenarioConfig& cfg, int c,
                          double cumulative_bits, int frame, double rounds);

// Smallest integer round count whose quality reaches the required cap, i.e.
// ceil of the exact crossing point, nudged up by at most one round if floating
// point lands the ceil a hair under the cap. When gamma_factor never reaches
// the cap (including S == 0) the target is unreachable and the configured
// clamp is returned: beyond it extra rounds only burn energy. Returns 0 only
// via the ES-level overload below for hostless ESs.
int max_training_rounds(const ScenarioConfig& cfg, int c, double cumulative_bits,
                        int frame);

// Per-ES bound: rounds for the hosted DT, 0 if ES b hosts none.
int max_training_rounds_at_es(const ScenarioConfig& cfg, const FrameDecision& d,
                              int b, const std::vector<double>& cumulative_with_new,
                              int frame);

// ---------------------------------------------------------------------------
// Radio.

// Uplink rate of sensor n toward ES b in bit/s, summed over the subcarriers
// granted to (b,n): W * log2(1 + P_n*H_{n,b,w} / (interference + noise_b)).
// Interference on subcarrier w gathers every other transmitter holding w
// anywhere in the system, seen through its gain toward receiver b; terms of
// the same sensor n are excluded (one radio emits one waveform per
// subcarrier — it cannot jam itself). Zero if n is not associated with b or
// holds no subcarrier there.
double transmission_rate(const ScenarioConfig& cfg, const ChannelState& channel,
                         const FrameDecision& d, int n, int b);

// All pairwise rates at once, rates[b][n]; same semantics, shared
// interference precomputation.
std::vector<std::vector<double>> transmission_rates(const ScenarioConfig& cfg,
                                                    const ChannelState& channel,
                                                    const FrameDecision& d);

// Interference-free best-subcarrier rate of sensor n at receiver b (receiver
// index num_ess selects the cloud). This is the dedicated-link figure used
// for eligibility filtering and inside the coalition game.
double proxy_rate(const ScenarioConfig& cfg, const ChannelState& channel, int n,
                  int receiver);

// ---------------------------------------------------------------------------
// Data collection.

// Per-DT new data: d_c = sum_b x_{c,b} * sum_n y_{b,n} * d_{n,c}. The literal
// association sum; the frame evaluator instead counts only members that hold
// a live link (see FrameOutcome::collected_bits).
std::vector<double> collected_data(const FrameDecision& d,
                                   const std::vector<double>& data_bits);

// Per-DT data the decision actually moves this frame: only members holding a
// subcarrier with a nonzero rate count. This is what evaluate_frame books.
std::vector<double> live_collected_bits(const ScenarioConfig& cfg,
                                        const FrameDraws& draws,
                                        const FrameDecision& d);

// Per-ES useful-round bounds under this decision and frame (cumulative data
// plus the live-collected batch); the exact bounds evaluate_frame enforces.
// Zero for ESs hosting no partial DT.
std::vector<int> per_es_round_bounds(const ScenarioConfig& cfg,
                                     const FrameDraws& draws,
                                     const FrameDecision& d,
                                     const HistoryState& hist);

// Global-DT integration overhead at the cloud. A function of the config
// alone: every partial DT is integrated each frame, whatever its quality.
// Latency is model-size compute at the cloud CPU; energy adds the per-DT
// instruction draw at peak power plus idle and leakage power over the
// integration window.
double integration_latency(const ScenarioConfig& cfg);
double integration_energy(const ScenarioConfig& cfg);

// ---------------------------------------------------------------------------
// Frame evaluation.

// Final scoring shared by every framework: U = xi*gain - kappa*energy and the
// shaped per-frame score U - config_cost*changes - psi*max(0, tau - deadline).
// Keeping this in one place guarantees all frameworks are scored identically.
struct UtilityScore {
  double utility = 0.0;
  double shaped_utility = 0.0;
  bool deadline_met = true;
  double deadline_excess_s = 0.0;
};
UtilityScore score_frame(const ScenarioConfig& cfg, double global_quality,
                         double e_total, int config_changes, double tau_total);

// Computes the complete FrameOutcome for one frame. Throws
// std::invalid_argument when the decision violates structural feasibility or
// exceeds the per-ES round bound given this frame's data.
FrameOutcome evaluate_frame(const ScenarioConfig& cfg, const FrameDraws& draws,
                            const FrameDecision& d, const HistoryState& hist);

// Marginal contribution of sensor n to the coalition of ES b, evaluated in
// closed form: the quality delta with and without n's data (rounds rescaled
// proportionally to the changed useful-round bound), minus the weighted
// marginal transmission and creation energy, minus the configuration-cost
// delta (+cost if n is a fresh association, -cost if dropping n would undo a
// kept one). Equals the difference of the two full frame evaluations of ES
// b's utility, with and without n. Throws std::invalid_argument if n is not
// associated with b.
double sensor_contribution(const ScenarioConfig& cfg, const FrameDraws& draws,
                           const FrameDecision& d, const HistoryState& hist,
                           int b, int n);

// Creation energy per training round at an ES-class CPU:
// switched_capacitance * F^2 * cycles_per_bit.
double creation_energy_per_round(const ScenarioConfig& cfg);

}  // namespace fedtwin

#endif  // FEDTWIN_MODEL_HPP_
