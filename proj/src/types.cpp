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

#include "fedtwin/types.hpp"

#include <cmath>
#include <stdexcept>

#include "strformat.hpp"

namespace fedtwin {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument("ScenarioConfig: " + msg);
}

void require_size(std::size_t got, int want, const char* name) {
  if (got != static_cast<std::size_t>(want)) {
    throw std::invalid_argument(std::string("ScenarioConfig: ") + name +
                                " has size " + std::to_string(got) +
                                ", expected " + std::to_string(want));
  }
}

void require_positive(const std::vector<double>& v, const char* name) {
  for (double x : v) {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw std::invalid_argument(std::string("ScenarioConfig: ") + name +
                                  " must be strictly positive and finite");
    }
  }
}

}  // namespace

void ScenarioConfig::validate() const {
  require(num_partial_dts > 0, "need at least one partial DT");
  require(num_ess >= num_partial_dts,
          "need at least as many ESs as partial DTs (one host each)");
  require(num_sensors > 0, "need at least one sensor");
  require(num_subcarriers > 0, "need at least one subcarrier");
  require(max_assoc_per_sensor >= 1, "association cap must be >= 1");
  require(lipschitz_l > 0.0, "lipschitz_l must be positive");
  require(learning_rate_delta > 0.0 &&
              learning_rate_delta < 2.0 / lipschitz_l,
          "learning_rate_delta must lie in (0, 2/lipschitz_l)");
  require(strong_convexity_gamma > 0.0, "strong_convexity_gamma must be positive");
  require(log_norm_beta > 0.0 && beta_unit_scale > 0.0,
          "log-normalization constant must be positive");
  require(subcarrier_bandwidth_hz > 0.0, "subcarrier bandwidth must be positive");
  require(max_rounds_clamp >= 1, "max_rounds_clamp must be >= 1");
  require(cpu_speed_es_hz > 0.0 && cpu_speed_cloud_hz > 0.0,
          "CPU speeds must be positive");
  require(cpu_cycles_per_bit_es > 0.0 && cpu_cycles_per_bit_cloud > 0.0,
          "CPU cycle costs must be positive");
  require(switched_capacitance > 0.0, "switched capacitance must be positive");
  require(cloud_access_rate_s > 0.0, "cloud access rate must be positive");
  require(frame_deadline_s > 0.0, "frame deadline must be positive");
  require(discount_eta > 0.0 && discount_eta < 1.0, "discount must be in (0,1)");
  require(penalty_psi >= 0.0, "penalty slope must be nonnegative");
  require(gain_weight_xi >= 0.0 && cost_weight_kappa >= 0.0 && config_cost >= 0.0,
          "utility weights must be nonnegative");
  require(data_min_bits > 0.0 && data_max_bits >= data_min_bits,
          "sensor data range must be positive and ordered");
  require(!gain_levels.empty(), "need at least one channel gain level");
  require_positive(gain_levels, "gain_levels");

  require_size(sensor_tx_power_w.size(), num_sensors, "sensor_tx_power_w");
  require_size(noise_power_w.size(), num_ess, "noise_power_w");
  require_size(min_rate_bps.size(), num_ess, "min_rate_bps");
  require_size(es_tx_power_w.size(), num_ess, "es_tx_power_w");
  require_size(fiber_es_cloud_bps.size(), num_ess, "fiber_es_cloud_bps");
  require_size(fiber_cloud_es_bps.size(), num_ess, "fiber_cloud_es_bps");
  require_size(fiber_es_es_bps.size(), num_ess, "fiber_es_es_bps");
  for (const auto& row : fiber_es_es_bps) {
    require_size(row.size(), num_ess, "fiber_es_es_bps row");
  }
  require_size(required_quality.size(), num_partial_dts, "required_quality");
  require_size(model_size_bits.size(), num_partial_dts, "model_size_bits");
  require_size(cloud_instr_per_dt.size(), num_partial_dts, "cloud_instr_per_dt");
  require_size(es_pos.size(), num_ess, "es_pos");
  require_size(sensor_pos.size(), num_sensors, "sensor_pos");

  require_positive(sensor_tx_power_w, "sensor_tx_power_w");
  require_positive(noise_power_w, "noise_power_w");
  require_positive(min_rate_bps, "min_rate_bps");
  require_positive(es_tx_power_w, "es_tx_power_w");
  require_positive(fiber_es_cloud_bps, "fiber_es_cloud_bps");
  require_positive(fiber_cloud_es_bps, "fiber_cloud_es_bps");
  require_positive(model_size_bits, "model_size_bits");
  require_positive(cloud_instr_per_dt, "cloud_instr_per_dt");
  for (int b = 0; b < num_ess; ++b) {
    for (int a = 0; a < num_ess; ++a) {
      if (a == b) continue;  // diagonal never used: same-host migration is free
      if (!(fiber_es_es_bps[b][a] > 0.0)) {
        throw std::invalid_argument(
            "ScenarioConfig: off-diagonal fiber_es_es_bps must be positive");
      }
    }
  }
  for (double a : required_quality) {
    require(a > 0.0 && a <= 1.0, "required_quality entries must be in (0,1]");
  }
}

FrameDecision FrameDecision::zero(int dts, int ess, int sensors, int subcarriers) {
  FrameDecision d;
  d.num_dts = dts;
  d.num_ess = ess;
  d.num_sensors = sensors;
  d.num_subcarriers = subcarriers;
  d.assignment.assign(static_cast<std::size_t>(dts) * ess, 0);
  d.association.assign(static_cast<std::size_t>(ess) * sensors, 0);
  d.subcarriers.assign(static_cast<std::size_t>(ess) * sensors * subcarriers, 0);
  d.training_rounds.assign(ess, 0.0);
  return d;
}

std::vector<std::string> decision_violations(const ScenarioConfig& cfg,
                                             const FrameDecision& d) {
  std::vector<std::string> out;
  auto bad = [&out](std::string msg) { out.push_back(std::move(msg)); };

  if (d.num_dts != cfg.num_partial_dts || d.num_ess != cfg.num_ess ||
      d.num_sensors != cfg.num_sensors ||
      d.num_subcarriers != cfg.num_subcarriers) {
    bad("decision dimensions do not match the scenario");
    return out;
  }

  for (int c = 0; c < d.num_dts; ++c) {
    int hosts = 0;
    for (int b = 0; b < d.num_ess; ++b) hosts += d.x(c, b);
    if (hosts != 1) {
      bad(strformat("partial DT %d hosted by %d ESs, expected exactly 1", c,
                        hosts));
    }
  }
  for (int b = 0; b < d.num_ess; ++b) {
    int held = 0;
    for (int c = 0; c < d.num_dts; ++c) held += d.x(c, b);
    if (held > 1) bad(strformat("ES %d hosts %d partial DTs", b, held));
  }

  for (int n = 0; n < d.num_sensors; ++n) {
    const int k = d.association_count(n);
    if (k > cfg.max_assoc_per_sensor) {
      bad(strformat("sensor %d associated with %d ESs, cap is %d", n, k,
                        cfg.max_assoc_per_sensor));
    }
  }

  for (int b = 0; b < d.num_ess; ++b) {
    int grants = 0;
    for (int w = 0; w < d.num_subcarriers; ++w) {
      int users = 0;
      for (int n = 0; n < d.num_sensors; ++n) {
        if (!d.z(b, n, w)) continue;
        ++users;
        ++grants;
        if (!d.y(b, n)) {
          bad(strformat("subcarrier grant (%d,%d,%d) without association", b,
                            n, w));
        }
      }
      if (users > 1) {
        bad(strformat("subcarrier %d at ES %d granted to %d sensors", w, b,
                          users));
      }
    }
    if (grants > cfg.num_subcarriers) {
      bad(strformat("ES %d grants %d subcarriers, budget is %d", b, grants,
                        cfg.num_subcarriers));
    }
  }

  for (int b = 0; b < d.num_ess; ++b) {
    const double t = d.training_rounds[b];
    if (!(t >= 0.0) || !std::isfinite(t)) {
      bad(strformat("training rounds at ES %d must be finite and >= 0", b));
    }
  }
  return out;
}

HistoryState HistoryState::initial(const ScenarioConfig& cfg) {
  HistoryState h;
  h.frame = 1;
  h.num_ess_ = cfg.num_ess;
  h.num_sensors_ = cfg.num_sensors;
  h.cumulative_bits.assign(cfg.num_partial_dts, 0.0);
  h.prev_collected_bits.assign(cfg.num_partial_dts, 0.0);
  h.prev_assignment.assign(
      static_cast<std::size_t>(cfg.num_partial_dts) * cfg.num_ess, 0);
  h.prev_association.assign(
      static_cast<std::size_t>(cfg.num_ess) * cfg.num_sensors, 0);
  return h;
}

void HistoryState::advance(const FrameDecision& d,
                           const std::vector<double>& collected_bits) {
  for (std::size_t c = 0; c < cumulative_bits.size(); ++c) {
    cumulative_bits[c] += collected_bits[c];
  }
  prev_collected_bits = collected_bits;
  prev_assignment = d.assignment;
  prev_association = d.association;
  ++frame;
}

}  // namespace fedtwin
