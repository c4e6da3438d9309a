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

#include "fedtwin/coalition.hpp"

#include <algorithm>
#include <stdexcept>

#include "fedtwin/model.hpp"
#include "fedtwin/rng.hpp"

namespace fedtwin {

CoalitionPartition CoalitionPartition::empty(int ess, int sensors) {
  CoalitionPartition cp;
  cp.num_ess = ess;
  cp.num_sensors = sensors;
  cp.members.assign(ess, {});
  cp.member_bits.assign(static_cast<std::size_t>(ess) * sensors, 0);
  return cp;
}

CoalitionPartition CoalitionPartition::from_association(
    int ess, int sensors, const std::vector<std::uint8_t>& y) {
  CoalitionPartition cp = empty(ess, sensors);
  for (int b = 0; b < ess; ++b) {
    for (int n = 0; n < sensors; ++n) {
      if (y[static_cast<std::size_t>(b) * sensors + n]) cp.add(b, n);
    }
  }
  return cp;
}

std::vector<std::uint8_t> CoalitionPartition::to_association() const {
  return member_bits;
}

void CoalitionPartition::add(int b, int n) {
  auto& bit = member_bits[static_cast<std::size_t>(b) * num_sensors + n];
  if (bit) return;
  bit = 1;
  auto& v = members[b];
  v.insert(std::lower_bound(v.begin(), v.end(), n), n);
}

void CoalitionPartition::remove(int b, int n) {
  auto& bit = member_bits[static_cast<std::size_t>(b) * num_sensors + n];
  if (!bit) return;
  bit = 0;
  auto& v = members[b];
  v.erase(std::lower_bound(v.begin(), v.end(), n));
}

int CoalitionPartition::association_count(int n) const {
  int k = 0;
  for (int b = 0; b < num_ess; ++b) k += contains(b, n) ? 1 : 0;
  return k;
}

std::vector<int> CoalitionPartition::coalitions_of(int n) const {
  std::vector<int> out;
  for (int b = 0; b < num_ess; ++b) {
    if (contains(b, n)) out.push_back(b);
  }
  return out;
}

double LowerGameContext::coalition_utility(int b,
                                           const std::vector<int>& members) const {
  const auto [it, inserted] =
      utility_cache_.try_emplace({b, members}, 0.0);
  if (inserted) it->second = coalition_utility_uncached(b, members);
  return it->second;
}

double LowerGameContext::coalition_utility_uncached(
    int b, const std::vector<int>& members) const {
  const ScenarioConfig& c = *cfg;

  // Configuration churn of this hypothetical coalition vs. the previous frame.
  int changes = 0;
  {
    std::size_t i = 0;
    for (int n = 0; n < c.num_sensors; ++n) {
      const bool now = i < members.size() && members[i] == n;
      if (now) ++i;
      if (now != was_member(b, n)) ++changes;
    }
  }

  const int dt = dt_at_es[b];
  if (dt < 0) {
    return -c.cost_weight_kappa * fixed_energy_j[b] - c.config_cost * changes;
  }

  double batch_bits = 0.0;
  double transmit_j = 0.0;
  for (int n : members) {
    const double d = data(n, dt);
    batch_bits += d;
    transmit_j += c.sensor_tx_power_w[n] * d / link_rate[b][n];
  }

  const double total_bits = cumulative_bits[dt] + batch_bits;
  const int bound = max_training_rounds(c, dt, total_bits, frame);
  const double rounds = round_fraction[b] * bound;
  const double quality = partial_dt_quality(c, dt, total_bits, frame, rounds);
  const double creation_j = rounds * creation_energy_per_round(c);

  return c.gain_weight_xi * importance[dt] * quality -
         c.cost_weight_kappa * (transmit_j + creation_j + fixed_energy_j[b]) -
         c.config_cost * changes;
}

double LowerGameContext::member_contribution(int b,
                                             const std::vector<int>& members,
                                             int n) const {
  std::vector<int> without;
  without.reserve(members.size() - 1);
  for (int m : members) {
    if (m != n) without.push_back(m);
  }
  return coalition_utility(b, members) - coalition_utility(b, without);
}

LowerGameContext make_lower_game_context(
    const ScenarioConfig& cfg, const FrameDraws& draws, const HistoryState& hist,
    const std::vector<std::uint8_t>& assignment_x,
    const std::vector<double>& rounds) {
  LowerGameContext ctx;
  ctx.cfg = &cfg;
  ctx.frame = hist.frame;
  ctx.importance = draws.importance;
  ctx.data_bits = draws.data_bits;
  ctx.cumulative_bits = hist.cumulative_bits;
  ctx.prev_assoc = hist.prev_association;

  ctx.dt_at_es.assign(cfg.num_ess, -1);
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    for (int b = 0; b < cfg.num_ess; ++b) {
      if (assignment_x[static_cast<std::size_t>(c) * cfg.num_ess + b]) {
        ctx.dt_at_es[b] = c;
      }
    }
  }

  ctx.link_rate.assign(cfg.num_ess, std::vector<double>(cfg.num_sensors, 0.0));
  for (int b = 0; b < cfg.num_ess; ++b) {
    for (int n = 0; n < cfg.num_sensors; ++n) {
      ctx.link_rate[b][n] = proxy_rate(cfg, draws.channel, n, b);
    }
  }

  // Coalition-independent per-ES energy under the assignment in force:
  // migration of accumulated data if the host changed, plus the model upload.
  ctx.fixed_energy_j.assign(cfg.num_ess, 0.0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    const int c = ctx.dt_at_es[b];
    if (c < 0) continue;
    const int prev_host = hist.prev_host_of(c);
    if (prev_host >= 0 && prev_host != b) {
      ctx.fixed_energy_j[b] += cfg.es_tx_power_w[prev_host] *
                               hist.cumulative_bits[c] /
                               cfg.fiber_es_es_bps[prev_host][b];
    }
    ctx.fixed_energy_j[b] += cfg.es_tx_power_w[b] * cfg.model_size_bits[c] /
                             cfg.fiber_cloud_es_bps[b];
  }

  // Round-utilization fractions, measured against the useful-round bound of
  // the previous coalition (the game's entry state).
  ctx.round_fraction.assign(cfg.num_ess, 0.0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    const int c = ctx.dt_at_es[b];
    if (c < 0) continue;
    double batch = 0.0;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (ctx.was_member(b, n)) batch += ctx.data(n, c);
    }
    const int entry_bound =
        max_training_rounds(cfg, c, hist.cumulative_bits[c] + batch, hist.frame);
    const double f = entry_bound > 0 ? rounds[b] / entry_bound : 0.0;
    ctx.round_fraction[b] = std::clamp(f, 0.0, 1.0);
  }
  return ctx;
}

std::vector<int> eligible_sensors(const ScenarioConfig& cfg,
                                  const ChannelState& channel, int b) {
  std::vector<int> out;
  for (int n = 0; n < cfg.num_sensors; ++n) {
    if (proxy_rate(cfg, channel, n, b) >= cfg.min_rate_bps[b]) out.push_back(n);
  }
  return out;
}

namespace {

// Target-side checks shared by transfer and join: capacity, eligibility,
// a hosted DT at the target, and no member of the target losing by n's entry.
bool target_feasible(const LowerGameContext& ctx, const CoalitionPartition& cp,
                     int n, int to_es) {
  return ctx.dt_at_es[to_es] >= 0 && !cp.contains(to_es, n) &&
         static_cast<int>(cp.members[to_es].size()) < ctx.cfg->num_subcarriers &&
         ctx.eligible(to_es, n);
}

bool target_members_keep(const LowerGameContext& ctx, const CoalitionPartition& cp,
                         int n, int to_es, std::vector<int>* with_n_out) {
  const auto& current = cp.members[to_es];
  std::vector<int> with_n = current;
  with_n.insert(std::lower_bound(with_n.begin(), with_n.end(), n), n);
  bool ok = true;
  for (int m : current) {
    if (ctx.member_contribution(to_es, with_n, m) <
        ctx.member_contribution(to_es, current, m)) {
      ok = false;
      break;
    }
  }
  *with_n_out = std::move(with_n);
  return ok;
}

bool source_members_keep(const LowerGameContext& ctx, const CoalitionPartition& cp,
                         int n, int from_es) {
  const auto& current = cp.members[from_es];
  std::vector<int> without;
  without.reserve(current.size() - 1);
  for (int m : current) {
    if (m != n) without.push_back(m);
  }
  for (int m : without) {
    if (ctx.member_contribution(from_es, without, m) <
        ctx.member_contribution(from_es, current, m)) {
      return false;
    }
  }
  return true;
}

}  // namespace

SwitchAudit can_transfer(const LowerGameContext& ctx, const CoalitionPartition& cp,
                         int n, int from_es, int to_es) {
  SwitchAudit a;
  a.kind = SwitchKind::kTransfer;
  a.sensor = n;
  a.from_es = from_es;
  a.to_es = to_es;

  a.feasible_ok = cp.contains(from_es, n) && target_feasible(ctx, cp, n, to_es);
  if (!a.feasible_ok) return a;

  a.mover_before = ctx.member_contribution(from_es, cp.members[from_es], n);

  std::vector<int> with_n;
  a.target_members_ok = target_members_keep(ctx, cp, n, to_es, &with_n);
  a.mover_after = ctx.member_contribution(to_es, with_n, n);
  a.gain_ok = a.mover_after > std::max(0.0, a.mover_before);
  a.source_members_ok = source_members_keep(ctx, cp, n, from_es);

  a.admissible = a.gain_ok && a.target_members_ok && a.source_members_ok;
  a.potential_delta = a.mover_after - a.mover_before;
  return a;
}

SwitchAudit can_join(const LowerGameContext& ctx, const CoalitionPartition& cp,
                     int n, int to_es) {
  SwitchAudit a;
  a.kind = SwitchKind::kJoin;
  a.sensor = n;
  a.to_es = to_es;

  a.feasible_ok = target_feasible(ctx, cp, n, to_es) &&
                  cp.association_count(n) < ctx.cfg->max_assoc_per_sensor;
  if (!a.feasible_ok) return a;

  std::vector<int> with_n;
  a.target_members_ok = target_members_keep(ctx, cp, n, to_es, &with_n);
  a.mover_after = ctx.member_contribution(to_es, with_n, n);
  a.gain_ok = a.mover_after > 0.0;

  a.admissible = a.gain_ok && a.target_members_ok;
  a.potential_delta = a.mover_after;
  return a;
}

SwitchAudit can_quit(const LowerGameContext& ctx, const CoalitionPartition& cp,
                     int n, int from_es) {
  SwitchAudit a;
  a.kind = SwitchKind::kQuit;
  a.sensor = n;
  a.from_es = from_es;

  a.feasible_ok = cp.contains(from_es, n);
  if (!a.feasible_ok) return a;

  a.mover_before = ctx.member_contribution(from_es, cp.members[from_es], n);
  a.gain_ok = a.mover_before <= 0.0;
  a.source_members_ok = source_members_keep(ctx, cp, n, from_es);

  a.admissible = a.gain_ok && a.source_members_ok;
  a.potential_delta = -a.mover_before;
  return a;
}

double potential(const LowerGameContext& ctx, const CoalitionPartition& cp) {
  double sum = 0.0;
  for (int b = 0; b < ctx.cfg->num_ess; ++b) {
    sum += ctx.coalition_utility(b, cp.members[b]);
  }
  return sum;
}

namespace {

// Applies the first admissible switch for sensor n; returns true if one was
// applied. Scan order: transfers (sources ascending, targets ascending), then
// joins (targets ascending), then quits (sources ascending).
bool apply_first_switch(const LowerGameContext& ctx, CoalitionPartition& cp,
                        int n, SocfTrace& trace, double& pot) {
  const std::vector<int> sources = cp.coalitions_of(n);

  for (int a : sources) {
    for (int b = 0; b < cp.num_ess; ++b) {
      if (b == a || cp.contains(b, n)) continue;
      const SwitchAudit audit = can_transfer(ctx, cp, n, a, b);
      if (!audit.admissible) continue;
      cp.remove(a, n);
      cp.add(b, n);
      pot += audit.potential_delta;
      trace.switches.push_back({SwitchKind::kTransfer, n, a, b,
                                audit.potential_delta, pot});
      ++trace.transfers;
      return true;
    }
  }

  for (int b = 0; b < cp.num_ess; ++b) {
    if (cp.contains(b, n)) continue;
    const SwitchAudit audit = can_join(ctx, cp, n, b);
    if (!audit.admissible) continue;
    cp.add(b, n);
    pot += audit.potential_delta;
    trace.switches.push_back(
        {SwitchKind::kJoin, n, -1, b, audit.potential_delta, pot});
    ++trace.joins;
    return true;
  }

  for (int a : sources) {
    const SwitchAudit audit = can_quit(ctx, cp, n, a);
    if (!audit.admissible) continue;
    cp.remove(a, n);
    pot += audit.potential_delta;
    trace.switches.push_back(
        {SwitchKind::kQuit, n, a, -1, audit.potential_delta, pot});
    ++trace.quits;
    return true;
  }
  return false;
}

}  // namespace

SocfResult socf(const LowerGameContext& ctx, std::uint64_t init_seed) {
  const ScenarioConfig& cfg = *ctx.cfg;
  SocfResult res;
  res.trace.init_seed = init_seed;

  // Seed: keep previous members that are still eligible, at live hosts only.
  auto& cp = res.partition;
  cp = CoalitionPartition::empty(cfg.num_ess, cfg.num_sensors);
  for (int b = 0; b < cfg.num_ess; ++b) {
    if (ctx.dt_at_es[b] < 0) continue;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (ctx.was_member(b, n) && ctx.eligible(b, n)) cp.add(b, n);
    }
  }

  // Random top-up within capacity and the per-sensor association cap.
  Rng rng(init_seed);
  for (int b = 0; b < cfg.num_ess; ++b) {
    if (ctx.dt_at_es[b] < 0) continue;
    const int room = cfg.num_subcarriers - static_cast<int>(cp.members[b].size());
    if (room <= 0) continue;
    std::vector<int> candidates;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (!cp.contains(b, n) && ctx.eligible(b, n) &&
          cp.association_count(n) < cfg.max_assoc_per_sensor) {
        candidates.push_back(n);
      }
    }
    rng.shuffle(candidates);
    const int cap = std::min<int>(room, static_cast<int>(candidates.size()));
    const int take = cap > 0 ? rng.uniform_int(0, cap) : 0;
    for (int i = 0; i < take; ++i) cp.add(b, candidates[i]);
  }

  res.trace.initial_members = cp.members;
  double pot = potential(ctx, cp);
  res.trace.initial_potential = pot;

  const int max_passes = 10 * cfg.num_sensors * cfg.num_ess;
  for (int pass = 0; pass < max_passes; ++pass) {
    ++res.trace.passes;
    bool any = false;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      any = apply_first_switch(ctx, cp, n, res.trace, pot) || any;
    }
    if (!any) return res;
  }
  throw std::runtime_error(
      "coalition formation failed to converge within the pass bound");
}

}  // namespace fedtwin
