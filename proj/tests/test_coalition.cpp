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
// Overlapping-coalition-formation checks. The admissibility predicates are
// re-derived here from coalition utilities alone (membership value = utility
// with the member minus utility without), so the audits exercised below are
// compared against an implementation-independent reading of the switch rules.

#include "fedtwin/coalition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "fedtwin/model.hpp"
#include "fedtwin/rng.hpp"
#include "fedtwin/scenario.hpp"
#include "fedtwin/types.hpp"
#include "test_support.hpp"

namespace fedtwin {
namespace {

using testsupport::random_decision;

struct GameFixture {
  ScenarioConfig cfg;
  FrameDraws draws;
  HistoryState hist;
  std::vector<std::uint8_t> x;
  std::vector<double> rounds;

  LowerGameContext context() const {
    return make_lower_game_context(cfg, draws, hist, x, rounds);
  }
};

// A generated world with a random assignment and entry rounds; `warm` runs
// one random frame first so previous memberships and banked data exist.
GameFixture make_game(std::uint64_t seed, int ess, int dts, int sensors,
                      int subcarriers, int assoc_cap, bool warm) {
  ScenarioConfig tmpl = default_template();
  tmpl.num_partial_dts = dts;
  tmpl.num_ess = ess;
  tmpl.num_sensors = sensors;
  tmpl.num_subcarriers = subcarriers;
  tmpl.max_assoc_per_sensor = assoc_cap;

  GameFixture g;
  g.cfg = generate_scenario(seed, tmpl);
  g.hist = HistoryState::initial(g.cfg);
  Rng rng = stream_rng(seed, Stream::kFuzz, 99);
  if (warm) {
    const FrameDraws first = frame_draws(g.cfg, seed, 1);
    const FrameDecision prev = random_decision(g.cfg, first, g.hist, rng, 5);
    g.hist.advance(prev, evaluate_frame(g.cfg, first, prev, g.hist).collected_bits);
  }
  g.draws = frame_draws(g.cfg, seed, g.hist.frame);

  std::vector<int> hosts(ess);
  std::iota(hosts.begin(), hosts.end(), 0);
  rng.shuffle(hosts);
  g.x.assign(static_cast<std::size_t>(dts) * ess, 0);
  for (int c = 0; c < dts; ++c) g.x[static_cast<std::size_t>(c) * ess + hosts[c]] = 1;

  g.rounds.assign(ess, 0.0);
  for (double& r : g.rounds) r = rng.uniform_int(0, 8);
  return g;
}

std::vector<int> erase_member(const std::vector<int>& v, int n) {
  std::vector<int> out;
  out.reserve(v.size());
  for (int m : v) {
    if (m != n) out.push_back(m);
  }
  return out;
}

std::vector<int> insert_member(const std::vector<int>& v, int n) {
  std::vector<int> out = v;
  out.insert(std::lower_bound(out.begin(), out.end(), n), n);
  return out;
}

double value_of(const LowerGameContext& ctx, int b, const std::vector<int>& s,
                int n) {
  return ctx.coalition_utility(b, s) - ctx.coalition_utility(b, erase_member(s, n));
}

bool target_ok(const LowerGameContext& ctx, const CoalitionPartition& cp, int n,
               int b) {
  return ctx.dt_at_es[b] >= 0 && !cp.contains(b, n) &&
         static_cast<int>(cp.members[b].size()) < ctx.cfg->num_subcarriers &&
         ctx.eligible(b, n);
}

bool members_keep(const LowerGameContext& ctx, int b,
                  const std::vector<int>& before, const std::vector<int>& after) {
  for (int m : after) {
    if (std::find(before.begin(), before.end(), m) == before.end()) continue;
    if (value_of(ctx, b, after, m) < value_of(ctx, b, before, m)) return false;
  }
  return true;
}

bool my_transfer(const LowerGameContext& ctx, const CoalitionPartition& cp,
                 int n, int a, int b) {
  if (!cp.contains(a, n) || !target_ok(ctx, cp, n, b)) return false;
  const std::vector<int> with_b = insert_member(cp.members[b], n);
  const double before = value_of(ctx, a, cp.members[a], n);
  const double after = value_of(ctx, b, with_b, n);
  return after > std::max(0.0, before) &&
         members_keep(ctx, b, cp.members[b], with_b) &&
         members_keep(ctx, a, cp.members[a], erase_member(cp.members[a], n));
}

bool my_join(const LowerGameContext& ctx, const CoalitionPartition& cp, int n,
             int b) {
  if (!target_ok(ctx, cp, n, b)) return false;
  if (cp.association_count(n) >= ctx.cfg->max_assoc_per_sensor) return false;
  const std::vector<int> with_b = insert_member(cp.members[b], n);
  return value_of(ctx, b, with_b, n) > 0.0 &&
         members_keep(ctx, b, cp.members[b], with_b);
}

bool my_quit(const LowerGameContext& ctx, const CoalitionPartition& cp, int n,
             int a) {
  if (!cp.contains(a, n)) return false;
  return value_of(ctx, a, cp.members[a], n) <= 0.0 &&
         members_keep(ctx, a, cp.members[a], erase_member(cp.members[a], n));
}

void apply_switch(CoalitionPartition& cp, const SwitchRecord& s) {
  if (s.from_es >= 0) cp.remove(s.from_es, s.sensor);
  if (s.to_es >= 0) cp.add(s.to_es, s.sensor);
}

void check_constraints(const GameFixture& g, const LowerGameContext& ctx,
                       const CoalitionPartition& cp) {
  for (int b = 0; b < g.cfg.num_ess; ++b) {
    CHECK(static_cast<int>(cp.members[b].size()) <= g.cfg.num_subcarriers);
    if (ctx.dt_at_es[b] < 0) CHECK(cp.members[b].empty());
    for (int n : cp.members[b]) CHECK(ctx.eligible(b, n));
  }
  for (int n = 0; n < g.cfg.num_sensors; ++n) {
    CHECK(cp.association_count(n) <= g.cfg.max_assoc_per_sensor);
  }
}

TEST_CASE("membership value is the utility the member moves") {
  const GameFixture g = make_game(31, 3, 2, 8, 3, 2, true);
  const LowerGameContext ctx = g.context();
  const std::vector<int> s = {1, 4, 6};
  for (int b = 0; b < g.cfg.num_ess; ++b) {
    for (int n : s) {
      CHECK(ctx.member_contribution(b, s, n) ==
            doctest::Approx(value_of(ctx, b, s, n)).epsilon(1e-12));
    }
  }
  // Memoization must not change values: a fresh context recomputes from
  // scratch and must land on the cached figure exactly.
  const double once = ctx.coalition_utility(0, s);
  CHECK(ctx.coalition_utility(0, s) == once);
  CHECK(g.context().coalition_utility(0, s) == once);
}

TEST_CASE("the game books configuration churn against previous membership") {
  GameFixture g = make_game(32, 3, 2, 8, 3, 2, true);
  const std::vector<int> s = {2, 5};
  const int b = 0;

  // Flip sensor 2's previous-membership bit at ES 0 and watch exactly one
  // config charge appear or vanish.
  g.hist.prev_association[static_cast<std::size_t>(b) * g.cfg.num_sensors + 2] = 0;
  const double fresh = g.context().coalition_utility(b, s);
  g.hist.prev_association[static_cast<std::size_t>(b) * g.cfg.num_sensors + 2] = 1;
  const double kept = g.context().coalition_utility(b, s);
  CHECK(kept - fresh == doctest::Approx(g.cfg.config_cost).epsilon(1e-9));

  // A previous member the coalition dropped is also one charge.
  g.hist.prev_association[static_cast<std::size_t>(b) * g.cfg.num_sensors + 7] = 1;
  const double dropped = g.context().coalition_utility(b, s);
  CHECK(kept - dropped == doctest::Approx(g.cfg.config_cost).epsilon(1e-9));
}

TEST_CASE("formation seeds from still-eligible previous members at live hosts") {
  for (std::uint64_t seed = 40; seed < 48; ++seed) {
    const GameFixture g = make_game(seed, 4, 3, 10, 3, 2, true);
    const LowerGameContext ctx = g.context();
    const SocfResult res = socf(ctx, stream_seed(seed, Stream::kCoalitionInit, 2));

    for (int b = 0; b < g.cfg.num_ess; ++b) {
      const auto& init = res.trace.initial_members[b];
      if (ctx.dt_at_es[b] < 0) {
        CHECK(init.empty());
        continue;
      }
      for (int n = 0; n < g.cfg.num_sensors; ++n) {
        if (ctx.was_member(b, n) && ctx.eligible(b, n)) {
          CHECK(std::find(init.begin(), init.end(), n) != init.end());
        }
      }
      for (int n : init) CHECK(ctx.eligible(b, n));
    }
  }
}

TEST_CASE("every applied switch moves the potential by the recorded gain") {
  int switches_checked = 0;
  for (std::uint64_t seed = 60; seed < 120; ++seed) {
    const GameFixture g = make_game(seed, 4, 3, 10, 3, 2, seed % 2 == 0);
    const LowerGameContext ctx = g.context();
    const SocfResult res = socf(ctx, stream_seed(seed, Stream::kCoalitionInit, 1));

    CoalitionPartition cp = CoalitionPartition::empty(g.cfg.num_ess,
                                                      g.cfg.num_sensors);
    for (int b = 0; b < g.cfg.num_ess; ++b) {
      for (int n : res.trace.initial_members[b]) cp.add(b, n);
    }
    double pot = potential(ctx, cp);
    CHECK(pot == doctest::Approx(res.trace.initial_potential).epsilon(1e-12));

    for (const SwitchRecord& s : res.trace.switches) {
      apply_switch(cp, s);
      const double pot_after = potential(ctx, cp);
      // Exact-potential property: the recorded per-sensor utility change is
      // the change of the global potential.
      const double tol = 1e-9 * std::max(1.0, std::abs(pot_after));
      CHECK(std::abs((pot_after - pot) - s.delta_utility) <= tol);
      CHECK(std::abs(pot_after - s.potential_after) <= tol);
      // Every applied switch is strictly improving for its mover.
      CHECK(s.delta_utility > 0.0);
      pot = pot_after;
      ++switches_checked;
    }

    // Final partition of the trace is the returned partition.
    CHECK(cp.members == res.partition.members);
  }
  CHECK(switches_checked > 60);
}

TEST_CASE("the potential is non-decreasing along every formation run") {
  for (std::uint64_t seed = 150; seed < 170; ++seed) {
    const GameFixture g = make_game(seed, 3, 3, 9, 3, 2, seed % 2 == 0);
    const SocfResult res =
        socf(g.context(), stream_seed(seed, Stream::kCoalitionInit, 1));
    double prev = res.trace.initial_potential;
    for (const SwitchRecord& s : res.trace.switches) {
      CHECK(s.potential_after >= prev - 1e-9 * std::max(1.0, std::abs(prev)));
      prev = s.potential_after;
    }
    CHECK(res.trace.passes <= 10 * g.cfg.num_sensors * g.cfg.num_ess);
    // Switch counters match the trace.
    int t = 0, j = 0, q = 0;
    for (const SwitchRecord& s : res.trace.switches) {
      t += s.kind == SwitchKind::kTransfer;
      j += s.kind == SwitchKind::kJoin;
      q += s.kind == SwitchKind::kQuit;
    }
    CHECK(res.trace.transfers == t);
    CHECK(res.trace.joins == j);
    CHECK(res.trace.quits == q);
  }
}

TEST_CASE("converged partitions satisfy every constraint") {
  for (std::uint64_t seed = 130; seed < 150; ++seed) {
    const GameFixture g = make_game(seed, 4, 3, 12, 3, 2, true);
    const LowerGameContext ctx = g.context();
    const SocfResult res = socf(ctx, stream_seed(seed, Stream::kCoalitionInit, 1));
    check_constraints(g, ctx, res.partition);
  }
}

TEST_CASE("no admissible deviation survives convergence (exhaustive, small)") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const int sensors = 2 + static_cast<int>(seed % 4);  // 2..5
    const GameFixture g = make_game(seed, 2, 2, sensors, 3, 2, seed % 2 == 0);
    const LowerGameContext ctx = g.context();
    const SocfResult res = socf(ctx, stream_seed(seed, Stream::kCoalitionInit, 1));
    const CoalitionPartition& cp = res.partition;

    for (int n = 0; n < sensors; ++n) {
      for (int a = 0; a < 2; ++a) {
        CHECK_FALSE(my_quit(ctx, cp, n, a));
        for (int b = 0; b < 2; ++b) {
          if (a != b) CHECK_FALSE(my_transfer(ctx, cp, n, a, b));
        }
      }
      for (int b = 0; b < 2; ++b) CHECK_FALSE(my_join(ctx, cp, n, b));
    }
  }
}

TEST_CASE("switch audits agree with the independent derivation") {
  int audits = 0;
  for (std::uint64_t seed = 300; seed < 330; ++seed) {
    const GameFixture g = make_game(seed, 3, 2, 7, 3, 2, true);
    const LowerGameContext ctx = g.context();
    const SocfResult res = socf(ctx, stream_seed(seed, Stream::kCoalitionInit, 1));

    // Audit every conceivable move against the final partition and a few
    // mid-run snapshots.
    std::vector<CoalitionPartition> snapshots;
    CoalitionPartition cp = CoalitionPartition::empty(g.cfg.num_ess,
                                                      g.cfg.num_sensors);
    for (int b = 0; b < g.cfg.num_ess; ++b) {
      for (int n : res.trace.initial_members[b]) cp.add(b, n);
    }
    snapshots.push_back(cp);
    for (const SwitchRecord& s : res.trace.switches) {
      apply_switch(cp, s);
      snapshots.push_back(cp);
    }

    for (const CoalitionPartition& snap : snapshots) {
      for (int n = 0; n < g.cfg.num_sensors; ++n) {
        for (int a = 0; a < g.cfg.num_ess; ++a) {
          if (snap.contains(a, n)) {
            CHECK(can_quit(ctx, snap, n, a).admissible == my_quit(ctx, snap, n, a));
            for (int b = 0; b < g.cfg.num_ess; ++b) {
              if (a == b) continue;
              CHECK(can_transfer(ctx, snap, n, a, b).admissible ==
                    my_transfer(ctx, snap, n, a, b));
              ++audits;
            }
          } else {
            CHECK(can_join(ctx, snap, n, a).admissible == my_join(ctx, snap, n, a));
            ++audits;
          }
        }
      }
    }
  }
  CHECK(audits > 1000);
}

TEST_CASE("formation is deterministic in the context and seed") {
  const GameFixture g = make_game(400, 4, 3, 10, 3, 2, true);
  const LowerGameContext ctx1 = g.context();
  const LowerGameContext ctx2 = g.context();
  const SocfResult a = socf(ctx1, 12345);
  const SocfResult b = socf(ctx2, 12345);
  CHECK(a.partition.members == b.partition.members);
  CHECK(a.trace.initial_members == b.trace.initial_members);
  REQUIRE(a.trace.switches.size() == b.trace.switches.size());
  for (std::size_t i = 0; i < a.trace.switches.size(); ++i) {
    CHECK(a.trace.switches[i].sensor == b.trace.switches[i].sensor);
    CHECK(a.trace.switches[i].from_es == b.trace.switches[i].from_es);
    CHECK(a.trace.switches[i].to_es == b.trace.switches[i].to_es);
    CHECK(a.trace.switches[i].delta_utility == b.trace.switches[i].delta_utility);
  }
}

TEST_CASE("ineligible sensors are never drafted") {
  GameFixture g = make_game(500, 3, 2, 8, 3, 2, false);
  // An impossible rate floor at ES 0 empties its candidate pool; the others
  // keep theirs.
  g.cfg.min_rate_bps[0] = 1e15;
  const LowerGameContext ctx = g.context();
  CHECK(eligible_sensors(g.cfg, g.draws.channel, 0).empty());
  CHECK_FALSE(eligible_sensors(g.cfg, g.draws.channel, 1).empty());

  const SocfResult res = socf(ctx, 7);
  CHECK(res.partition.members[0].empty());
  for (int n = 0; n < g.cfg.num_sensors; ++n) {
    CHECK_FALSE(res.partition.contains(0, n));
  }
}

TEST_CASE("partition bookkeeping stays consistent") {
  CoalitionPartition cp = CoalitionPartition::empty(3, 5);
  cp.add(0, 2);
  cp.add(0, 4);
  cp.add(2, 2);
  CHECK(cp.contains(0, 2));
  CHECK(cp.association_count(2) == 2);
  CHECK(cp.coalitions_of(2) == std::vector<int>{0, 2});
  CHECK(cp.members[0] == std::vector<int>{2, 4});

  const std::vector<std::uint8_t> y = cp.to_association();
  const CoalitionPartition back = CoalitionPartition::from_association(3, 5, y);
  CHECK(back.members == cp.members);

  cp.remove(0, 2);
  CHECK_FALSE(cp.contains(0, 2));
  CHECK(cp.association_count(2) == 1);
  CHECK(cp.members[0] == std::vector<int>{4});
}

}  // namespace
}  // namespace fedtwin
