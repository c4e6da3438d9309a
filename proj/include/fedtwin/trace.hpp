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
// Run traces: a complete, replayable record of one simulated run, and the
// audit that replays it. A trace stores the resolved world description, the
// run seed, and per frame the committed decision, the outcome scalars, every
// coalition-formation call (its assignment context, the rounds entering the
// game, and the switch sequence it applied), and the preference lists and
// result of the assignment matching when the policy ran one.
//
// verify_trace() rebuilds the run from the config and seed alone and checks
// the record against it: decisions must be feasible, outcome scalars must
// reproduce, every recorded switch must be admissible in its rebuilt game
// state with a utility delta matching the record, every formation run must
// replay identically from its init seed, and every matching must equal the
// deferred-acceptance result on the recorded preferences with no blocking
// pair. Violations are collected, not thrown, so one audit reports all
// defects of a corrupted or forged trace.

#ifndef FEDTWIN_TRACE_HPP_
#define FEDTWIN_TRACE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fedtwin/coalition.hpp"
#include "fedtwin/matching.hpp"
#include "fedtwin/types.hpp"

namespace fedtwin {

// One coalition-formation call: the frozen context it ran under and what it
// did. `assignment` is the |C|x|B| matrix in force during the lower game and
// `rounds` the per-ES training rounds the context derives its fractions
// from; both are needed to rebuild the exact game when auditing.
struct SocfCallRecord {
  std::vector<std::uint8_t> assignment;
  std::vector<double> rounds;
  SocfTrace trace;
  std::vector<std::vector<int>> final_members;  // partition after the run
};

// Preference lists fed to the matching stage and the matching it returned.
struct MatchingRecord {
  PreferenceLists prefs;
  Matching matching;
};

// One frame: the committed decision plus the outcome scalars the audit
// re-derives. Latency and energy breakdowns are not stored; they are implied
// by the decision and recomputed on replay.
struct FrameRecord {
  int frame = 1;
  FrameDecision decision;
  std::vector<SocfCallRecord> socf_calls;  // empty for myopic policies
  bool has_matching = false;
  MatchingRecord matching;

  double utility = 0.0;
  double shaped_utility = 0.0;
  double global_quality = 0.0;
  double e_total = 0.0;
  double tau_total = 0.0;
  int config_changes = 0;
  bool deadline_met = true;
};

struct RunTrace {
  ScenarioConfig config;  // fully resolved world, not a template
  std::uint64_t seed = 0;
  std::string policy;     // label for humans; the audit does not read it
  std::string framework;
  std::vector<FrameRecord> frames;
};

// JSON round trip. The parser throws std::runtime_error on malformed input,
// schema or version mismatch, or structurally inconsistent records (wrong
// matrix sizes, out-of-range ids), identifying the offending field.
std::string trace_to_json(const RunTrace& trace);
RunTrace trace_from_json(const std::string& text);
void save_trace(const RunTrace& trace, const std::string& path);
RunTrace load_trace(const std::string& path);

struct TraceAuditReport {
  int frames_checked = 0;
  int switches_checked = 0;
  int socf_replays_checked = 0;
  int matchings_checked = 0;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

// Replays the trace from (config, seed) and cross-checks every recorded
// fact. Numeric comparisons use a relative tolerance of 1e-9 (floored at
// 1e-9 absolute). Returns the report; does not throw on audit failures,
// only on an invalid config that precludes replay entirely (reported as a
// violation instead).
TraceAuditReport verify_trace(const RunTrace& trace);

}  // namespace fedtwin

#endif  // FEDTWIN_TRACE_HPP_
