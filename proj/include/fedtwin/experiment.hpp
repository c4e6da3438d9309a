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
// Experiment orchestration: runs a (policy, framework) pair over seeds and
// sweep grids, collects per-frame metrics rows, and persists them as CSV
// files plus a key-value summary. Every emitted byte is a deterministic
// function of (spec, seeds).

#ifndef FEDTWIN_EXPERIMENT_HPP_
#define FEDTWIN_EXPERIMENT_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "fedtwin/baselines.hpp"
#include "fedtwin/drl.hpp"
#include "fedtwin/types.hpp"

namespace fedtwin {

// Which construction framework the run simulates. The framework changes the
// feasible decision set; the optimizer (PolicyKind) only the decision rule.
enum class FrameworkKind { kFederated, kCentra, kNonOverlap };

std::string framework_kind_name(FrameworkKind k);

// Weight axis swept by the `sweep` subcommand.
enum class SweepAxis { kNone, kXi, kKappa, kConfigCost };

std::string sweep_axis_name(SweepAxis a);

struct ExperimentSpec {
  ScenarioConfig scenario;  // template; worlds are generated per seed from it
  PolicyKind policy = PolicyKind::kGre;
  FrameworkKind framework = FrameworkKind::kFederated;
  int num_frames = 100;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  SweepAxis sweep_axis = SweepAxis::kNone;
  std::vector<double> sweep_values;  // one run per value; empty iff axis none
  std::string out_dir;               // empty: keep results in memory only
  bool record_trace = false;         // JSON run traces (not under Centra)
  std::string checkpoint_path;       // trained DMO agents (policy == kDmo)

  OrchestratorConfig orchestrator;   // DMO evaluation settings
  std::uint64_t train_seed = 9001;   // QL training stream / fresh-DMO init
  int ql_train_episodes = 240;
  int ql_train_frames = 60;

  // Throws std::invalid_argument on: num_frames < 1, empty or duplicate
  // seeds, sweep grid empty with an axis set (or set with kNone), Centra
  // under an optimizer other than GRE, or a DMO checkpoint under Centra.
  void validate() const;
};

// One frame of one run. Cumulative columns are prefix sums over the frames
// of the same (seed, sweep point) run:
//   cumulative_utility = sum of shaped utilities  (gain - cost - penalties)
//   cumulative_gain    = xi * sum of global qualities
//   cumulative_cost    = sum of (kappa * E_total + config_cost * changes)
struct MetricsRow {
  std::uint64_t seed = 0;
  int frame = 0;
  double utility = 0.0;  // U(t), unshaped
  double cumulative_utility = 0.0;
  double cumulative_gain = 0.0;
  double cumulative_cost = 0.0;
  double tau_total = 0.0;
  bool deadline_met = true;
  int socf_iterations = 0;  // coalition-formation passes this frame
  int transfers = 0;
  int joins = 0;
  int quits = 0;
};

// CSV schema of write_metrics_csv, newline-separated rows, '.' decimals.
extern const char kMetricsCsvSchema[];  // leading comment line
extern const char kMetricsCsvHeader[];  // column names

struct SeedRun {
  std::uint64_t seed = 0;
  std::vector<MetricsRow> rows;  // num_frames rows, frame ascending
};

struct SweepPointResult {
  double sweep_value = 0.0;  // meaningless when axis == kNone
  std::vector<SeedRun> runs;

  // Seed statistics of the final cumulative columns.
  double mean_cumulative_utility = 0.0;
  double stddev_cumulative_utility = 0.0;
  double mean_cumulative_gain = 0.0;
  double stddev_cumulative_gain = 0.0;
  double mean_cumulative_cost = 0.0;
  double stddev_cumulative_cost = 0.0;
  double mean_switches = 0.0;  // transfers + joins + quits per run
};

struct ExperimentResult {
  std::vector<SweepPointResult> points;  // one entry when axis == kNone
};

// Runs the experiment. When out_dir is set, writes per-(sweep point) metrics
// CSVs (streamed row by row, so a failed run leaves its partial file), a
// summary key-value file, and — with record_trace — one JSON trace per
// (sweep point, seed). Throws on spec validation failure and propagates
// policy errors.
ExperimentResult run_experiment(const ExperimentSpec& spec);

// Serializes rows in the fixed CSV schema (version comment + header + rows).
std::string metrics_to_csv(const std::vector<SeedRun>& runs);

// Key-value summary block for one experiment (axis, per-point means and
// standard deviations), stable key order.
std::string summary_to_text(const ExperimentSpec& spec,
                            const ExperimentResult& result);

// Config file I/O: JSON whose keys mirror ScenarioConfig field names.
// Partial files override defaults field by field; unknown keys throw.
ScenarioConfig load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioConfig& cfg, const std::string& path);
std::string scenario_config_to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_config_from_json(const std::string& text);

}  // namespace fedtwin

#endif  // FEDTWIN_EXPERIMENT_HPP_
