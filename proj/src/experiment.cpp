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

#include "fedtwin/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedtwin/coalition.hpp"
#include "fedtwin/matching.hpp"
#include "fedtwin/model.hpp"
#include "fedtwin/rng.hpp"
#include "fedtwin/scenario.hpp"
#include "fedtwin/trace.hpp"

namespace fedtwin {

std::string framework_kind_name(FrameworkKind k) {
  switch (k) {
    case FrameworkKind::kFederated: return "federated";
    case FrameworkKind::kCentra: return "centra";
    case FrameworkKind::kNonOverlap: return "nonoverlap";
  }
  return "unknown";
}

std::string sweep_axis_name(SweepAxis a) {
  switch (a) {
    case SweepAxis::kNone: return "none";
    case SweepAxis::kXi: return "xi";
    case SweepAxis::kKappa: return "kappa";
    case SweepAxis::kConfigCost: return "config_cost";
  }
  return "unknown";
}

void ExperimentSpec::validate() const {
  if (num_frames < 1) {
    throw std::invalid_argument("num_frames must be at least 1");
  }
  if (seeds.empty()) {
    throw std::invalid_argument("at least one seed is required");
  }
  const std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) {
    throw std::invalid_argument("seeds must be distinct");
  }
  if ((sweep_axis == SweepAxis::kNone) != sweep_values.empty()) {
    throw std::invalid_argument(
        "sweep axis and value grid must be set together");
  }
  if (policy == PolicyKind::kCentraFramework ||
      policy == PolicyKind::kNonOverlapFramework) {
    throw std::invalid_argument(
        "framework comparisons are selected via the framework field, not the "
        "policy field");
  }
  if (framework == FrameworkKind::kCentra) {
    if (policy != PolicyKind::kGre) {
      throw std::invalid_argument(
          "the centralized framework has a fixed decision rule and accepts "
          "no optimizer choice");
    }
    if (!checkpoint_path.empty()) {
      throw std::invalid_argument(
          "a policy checkpoint is meaningless under the centralized "
          "framework");
    }
    if (record_trace) {
      throw std::invalid_argument(
          "run traces cover the federated decision structure and are not "
          "produced under the centralized framework");
    }
  }
  if (!checkpoint_path.empty() && policy != PolicyKind::kDmo) {
    throw std::invalid_argument("checkpoints apply to the deep policy only");
  }
}

const char kMetricsCsvSchema[] = "# fedtwin-metrics v1";
const char kMetricsCsvHeader[] =
    "seed,frame,utility,cumulative_utility,cumulative_gain,cumulative_cost,"
    "tau_total,deadline_met,socf_iterations,transfers,joins,quits";

namespace {

using nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void append_csv_row(std::string* out, const MetricsRow& r) {
  out->append(std::to_string(r.seed));
  out->push_back(',');
  out->append(std::to_string(r.frame));
  out->push_back(',');
  out->append(format_double(r.utility));
  out->push_back(',');
  out->append(format_double(r.cumulative_utility));
  out->push_back(',');
  out->append(format_double(r.cumulative_gain));
  out->push_back(',');
  out->append(format_double(r.cumulative_cost));
  out->push_back(',');
  out->append(format_double(r.tau_total));
  out->push_back(',');
  out->append(r.deadline_met ? "1" : "0");
  out->push_back(',');
  out->append(std::to_string(r.socf_iterations));
  out->push_back(',');
  out->append(std::to_string(r.transfers));
  out->push_back(',');
  out->append(std::to_string(r.joins));
  out->push_back(',');
  out->append(std::to_string(r.quits));
  out->push_back('\n');
}

// What one policy invocation produced for one frame, with the pieces a run
// trace records when tracing is on.
struct FrameStep {
  FrameDecision decision;
  FrameOutcome outcome;
  int passes = 0;
  int transfers = 0;
  int joins = 0;
  int quits = 0;
  std::vector<SocfCallRecord> socf_calls;
  bool has_matching = false;
  MatchingRecord matching;
};

// Highest-gain subcarrier at ES b still unused in `d`, -1 when none is free.
int best_free_subcarrier(const ScenarioConfig& cfg, const ChannelState& channel,
                         const FrameDecision& d, int b, int n) {
  int best = -1;
  double best_gain = 0.0;
  for (int w = 0; w < cfg.num_subcarriers; ++w) {
    bool taken = false;
    for (int m = 0; m < cfg.num_sensors && !taken; ++m) {
      taken = d.z(b, m, w) != 0;
    }
    if (taken) continue;
    const double g = channel.at(b, n, w);
    if (best < 0 || g > best_gain) {
      best = w;
      best_gain = g;
    }
  }
  return best;
}

std::vector<std::uint8_t> held_assignment(const ScenarioConfig& cfg,
                                          const HistoryState& hist) {
  std::vector<std::uint8_t> x = hist.prev_assignment;
  if (std::find(x.begin(), x.end(), std::uint8_t{1}) == x.end()) {
    x.assign(static_cast<std::size_t>(cfg.num_partial_dts) * cfg.num_ess, 0);
    for (int c = 0; c < cfg.num_partial_dts; ++c) {
      x[static_cast<std::size_t>(c) * cfg.num_ess + c] = 1;
    }
  }
  return x;
}

int held_dt_at(const ScenarioConfig& cfg, const std::vector<std::uint8_t>& x,
               int b) {
  for (int c = 0; c < cfg.num_partial_dts; ++c) {
    if (x[static_cast<std::size_t>(c) * cfg.num_ess + b]) return c;
  }
  return -1;
}

// Standalone coalition-formation policy: hold the previous assignment (the
// identity one on the first frame), run formation under a full-round game
// context, grant each member its best free subcarrier, and train to the
// enforced round bound. Association structure is decided entirely by the
// switch rules, which makes this the cleanest probe of how switching
// responds to the configuration-cost weight.
FrameStep socf_stack_step(const ScenarioConfig& cfg, const FrameDraws& draws,
                          const HistoryState& hist, std::uint64_t run_seed,
                          bool want_trace) {
  const std::vector<std::uint8_t> x = held_assignment(cfg, hist);

  // Full rounds at game entry: each hosting ES's useful-round bound over its
  // previous coalition's fresh batch.
  std::vector<double> entry_rounds(cfg.num_ess, 0.0);
  for (int b = 0; b < cfg.num_ess; ++b) {
    const int c = held_dt_at(cfg, x, b);
    if (c < 0) continue;
    double batch = 0.0;
    for (int n = 0; n < cfg.num_sensors; ++n) {
      if (hist.prev_y(b, n)) batch += draws.data(n, c, cfg.num_partial_dts);
    }
    entry_rounds[b] = max_training_rounds(
        cfg, c, hist.cumulative_bits[c] + batch, hist.frame);
  }

  const LowerGameContext ctx =
      make_lower_game_context(cfg, draws, hist, x, entry_rounds);
  const SocfResult res =
      socf(ctx, stream_seed(run_seed, Stream::kCoalitionInit, hist.frame));

  FrameStep step;
  step.decision = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                      cfg.num_sensors, cfg.num_subcarriers);
  step.decision.assignment = x;
  step.decision.association = res.partition.to_association();
  for (int b = 0; b < cfg.num_ess; ++b) {
    for (int n : res.partition.members[static_cast<std::size_t>(b)]) {
      const int w = best_free_subcarrier(cfg, draws.channel, step.decision, b, n);
      if (w >= 0) step.decision.z(b, n, w) = 1;
    }
  }
  const std::vector<int> bounds =
      per_es_round_bounds(cfg, draws, step.decision, hist);
  for (int b = 0; b < cfg.num_ess; ++b) {
    step.decision.training_rounds[b] = bounds[b];
  }

  step.outcome = evaluate_frame(cfg, draws, step.decision, hist);
  step.passes = res.trace.passes;
  step.transfers = res.trace.transfers;
  step.joins = res.trace.joins;
  step.quits = res.trace.quits;
  if (want_trace) {
    SocfCallRecord call;
    call.assignment = x;
    call.rounds = entry_rounds;
    call.trace = res.trace;
    call.final_members = res.partition.members;
    step.socf_calls.push_back(std::move(call));
  }
  return step;
}

// Final partition implied by an initial membership and a switch sequence.
std::vector<std::vector<int>> members_after_switches(const SocfTrace& trace,
                                                     int num_ess,
                                                     int num_sensors) {
  CoalitionPartition p = CoalitionPartition::empty(num_ess, num_sensors);
  for (int b = 0; b < num_ess; ++b) {
    for (int n : trace.initial_members[static_cast<std::size_t>(b)]) p.add(b, n);
  }
  for (const SwitchRecord& s : trace.switches) {
    if (s.from_es >= 0) p.remove(s.from_es, s.sensor);
    if (s.to_es >= 0) p.add(s.to_es, s.sensor);
  }
  return p.members;
}

FrameStep dmo_eval_step(const ScenarioConfig& cfg,
                        const OrchestratorConfig& ocfg, DmoAgents& agents,
                        const FrameDraws& draws, const HistoryState& hist,
                        std::uint64_t run_seed, bool want_trace) {
  DmoStepOptions options;
  options.deterministic = true;
  options.store_transitions = false;
  DmoStepResult res = dmo_step(cfg, ocfg, agents, draws, hist, run_seed, options);

  FrameStep step;
  step.decision = std::move(res.decision);
  step.outcome = std::move(res.outcome);
  for (const SocfTrace& tr : res.socf_traces) {
    step.passes += tr.passes;
    step.transfers += tr.transfers;
    step.joins += tr.joins;
    step.quits += tr.quits;
  }
  if (want_trace) {
    for (std::size_t i = 0; i < res.socf_traces.size(); ++i) {
      SocfCallRecord call;
      call.assignment = res.stage1_assignment;
      call.rounds = res.stage1_rounds[i];
      call.final_members = members_after_switches(res.socf_traces[i],
                                                  cfg.num_ess, cfg.num_sensors);
      call.trace = std::move(res.socf_traces[i]);
      step.socf_calls.push_back(std::move(call));
    }
    step.has_matching = true;
    step.matching.prefs = std::move(res.prefs);
    step.matching.matching = std::move(res.matching);
  }
  return step;
}

// Shared resources of one sweep point: the policy state reused across seeds.
struct PointRuntime {
  std::unique_ptr<TabularQPolicy> ql;
  DmoAgents* agents = nullptr;  // owned by the caller, shared across points
  const OrchestratorConfig* ocfg = nullptr;
};

SeedRun run_one_seed(const ExperimentSpec& spec, const ScenarioConfig& tmpl,
                     PointRuntime& rt, std::uint64_t seed, std::ofstream* csv,
                     RunTrace* trace_out) {
  SeedRun run;
  run.seed = seed;

  const ScenarioConfig cfg = generate_scenario(seed, tmpl);
  if (trace_out != nullptr) {
    trace_out->config = cfg;
    trace_out->seed = seed;
    trace_out->policy = policy_kind_name(spec.policy);
    trace_out->framework = framework_kind_name(spec.framework);
  }

  if (spec.framework == FrameworkKind::kCentra) {
    CentraHistory hist = CentraHistory::initial(cfg);
    double cum_shaped = 0.0;
    double cum_gain = 0.0;
    double cum_cost = 0.0;
    for (int t = 1; t <= spec.num_frames; ++t) {
      const FrameDraws draws = frame_draws(cfg, seed, t);
      const CentraResult res = centra_simulate(cfg, draws, hist);
      cum_shaped += res.outcome.shaped_utility;
      cum_gain += cfg.gain_weight_xi * res.outcome.global_quality;
      cum_cost += cfg.cost_weight_kappa * res.outcome.e_total +
                  cfg.config_cost * res.outcome.config_changes;
      MetricsRow row;
      row.seed = seed;
      row.frame = t;
      row.utility = res.outcome.utility;
      row.cumulative_utility = cum_shaped;
      row.cumulative_gain = cum_gain;
      row.cumulative_cost = cum_cost;
      row.tau_total = res.outcome.tau_total;
      row.deadline_met = res.outcome.deadline_met;
      if (csv != nullptr) {
        std::string line;
        append_csv_row(&line, row);
        *csv << line << std::flush;
      }
      run.rows.push_back(row);
      hist.advance(res.admitted, res.outcome.collected_bits);
    }
    return run;
  }

  HistoryState hist = HistoryState::initial(cfg);
  double cum_shaped = 0.0;
  double cum_gain = 0.0;
  double cum_cost = 0.0;
  for (int t = 1; t <= spec.num_frames; ++t) {
    const FrameDraws draws = frame_draws(cfg, seed, t);
    FrameStep step;
    switch (spec.policy) {
      case PolicyKind::kGre:
        step.decision = gre_policy(cfg, draws, hist);
        step.outcome = evaluate_frame(cfg, draws, step.decision, hist);
        break;
      case PolicyKind::kTabularQ: {
        Rng rng = stream_rng(seed, Stream::kQlearn, t);
        step.decision = rt.ql->act(cfg, draws, hist, /*learn=*/false, rng);
        step.outcome = evaluate_frame(cfg, draws, step.decision, hist);
        break;
      }
      case PolicyKind::kSocf:
        step = socf_stack_step(cfg, draws, hist, seed, trace_out != nullptr);
        break;
      case PolicyKind::kDmo:
        step = dmo_eval_step(cfg, *rt.ocfg, *rt.agents, draws, hist, seed,
                             trace_out != nullptr);
        break;
      default:
        throw std::invalid_argument("spec names no runnable policy");
    }

    cum_shaped += step.outcome.shaped_utility;
    cum_gain += cfg.gain_weight_xi * step.outcome.global_quality;
    cum_cost += cfg.cost_weight_kappa * step.outcome.e_total +
                cfg.config_cost * step.outcome.config_changes;
    MetricsRow row;
    row.seed = seed;
    row.frame = t;
    row.utility = step.outcome.utility;
    row.cumulative_utility = cum_shaped;
    row.cumulative_gain = cum_gain;
    row.cumulative_cost = cum_cost;
    row.tau_total = step.outcome.tau_total;
    row.deadline_met = step.outcome.deadline_met;
    row.socf_iterations = step.passes;
    row.transfers = step.transfers;
    row.joins = step.joins;
    row.quits = step.quits;
    if (csv != nullptr) {
      std::string line;
      append_csv_row(&line, row);
      *csv << line << std::flush;
    }
    run.rows.push_back(row);

    if (trace_out != nullptr) {
      FrameRecord fr;
      fr.frame = t;
      fr.decision = step.decision;
      fr.socf_calls = std::move(step.socf_calls);
      fr.has_matching = step.has_matching;
      fr.matching = std::move(step.matching);
      fr.utility = step.outcome.utility;
      fr.shaped_utility = step.outcome.shaped_utility;
      fr.global_quality = step.outcome.global_quality;
      fr.e_total = step.outcome.e_total;
      fr.tau_total = step.outcome.tau_total;
      fr.config_changes = step.outcome.config_changes;
      fr.deadline_met = step.outcome.deadline_met;
      trace_out->frames.push_back(std::move(fr));
    }

    hist.advance(step.decision, step.outcome.collected_bits);
  }
  return run;
}

void fill_point_statistics(SweepPointResult* point) {
  const std::size_t n = point->runs.size();
  std::vector<double> utils, gains, costs;
  double switches_sum = 0.0;
  for (const SeedRun& run : point->runs) {
    const MetricsRow& last = run.rows.back();
    utils.push_back(last.cumulative_utility);
    gains.push_back(last.cumulative_gain);
    costs.push_back(last.cumulative_cost);
    double sw = 0.0;
    for (const MetricsRow& row : run.rows) {
      sw += row.transfers + row.joins + row.quits;
    }
    switches_sum += sw;
  }
  auto mean = [n](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(n);
  };
  auto stddev = [n](const std::vector<double>& v, double m) {
    if (n < 2) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(n - 1));
  };
  point->mean_cumulative_utility = mean(utils);
  point->stddev_cumulative_utility = stddev(utils, point->mean_cumulative_utility);
  point->mean_cumulative_gain = mean(gains);
  point->stddev_cumulative_gain = stddev(gains, point->mean_cumulative_gain);
  point->mean_cumulative_cost = mean(costs);
  point->stddev_cumulative_cost = stddev(costs, point->mean_cumulative_cost);
  point->mean_switches = switches_sum / static_cast<double>(n);
}

// File-name stem of one run: the policy (or the framework when the framework
// fixes the rule), plus the framework qualifier and sweep-point index.
std::string run_label(const ExperimentSpec& spec) {
  if (spec.framework == FrameworkKind::kCentra) return "centra";
  std::string label = policy_kind_name(spec.policy);
  if (spec.framework == FrameworkKind::kNonOverlap) label += "_nonoverlap";
  return label;
}

std::string point_suffix(const ExperimentSpec& spec, std::size_t k) {
  if (spec.sweep_axis == SweepAxis::kNone) return "";
  return "_" + sweep_axis_name(spec.sweep_axis) + "_" + std::to_string(k);
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& tmpl, SweepAxis axis,
                                 double value) {
  ScenarioConfig out = tmpl;
  switch (axis) {
    case SweepAxis::kNone: break;
    case SweepAxis::kXi: out.gain_weight_xi = value; break;
    case SweepAxis::kKappa: out.cost_weight_kappa = value; break;
    case SweepAxis::kConfigCost: out.config_cost = value; break;
  }
  return out;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();

  const bool persist = !spec.out_dir.empty();
  if (persist) std::filesystem::create_directories(spec.out_dir);

  // Swept weights do not change world dimensions, so deep agents are shared
  // across sweep points; checkpointed weights come in as-is, fresh ones are
  // derived from the training seed.
  std::unique_ptr<DmoAgents> agents;
  if (spec.policy == PolicyKind::kDmo) {
    if (!spec.checkpoint_path.empty()) {
      agents = std::make_unique<DmoAgents>(load_agents(spec.checkpoint_path));
    } else {
      ScenarioConfig tmpl0 = spec.scenario;
      if (spec.framework == FrameworkKind::kNonOverlap) {
        tmpl0 = non_overlap_config(tmpl0);
      }
      agents = std::make_unique<DmoAgents>(make_dmo_agents(
          generate_scenario(spec.seeds.front(), tmpl0), spec.orchestrator,
          spec.train_seed));
    }
  }

  std::vector<double> grid = spec.sweep_values;
  if (grid.empty()) grid.push_back(0.0);

  ExperimentResult result;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    ScenarioConfig tmpl = apply_sweep_value(spec.scenario, spec.sweep_axis,
                                            grid[k]);
    if (spec.framework == FrameworkKind::kNonOverlap) {
      tmpl = non_overlap_config(tmpl);
    }

    PointRuntime rt;
    rt.agents = agents.get();
    rt.ocfg = &spec.orchestrator;
    if (spec.policy == PolicyKind::kTabularQ) {
      rt.ql = std::make_unique<TabularQPolicy>(
          train_tabular_q(tmpl, spec.train_seed, spec.ql_train_episodes,
                          spec.ql_train_frames));
    }

    SweepPointResult point;
    point.sweep_value = grid[k];

    std::ofstream csv;
    if (persist) {
      const std::string path = spec.out_dir + "/metrics_" + run_label(spec) +
                               point_suffix(spec, k) + ".csv";
      csv.open(path, std::ios::binary);
      if (!csv) throw std::runtime_error("cannot open for writing: " + path);
      csv << kMetricsCsvSchema << '\n' << kMetricsCsvHeader << '\n';
    }

    for (std::uint64_t seed : spec.seeds) {
      RunTrace trace;
      const bool tracing = persist && spec.record_trace;
      point.runs.push_back(run_one_seed(spec, tmpl, rt, seed,
                                        persist ? &csv : nullptr,
                                        tracing ? &trace : nullptr));
      if (tracing) {
        save_trace(trace, spec.out_dir + "/trace_" + run_label(spec) +
                              point_suffix(spec, k) + "_seed_" +
                              std::to_string(seed) + ".json");
      }
    }
    fill_point_statistics(&point);
    result.points.push_back(std::move(point));
  }

  if (persist) {
    const std::string path = spec.out_dir + "/summary.txt";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << summary_to_text(spec, result);
  }
  return result;
}

std::string metrics_to_csv(const std::vector<SeedRun>& runs) {
  std::string out;
  out.append(kMetricsCsvSchema);
  out.push_back('\n');
  out.append(kMetricsCsvHeader);
  out.push_back('\n');
  for (const SeedRun& run : runs) {
    for (const MetricsRow& row : run.rows) append_csv_row(&out, row);
  }
  return out;
}

std::string summary_to_text(const ExperimentSpec& spec,
                            const ExperimentResult& result) {
  std::string out;
  out += "schema=fedtwin-summary v1\n";
  out += "policy=" + policy_kind_name(spec.policy) + "\n";
  out += "framework=" + framework_kind_name(spec.framework) + "\n";
  out += "num_frames=" + std::to_string(spec.num_frames) + "\n";
  out += "num_seeds=" + std::to_string(spec.seeds.size()) + "\n";
  std::string seed_list;
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
    if (i > 0) seed_list += ",";
    seed_list += std::to_string(spec.seeds[i]);
  }
  out += "seeds=" + seed_list + "\n";
  out += "sweep_axis=" + sweep_axis_name(spec.sweep_axis) + "\n";
  out += "num_points=" + std::to_string(result.points.size()) + "\n";
  for (std::size_t k = 0; k < result.points.size(); ++k) {
    const SweepPointResult& p = result.points[k];
    const std::string key = "point." + std::to_string(k) + ".";
    out += key + "value=" + format_double(p.sweep_value) + "\n";
    out += key + "mean_cumulative_utility=" +
           format_double(p.mean_cumulative_utility) + "\n";
    out += key + "stddev_cumulative_utility=" +
           format_double(p.stddev_cumulative_utility) + "\n";
    out += key + "mean_cumulative_gain=" +
           format_double(p.mean_cumulative_gain) + "\n";
    out += key + "stddev_cumulative_gain=" +
           format_double(p.stddev_cumulative_gain) + "\n";
    out += key + "mean_cumulative_cost=" +
           format_double(p.mean_cumulative_cost) + "\n";
    out += key + "stddev_cumulative_cost=" +
           format_double(p.stddev_cumulative_cost) + "\n";
    out += key + "mean_switches=" + format_double(p.mean_switches) + "\n";
  }
  return out;
}

// --- scenario config JSON ------------------------------------------------------

namespace {

ordered_json vec2_list_to_json(const std::vector<Vec2>& v) {
  ordered_json j = ordered_json::array();
  for (const Vec2& p : v) j.push_back(ordered_json::array({p.x, p.y}));
  return j;
}

std::vector<Vec2> vec2_list_from_json(const ordered_json& j) {
  std::vector<Vec2> v;
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 2) {
      throw std::runtime_error("scenario config: positions must be [x, y] pairs");
    }
    v.push_back(Vec2{e[0].get<double>(), e[1].get<double>()});
  }
  return v;
}

}  // namespace

std::string scenario_config_to_json(const ScenarioConfig& cfg) {
  ordered_json j;
  j["num_partial_dts"] = cfg.num_partial_dts;
  j["num_ess"] = cfg.num_ess;
  j["num_sensors"] = cfg.num_sensors;
  j["num_subcarriers"] = cfg.num_subcarriers;
  j["max_assoc_per_sensor"] = cfg.max_assoc_per_sensor;
  j["subcarrier_bandwidth_hz"] = cfg.subcarrier_bandwidth_hz;
  j["sensor_tx_power_w"] = cfg.sensor_tx_power_w;
  j["noise_power_w"] = cfg.noise_power_w;
  j["min_rate_bps"] = cfg.min_rate_bps;
  j["es_tx_power_w"] = cfg.es_tx_power_w;
  j["fiber_es_cloud_bps"] = cfg.fiber_es_cloud_bps;
  j["fiber_cloud_es_bps"] = cfg.fiber_cloud_es_bps;
  j["fiber_es_es_bps"] = cfg.fiber_es_es_bps;
  j["cpu_cycles_per_bit_es"] = cfg.cpu_cycles_per_bit_es;
  j["cpu_speed_es_hz"] = cfg.cpu_speed_es_hz;
  j["cpu_cycles_per_bit_cloud"] = cfg.cpu_cycles_per_bit_cloud;
  j["cpu_speed_cloud_hz"] = cfg.cpu_speed_cloud_hz;
  j["switched_capacitance"] = cfg.switched_capacitance;
  j["cloud_access_rate_s"] = cfg.cloud_access_rate_s;
  j["cloud_instr_per_dt"] = cfg.cloud_instr_per_dt;
  j["cloud_power_max_w"] = cfg.cloud_power_max_w;
  j["cloud_power_idle_w"] = cfg.cloud_power_idle_w;
  j["cloud_power_leak_w"] = cfg.cloud_power_leak_w;
  j["lipschitz_l"] = cfg.lipschitz_l;
  j["learning_rate_delta"] = cfg.learning_rate_delta;
  j["strong_convexity_gamma"] = cfg.strong_convexity_gamma;
  j["log_norm_beta"] = cfg.log_norm_beta;
  j["beta_unit_scale"] = cfg.beta_unit_scale;
  j["required_quality"] = cfg.required_quality;
  j["model_size_bits"] = cfg.model_size_bits;
  j["max_rounds_clamp"] = cfg.max_rounds_clamp;
  j["gain_weight_xi"] = cfg.gain_weight_xi;
  j["cost_weight_kappa"] = cfg.cost_weight_kappa;
  j["config_cost"] = cfg.config_cost;
  j["frame_deadline_s"] = cfg.frame_deadline_s;
  j["discount_eta"] = cfg.discount_eta;
  j["penalty_psi"] = cfg.penalty_psi;
  j["area_side_m"] = cfg.area_side_m;
  j["es_pos"] = vec2_list_to_json(cfg.es_pos);
  j["sensor_pos"] = vec2_list_to_json(cfg.sensor_pos);
  j["gain_levels"] = cfg.gain_levels;
  j["data_min_bits"] = cfg.data_min_bits;
  j["data_max_bits"] = cfg.data_max_bits;
  return j.dump(2) + "\n";
}

ScenarioConfig scenario_config_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("scenario config: not valid JSON: ") +
                             e.what());
  }
  if (!j.is_object()) {
    throw std::runtime_error("scenario config: expected a JSON object");
  }
  ScenarioConfig cfg = default_template();
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const ordered_json& v = it.value();
      if (key == "num_partial_dts") cfg.num_partial_dts = v.get<int>();
      else if (key == "num_ess") cfg.num_ess = v.get<int>();
      else if (key == "num_sensors") cfg.num_sensors = v.get<int>();
      else if (key == "num_subcarriers") cfg.num_subcarriers = v.get<int>();
      else if (key == "max_assoc_per_sensor") cfg.max_assoc_per_sensor = v.get<int>();
      else if (key == "subcarrier_bandwidth_hz") cfg.subcarrier_bandwidth_hz = v.get<double>();
      else if (key == "sensor_tx_power_w") cfg.sensor_tx_power_w = v.get<std::vector<double>>();
      else if (key == "noise_power_w") cfg.noise_power_w = v.get<std::vector<double>>();
      else if (key == "min_rate_bps") cfg.min_rate_bps = v.get<std::vector<double>>();
      else if (key == "es_tx_power_w") cfg.es_tx_power_w = v.get<std::vector<double>>();
      else if (key == "fiber_es_cloud_bps") cfg.fiber_es_cloud_bps = v.get<std::vector<double>>();
      else if (key == "fiber_cloud_es_bps") cfg.fiber_cloud_es_bps = v.get<std::vector<double>>();
      else if (key == "fiber_es_es_bps") cfg.fiber_es_es_bps = v.get<std::vector<std::vector<double>>>();
      else if (key == "cpu_cycles_per_bit_es") cfg.cpu_cycles_per_bit_es = v.get<double>();
      else if (key == "cpu_speed_es_hz") cfg.cpu_speed_es_hz = v.get<double>();
      else if (key == "cpu_cycles_per_bit_cloud") cfg.cpu_cycles_per_bit_cloud = v.get<double>();
      else if (key == "cpu_speed_cloud_hz") cfg.cpu_speed_cloud_hz = v.get<double>();
      else if (key == "switched_capacitance") cfg.switched_capacitance = v.get<double>();
      else if (key == "cloud_access_rate_s") cfg.cloud_access_rate_s = v.get<double>();
      else if (key == "cloud_instr_per_dt") cfg.cloud_instr_per_dt = v.get<std::vector<double>>();
      else if (key == "cloud_power_max_w") cfg.cloud_power_max_w = v.get<double>();
      else if (key == "cloud_power_idle_w") cfg.cloud_power_idle_w = v.get<double>();
      else if (key == "cloud_power_leak_w") cfg.cloud_power_leak_w = v.get<double>();
      else if (key == "lipschitz_l") cfg.lipschitz_l = v.get<double>();
      else if (key == "learning_rate_delta") cfg.learning_rate_delta = v.get<double>();
      else if (key == "strong_convexity_gamma") cfg.strong_convexity_gamma = v.get<double>();
      else if (key == "log_norm_beta") cfg.log_norm_beta = v.get<double>();
      else if (key == "beta_unit_scale") cfg.beta_unit_scale = v.get<double>();
      else if (key == "required_quality") cfg.required_quality = v.get<std::vector<double>>();
      else if (key == "model_size_bits") cfg.model_size_bits = v.get<std::vector<double>>();
      else if (key == "max_rounds_clamp") cfg.max_rounds_clamp = v.get<int>();
      else if (key == "gain_weight_xi") cfg.gain_weight_xi = v.get<double>();
      else if (key == "cost_weight_kappa") cfg.cost_weight_kappa = v.get<double>();
      else if (key == "config_cost") cfg.config_cost = v.get<double>();
      else if (key == "frame_deadline_s") cfg.frame_deadline_s = v.get<double>();
      else if (key == "discount_eta") cfg.discount_eta = v.get<double>();
      else if (key == "penalty_psi") cfg.penalty_psi = v.get<double>();
      else if (key == "area_side_m") cfg.area_side_m = v.get<double>();
      else if (key == "es_pos") cfg.es_pos = vec2_list_from_json(v);
      else if (key == "sensor_pos") cfg.sensor_pos = vec2_list_from_json(v);
      else if (key == "gain_levels") cfg.gain_levels = v.get<std::vector<double>>();
      else if (key == "data_min_bits") cfg.data_min_bits = v.get<double>();
      else if (key == "data_max_bits") cfg.data_max_bits = v.get<double>();
      else {
        throw std::runtime_error("scenario config: unknown key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("scenario config: mistyped value: ") +
                             e.what());
  }
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return scenario_config_from_json(buf.str());
}

void save_scenario_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << scenario_config_to_json(cfg);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace fedtwin
