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
// Command-line front end. Subcommands:
//   run      execute one (policy, framework) experiment over seeds
//   train    train the deep policy and write a checkpoint
//   sweep    run a weight-grid experiment (xi | kappa | config_cost)
//   compare  paired framework comparison on shared seeds
//   verify   replay-audit recorded run traces

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "fedtwin/baselines.hpp"
#include "fedtwin/drl.hpp"
#include "fedtwin/experiment.hpp"
#include "fedtwin/scenario.hpp"
#include "fedtwin/trace.hpp"

namespace {

using namespace fedtwin;

// Shared run/sweep/compare options, bound per subcommand.
struct CommonOpts {
  std::string config_path;
  std::vector<std::uint64_t> seed_list;
  int num_seeds = 10;
  int frames = 100;
  std::string policy = "gre";
  std::string framework = "federated";
  std::string out_dir;
  bool trace = false;
  std::string checkpoint;
  std::uint64_t train_seed = 9001;
  int ql_episodes = 240;
  int ql_frames = 60;
};

void add_common(CLI::App* cmd, CommonOpts* o, bool with_policy_set) {
  cmd->add_option("--config", o->config_path,
                  "scenario config JSON (partial files override defaults)");
  cmd->add_option("--seed", o->seed_list,
                  "explicit world seed (repeatable; overrides --seeds)");
  cmd->add_option("--seeds", o->num_seeds, "number of seeds, used as 1..N")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--frames", o->frames, "frames per run")
      ->check(CLI::PositiveNumber);
  if (with_policy_set) {
    cmd->add_option("--policy", o->policy, "decision policy")
        ->check(CLI::IsMember({"dmo", "gre", "ql", "socf"}));
    cmd->add_option("--framework", o->framework, "construction framework")
        ->check(CLI::IsMember({"federated", "centra", "nonoverlap"}));
  }
  cmd->add_option("--out", o->out_dir, "output directory for CSV/summary");
  cmd->add_option("--checkpoint", o->checkpoint,
                  "trained deep-policy checkpoint (policy dmo)");
  cmd->add_option("--train-seed", o->train_seed,
                  "training stream seed (ql training, fresh dmo agents)");
  cmd->add_option("--ql-episodes", o->ql_episodes, "tabular-Q training episodes");
  cmd->add_option("--ql-frames", o->ql_frames, "frames per tabular-Q episode");
}

PolicyKind parse_policy(const std::string& s) {
  static const std::map<std::string, PolicyKind> kMap = {
      {"dmo", PolicyKind::kDmo},
      {"gre", PolicyKind::kGre},
      {"ql", PolicyKind::kTabularQ},
      {"socf", PolicyKind::kSocf},
  };
  return kMap.at(s);
}

FrameworkKind parse_framework(const std::string& s) {
  static const std::map<std::string, FrameworkKind> kMap = {
      {"federated", FrameworkKind::kFederated},
      {"centra", FrameworkKind::kCentra},
      {"nonoverlap", FrameworkKind::kNonOverlap},
  };
  return kMap.at(s);
}

ExperimentSpec spec_from_opts(const CommonOpts& o) {
  ExperimentSpec spec;
  spec.scenario =
      o.config_path.empty() ? default_template() : load_scenario_config(o.config_path);
  spec.policy = parse_policy(o.policy);
  spec.framework = parse_framework(o.framework);
  spec.num_frames = o.frames;
  if (!o.seed_list.empty()) {
    spec.seeds = o.seed_list;
  } else {
    spec.seeds.resize(static_cast<std::size_t>(o.num_seeds));
    std::iota(spec.seeds.begin(), spec.seeds.end(), std::uint64_t{1});
  }
  spec.out_dir = o.out_dir;
  spec.record_trace = o.trace;
  spec.checkpoint_path = o.checkpoint;
  spec.train_seed = o.train_seed;
  spec.ql_train_episodes = o.ql_episodes;
  spec.ql_train_frames = o.ql_frames;
  return spec;
}

int cmd_run(const CommonOpts& o) {
  ExperimentSpec spec = spec_from_opts(o);
  const ExperimentResult result = run_experiment(spec);
  std::fputs(summary_to_text(spec, result).c_str(), stdout);
  if (!spec.out_dir.empty()) {
    std::printf("wrote %s\n", spec.out_dir.c_str());
  }
  return 0;
}

int cmd_sweep(const CommonOpts& o, const std::string& axis,
              const std::vector<double>& values) {
  ExperimentSpec spec = spec_from_opts(o);
  static const std::map<std::string, SweepAxis> kAxes = {
      {"xi", SweepAxis::kXi},
      {"kappa", SweepAxis::kKappa},
      {"config_cost", SweepAxis::kConfigCost},
  };
  spec.sweep_axis = kAxes.at(axis);
  spec.sweep_values = values;
  const ExperimentResult result = run_experiment(spec);
  std::fputs(summary_to_text(spec, result).c_str(), stdout);
  if (!spec.out_dir.empty()) {
    std::printf("wrote %s\n", spec.out_dir.c_str());
  }
  return 0;
}

int cmd_train(const CommonOpts& o, int episodes, int frames, int stage1_cap,
              int update_every, const std::string& curve_path) {
  if (o.checkpoint.empty()) {
    std::fprintf(stderr, "error: train requires --checkpoint OUT\n");
    return 1;
  }
  ScenarioConfig tmpl =
      o.config_path.empty() ? default_template() : load_scenario_config(o.config_path);
  if (o.framework == "nonoverlap") tmpl = non_overlap_config(tmpl);
  OrchestratorConfig ocfg;
  ocfg.stage1_iteration_cap = stage1_cap;
  ocfg.update_every_episodes = update_every;
  const DmoTrainResult result =
      dmo_train(tmpl, ocfg, o.train_seed, episodes, frames);
  save_agents(result.agents, o.checkpoint);
  std::printf("trained %d episodes x %d frames; checkpoint %s\n", episodes,
              frames, o.checkpoint.c_str());
  if (!result.episode_return.empty()) {
    const int n = static_cast<int>(result.episode_return.size());
    const int tail = std::min(10, n);
    double first = 0.0;
    double last = 0.0;
    for (int i = 0; i < tail; ++i) {
      first += result.episode_return[static_cast<std::size_t>(i)];
      last += result.episode_return[static_cast<std::size_t>(n - tail + i)];
    }
    std::printf("episode return, first %d: %.4f  last %d: %.4f\n", tail,
                first / tail, tail, last / tail);
  }
  if (!curve_path.empty()) {
    std::FILE* f = std::fopen(curve_path.c_str(), "wb");
    if (f == nullptr) {
      std::fprintf(stderr, "error: cannot open %s\n", curve_path.c_str());
      return 1;
    }
    std::fputs("# fedtwin-training-curve v1\nepisode,episode_return\n", f);
    for (std::size_t e = 0; e < result.episode_return.size(); ++e) {
      std::fprintf(f, "%zu,%.12g\n", e, result.episode_return[e]);
    }
    std::fclose(f);
    std::printf("wrote %s\n", curve_path.c_str());
  }
  return 0;
}

int cmd_verify(const std::vector<std::string>& paths) {
  bool all_ok = true;
  for (const std::string& path : paths) {
    const RunTrace trace = load_trace(path);
    const TraceAuditReport rep = verify_trace(trace);
    std::printf("%s: %d frame(s), %d switch(es), %d formation replay(s), "
                "%d matching(s): %s\n",
                path.c_str(), rep.frames_checked, rep.switches_checked,
                rep.socf_replays_checked, rep.matchings_checked,
                rep.ok() ? "ok" : "FAILED");
    for (const std::string& v : rep.violations) {
      std::printf("  violation: %s\n", v.c_str());
      all_ok = false;
    }
  }
  return all_ok ? 0 : 1;
}

int cmd_compare(const CommonOpts& o) {
  struct Leg {
    std::string name;
    FrameworkKind framework;
    ExperimentResult result;
  };
  std::vector<Leg> legs = {
      {"federated", FrameworkKind::kFederated, {}},
      {"nonoverlap", FrameworkKind::kNonOverlap, {}},
      {"centra", FrameworkKind::kCentra, {}},
  };
  for (Leg& leg : legs) {
    CommonOpts lo = o;
    lo.framework = leg.name;
    if (leg.framework == FrameworkKind::kCentra) {
      lo.policy = "gre";  // the centralized rule ignores the optimizer
      lo.checkpoint.clear();
    }
    if (!o.out_dir.empty()) lo.out_dir = o.out_dir + "/" + leg.name;
    ExperimentSpec spec = spec_from_opts(lo);
    leg.result = run_experiment(spec);
  }

  std::printf("policy %s, %zu seed(s) x %d frame(s); final cumulative metrics\n",
              o.policy.c_str(), legs[0].result.points[0].runs.size(), o.frames);
  std::printf("%-12s %14s %14s %14s %14s\n", "leg", "gain(mean)", "gain(sd)",
              "cost(mean)", "utility(mean)");
  for (const Leg& leg : legs) {
    const SweepPointResult& p = leg.result.points[0];
    std::printf("%-12s %14.4f %14.4f %14.4f %14.4f\n", leg.name.c_str(),
                p.mean_cumulative_gain, p.stddev_cumulative_gain,
                p.mean_cumulative_cost, p.mean_cumulative_utility);
  }

  // Paired per-seed deltas: identical seed lists mean run i of every leg saw
  // the same world, so the differences below are paired samples.
  const auto& fed_runs = legs[0].result.points[0].runs;
  for (std::size_t l = 1; l < legs.size(); ++l) {
    const auto& base_runs = legs[l].result.points[0].runs;
    int gain_wins = 0;
    int cost_wins = 0;
    double gain_delta = 0.0;
    double cost_delta = 0.0;
    for (std::size_t i = 0; i < fed_runs.size(); ++i) {
      const MetricsRow& f = fed_runs[i].rows.back();
      const MetricsRow& b = base_runs[i].rows.back();
      gain_delta += f.cumulative_gain - b.cumulative_gain;
      cost_delta += f.cumulative_cost - b.cumulative_cost;
      if (f.cumulative_gain > b.cumulative_gain) ++gain_wins;
      if (f.cumulative_cost < b.cumulative_cost) ++cost_wins;
    }
    const double n = static_cast<double>(fed_runs.size());
    std::printf(
        "federated vs %-11s gain delta %+.4f (higher %d/%zu), cost delta "
        "%+.4f (lower %d/%zu)\n",
        legs[l].name.c_str(), gain_delta / n, gain_wins, fed_runs.size(),
        cost_delta / n, cost_wins, fed_runs.size());
  }
  if (!o.out_dir.empty()) std::printf("wrote %s\n", o.out_dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"federated digital-twin construction simulator"};
  app.require_subcommand(1);

  CommonOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "execute one experiment");
  add_common(run, &run_opts, /*with_policy_set=*/true);
  run->add_flag("--trace", run_opts.trace,
                "record one replayable JSON trace per seed (needs --out)");

  CommonOpts sweep_opts;
  std::string sweep_axis;
  std::vector<double> sweep_values;
  CLI::App* sweep = app.add_subcommand("sweep", "run a weight-grid experiment");
  add_common(sweep, &sweep_opts, /*with_policy_set=*/true);
  sweep->add_option("--axis", sweep_axis, "swept weight")
      ->required()
      ->check(CLI::IsMember({"xi", "kappa", "config_cost"}));
  sweep->add_option("--values", sweep_values, "grid values")->required();

  CommonOpts train_opts;
  int train_episodes = 240;
  int train_frames = 60;
  int stage1_cap = 1;
  int update_every = 1;
  std::string curve_path;
  CLI::App* train = app.add_subcommand("train", "train the deep policy");
  train->add_option("--config", train_opts.config_path, "scenario config JSON");
  train->add_option("--framework", train_opts.framework, "construction framework")
      ->check(CLI::IsMember({"federated", "nonoverlap"}));
  train->add_option("--episodes", train_episodes, "training episodes")
      ->check(CLI::PositiveNumber);
  train->add_option("--frames", train_frames, "frames per episode")
      ->check(CLI::PositiveNumber);
  train->add_option("--train-seed", train_opts.train_seed, "training seed");
  train->add_option("--checkpoint", train_opts.checkpoint,
                    "checkpoint output path")
      ->required();
  train->add_option("--stage1-cap", stage1_cap,
                    "resource-allocation iterations per frame")
      ->check(CLI::PositiveNumber);
  train->add_option("--update-every", update_every, "episodes per update")
      ->check(CLI::PositiveNumber);
  train->add_option("--curve", curve_path, "training-curve CSV output path");

  std::vector<std::string> verify_paths;
  CLI::App* verify = app.add_subcommand("verify", "replay-audit run traces");
  verify->add_option("traces", verify_paths, "trace JSON files")->required();

  CommonOpts compare_opts;
  CLI::App* compare =
      app.add_subcommand("compare", "paired framework comparison");
  add_common(compare, &compare_opts, /*with_policy_set=*/true);
  compare->get_option("--framework")->description(
      "ignored: compare always runs all frameworks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (sweep->parsed()) return cmd_sweep(sweep_opts, sweep_axis, sweep_values);
    if (train->parsed()) {
      return cmd_train(train_opts, train_episodes, train_frames, stage1_cap,
                       update_every, curve_path);
    }
    if (verify->parsed()) return cmd_verify(verify_paths);
    if (compare->parsed()) return cmd_compare(compare_opts);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
