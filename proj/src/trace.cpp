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

#include "fedtwin/trace.hpp"

#include <json.hpp>

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "fedtwin/experiment.hpp"
#include "fedtwin/model.hpp"
#include "fedtwin/rng.hpp"
#include "fedtwin/scenario.hpp"

namespace fedtwin {
namespace {

using nlohmann::ordered_json;

constexpr const char kTraceSchema[] = "fedtwin-trace";
constexpr int kTraceVersion = 1;

const char* switch_kind_name(SwitchKind k) {
  switch (k) {
    case SwitchKind::kTransfer: return "transfer";
    case SwitchKind::kJoin: return "join";
    case SwitchKind::kQuit: return "quit";
  }
  return "transfer";
}

SwitchKind switch_kind_from_name(const std::string& s) {
  if (s == "transfer") return SwitchKind::kTransfer;
  if (s == "join") return SwitchKind::kJoin;
  if (s == "quit") return SwitchKind::kQuit;
  throw std::runtime_error("trace: unknown switch kind '" + s + "'");
}

// --- serialization helpers -------------------------------------------------

std::vector<int> host_of_assignment(const std::vector<std::uint8_t>& x,
                                    int num_dts, int num_ess) {
  std::vector<int> host(num_dts, -1);
  for (int c = 0; c < num_dts; ++c) {
    for (int b = 0; b < num_ess; ++b) {
      if (x[static_cast<std::size_t>(c) * num_ess + b]) {
        host[c] = b;
        break;
      }
    }
  }
  return host;
}

std::vector<std::uint8_t> assignment_from_host_of(const std::vector<int>& host,
                                                  int num_dts, int num_ess) {
  if (static_cast<int>(host.size()) != num_dts) {
    throw std::runtime_error("trace: host list has wrong length");
  }
  std::vector<std::uint8_t> x(static_cast<std::size_t>(num_dts) * num_ess, 0);
  for (int c = 0; c < num_dts; ++c) {
    if (host[c] == -1) continue;
    if (host[c] < 0 || host[c] >= num_ess) {
      throw std::runtime_error("trace: host id out of range");
    }
    x[static_cast<std::size_t>(c) * num_ess + host[c]] = 1;
  }
  return x;
}

ordered_json members_to_json(const std::vector<std::vector<int>>& members) {
  ordered_json j = ordered_json::array();
  for (const auto& m : members) j.push_back(m);
  return j;
}

std::vector<std::vector<int>> members_from_json(const ordered_json& j,
                                                int num_ess, int num_sensors) {
  if (!j.is_array() || static_cast<int>(j.size()) != num_ess) {
    throw std::runtime_error("trace: member lists have wrong shape");
  }
  std::vector<std::vector<int>> members(num_ess);
  for (int b = 0; b < num_ess; ++b) {
    for (const auto& v : j[b]) {
      const int n = v.get<int>();
      if (n < 0 || n >= num_sensors) {
        throw std::runtime_error("trace: sensor id out of range");
      }
      members[static_cast<std::size_t>(b)].push_back(n);
    }
  }
  return members;
}

ordered_json decision_to_json(const FrameDecision& d) {
  ordered_json j;
  j["host_of"] = host_of_assignment(d.assignment, d.num_dts, d.num_ess);
  ordered_json members = ordered_json::array();
  ordered_json grants = ordered_json::array();
  for (int b = 0; b < d.num_ess; ++b) {
    ordered_json mb = ordered_json::array();
    ordered_json gb = ordered_json::array();
    for (int n = 0; n < d.num_sensors; ++n) {
      if (d.y(b, n)) mb.push_back(n);
      for (int w = 0; w < d.num_subcarriers; ++w) {
        if (d.z(b, n, w)) gb.push_back(ordered_json::array({n, w}));
      }
    }
    members.push_back(std::move(mb));
    grants.push_back(std::move(gb));
  }
  j["members"] = std::move(members);
  j["grants"] = std::move(grants);
  j["rounds"] = d.training_rounds;
  return j;
}

FrameDecision decision_from_json(const ordered_json& j, const ScenarioConfig& cfg) {
  FrameDecision d = FrameDecision::zero(cfg.num_partial_dts, cfg.num_ess,
                                        cfg.num_sensors, cfg.num_subcarriers);
  d.assignment = assignment_from_host_of(j.at("host_of").get<std::vector<int>>(),
                                         d.num_dts, d.num_ess);
  const auto members = members_from_json(j.at("members"), d.num_ess, d.num_sensors);
  for (int b = 0; b < d.num_ess; ++b) {
    for (int n : members[static_cast<std::size_t>(b)]) d.y(b, n) = 1;
  }
  const ordered_json& grants = j.at("grants");
  if (!grants.is_array() || static_cast<int>(grants.size()) != d.num_ess) {
    throw std::runtime_error("trace: grant lists have wrong shape");
  }
  for (int b = 0; b < d.num_ess; ++b) {
    for (const auto& g : grants[b]) {
      if (!g.is_array() || g.size() != 2) {
        throw std::runtime_error("trace: grant entries must be [sensor, subcarrier]");
      }
      const int n = g[0].get<int>();
      const int w = g[1].get<int>();
      if (n < 0 || n >= d.num_sensors || w < 0 || w >= d.num_subcarriers) {
        throw std::runtime_error("trace: grant id out of range");
      }
      d.z(b, n, w) = 1;
    }
  }
  d.training_rounds = j.at("rounds").get<std::vector<double>>();
  if (static_cast<int>(d.training_rounds.size()) != d.num_ess) {
    throw std::runtime_error("trace: rounds vector has wrong length");
  }
  return d;
}

ordered_json socf_call_to_json(const SocfCallRecord& call, int num_dts,
                               int num_ess) {
  ordered_json j;
  j["context_host_of"] = host_of_assignment(call.assignment, num_dts, num_ess);
  j["rounds"] = call.rounds;
  j["init_seed"] = call.trace.init_seed;
  j["initial_members"] = members_to_json(call.trace.initial_members);
  j["initial_potential"] = call.trace.initial_potential;
  ordered_json switches = ordered_json::array();
  for (const SwitchRecord& s : call.trace.switches) {
    ordered_json js;
    js["kind"] = switch_kind_name(s.kind);
    js["sensor"] = s.sensor;
    js["from"] = s.from_es;
    js["to"] = s.to_es;
    js["delta"] = s.delta_utility;
    js["potential_after"] = s.potential_after;
    switches.push_back(std::move(js));
  }
  j["switches"] = std::move(switches);
  j["passes"] = call.trace.passes;
  j["transfers"] = call.trace.transfers;
  j["joins"] = call.trace.joins;
  j["quits"] = call.trace.quits;
  j["final_members"] = members_to_json(call.final_members);
  return j;
}

SocfCallRecord socf_call_from_json(const ordered_json& j, const ScenarioConfig& cfg) {
  SocfCallRecord call;
  call.assignment = assignment_from_host_of(
      j.at("context_host_of").get<std::vector<int>>(), cfg.num_partial_dts,
      cfg.num_ess);
  call.rounds = j.at("rounds").get<std::vector<double>>();
  if (static_cast<int>(call.rounds.size()) != cfg.num_ess) {
    throw std::runtime_error("trace: context rounds vector has wrong length");
  }
  call.trace.init_seed = j.at("init_seed").get<std::uint64_t>();
  call.trace.initial_members =
      members_from_json(j.at("initial_members"), cfg.num_ess, cfg.num_sensors);
  call.trace.initial_potential = j.at("initial_potential").get<double>();
  for (const auto& js : j.at("switches")) {
    SwitchRecord s;
    s.kind = switch_kind_from_name(js.at("kind").get<std::string>());
    s.sensor = js.at("sensor").get<int>();
    s.from_es = js.at("from").get<int>();
    s.to_es = js.at("to").get<int>();
    s.delta_utility = js.at("delta").get<double>();
    s.potential_after = js.at("potential_after").get<double>();
    if (s.sensor < 0 || s.sensor >= cfg.num_sensors || s.from_es < -1 ||
        s.from_es >= cfg.num_ess || s.to_es < -1 || s.to_es >= cfg.num_ess) {
      throw std::runtime_error("trace: switch record ids out of range");
    }
    call.trace.switches.push_back(s);
  }
  call.trace.passes = j.at("passes").get<int>();
  call.trace.transfers = j.at("transfers").get<int>();
  call.trace.joins = j.at("joins").get<int>();
  call.trace.quits = j.at("quits").get<int>();
  call.final_members =
      members_from_json(j.at("final_members"), cfg.num_ess, cfg.num_sensors);
  return call;
}

// --- audit helpers ---------------------------------------------------------

bool close_enough(double recorded, double replayed) {
  const double tol =
      1e-9 * std::max(1.0, std::max(std::fabs(recorded), std::fabs(replayed)));
  return std::fabs(recorded - replayed) <= tol;
}

void check_scalar(TraceAuditReport& rep, const std::string& at,
                  const char* name, double recorded, double replayed) {
  if (!close_enough(recorded, replayed)) {
    std::ostringstream os;
    os << at << name << " does not reproduce: recorded " << recorded
       << ", replayed " << replayed;
    rep.violations.push_back(os.str());
  }
}

std::string describe_switch(const SwitchRecord& s) {
  std::ostringstream os;
  os << switch_kind_name(s.kind) << " of sensor " << s.sensor;
  if (s.from_es >= 0) os << " from " << s.from_es;
  if (s.to_es >= 0) os << " to " << s.to_es;
  return os.str();
}

// Builds a partition from explicit member lists, reporting structural
// defects (out-of-range ids, duplicate membership) instead of throwing.
bool partition_from_members(const ScenarioConfig& cfg,
                            const std::vector<std::vector<int>>& members,
                            const std::string& at, TraceAuditReport& rep,
                            CoalitionPartition* out) {
  *out = CoalitionPartition::empty(cfg.num_ess, cfg.num_sensors);
  if (static_cast<int>(members.size()) != cfg.num_ess) {
    rep.violations.push_back(at + "member lists have wrong shape");
    return false;
  }
  for (int b = 0; b < cfg.num_ess; ++b) {
    for (int n : members[static_cast<std::size_t>(b)]) {
      if (n < 0 || n >= cfg.num_sensors) {
        rep.violations.push_back(at + "sensor id out of range");
        return false;
      }
      if (out->contains(b, n)) {
        rep.violations.push_back(at + "duplicate membership in one coalition");
        return false;
      }
      out->add(b, n);
    }
  }
  return true;
}

// Re-audits one recorded formation run: every switch must be admissible in
// the rebuilt game state with the recorded utility delta, the final
// partition must equal the applied sequence, and a fresh formation run from
// the recorded init seed must replay the record exactly.
void audit_socf_call(const ScenarioConfig& cfg, const FrameDraws& draws,
                     const HistoryState& hist, std::uint64_t run_seed,
                     const SocfCallRecord& call, const std::string& at,
                     TraceAuditReport& rep) {
  if (call.trace.init_seed !=
      stream_seed(run_seed, Stream::kCoalitionInit, hist.frame)) {
    rep.violations.push_back(at +
                             "init seed does not derive from the run seed");
  }

  LowerGameContext ctx =
      make_lower_game_context(cfg, draws, hist, call.assignment, call.rounds);

  CoalitionPartition p;
  if (!partition_from_members(cfg, call.trace.initial_members,
                              at + "initial partition: ", rep, &p)) {
    return;
  }
  check_scalar(rep, at, "initial potential", call.trace.initial_potential,
               potential(ctx, p));

  int transfers = 0;
  int joins = 0;
  int quits = 0;
  for (std::size_t i = 0; i < call.trace.switches.size(); ++i) {
    const SwitchRecord& s = call.trace.switches[i];
    const std::string sat =
        at + "switch " + std::to_string(i) + " (" + describe_switch(s) + "): ";
    SwitchAudit audit;
    bool structurally_ok = true;
    switch (s.kind) {
      case SwitchKind::kTransfer:
        ++transfers;
        structurally_ok = s.from_es >= 0 && s.to_es >= 0 &&
                          p.contains(s.from_es, s.sensor) &&
                          !p.contains(s.to_es, s.sensor);
        if (structurally_ok) {
          audit = can_transfer(ctx, p, s.sensor, s.from_es, s.to_es);
        }
        break;
      case SwitchKind::kJoin:
        ++joins;
        structurally_ok = s.to_es >= 0 && !p.contains(s.to_es, s.sensor);
        if (structurally_ok) audit = can_join(ctx, p, s.sensor, s.to_es);
        break;
      case SwitchKind::kQuit:
        ++quits;
        structurally_ok = s.from_es >= 0 && p.contains(s.from_es, s.sensor);
        if (structurally_ok) audit = can_quit(ctx, p, s.sensor, s.from_es);
        break;
    }
    if (!structurally_ok) {
      rep.violations.push_back(sat + "inapplicable in the replayed partition");
      return;  // subsequent state is unknowable
    }
    ++rep.switches_checked;
    if (!audit.admissible) {
      rep.violations.push_back(sat + "not admissible");
    } else {
      check_scalar(rep, sat, "utility delta", s.delta_utility,
                   audit.potential_delta);
    }
    if (s.from_es >= 0) p.remove(s.from_es, s.sensor);
    if (s.to_es >= 0) p.add(s.to_es, s.sensor);
    check_scalar(rep, sat, "potential after", s.potential_after,
                 potential(ctx, p));
  }

  if (transfers != call.trace.transfers || joins != call.trace.joins ||
      quits != call.trace.quits) {
    rep.violations.push_back(at + "switch counts disagree with the sequence");
  }
  if (p.members != call.final_members) {
    rep.violations.push_back(
        at + "final partition does not equal the applied switch sequence");
  }

  try {
    const SocfResult re = socf(ctx, call.trace.init_seed);
    ++rep.socf_replays_checked;
    bool same = re.trace.initial_members == call.trace.initial_members &&
                re.trace.passes == call.trace.passes &&
                re.trace.switches.size() == call.trace.switches.size() &&
                re.partition.members == call.final_members;
    if (same) {
      for (std::size_t i = 0; i < re.trace.switches.size(); ++i) {
        const SwitchRecord& a = re.trace.switches[i];
        const SwitchRecord& b = call.trace.switches[i];
        if (a.kind != b.kind || a.sensor != b.sensor ||
            a.from_es != b.from_es || a.to_es != b.to_es ||
            !close_enough(b.delta_utility, a.delta_utility)) {
          same = false;
          break;
        }
      }
    }
    if (!same) {
      rep.violations.push_back(
          at + "formation does not replay identically from its init seed");
    }
  } catch (const std::exception& e) {
    rep.violations.push_back(at + std::string("formation replay threw: ") +
                             e.what());
  }
}

}  // namespace

// --- JSON round trip ---------------------------------------------------------

std::string trace_to_json(const RunTrace& trace) {
  ordered_json j;
  j["schema"] = kTraceSchema;
  j["version"] = kTraceVersion;
  j["seed"] = trace.seed;
  j["policy"] = trace.policy;
  j["framework"] = trace.framework;
  j["config"] = ordered_json::parse(scenario_config_to_json(trace.config));
  ordered_json frames = ordered_json::array();
  for (const FrameRecord& fr : trace.frames) {
    ordered_json jf;
    jf["frame"] = fr.frame;
    jf["decision"] = decision_to_json(fr.decision);
    ordered_json calls = ordered_json::array();
    for (const SocfCallRecord& call : fr.socf_calls) {
      calls.push_back(socf_call_to_json(call, trace.config.num_partial_dts,
                                        trace.config.num_ess));
    }
    jf["socf_calls"] = std::move(calls);
    if (fr.has_matching) {
      ordered_json jm;
      jm["dt_pref"] = fr.matching.prefs.dt_pref;
      jm["es_pref"] = fr.matching.prefs.es_pref;
      jm["es_of_dt"] = fr.matching.matching.es_of_dt;
      jf["matching"] = std::move(jm);
    }
    ordered_json jo;
    jo["utility"] = fr.utility;
    jo["shaped_utility"] = fr.shaped_utility;
    jo["global_quality"] = fr.global_quality;
    jo["e_total"] = fr.e_total;
    jo["tau_total"] = fr.tau_total;
    jo["config_changes"] = fr.config_changes;
    jo["deadline_met"] = fr.deadline_met;
    jf["outcome"] = std::move(jo);
    frames.push_back(std::move(jf));
  }
  j["frames"] = std::move(frames);
  return j.dump(2) + "\n";
}

RunTrace trace_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("trace: not valid JSON: ") + e.what());
  }
  try {
    if (!j.contains("schema") || j.at("schema").get<std::string>() != kTraceSchema) {
      throw std::runtime_error("trace: unrecognized schema marker");
    }
    if (!j.contains("version") || j.at("version").get<int>() != kTraceVersion) {
      throw std::runtime_error("trace: unsupported version");
    }
    RunTrace trace;
    trace.seed = j.at("seed").get<std::uint64_t>();
    trace.policy = j.value("policy", std::string());
    trace.framework = j.value("framework", std::string());
    trace.config = scenario_config_from_json(j.at("config").dump());
    trace.config.validate();
    for (const auto& jf : j.at("frames")) {
      FrameRecord fr;
      fr.frame = jf.at("frame").get<int>();
      fr.decision = decision_from_json(jf.at("decision"), trace.config);
      for (const auto& jc : jf.at("socf_calls")) {
        fr.socf_calls.push_back(socf_call_from_json(jc, trace.config));
      }
      if (jf.contains("matching")) {
        fr.has_matching = true;
        fr.matching.prefs.num_dts = trace.config.num_partial_dts;
        fr.matching.prefs.num_ess = trace.config.num_ess;
        fr.matching.prefs.dt_pref =
            jf.at("matching").at("dt_pref").get<std::vector<double>>();
        fr.matching.prefs.es_pref =
            jf.at("matching").at("es_pref").get<std::vector<double>>();
        fr.matching.matching.es_of_dt =
            jf.at("matching").at("es_of_dt").get<std::vector<int>>();
        const std::size_t grid =
            static_cast<std::size_t>(trace.config.num_partial_dts) *
            trace.config.num_ess;
        if (fr.matching.prefs.dt_pref.size() != grid ||
            fr.matching.prefs.es_pref.size() != grid ||
            fr.matching.matching.es_of_dt.size() !=
                static_cast<std::size_t>(trace.config.num_partial_dts)) {
          throw std::runtime_error("trace: matching record has wrong shape");
        }
        fr.matching.matching.dt_of_es.assign(trace.config.num_ess, -1);
        for (int c = 0; c < trace.config.num_partial_dts; ++c) {
          const int b = fr.matching.matching.es_of_dt[static_cast<std::size_t>(c)];
          if (b < 0 || b >= trace.config.num_ess) {
            throw std::runtime_error("trace: matched ES id out of range");
          }
          fr.matching.matching.dt_of_es[static_cast<std::size_t>(b)] = c;
        }
      }
      const auto& jo = jf.at("outcome");
      fr.utility = jo.at("utility").get<double>();
      fr.shaped_utility = jo.at("shaped_utility").get<double>();
      fr.global_quality = jo.at("global_quality").get<double>();
      fr.e_total = jo.at("e_total").get<double>();
      fr.tau_total = jo.at("tau_total").get<double>();
      fr.config_changes = jo.at("config_changes").get<int>();
      fr.deadline_met = jo.at("deadline_met").get<bool>();
      trace.frames.push_back(std::move(fr));
    }
    return trace;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("trace: missing or mistyped field: ") +
                             e.what());
  }
}

void save_trace(const RunTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << trace_to_json(trace);
  if (!out) throw std::runtime_error("write failed: " + path);
}

RunTrace load_trace(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return trace_from_json(buf.str());
}

// --- replay audit ------------------------------------------------------------

TraceAuditReport verify_trace(const RunTrace& trace) {
  TraceAuditReport rep;
  try {
    trace.config.validate();
  } catch (const std::exception& e) {
    rep.violations.push_back(std::string("config: ") + e.what());
    return rep;
  }
  const ScenarioConfig& cfg = trace.config;

  HistoryState hist = HistoryState::initial(cfg);
  for (const FrameRecord& fr : trace.frames) {
    const std::string at = "frame " + std::to_string(fr.frame) + ": ";
    if (fr.frame != hist.frame) {
      rep.violations.push_back(at + "out-of-order frame record (expected " +
                               std::to_string(hist.frame) + ")");
      break;
    }
    const FrameDraws draws = frame_draws(cfg, trace.seed, hist.frame);

    for (const std::string& v : decision_violations(cfg, fr.decision)) {
      rep.violations.push_back(at + v);
    }

    for (std::size_t k = 0; k < fr.socf_calls.size(); ++k) {
      audit_socf_call(cfg, draws, hist, trace.seed, fr.socf_calls[k],
                      at + "formation call " + std::to_string(k) + ": ", rep);
    }

    if (fr.has_matching) {
      ++rep.matchings_checked;
      try {
        const Matching gs = gale_shapley(fr.matching.prefs);
        if (gs.es_of_dt != fr.matching.matching.es_of_dt) {
          rep.violations.push_back(
              at + "matching is not the deferred-acceptance result");
        }
        const auto blocking =
            find_blocking_pairs(fr.matching.prefs, fr.matching.matching);
        if (!blocking.empty()) {
          std::ostringstream os;
          os << at << "matching admits " << blocking.size()
             << " blocking pair(s), first (" << blocking.front().first << ", "
             << blocking.front().second << ")";
          rep.violations.push_back(os.str());
        }
      } catch (const std::exception& e) {
        rep.violations.push_back(at + std::string("matching check threw: ") +
                                 e.what());
      }
    }

    FrameOutcome out;
    try {
      out = evaluate_frame(cfg, draws, fr.decision, hist);
    } catch (const std::exception& e) {
      rep.violations.push_back(at + std::string("replay failed: ") + e.what());
      ++rep.frames_checked;
      break;  // history can no longer be advanced faithfully
    }
    check_scalar(rep, at, "utility", fr.utility, out.utility);
    check_scalar(rep, at, "shaped utility", fr.shaped_utility,
                 out.shaped_utility);
    check_scalar(rep, at, "global quality", fr.global_quality,
                 out.global_quality);
    check_scalar(rep, at, "total energy", fr.e_total, out.e_total);
    check_scalar(rep, at, "total latency", fr.tau_total, out.tau_total);
    if (fr.config_changes != out.config_changes) {
      rep.violations.push_back(
          at + "configuration-change count does not reproduce: recorded " +
          std::to_string(fr.config_changes) + ", replayed " +
          std::to_string(out.config_changes));
    }
    if (fr.deadline_met != out.deadline_met) {
      rep.violations.push_back(at + "deadline flag does not reproduce");
    }

    hist.advance(fr.decision, out.collected_bits);
    ++rep.frames_checked;
  }
  return rep;
}

}  // namespace fedtwin
