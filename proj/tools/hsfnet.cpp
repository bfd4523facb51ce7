/*
 * Copyright 2026 The hsfnet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// hsfnet: campaigns, single-packet traces and offline verification for the controller grid.

#include <cstdio>
#include <map>
#include <set>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "hsfnet/asim.hpp"
#include "hsfnet/campaign.hpp"
#include "hsfnet/trace.hpp"
#include "hsfnet/verifier.hpp"

using namespace hsfnet;

namespace {

// Raw flag values; forwarded to parse_config so files and flags share one validator.
struct CampaignFlags {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> given;
  std::map<std::string, std::string> values;

  void attach(CLI::App* app, bool with_sweep_lists) {
    app->add_option("--config", config_path, "key = value file; flags override it");
    add(app, "--rows", "rows", "grid rows (even, >= 4)");
    add(app, "--cols", "cols", "grid columns (even, >= 4)");
    add(app, "--algo", "algo", with_sweep_lists ? "xy|dfxy|lfa|rda|xyyx, comma separated" : "xy|dfxy|lfa|rda|xyyx");
    add(app, "--pf", "pf", with_sweep_lists ? "failure probabilities, comma separated" : "node failure probability");
    add(app, "--trials", "trials", "trials per point");
    add(app, "--dest", "dest", "col:row list or 'quarters'");
    add(app, "--seed", "seed", "base seed");
    add(app, "--payload-bits", "payload_bits", "payload bits per packet");
    add(app, "--policy", "policy", "drop|stall");
    add(app, "--jitter", "jitter", "max extra delay per handshake transition");
    add(app, "--threads", "threads", "worker threads (0 = all cores)");
  }

  void add(CLI::App* app, const std::string& flag, const std::string& key, const std::string& help) {
    app->add_option_function<std::string>(
        flag, [this, key](const std::string& v) { given.emplace_back(key, v); }, help);
  }

  CampaignConfig resolve() const {
    std::string text;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError(fmt::format("--config: cannot open '{}'", config_path));
      std::stringstream ss;
      ss << in.rdbuf();
      text = ss.str();
    }
    return parse_config(text, given);
  }
};

// Writes to `path`, or stdout when empty or "-".
void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
}

Coord parse_coord_arg(const std::string& s) {
  CampaignConfig tmp;
  apply_setting(tmp, "dest", s);
  if (tmp.destinations.size() != 1) throw ConfigError(fmt::format("expected one col:row, got '{}'", s));
  return tmp.destinations.front();
}

std::set<Coord> parse_coords(const std::string& s) {
  if (s.empty()) return {};
  CampaignConfig tmp;
  apply_setting(tmp, "dest", s);
  return {tmp.destinations.begin(), tmp.destinations.end()};
}

std::string describe(const TrialResult& r) {
  std::string s = fmt::format("delivered={} ack_received={} hops={} latency={} data_fate={} ack_fate={} events={}\n",
                              r.delivered, r.ack_received, r.hops, r.latency, to_string(r.data_fate),
                              to_string(r.ack_fate), r.events);
  if (r.drop_cause) s += fmt::format("drop_cause={}\n", to_string(*r.drop_cause));
  if (r.ack_drop_cause) s += fmt::format("ack_drop_cause={}\n", to_string(*r.ack_drop_cause));
  return s;
}

std::string path_text(const std::vector<Coord>& p) {
  std::string s;
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? " " : "") + to_string(p[i]);
  return s;
}

SimConfig sim_config(const CampaignConfig& c) {
  SimConfig sc;
  sc.payload_bits = c.payload_bits;
  sc.policy = c.policy;
  sc.jitter = c.jitter;
  return sc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and verification toolkit for orientation-alternating controller grids"};
  app.require_subcommand(1);

  std::string out_path, events_path;
  int exit_code = 0;

  // simulate
  CampaignFlags sim_flags;
  auto* simulate = app.add_subcommand("simulate", "run one timed trial and print its result");
  sim_flags.attach(simulate, false);
  simulate->add_option("--events", events_path, "write the event log (time node wire transition)");
  simulate->add_option("--out", out_path, "result file (default stdout)");

  // sweep
  CampaignFlags sweep_flags;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over failure probabilities; CSV output");
  sweep_flags.attach(sweep, true);
  sweep->add_option("--out", out_path, "CSV file (default stdout)");

  // lfa-single-fault
  CampaignFlags sf_flags;
  bool exhaustive = false;
  auto* single = app.add_subcommand("lfa-single-fault", "fault one on-path node per trial under LFA; CSV output");
  sf_flags.attach(single, false);
  single->add_flag("--exhaustive", exhaustive, "try every interior path node once instead of random draws");
  single->add_option("--out", out_path, "CSV file (default stdout)");

  // verify
  auto* verify = app.add_subcommand("verify", "offline checks; exit status 1 when a witness is found");
  verify->require_subcommand(1);
  int v_rows = 4, v_cols = 4, max_faults = 1;
  std::string v_algo = "dfxy", dot_path;
  bool all_pairs = false;
  auto* deadlock = verify->add_subcommand("deadlock", "channel dependency cycle search");
  auto* livelock = verify->add_subcommand("livelock", "exhaustive single-packet loop search");
  auto* disjoint = verify->add_subcommand("disjoint", "RDA path disjointness over all ordered pairs");
  for (auto* sc : {deadlock, livelock, disjoint}) {
    sc->add_option("--rows", v_rows, "grid rows")->capture_default_str();
    sc->add_option("--cols", v_cols, "grid columns")->capture_default_str();
    sc->add_option("--out", out_path, "report file (default stdout)");
  }
  deadlock->add_option("--algo", v_algo, "routing algorithm")->capture_default_str();
  deadlock->add_flag("--all-pairs", all_pairs, "add every node-to-node flow to the gateway traffic");
  deadlock->add_option("--dot", dot_path, "write the dependency graph as DOT, cycle in red");
  livelock->add_option("--algo", v_algo, "routing algorithm")->capture_default_str();
  livelock->add_option("--max-faults", max_faults, "fault budget (0..2)")->capture_default_str();

  // trace
  CampaignFlags trace_flags;
  std::string src_arg = "0:0", faults_arg;
  auto* trace = app.add_subcommand("trace", "hop-by-hop walk of one packet, optionally with the timed event log");
  trace_flags.attach(trace, false);
  trace->add_option("--src", src_arg, "source col:row")->capture_default_str();
  trace->add_option("--faults", faults_arg, "failed nodes, col:row list (overrides --pf)");
  trace->add_option("--events", events_path, "write the timed event log ('-' for stdout)");

  // topo dot
  auto* topo_cmd = app.add_subcommand("topo", "topology export");
  topo_cmd->require_subcommand(1);
  auto* dot = topo_cmd->add_subcommand("dot", "Graphviz rendering of the grid");
  int t_rows = 4, t_cols = 4;
  dot->add_option("--rows", t_rows, "grid rows")->capture_default_str();
  dot->add_option("--cols", t_cols, "grid columns")->capture_default_str();
  dot->add_option("--out", out_path, "DOT file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      auto cfg = sim_flags.resolve();
      auto topo = build_grid(cfg.rows, cfg.cols);
      auto dst = cfg.resolved_destinations().front();
      const double p = cfg.p_f.front();
      const auto seed = trial_seed(cfg.base_seed, 0);
      auto faults = inject_faults(topo, p, seed);
      auto sc = sim_config(cfg);
      std::ofstream ev;
      if (!events_path.empty()) {
        ev.open(events_path, std::ios::binary);
        if (!ev) throw std::runtime_error(fmt::format("cannot write '{}'", events_path));
        sc.event_log = &ev;
      }
      std::string text;
      for (Algorithm a : cfg.algos) {
        auto r = run_trial(topo, faults, a, dst, sc, seed);
        text += fmt::format("algo={} dest={} p_f={} faults={}\n", to_string(a), to_string(dst), p, faults.failed.size());
        text += describe(r);
      }
      write_output(out_path, text);
    } else if (sweep->parsed()) {
      auto cfg = sweep_flags.resolve();
      std::ostringstream os;
      emit_csv(run_campaign(cfg), os);
      write_output(out_path, os.str());
    } else if (single->parsed()) {
      auto cfg = sf_flags.resolve();
      auto rep = run_lfa_single_fault(cfg, exhaustive ? FaultSampling::Exhaustive : FaultSampling::Random);
      std::ostringstream os;
      emit_csv(rep.rows, os);
      write_output(out_path, os.str());
      fmt::print(stderr, "delivered where reachable: {}/{}\n", rep.delivered_when_reachable, rep.reachable_cases);
    } else if (deadlock->parsed()) {
      auto algo = parse_algorithm(v_algo);
      if (!algo) throw ConfigError(fmt::format("--algo: unknown algorithm '{}'", v_algo));
      auto topo = build_grid(v_rows, v_cols);
      auto g = build_cdg(topo, *algo, all_pairs ? CdgFlows::AllPairs : CdgFlows::GatewayTraffic);
      auto cycle = assert_acyclic(g);
      std::string text = fmt::format("algo={} grid={}x{} channels={} dependencies={}\n", v_algo, v_rows, v_cols,
                                     g.vertices.size(), g.edges.size());
      if (cycle) {
        text += fmt::format("cycle length={}\n", cycle->size());
        for (auto c : *cycle) text += describe_channel(topo, c) + "\n";
        exit_code = 1;
      } else {
        text += "acyclic\n";
      }
      write_output(out_path, text);
      if (!dot_path.empty()) write_output(dot_path, to_dot(topo, g, cycle.value_or(std::vector<std::size_t>{})));
    } else if (livelock->parsed()) {
      auto algo = parse_algorithm(v_algo);
      if (!algo) throw ConfigError(fmt::format("--algo: unknown algorithm '{}'", v_algo));
      auto topo = build_grid(v_rows, v_cols);
      auto found = livelock_scan(topo, *algo, max_faults);
      std::string text = "faults,src_col,src_row,dst_col,dst_row,at_col,at_row,arrived_via,technique,mode\n";
      for (const auto& w : found) {
        std::string fs;
        for (auto f : w.faults) fs += (fs.empty() ? "" : ";") + fmt::format("{}:{}", f.col, f.row);
        text += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", fs, w.src.col, w.src.row, w.dst.col, w.dst.row,
                            w.state.at.col, w.state.at.row,
                            w.state.arrived_via ? to_string(*w.state.arrived_via) : "-",
                            w.state.technique == Technique::XY ? "xy" : "yx",
                            w.state.mode == Mode::Normal ? "normal" : "abnormal");
      }
      write_output(out_path, text);
      fmt::print(stderr, "{} looping instances\n", found.size());
      exit_code = found.empty() ? 0 : 1;
    } else if (disjoint->parsed()) {
      auto topo = build_grid(v_rows, v_cols);
      const auto& s = topo.shape();
      std::string text = "src_col,src_row,dst_col,dst_row,witness_col,witness_row,reason\n";
      int bad = 0, total = 0;
      for (int a = 0; a < s.size(); ++a) {
        for (int b = 0; b < s.size(); ++b) {
          if (a == b) continue;
          ++total;
          auto r = check_disjoint(topo, s.coord(a), s.coord(b));
          if (r.ok) continue;
          ++bad;
          text += fmt::format("{},{},{},{},{},{},{}\n", s.coord(a).col, s.coord(a).row, s.coord(b).col,
                              s.coord(b).row, r.witness ? std::to_string(r.witness->col) : "",
                              r.witness ? std::to_string(r.witness->row) : "", r.reason);
        }
      }
      write_output(out_path, text);
      fmt::print(stderr, "{}/{} ordered pairs disjoint\n", total - bad, total);
      exit_code = bad ? 1 : 0;
    } else if (trace->parsed()) {
      auto cfg = trace_flags.resolve();
      auto topo = build_grid(cfg.rows, cfg.cols);
      const auto& s = topo.shape();
      auto dst = cfg.resolved_destinations().front();
      Coord src = parse_coord_arg(src_arg);
      const auto seed = trial_seed(cfg.base_seed, 0);
      FaultMap faults = faults_arg.empty() ? inject_faults(topo, cfg.p_f.front(), seed) : FaultMap(s, parse_coords(faults_arg));
      for (Algorithm a : cfg.algos) {
        TraceOptions opt;
        if (src == s.gateway_in_node()) opt.arrived_via = s.input_side(src, Axis::Vertical);
        auto t = trace_packet(topo, faults, a, src, dst, opt);
        fmt::print("algo={} outcome={} hops={} path={}\n", to_string(a), to_string(t.outcome), t.hops, path_text(t.path));
        if (t.outcome == TraceOutcome::Dropped) fmt::print("cause={}\n", to_string(t.cause));
        if (t.outcome == TraceOutcome::Stalled) fmt::print("stalled_at={}\n", to_string(t.stalled_at));
        if (t.outcome == TraceOutcome::Looped) fmt::print("repeated_state={}\n", to_string(t.witness.at));
      }
      if (!events_path.empty()) {
        if (src != s.gateway_in_node()) throw ConfigError("--events: timed trials start at the gateway; use --src 0:0");
        std::ostringstream log;
        auto sc = sim_config(cfg);
        sc.event_log = &log;
        auto r = run_trial(topo, faults, cfg.algos.front(), dst, sc, seed);
        write_output(events_path, log.str());
        fmt::print(stderr, "{}", describe(r));
      }
    } else if (dot->parsed()) {
      write_output(out_path, to_dot(build_grid(t_rows, t_cols)));
    }
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 2;
  }
  return exit_code;
}
