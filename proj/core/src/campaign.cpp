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

#include "hsfnet/campaign.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "hsfnet/parallel.hpp"
#include "hsfnet/trace.hpp"

namespace hsfnet {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    auto p = s.find(sep);
    out.push_back(trim(s.substr(0, p)));
    if (p == std::string_view::npos) break;
    s.remove_prefix(p + 1);
  }
  return out;
}

template <typename T>
T parse_number(std::string_view s, std::string_view what) {
  T v{};
  s = trim(s);
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}'", what, s));
  }
  return v;
}

Coord parse_coord(std::string_view s) {
  auto parts = split(s, ':');
  if (parts.size() != 2) throw ConfigError(fmt::format("dest: expected col:row, got '{}'", s));
  return {parse_number<int>(parts[0], "dest"), parse_number<int>(parts[1], "dest")};
}

}  // namespace

std::vector<Coord> quarter_destinations(const GridShape& dims) {
  // Even offsets from the south-west keep the first destination at an even/even node; mirroring
  // into the other quadrants then flips the parity of the mirrored axis.
  auto offset = [](int n) { return (n / 4) % 2 == 0 ? n / 4 : n / 4 + 1; };
  const int a = offset(dims.cols());
  const int b = offset(dims.rows());
  const int c = dims.cols() - 1 - a;
  const int r = dims.rows() - 1 - b;
  return {{a, b}, {c, b}, {a, r}, {c, r}};
}

std::vector<Coord> CampaignConfig::resolved_destinations() const {
  return destinations.empty() ? quarter_destinations(GridShape(rows, cols)) : destinations;
}

void validate(const CampaignConfig& cfg) {
  auto dim = [](int v, const char* name) {
    if (v < 4 || v % 2 != 0) throw ConfigError(fmt::format("{}: must be an even integer >= 4, got {}", name, v));
  };
  dim(cfg.rows, "rows");
  dim(cfg.cols, "cols");
  if (cfg.algos.empty()) throw ConfigError("algo: at least one algorithm required");
  if (cfg.p_f.empty()) throw ConfigError("pf: at least one value required");
  for (double p : cfg.p_f) {
    if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(fmt::format("pf: {} is outside [0, 1]", p));
  }
  if (cfg.trials < 1) throw ConfigError(fmt::format("trials: must be >= 1, got {}", cfg.trials));
  if (cfg.payload_bits < 0) throw ConfigError("payload_bits: must be >= 0");
  if (cfg.jitter < 0) throw ConfigError("jitter: must be >= 0");
  GridShape s(cfg.rows, cfg.cols);
  for (Coord d : cfg.destinations) {
    if (!s.contains(d)) throw ConfigError(fmt::format("dest: {} is outside the grid", to_string(d)));
    if (s.is_gateway_node(d)) throw ConfigError(fmt::format("dest: {} is a gateway attach node", to_string(d)));
  }
}

void apply_setting(CampaignConfig& cfg, std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "rows") {
    cfg.rows = parse_number<int>(value, key);
  } else if (key == "cols") {
    cfg.cols = parse_number<int>(value, key);
  } else if (key == "algo") {
    cfg.algos.clear();
    for (auto name : split(value, ',')) {
      auto a = parse_algorithm(name);
      if (!a) throw ConfigError(fmt::format("algo: unknown algorithm '{}'", name));
      cfg.algos.push_back(*a);
    }
  } else if (key == "pf") {
    cfg.p_f.clear();
    for (auto v : split(value, ',')) cfg.p_f.push_back(parse_number<double>(v, key));
  } else if (key == "trials") {
    cfg.trials = parse_number<int>(value, key);
  } else if (key == "dest") {
    cfg.destinations.clear();
    if (value != "quarters") {
      for (auto v : split(value, ',')) cfg.destinations.push_back(parse_coord(v));
    }
  } else if (key == "payload_bits") {
    cfg.payload_bits = parse_number<int>(value, key);
  } else if (key == "policy") {
    auto p = parse_policy(value);
    if (!p) throw ConfigError(fmt::format("policy: expected drop or stall, got '{}'", value));
    cfg.policy = *p;
  } else if (key == "seed") {
    cfg.base_seed = parse_number<std::uint64_t>(value, key);
  } else if (key == "jitter") {
    cfg.jitter = parse_number<int>(value, key);
  } else if (key == "threads") {
    cfg.threads = parse_number<unsigned>(value, key);
  } else {
    throw ConfigError(fmt::format("unknown key '{}'", key));
  }
}

CampaignConfig parse_config(std::string_view text, const std::vector<std::pair<std::string, std::string>>& flags) {
  CampaignConfig cfg;
  std::set<std::string, std::less<>> seen;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    auto eq = line.find('=');
    try {
      if (eq == std::string_view::npos) throw ConfigError("expected key = value");
      auto key = trim(line.substr(0, eq));
      if (!seen.emplace(key).second) throw ConfigError(fmt::format("'{}' given more than once", key));
      apply_setting(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  for (const auto& [key, value] : flags) {
    try {
      apply_setting(cfg, key, value);
      validate(cfg);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("--{}: {}", key, e.what()));
    }
  }
  try {
    validate(cfg);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("config: {}", e.what()));
  }
  return cfg;
}

MetricsRow summarize(Algorithm algo, const GridShape& dims, double p_f, Coord dst,
                     const std::vector<TrialResult>& trials) {
  MetricsRow row;
  row.algo = algo;
  row.rows = dims.rows();
  row.cols = dims.cols();
  row.p_f = p_f;
  row.dest_col = dst.col;
  row.dest_row = dst.row;
  row.trials = static_cast<int>(trials.size());
  double hops = 0, latency = 0;
  for (const auto& t : trials) {
    if (t.delivered) {
      ++row.delivered_count;
      hops += t.hops;
      latency += static_cast<double>(t.latency);
    }
    if (t.ack_received) ++row.ack_count;
    switch (t.data_fate) {
      case PacketFate::Dropped:
        if (t.drop_cause == DropCause::LoopGuard) {
          ++row.drops_loopguard;
        } else {
          ++row.drops_blocked;
        }
        break;
      case PacketFate::StallDropped: ++row.drops_blocked; break;
      case PacketFate::TimedOut: ++row.timeouts; break;
      default: break;
    }
  }
  if (row.trials > 0) {
    row.delivered_pct = 100.0 * row.delivered_count / row.trials;
    row.ack_pct = 100.0 * row.ack_count / row.trials;
  }
  if (row.delivered_count > 0) {
    row.mean_hops = hops / row.delivered_count;
    row.mean_latency = latency / row.delivered_count;
  }
  return row;
}

namespace {

SimConfig sim_config(const CampaignConfig& cfg) {
  SimConfig sc;
  sc.payload_bits = cfg.payload_bits;
  sc.policy = cfg.policy;
  sc.jitter = cfg.jitter;
  return sc;
}

}  // namespace

std::vector<MetricsRow> run_campaign(const CampaignConfig& cfg, const TrialObserver& observe) {
  validate(cfg);
  const auto topo = build_grid(cfg.rows, cfg.cols);
  const auto dests = cfg.resolved_destinations();
  const auto sc = sim_config(cfg);
  std::vector<MetricsRow> rows;
  for (Algorithm algo : cfg.algos) {
    for (double p : cfg.p_f) {
      for (Coord d : dests) {
        auto trials = run_trial_batch(topo, algo, d, p, cfg.trials, cfg.base_seed, sc, cfg.threads);
        auto row = summarize(algo, topo.shape(), p, d, trials);
        if (observe) observe(row, trials);
        rows.push_back(row);
      }
    }
  }
  return rows;
}

SingleFaultReport run_lfa_single_fault(const CampaignConfig& cfg, FaultSampling sampling) {
  validate(cfg);
  const auto topo = build_grid(cfg.rows, cfg.cols);
  const auto& s = topo.shape();
  const auto sc = sim_config(cfg);
  const Router router = make_router(Algorithm::Lfa);
  const Coord gw = s.gateway_in_node();
  SingleFaultReport rep;
  for (Coord d : cfg.resolved_destinations()) {
    auto path = trace_packet(s, FaultMap{}, router, gw, d, TraceOptions{PacketKind::Data, s.input_side(gw, Axis::Vertical)});
    std::vector<Coord> interior;
    for (std::size_t i = 1; i + 1 < path.path.size(); ++i) {
      if (!s.is_gateway_node(path.path[i])) interior.push_back(path.path[i]);
    }
    if (!path.delivered() || interior.empty()) {
      throw ConfigError(fmt::format("dest: {} has no interior node on its gateway path", to_string(d)));
    }
    std::vector<Coord> picks;
    if (sampling == FaultSampling::Exhaustive) {
      picks = interior;
    } else {
      for (int i = 0; i < cfg.trials; ++i) {
        std::mt19937_64 rng(trial_seed(cfg.base_seed, static_cast<std::uint64_t>(i)));
        picks.push_back(interior[rng() % interior.size()]);
      }
    }
    std::vector<TrialResult> results(picks.size());
    std::vector<SingleFaultCase> cases(picks.size());
    parallel_for(picks.size(), cfg.threads, [&](std::size_t i) {
      FaultMap faults(s, {picks[i]});
      results[i] = run_trial(topo, faults, router, d, sc, trial_seed(cfg.base_seed, i));
      cases[i] = {d, picks[i], reachable_from(s, faults, gw).count(d) > 0, results[i]};
    });
    for (const auto& c : cases) {
      if (!c.reachable) continue;
      ++rep.reachable_cases;
      if (c.result.delivered) ++rep.delivered_when_reachable;
    }
    rep.rows.push_back(summarize(Algorithm::Lfa, s, 0.0, d, results));
    rep.cases.insert(rep.cases.end(), cases.begin(), cases.end());
  }
  return rep;
}

std::string csv_header() {
  return "algo,rows,cols,p_f,dest_col,dest_row,trials,delivered_count,ack_count,delivered_pct,ack_pct,"
         "mean_hops,mean_latency,drops_blocked,drops_loopguard,timeouts";
}

std::string csv_line(const MetricsRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{:.2f},{:.2f},{:.3f},{:.3f},{},{},{}", to_string(r.algo), r.rows,
                     r.cols, r.p_f, r.dest_col, r.dest_row, r.trials, r.delivered_count, r.ack_count, r.delivered_pct,
                     r.ack_pct, r.mean_hops, r.mean_latency, r.drops_blocked, r.drops_loopguard, r.timeouts);
}

std::size_t emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out) {
  std::string text = csv_header() + "\n";
  for (const auto& r : rows) text += csv_line(r) + "\n";
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw std::runtime_error("failed to write CSV output");
  return text.size();
}

std::vector<MetricsRow> parse_csv(std::string_view text) {
  std::vector<MetricsRow> rows;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line_no == 1) {
      if (line != csv_header()) throw ConfigError("line 1: unexpected CSV header");
      continue;
    }
    if (line.empty()) continue;
    try {
      auto f = split(line, ',');
      if (f.size() != 16) throw ConfigError(fmt::format("expected 16 fields, got {}", f.size()));
      MetricsRow r;
      auto a = parse_algorithm(f[0]);
      if (!a) throw ConfigError(fmt::format("unknown algorithm '{}'", f[0]));
      r.algo = *a;
      r.rows = parse_number<int>(f[1], "rows");
      r.cols = parse_number<int>(f[2], "cols");
      r.p_f = parse_number<double>(f[3], "p_f");
      r.dest_col = parse_number<int>(f[4], "dest_col");
      r.dest_row = parse_number<int>(f[5], "dest_row");
      r.trials = parse_number<int>(f[6], "trials");
      r.delivered_count = parse_number<int>(f[7], "delivered_count");
      r.ack_count = parse_number<int>(f[8], "ack_count");
      r.delivered_pct = parse_number<double>(f[9], "delivered_pct");
      r.ack_pct = parse_number<double>(f[10], "ack_pct");
      r.mean_hops = parse_number<double>(f[11], "mean_hops");
      r.mean_latency = parse_number<double>(f[12], "mean_latency");
      r.drops_blocked = parse_number<int>(f[13], "drops_blocked");
      r.drops_loopguard = parse_number<int>(f[14], "drops_loopguard");
      r.timeouts = parse_number<int>(f[15], "timeouts");
      rows.push_back(r);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("line {}: {}", line_no, e.what()));
    }
  }
  if (line_no == 0) throw ConfigError("line 1: missing CSV header");
  return rows;
}

}  // namespace hsfnet
