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

/**
 * @file campaign.hpp
 * @brief Monte Carlo sweeps over failure probability, LFA single-fault runs, CSV and config I/O.
 */

#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hsfnet/asim.hpp"
#include "hsfnet/routing.hpp"
#include "hsfnet/topology.hpp"

namespace hsfnet {

struct CampaignConfig {
  int rows = 24;
  int cols = 24;
  std::vector<Algorithm> algos{Algorithm::Rda};
  std::vector<double> p_f{0.0, 0.02, 0.04, 0.06, 0.08};
  int trials = 1000;
  /// Empty means the four quarter destinations.
  std::vector<Coord> destinations;
  int payload_bits = 8;
  StallPolicy policy = StallPolicy::Drop;
  std::uint64_t base_seed = 1;
  int jitter = 0;
  unsigned threads = 1;

  std::vector<Coord> resolved_destinations() const;
};

struct MetricsRow {
  Algorithm algo = Algorithm::Rda;
  int rows = 0;
  int cols = 0;
  double p_f = 0.0;
  int dest_col = 0;
  int dest_row = 0;
  int trials = 0;
  int delivered_count = 0;
  int ack_count = 0;
  double delivered_pct = 0.0;
  /// Against trials sent, not against delivered packets.
  double ack_pct = 0.0;
  double mean_hops = 0.0;
  double mean_latency = 0.0;
  int drops_blocked = 0;
  int drops_loopguard = 0;
  int timeouts = 0;
};

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// One destination per quadrant, nudged so the four orientation types are all present.
std::vector<Coord> quarter_destinations(const GridShape& dims);

/// Throws ConfigError describing the first invalid field.
void validate(const CampaignConfig& cfg);

/// Sets one field from its textual form. Keys: rows, cols, algo, pf, trials, dest, payload_bits,
/// policy, seed, jitter, threads. Lists are comma separated; coordinates are col:row.
void apply_setting(CampaignConfig& cfg, std::string_view key, std::string_view value);

/**
 * `key = value` lines ('#' starts a comment), then `flags` applied on top in order.
 * Errors name the offending line or flag. Unknown and repeated file keys are rejected.
 */
CampaignConfig parse_config(std::string_view text, const std::vector<std::pair<std::string, std::string>>& flags = {});

/// Aggregates one batch of trials into a row.
MetricsRow summarize(Algorithm algo, const GridShape& dims, double p_f, Coord dst, const std::vector<TrialResult>& trials);

/// Called with every batch before it is summarised; used for per-trial audits.
using TrialObserver = std::function<void(const MetricsRow&, const std::vector<TrialResult>&)>;

/// Rows ordered by algorithm, then p_f, then destination, as configured. Fault maps depend only
/// on (base_seed, trial index), so every algorithm and destination sees the same faults.
std::vector<MetricsRow> run_campaign(const CampaignConfig& cfg, const TrialObserver& observe = {});

struct SingleFaultCase {
  Coord dest;
  Coord fault;
  bool reachable = false;
  TrialResult result;
};

struct SingleFaultReport {
  std::vector<MetricsRow> rows;
  std::vector<SingleFaultCase> cases;
  int reachable_cases = 0;
  int delivered_when_reachable = 0;
};

enum class FaultSampling : std::uint8_t { Random, Exhaustive };

/**
 * Faults one node on the fault-free gateway path of each destination, excluding its endpoints.
 * Random draws `cfg.trials` faults per destination; exhaustive tries each interior node once.
 * Rows report p_f as 0. Throws ConfigError when a path has no interior node.
 */
SingleFaultReport run_lfa_single_fault(const CampaignConfig& cfg, FaultSampling sampling = FaultSampling::Random);

std::string csv_header();
std::string csv_line(const MetricsRow& row);
/// Returns bytes written; throws std::runtime_error when the stream fails.
std::size_t emit_csv(const std::vector<MetricsRow>& rows, std::ostream& out);
/// Inverse of emit_csv. Throws ConfigError with the line number on malformed input.
std::vector<MetricsRow> parse_csv(std::string_view text);

}  // namespace hsfnet
