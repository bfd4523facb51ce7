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
 * @file verifier.hpp
 * @brief Channel-dependency deadlock analysis, livelock scans and disjoint-path checks.
 */

#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "hsfnet/parallel.hpp"
#include "hsfnet/routing.hpp"
#include "hsfnet/topology.hpp"
#include "hsfnet/trace.hpp"

namespace hsfnet {

/// Vertices and edges are indices into GridTopology::links().
struct ChannelDependencyGraph {
  std::set<std::size_t> vertices;
  std::set<std::pair<std::size_t, std::size_t>> edges;
};

enum class CdgFlows : std::uint8_t {
  /// Gateway data to every node plus each node's acknowledgement to the ACK gateway. A packet
  /// consumed at its destination holds its last channel until its acknowledgement leaves.
  GatewayTraffic,
  /// Every ordered (src, dst) data flow plus the gateway traffic.
  AllPairs,
};

ChannelDependencyGraph build_cdg(const GridTopology& topo, const Router& router, CdgFlows flows = CdgFlows::GatewayTraffic);
ChannelDependencyGraph build_cdg(const GridTopology& topo, Algorithm algo, CdgFlows flows = CdgFlows::GatewayTraffic);

/// nullopt if acyclic, otherwise a shortest directed cycle (vertex list, first not repeated).
std::optional<std::vector<std::size_t>> assert_acyclic(const ChannelDependencyGraph& g);

std::string describe_channel(const GridTopology& topo, std::size_t link);
std::string to_dot(const GridTopology& topo, const ChannelDependencyGraph& g,
                   const std::vector<std::size_t>& highlight_cycle = {});

struct LivelockWitness {
  std::set<Coord> faults;
  Coord src;
  Coord dst;
  LoopState state;
};

struct ScanOptions {
  /// 0 picks the hardware concurrency.
  unsigned threads = 0;
};

/// Every looping (fault set, src, dst) with at most `max_faults` failed non-gateway nodes.
std::vector<LivelockWitness> livelock_scan(const GridTopology& topo, const Router& router, int max_faults,
                                           const ScanOptions& opt = {});
std::vector<LivelockWitness> livelock_scan(const GridTopology& topo, Algorithm algo, int max_faults,
                                           const ScanOptions& opt = {});

struct DisjointCheck {
  bool ok = false;
  std::optional<Coord> witness;
  std::string reason;
};

using PathsFn = std::function<RdaPaths(Coord, Coord, const GridShape&)>;

DisjointCheck check_disjoint(const GridTopology& topo, Coord src, Coord dst);
DisjointCheck check_disjoint(const GridTopology& topo, Coord src, Coord dst, const PathsFn& paths);

/// Number of internally node-disjoint src->dst paths in the fault-free grid, capped at `cap`.
int disjoint_path_capacity(const GridTopology& topo, Coord src, Coord dst, int cap = 2);

/// Destination nodes unreachable from `src` once `faults` are removed.
std::set<Coord> disconnected_nodes(const GridTopology& topo, const FaultMap& faults, Coord src);

}  // namespace hsfnet
