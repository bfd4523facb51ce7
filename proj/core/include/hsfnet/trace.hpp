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
 * @file trace.hpp
 * @brief Functional hop-by-hop walk of a single packet through a faulty grid.
 */

#pragma once

#include <compare>
#include <optional>
#include <vector>

#include "hsfnet/routing.hpp"
#include "hsfnet/topology.hpp"

namespace hsfnet {

/// Routing functions are memoryless given these four values, so a repeat proves a loop.
struct LoopState {
  Coord at;
  std::optional<Direction> arrived_via;
  Technique technique = Technique::XY;
  Mode mode = Mode::Normal;
  auto operator<=>(const LoopState&) const = default;
};

enum class TraceOutcome : std::uint8_t { Delivered, Dropped, Stalled, Looped };
const char* to_string(TraceOutcome o);

struct TraceResult {
  TraceOutcome outcome = TraceOutcome::Dropped;
  std::vector<Coord> path;
  /// Output axis used for hop i, path[i] -> path[i + 1].
  std::vector<Axis> out_axes;
  std::optional<Direction> entered_via;  // Delivered
  DropCause cause = DropCause::BothBlocked;  // Dropped
  Coord stalled_at;  // Stalled
  LoopState witness;  // Looped
  int hops = 0;
  /// True once any hop rewrote the technique bit.
  bool switched = false;

  bool delivered() const { return outcome == TraceOutcome::Delivered; }
};

struct TraceOptions {
  PacketKind kind = PacketKind::Data;
  /// Input side at `src`; the ingress gateway feeds (0,0) from the south.
  std::optional<Direction> arrived_via;
};

TraceResult trace_packet(const GridShape& dims, const FaultMap& faults, const Router& router, Coord src, Coord dst,
                         const TraceOptions& opt = {});
TraceResult trace_packet(const GridTopology& topo, const FaultMap& faults, Algorithm algo, Coord src, Coord dst,
                         const TraceOptions& opt = {});

}  // namespace hsfnet
