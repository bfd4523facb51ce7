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

#include "hsfnet/trace.hpp"

#include <set>
#include <stdexcept>

namespace hsfnet {

const char* to_string(TraceOutcome o) {
  switch (o) {
    case TraceOutcome::Delivered: return "delivered";
    case TraceOutcome::Dropped: return "dropped";
    case TraceOutcome::Stalled: return "stalled";
    case TraceOutcome::Looped: return "looped";
  }
  return "?";
}

TraceResult trace_packet(const GridShape& dims, const FaultMap& faults, const Router& router, Coord src, Coord dst,
                         const TraceOptions& opt) {
  if (!dims.contains(src) || !dims.contains(dst)) throw std::out_of_range("trace endpoint outside grid");
  if (faults.is_failed(src)) throw std::invalid_argument("trace source is failed: " + to_string(src));
  const std::size_t hop_bound = 8 * static_cast<std::size_t>(dims.size());
  TraceResult r;
  PacketHeader h{dst, opt.kind, Technique::XY, Mode::Normal};
  std::shared_ptr<const ForbiddenTurnSet> restrictions;
  std::optional<Direction> arrived = opt.arrived_via;
  Coord at = src;
  r.path.push_back(at);
  std::set<LoopState> seen;
  while (true) {
    LoopState st{at, arrived, h.technique, h.mode};
    if (!seen.insert(st).second) {
      r.outcome = TraceOutcome::Looped;
      r.witness = st;
      break;
    }
    auto d = router(make_view(dims, faults, at, arrived), h, restrictions.get());
    if (d.action == RoutingDecision::Action::Consume) {
      r.outcome = TraceOutcome::Delivered;
      r.entered_via = arrived;
      break;
    }
    if (d.action == RoutingDecision::Action::Drop) {
      r.outcome = TraceOutcome::Dropped;
      r.cause = d.cause;
      break;
    }
    if (d.action == RoutingDecision::Action::Stall) {
      r.outcome = TraceOutcome::Stalled;
      r.stalled_at = at;
      break;
    }
    Axis a = axis_of(d.direction);
    auto n = dims.next(at, a);
    if (!n || faults.is_failed(*n)) throw std::logic_error("router forwarded onto a missing or failed channel");
    if (d.restrictions) restrictions = d.restrictions;
    if (d.header.technique != h.technique) r.switched = true;
    h = d.header;
    arrived = dims.input_side(*n, a);
    at = *n;
    r.path.push_back(at);
    r.out_axes.push_back(a);
    if (r.path.size() - 1 > hop_bound) {
      r.outcome = TraceOutcome::Looped;
      r.witness = LoopState{at, arrived, h.technique, h.mode};
      break;
    }
  }
  r.hops = static_cast<int>(r.path.size()) - 1;
  return r;
}

TraceResult trace_packet(const GridTopology& topo, const FaultMap& faults, Algorithm algo, Coord src, Coord dst,
                         const TraceOptions& opt) {
  return trace_packet(topo.shape(), faults, make_router(algo), src, dst, opt);
}

}  // namespace hsfnet
