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
 * @file asim.hpp
 * @brief Discrete-event model of bit-serial four-phase handshake transport across the grid.
 *
 * Each link has three wires: data and req driven by the sender, bit_ack driven by the receiver.
 * A node buffers a whole packet, then routes it once and transmits it bit by bit.
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hsfnet/routing.hpp"
#include "hsfnet/topology.hpp"

namespace hsfnet {

/// Declaration order is the tie-break order for simultaneous events at one node.
enum class Wire : std::uint8_t { Data, Req, BitAck, Retry };
enum class Transition : std::uint8_t { Rise, Fall, Zero, One };
const char* to_string(Wire w);
const char* to_string(Transition t);

/**
 * One wire change as observed by `node` on its `side` port. Data and req events are observed by
 * the receiver, bit_ack events by the sender. Gateways sit just off the grid: the ingress
 * gateway at (-1, 0) and the ACK gateway at (cols, 0).
 */
struct SimEvent {
  std::int64_t time = 0;
  Coord node;
  Direction side = Direction::North;
  Wire wire = Wire::Data;
  Transition transition = Transition::Rise;
  std::uint64_t seq = 0;
  /// Restriction metadata, attached to the first req rise of a packet.
  std::shared_ptr<const ForbiddenTurnSet> sideband;
};

/// Strict weak order (time, node, wire, side, seq); the queue pops the smallest.
bool event_before(const SimEvent& a, const SimEvent& b);

Coord ingress_gateway_coord();
Coord ack_gateway_coord(const GridShape& dims);

/// Delay in time units between a transition and the one it triggers.
struct HandshakeDelays {
  int req_rise = 1;
  int ack_rise = 1;
  int req_fall = 1;
  int ack_fall = 1;
  int cycle() const { return req_rise + ack_rise + req_fall + ack_fall; }
};

struct PortRef {
  Coord node;
  Direction side = Direction::North;
};

/// Canonical sequence for one bit starting at `start`: data, req rise, bit_ack rise, req fall,
/// bit_ack fall. The next bit may start at the time of the last event.
std::vector<SimEvent> handshake_transfer_bit(PortRef sender, PortRef receiver, std::uint8_t bit, std::int64_t start,
                                             const HandshakeDelays& delays = {});
/// Back-to-back bits; an empty payload yields no events.
std::vector<SimEvent> handshake_transfer(PortRef sender, PortRef receiver, const std::vector<std::uint8_t>& bits,
                                         std::int64_t start, const HandshakeDelays& delays = {});

enum class StallPolicy : std::uint8_t { Drop, Stall };
const char* to_string(StallPolicy p);
std::optional<StallPolicy> parse_policy(std::string_view s);

enum class Phase : std::uint8_t { Idle, Receiving, Holding, Deciding, Transmitting };
const char* to_string(Phase p);

struct NodeState {
  Coord at;
  Phase phase = Phase::Idle;
  std::optional<Direction> rx_side;
  std::vector<std::uint8_t> rx_bits;
  std::shared_ptr<const ForbiddenTurnSet> rx_restrictions;
  std::optional<Direction> tx_side;
  std::vector<std::uint8_t> tx_bits;
  std::size_t tx_sent = 0;
  /// Restrictions the packet in transmission carries onward.
  std::shared_ptr<const ForbiddenTurnSet> tx_restrictions;
  /// Input sides whose req rose while this node was busy, in arrival order.
  std::vector<Direction> pending;
  /// Last value seen on each input data wire, indexed by Direction.
  std::array<std::uint8_t, 4> data_in{};
  std::array<std::shared_ptr<const ForbiddenTurnSet>, 4> sideband_in;
};

/// What a step did to the packet it holds, for the engine's bookkeeping.
struct StepNotice {
  enum class Kind : std::uint8_t { None, Forwarded, Consumed, Dropped, StallDropped, Stalled };
  Kind kind = Kind::None;
  PacketKind packet = PacketKind::Data;
  DropCause cause = DropCause::BothBlocked;
  std::int64_t time = 0;
};

struct StepResult {
  std::vector<SimEvent> emitted;
  std::vector<StepNotice> notices;
};

struct NodeContext {
  const GridShape* dims = nullptr;
  const FaultMap* faults = nullptr;
  const Router* router = nullptr;
  HandshakeDelays delays;
  std::size_t packet_bits = 0;
  StallPolicy policy = StallPolicy::Drop;
  int retry_period = 64;
};

/// Thrown on a handshake protocol violation; indicates an engine bug, not a modelled fault.
struct ProtocolError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Advances one node by one event. Emitted events carry seq = 0; the engine numbers them.
StepResult node_step(NodeState& state, const SimEvent& ev, const NodeContext& ctx);
/// Same, reusing `out` (cleared first) to avoid allocations in the event loop.
void node_step(NodeState& state, const SimEvent& ev, const NodeContext& ctx, StepResult& out);

struct SimConfig {
  int payload_bits = 8;
  StallPolicy policy = StallPolicy::Drop;
  HandshakeDelays delays;
  /// Extra delay per transition, drawn per node in [0, jitter] from the trial seed.
  int jitter = 0;
  std::int64_t time_bound = 1'000'000;
  int retry_period = 64;
  /// Re-checks the node invariants after every event; throws std::logic_error on violation.
  bool check_invariants = false;
  /// Receives one `time node wire transition` line per event when set.
  std::ostream* event_log = nullptr;
};

enum class PacketFate : std::uint8_t { InFlight, Consumed, Dropped, StallDropped, TimedOut };
const char* to_string(PacketFate f);

struct TrialResult {
  bool delivered = false;
  bool ack_received = false;
  int hops = 0;
  /// Gateway emission to destination consume, in time units.
  std::int64_t latency = 0;
  std::optional<DropCause> drop_cause;
  PacketFate data_fate = PacketFate::InFlight;
  /// Fate of the ACK; InFlight when no ACK was created.
  PacketFate ack_fate = PacketFate::InFlight;
  std::optional<DropCause> ack_drop_cause;
  std::int64_t end_time = 0;
  std::uint64_t events = 0;
  bool operator==(const TrialResult&) const = default;
};

/// Throws std::invalid_argument when dst is outside the grid or a gateway attach node is failed.
TrialResult run_trial(const GridTopology& topo, const FaultMap& faults, const Router& router, Coord dst,
                      const SimConfig& cfg = {}, std::uint64_t seed = 0);
TrialResult run_trial(const GridTopology& topo, const FaultMap& faults, Algorithm algo, Coord dst,
                      const SimConfig& cfg = {}, std::uint64_t seed = 0);

/// Trial i injects faults with trial_seed(base_seed, i). Results are in trial order.
std::vector<TrialResult> run_trial_batch(const GridTopology& topo, Algorithm algo, Coord dst, double p_f, int trials,
                                         std::uint64_t base_seed, const SimConfig& cfg = {}, unsigned threads = 1);

std::string format_event(const SimEvent& ev, const GridShape& dims);

}  // namespace hsfnet
