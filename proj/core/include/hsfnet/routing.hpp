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
 * @file routing.hpp
 * @brief Per-hop routing decisions: classic XY, deadlock-free XY, LFA and RDA.
 *
 * Every decision is a pure function of the local view and the packet header. Route shapes are
 * backed by per-destination next-hop tables that are built lazily and cached process-wide.
 */

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "hsfnet/topology.hpp"

namespace hsfnet {

enum class PacketKind : std::uint8_t { Data = 0, Ack = 1 };
enum class Technique : std::uint8_t { XY = 0, YX = 1 };
enum class Mode : std::uint8_t { Normal = 0, Abnormal = 1 };

struct PacketHeader {
  Coord dest;
  PacketKind kind = PacketKind::Data;
  Technique technique = Technique::XY;
  Mode mode = Mode::Normal;
  bool operator==(const PacketHeader&) const = default;
};

/// kind | technique | mode | dest_col | dest_row, most significant bit first.
int header_bits(const GridShape& dims);
std::vector<std::uint8_t> encode_header(const PacketHeader& h, const GridShape& dims);
PacketHeader decode_header(std::span<const std::uint8_t> bits, const GridShape& dims);

struct LocalView {
  Coord here;
  /// Input side the packet arrived on; nullopt for a packet that originates at `here`.
  std::optional<Direction> arrived_via;
  /// Indexed by Axis: health of the horizontal and vertical output channels. The output feeding
  /// the ACK gateway is never offered to routing and reads as unhealthy.
  std::array<bool, 2> out_healthy{true, true};
  GridShape dims;

  bool healthy(Axis a) const { return out_healthy[static_cast<int>(a)]; }
};

LocalView make_view(const GridShape& dims, const FaultMap& faults, Coord here, std::optional<Direction> arrived_via);

enum class DropCause : std::uint8_t { BothBlocked, LoopGuard, Unreachable };
const char* to_string(DropCause c);

/// A turn taken at `at`: travelling `from` on arrival, leaving through side `to`.
struct Turn {
  Coord at;
  Direction from = Direction::North;
  Direction to = Direction::North;
  auto operator<=>(const Turn&) const = default;
};

using ForbiddenTurnSet = std::set<Turn>;

struct RoutingDecision {
  enum class Action : std::uint8_t { Forward, Consume, Drop, Stall };

  Action action = Action::Consume;
  Direction direction = Direction::North;
  PacketHeader header;
  DropCause cause = DropCause::BothBlocked;
  /// Set when the decision switches a packet into abnormal mode; travels with the packet.
  std::shared_ptr<const ForbiddenTurnSet> restrictions;

  static RoutingDecision forward(Direction d, const PacketHeader& h) { return {Action::Forward, d, h, {}, {}}; }
  static RoutingDecision consume(const PacketHeader& h) { return {Action::Consume, {}, h, {}, {}}; }
  static RoutingDecision drop(DropCause c, const PacketHeader& h) { return {Action::Drop, {}, h, c, {}}; }
  static RoutingDecision stall(const PacketHeader& h) { return {Action::Stall, {}, h, {}, {}}; }
};

enum class Algorithm : std::uint8_t { Xy, Dfxy, Lfa, Rda, XyYxUnaided };
const char* to_string(Algorithm a);
std::optional<Algorithm> parse_algorithm(std::string_view name);

using Router = std::function<RoutingDecision(const LocalView&, const PacketHeader&, const ForbiddenTurnSet*)>;
Router make_router(Algorithm a);
RoutingDecision route(Algorithm a, const LocalView& view, const PacketHeader& h, const ForbiddenTurnSet* forbidden);

/// Classic XY. Odd destination columns are approached through the even column east of them.
RoutingDecision xy_route(const LocalView& view, const PacketHeader& h);

/// West-free XY. Odd destination columns are approached through the even column west of them.
RoutingDecision dfxy_route(const LocalView& view, const PacketHeader& h);

/// Loop-free XY/YX alternation with per-fault turn restrictions.
RoutingDecision lfa_route(const LocalView& view, const PacketHeader& h, const ForbiddenTurnSet* forbidden);

/// XY/YX alternation without the abnormal mode. Kept for livelock comparisons.
RoutingDecision xyyx_unaided_route(const LocalView& view, const PacketHeader& h);

struct LfaRestriction {
  Mode mode = Mode::Normal;
  std::shared_ptr<const ForbiddenTurnSet> turns;
};

/// Mode and turn set chosen by the node in front of `fault` for packets heading to `dest`.
/// Throws std::invalid_argument when fault == dest.
LfaRestriction lfa_restriction_set(Coord fault, Coord dest, const GridShape& dims);

/// Primary path until a blocked output, then one switch onto the alternate path.
RoutingDecision rda_route(const LocalView& view, const PacketHeader& h);

struct RdaPaths {
  std::vector<Coord> primary;
  std::vector<Coord> alternate;
  /// Input side of the destination each path arrives on; nullopt when the path does not arrive.
  std::optional<Direction> primary_entry;
  std::optional<Direction> alternate_entry;
};

/// Both committed paths on the fault-free grid. Throws std::invalid_argument when src == dst.
RdaPaths rda_paths(Coord src, Coord dst, const GridShape& dims);

PacketHeader make_ack_header(Coord delivered_to, const GridShape& dims);

}  // namespace hsfnet
