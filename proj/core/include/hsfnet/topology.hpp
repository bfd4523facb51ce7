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
 * @file topology.hpp
 * @brief Orientation-alternating controller grid with edge wraparounds and gateway attachments.
 */

#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace hsfnet {

/// Grid coordinate, origin at the south-west corner.
struct Coord {
  int col = 0;
  int row = 0;
  auto operator<=>(const Coord&) const = default;
};

std::string to_string(Coord c);

enum class Direction : std::uint8_t { North, South, East, West };

Direction opposite(Direction d);
const char* to_string(Direction d);

enum class OrientationType : std::uint8_t { T0, T1, T2, T3 };

const char* to_string(OrientationType t);

/// The two channel axes of a controller. Each node has one input and one output per axis.
enum class Axis : std::uint8_t { Horizontal = 0, Vertical = 1 };

inline Axis other(Axis a) { return a == Axis::Horizontal ? Axis::Vertical : Axis::Horizontal; }
inline Axis axis_of(Direction d) {
  return (d == Direction::East || d == Direction::West) ? Axis::Horizontal : Axis::Vertical;
}

enum class PortRole : std::uint8_t { Input1, Input2, Output1, Output2 };

struct PortId {
  Coord owner;
  PortRole role = PortRole::Input1;
  Direction side = Direction::North;
  bool operator==(const PortId&) const = default;
};

enum class LinkKind : std::uint8_t { Internal, EdgeWraparound, GatewayIn, GatewayAck };

const char* to_string(LinkKind k);

/// A directed channel. A missing endpoint stands for a gateway.
struct Link {
  std::optional<PortId> src;
  std::optional<PortId> dst;
  LinkKind kind = LinkKind::Internal;
};

/**
 * Wiring rules of a rows x cols grid, computable without materialising the link table.
 *
 * Even rows flow east and odd rows west; even columns flow north and odd columns south.
 * Dangling boundary outputs are paired with the adjacent boundary input:
 * right edge upwards, left edge downwards, top and bottom edges eastwards.
 */
class GridShape {
 public:
  GridShape() = default;
  GridShape(int rows, int cols) : rows_(rows), cols_(cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int size() const { return rows_ * cols_; }
  bool contains(Coord c) const { return c.col >= 0 && c.col < cols_ && c.row >= 0 && c.row < rows_; }
  int index(Coord c) const { return c.row * cols_ + c.col; }
  Coord coord(int idx) const { return {idx % cols_, idx / cols_}; }

  Coord gateway_in_node() const { return {0, 0}; }
  Coord gateway_ack_node() const { return {cols_ - 1, 0}; }
  bool is_gateway_node(Coord c) const { return c == gateway_in_node() || c == gateway_ack_node(); }

  Direction output_side(Coord c, Axis a) const;
  Direction input_side(Coord c, Axis a) const;

  /// Node reached through output `a` of `c`; nullopt when the output feeds the ACK gateway.
  std::optional<Coord> next(Coord c, Axis a) const;
  /// Node feeding input `a` of `c`; nullopt when the input is fed by the ingress gateway.
  std::optional<Coord> prev(Coord c, Axis a) const;
  LinkKind out_kind(Coord c, Axis a) const;
  LinkKind in_kind(Coord c, Axis a) const;

  bool operator==(const GridShape&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
};

/// Materialised port-level digraph. Immutable after construction.
class GridTopology {
 public:
  int rows() const { return shape_.rows(); }
  int cols() const { return shape_.cols(); }
  const GridShape& shape() const { return shape_; }
  const std::vector<Link>& links() const { return links_; }

  std::size_t out_link(Coord c, Axis a) const { return out_[shape_.index(c) * 2 + static_cast<int>(a)]; }
  std::size_t in_link(Coord c, Axis a) const { return in_[shape_.index(c) * 2 + static_cast<int>(a)]; }

  const PortId& gateway_in() const { return *links_[gw_in_].dst; }
  const PortId& gateway_ack() const { return *links_[gw_ack_].src; }
  std::size_t gateway_in_link() const { return gw_in_; }
  std::size_t gateway_ack_link() const { return gw_ack_; }

 private:
  friend GridTopology build_grid(int rows, int cols);
  GridShape shape_;
  std::vector<Link> links_;
  std::vector<std::size_t> out_;
  std::vector<std::size_t> in_;
  std::size_t gw_in_ = 0;
  std::size_t gw_ack_ = 0;
};

struct FaultMap {
  std::set<Coord> failed;
  double p_f = 0.0;
  std::uint64_t seed = 0;

  FaultMap() = default;
  FaultMap(const GridShape& shape, std::set<Coord> failed_nodes, double p = 0.0, std::uint64_t s = 0);

  bool is_failed(Coord c) const { return !mask_.empty() && mask_[c.row * cols_ + c.col] != 0; }

 private:
  std::vector<std::uint8_t> mask_;
  int cols_ = 0;
};

struct SideInfo {
  bool input = false;
  bool output = false;
  bool boundary = false;
};

/// Indexed by Direction.
using PortMap = std::array<SideInfo, 4>;

OrientationType orientation(Coord c, const GridShape& shape);
PortMap port_map(Coord c, const GridTopology& topo);

/// Throws std::invalid_argument unless rows and cols are even and >= 4.
GridTopology build_grid(int rows, int cols);

std::optional<std::pair<Coord, Link>> neighbor_via(Coord c, Direction d, const GridTopology& topo);

/// Gateway attach nodes never fail. Throws std::invalid_argument for p_f outside [0, 1].
FaultMap inject_faults(const GridTopology& topo, double p_f, std::uint64_t seed);

/// Throws std::invalid_argument if `src` is failed.
std::set<Coord> reachable_from(const GridTopology& topo, const FaultMap& faults, Coord src);
std::set<Coord> reachable_from(const GridShape& shape, const FaultMap& faults, Coord src);

/// Seed for trial `i` of a batch. Shared by every algorithm so fault maps line up.
std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t i);

std::string to_dot(const GridTopology& topo);

}  // namespace hsfnet
