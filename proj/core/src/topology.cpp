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

#include "hsfnet/topology.hpp"

#include <deque>
#include <random>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace hsfnet {

std::string to_string(Coord c) { return fmt::format("({},{})", c.col, c.row); }

Direction opposite(Direction d) {
  switch (d) {
    case Direction::North: return Direction::South;
    case Direction::South: return Direction::North;
    case Direction::East: return Direction::West;
    case Direction::West: return Direction::East;
  }
  return d;
}

const char* to_string(Direction d) {
  switch (d) {
    case Direction::North: return "N";
    case Direction::South: return "S";
    case Direction::East: return "E";
    case Direction::West: return "W";
  }
  return "?";
}

const char* to_string(OrientationType t) {
  static constexpr const char* kNames[] = {"T0", "T1", "T2", "T3"};
  return kNames[static_cast<int>(t)];
}

const char* to_string(LinkKind k) {
  switch (k) {
    case LinkKind::Internal: return "internal";
    case LinkKind::EdgeWraparound: return "wrap";
    case LinkKind::GatewayIn:
    case LinkKind::GatewayAck: return "gw";
  }
  return "?";
}

Direction GridShape::output_side(Coord c, Axis a) const {
  if (a == Axis::Horizontal) return c.row % 2 == 0 ? Direction::East : Direction::West;
  return c.col % 2 == 0 ? Direction::North : Direction::South;
}

Direction GridShape::input_side(Coord c, Axis a) const { return opposite(output_side(c, a)); }

std::optional<Coord> GridShape::next(Coord c, Axis a) const {
  if (a == Axis::Horizontal) {
    if (c.row % 2 == 0) return c.col + 1 < cols_ ? Coord{c.col + 1, c.row} : Coord{c.col, c.row + 1};
    return c.col > 0 ? Coord{c.col - 1, c.row} : Coord{c.col, c.row - 1};
  }
  if (c.col % 2 == 0) return c.row + 1 < rows_ ? Coord{c.col, c.row + 1} : Coord{c.col + 1, c.row};
  if (c.row > 0) return Coord{c.col, c.row - 1};
  if (c.col + 1 < cols_) return Coord{c.col + 1, 0};
  return std::nullopt;
}

std::optional<Coord> GridShape::prev(Coord c, Axis a) const {
  if (a == Axis::Horizontal) {
    if (c.row % 2 == 0) return c.col > 0 ? Coord{c.col - 1, c.row} : Coord{0, c.row + 1};
    return c.col + 1 < cols_ ? Coord{c.col + 1, c.row} : Coord{cols_ - 1, c.row - 1};
  }
  if (c.col % 2 == 0) {
    if (c.row > 0) return Coord{c.col, c.row - 1};
    if (c.col > 0) return Coord{c.col - 1, 0};
    return std::nullopt;
  }
  return c.row + 1 < rows_ ? Coord{c.col, c.row + 1} : Coord{c.col - 1, rows_ - 1};
}

LinkKind GridShape::out_kind(Coord c, Axis a) const {
  auto n = next(c, a);
  if (!n) return LinkKind::GatewayAck;
  bool along_axis = a == Axis::Horizontal ? n->row == c.row : n->col == c.col;
  return along_axis ? LinkKind::Internal : LinkKind::EdgeWraparound;
}

LinkKind GridShape::in_kind(Coord c, Axis a) const {
  auto p = prev(c, a);
  if (!p) return LinkKind::GatewayIn;
  return out_kind(*p, a);
}

FaultMap::FaultMap(const GridShape& shape, std::set<Coord> failed_nodes, double p, std::uint64_t s)
    : failed(std::move(failed_nodes)), p_f(p), seed(s), mask_(shape.size(), 0), cols_(shape.cols()) {
  for (const auto& c : failed) {
    if (!shape.contains(c)) throw std::invalid_argument("fault outside grid: " + to_string(c));
    mask_[shape.index(c)] = 1;
  }
}

OrientationType orientation(Coord c, const GridShape& shape) {
  if (!shape.contains(c)) throw std::out_of_range("coordinate outside grid: " + to_string(c));
  return static_cast<OrientationType>((c.row % 2) * 2 + (c.col % 2));
}

PortMap port_map(Coord c, const GridTopology& topo) {
  const auto& s = topo.shape();
  if (!s.contains(c)) throw std::out_of_range("coordinate outside grid: " + to_string(c));
  PortMap m{};
  for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
    m[static_cast<int>(s.output_side(c, a))].output = true;
    m[static_cast<int>(s.input_side(c, a))].input = true;
  }
  m[static_cast<int>(Direction::North)].boundary = c.row == s.rows() - 1;
  m[static_cast<int>(Direction::South)].boundary = c.row == 0;
  m[static_cast<int>(Direction::West)].boundary = c.col == 0;
  m[static_cast<int>(Direction::East)].boundary = c.col == s.cols() - 1;
  return m;
}

namespace {

PortId make_port(const GridShape& s, Coord c, Axis a, bool output) {
  PortRole role = output ? (a == Axis::Horizontal ? PortRole::Output1 : PortRole::Output2)
                         : (a == Axis::Horizontal ? PortRole::Input1 : PortRole::Input2);
  return {c, role, output ? s.output_side(c, a) : s.input_side(c, a)};
}

}  // namespace

GridTopology build_grid(int rows, int cols) {
  if (rows < 4 || cols < 4 || rows % 2 != 0 || cols % 2 != 0)
    throw std::invalid_argument(fmt::format("grid must be even x even and at least 4x4, got {}x{}", rows, cols));
  GridTopology t;
  t.shape_ = GridShape(rows, cols);
  const auto& s = t.shape_;
  t.out_.assign(s.size() * 2, 0);
  t.in_.assign(s.size() * 2, 0);
  for (int i = 0; i < s.size(); ++i) {
    Coord c = s.coord(i);
    for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
      Link l;
      l.src = make_port(s, c, a, true);
      auto n = s.next(c, a);
      if (n) {
        l.dst = make_port(s, *n, a, false);
        l.kind = s.out_kind(c, a);
        t.in_[s.index(*n) * 2 + static_cast<int>(a)] = t.links_.size();
      } else {
        l.kind = LinkKind::GatewayAck;
        t.gw_ack_ = t.links_.size();
      }
      t.out_[i * 2 + static_cast<int>(a)] = t.links_.size();
      t.links_.push_back(l);
    }
  }
  Link gw;
  gw.dst = make_port(s, s.gateway_in_node(), Axis::Vertical, false);
  gw.kind = LinkKind::GatewayIn;
  t.gw_in_ = t.links_.size();
  t.in_[s.index(s.gateway_in_node()) * 2 + static_cast<int>(Axis::Vertical)] = t.gw_in_;
  t.links_.push_back(gw);
  return t;
}

std::optional<std::pair<Coord, Link>> neighbor_via(Coord c, Direction d, const GridTopology& topo) {
  const auto& s = topo.shape();
  if (!s.contains(c)) throw std::out_of_range("coordinate outside grid: " + to_string(c));
  Axis a = axis_of(d);
  if (s.output_side(c, a) != d) return std::nullopt;
  auto n = s.next(c, a);
  if (!n) return std::nullopt;
  return std::make_pair(*n, topo.links()[topo.out_link(c, a)]);
}

std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t i) {
  std::seed_seq seq{static_cast<std::uint32_t>(base_seed), static_cast<std::uint32_t>(base_seed >> 32),
                    static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(i >> 32)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

FaultMap inject_faults(const GridTopology& topo, double p_f, std::uint64_t seed) {
  if (!(p_f >= 0.0 && p_f <= 1.0)) throw std::invalid_argument(fmt::format("p_f must lie in [0,1], got {}", p_f));
  const auto& s = topo.shape();
  std::mt19937_64 rng(seed);
  std::set<Coord> failed;
  for (int i = 0; i < s.size(); ++i) {
    // 53-bit uniform in [0,1); avoids library-specific distribution algorithms.
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    Coord c = s.coord(i);
    if (u < p_f && !s.is_gateway_node(c)) failed.insert(c);
  }
  return FaultMap(s, std::move(failed), p_f, seed);
}

std::set<Coord> reachable_from(const GridTopology& topo, const FaultMap& faults, Coord src) {
  return reachable_from(topo.shape(), faults, src);
}

std::set<Coord> reachable_from(const GridShape& s, const FaultMap& faults, Coord src) {
  if (!s.contains(src)) throw std::out_of_range("coordinate outside grid: " + to_string(src));
  if (faults.is_failed(src)) throw std::invalid_argument("source is failed: " + to_string(src));
  std::vector<char> seen(s.size(), 0);
  std::deque<Coord> q{src};
  seen[s.index(src)] = 1;
  std::set<Coord> out{src};
  while (!q.empty()) {
    Coord c = q.front();
    q.pop_front();
    for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
      auto n = s.next(c, a);
      if (!n || faults.is_failed(*n) || seen[s.index(*n)]) continue;
      seen[s.index(*n)] = 1;
      out.insert(*n);
      q.push_back(*n);
    }
  }
  return out;
}

std::string to_dot(const GridTopology& topo) {
  const auto& s = topo.shape();
  std::ostringstream os;
  os << "digraph grid {\n  node [shape=box];\n";
  os << "  gw_in [label=\"GW\", pos=\"0,-1!\"];\n";
  os << fmt::format("  gw_ack [label=\"ACK GW\", pos=\"{},-1!\"];\n", s.cols() - 1);
  for (int i = 0; i < s.size(); ++i) {
    Coord c = s.coord(i);
    os << fmt::format("  n{}_{} [label=\"({},{}) {}\", pos=\"{},{}!\"];\n", c.col, c.row, c.col, c.row,
                      to_string(orientation(c, s)), c.col, c.row);
  }
  auto name = [](const std::optional<PortId>& p, const char* gw) {
    return p ? fmt::format("n{}_{}", p->owner.col, p->owner.row) : std::string(gw);
  };
  for (const auto& l : topo.links()) {
    os << fmt::format("  {} -> {} [kind={}];\n", name(l.src, "gw_in"), name(l.dst, "gw_ack"), to_string(l.kind));
  }
  os << "}\n";
  return os.str();
}

}  // namespace hsfnet
