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

#include <map>

#include <gtest/gtest.h>

#include <map>
#include <random>

#include "hsfnet/topology.hpp"
#include "oracles.hpp"

namespace hsfnet {
namespace {

TEST(Orientation, ParityClasses) {
  GridShape s(4, 4);
  EXPECT_EQ(orientation({0, 0}, s), OrientationType::T0);
  EXPECT_EQ(orientation({1, 0}, s), OrientationType::T1);
  EXPECT_EQ(orientation({0, 1}, s), OrientationType::T2);
  EXPECT_EQ(orientation({1, 1}, s), OrientationType::T3);
  EXPECT_EQ(orientation({3, 3}, s), OrientationType::T3);
  EXPECT_THROW(orientation({4, 0}, s), std::out_of_range);
}

TEST(PortMap, InteriorT0HasWestSouthInputsEastNorthOutputs) {
  auto topo = build_grid(4, 4);
  auto pm = port_map({2, 2}, topo);
  EXPECT_TRUE(pm[static_cast<int>(Direction::West)].input);
  EXPECT_TRUE(pm[static_cast<int>(Direction::South)].input);
  EXPECT_TRUE(pm[static_cast<int>(Direction::East)].output);
  EXPECT_TRUE(pm[static_cast<int>(Direction::North)].output);
  for (auto& side : pm) EXPECT_FALSE(side.boundary);
}

TEST(PortMap, EveryNodeHasTwoInputsAndTwoOutputs) {
  auto topo = build_grid(6, 8);
  for (int i = 0; i < topo.shape().size(); ++i) {
    auto pm = port_map(topo.shape().coord(i), topo);
    int ins = 0, outs = 0;
    for (auto& side : pm) {
      ins += side.input;
      outs += side.output;
      EXPECT_FALSE(side.input && side.output);
    }
    EXPECT_EQ(ins, 2);
    EXPECT_EQ(outs, 2);
  }
}

TEST(BuildGrid, RejectsOddOrSmallDimensions) {
  EXPECT_THROW(build_grid(5, 4), std::invalid_argument);
  EXPECT_THROW(build_grid(4, 7), std::invalid_argument);
  EXPECT_THROW(build_grid(2, 2), std::invalid_argument);
  EXPECT_NO_THROW(build_grid(4, 6));
}

TEST(BuildGrid, LinkCountsAndGateways) {
  for (int n : {4, 6, 8, 24}) {
    auto topo = build_grid(n, n);
    // Two outputs per node, one of which feeds the ACK gateway, plus the ingress link.
    EXPECT_EQ(topo.links().size(), static_cast<std::size_t>(2 * n * n + 1));
    int wraps = 0, gw_in = 0, gw_ack = 0;
    for (const auto& l : topo.links()) {
      wraps += l.kind == LinkKind::EdgeWraparound;
      gw_in += l.kind == LinkKind::GatewayIn;
      gw_ack += l.kind == LinkKind::GatewayAck;
    }
    EXPECT_EQ(gw_in, 1);
    EXPECT_EQ(gw_ack, 1);
    // Right, left, top and bottom edges each pair half of their nodes; the bottom-right output leaves.
    EXPECT_EQ(wraps, 2 * n - 1);
    EXPECT_EQ(topo.gateway_in().owner, (Coord{0, 0}));
    EXPECT_EQ(topo.gateway_ack().owner, (Coord{n - 1, 0}));
  }
}

TEST(BuildGrid, MatchesBoundaryPairingOracle) {
  for (auto [r, c] : {std::pair{4, 4}, {6, 6}, {4, 8}, {8, 6}, {24, 24}}) {
    auto topo = build_grid(r, c);
    auto ref = oracle::build(r, c);
    const auto& s = topo.shape();
    for (int i = 0; i < s.size(); ++i) {
      Coord at = s.coord(i);
      for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
        auto n = s.next(at, a);
        int want = ref.out[i][static_cast<int>(a)];
        if (want < 0) {
          EXPECT_FALSE(n.has_value()) << to_string(at);
        } else {
          ASSERT_TRUE(n.has_value()) << to_string(at);
          EXPECT_EQ(s.index(*n), want) << to_string(at);
          EXPECT_EQ(s.prev(*n, a), at);
        }
        const auto& link = topo.links()[topo.out_link(at, a)];
        EXPECT_EQ(link.src->owner, at);
      }
    }
  }
}

TEST(BuildGrid, WraparoundsKeepTheirAxis) {
  auto topo = build_grid(6, 6);
  const auto& s = topo.shape();
  EXPECT_EQ(s.next({5, 2}, Axis::Horizontal), (Coord{5, 3}));
  EXPECT_EQ(s.next({0, 3}, Axis::Horizontal), (Coord{0, 2}));
  EXPECT_EQ(s.next({2, 5}, Axis::Vertical), (Coord{3, 5}));
  EXPECT_EQ(s.next({3, 0}, Axis::Vertical), (Coord{4, 0}));
  EXPECT_FALSE(s.next({5, 0}, Axis::Vertical).has_value());
  EXPECT_EQ(s.out_kind({5, 2}, Axis::Horizontal), LinkKind::EdgeWraparound);
  EXPECT_EQ(s.out_kind({1, 1}, Axis::Horizontal), LinkKind::Internal);
  EXPECT_EQ(s.out_kind({5, 0}, Axis::Vertical), LinkKind::GatewayAck);
  EXPECT_EQ(s.in_kind({0, 0}, Axis::Vertical), LinkKind::GatewayIn);
}

// Edge pairs get a reverse channel from the wrap, except along the bottom edge, where the east
// wrap doubles the internal east link.
TEST(BuildGrid, WrapsAddReverseChannelsExceptOnTheBottomEdge) {
  for (auto [r, c] : {std::pair{4, 4}, {6, 8}, {24, 24}}) {
    auto topo = build_grid(r, c);
    std::map<std::pair<Coord, Coord>, int> count;
    for (const auto& l : topo.links()) {
      if (l.src && l.dst) ++count[{l.src->owner, l.dst->owner}];
    }
    for (const auto& [pair, n] : count) {
      const auto& [from, to] = pair;
      if (from.row == 0 && to.row == 0 && from.col % 2 == 1) {
        EXPECT_EQ(n, 2) << to_string(from) << "->" << to_string(to);
      } else {
        EXPECT_EQ(n, 1) << to_string(from) << "->" << to_string(to);
      }
    }
    for (const auto& l : topo.links()) {
      if (l.kind != LinkKind::EdgeWraparound || l.src->owner.row == 0) continue;
      EXPECT_EQ(count[std::pair(l.dst->owner, l.src->owner)], 1) << to_string(l.src->owner);
    }
  }
}

TEST(NeighborVia, FollowsOutputsOnly) {
  auto topo = build_grid(4, 4);
  auto e = neighbor_via({0, 0}, Direction::East, topo);
  ASSERT_TRUE(e);
  EXPECT_EQ(e->first, (Coord{1, 0}));
  EXPECT_FALSE(neighbor_via({0, 0}, Direction::West, topo));
  EXPECT_FALSE(neighbor_via({3, 0}, Direction::South, topo));
}

TEST(Faults, ZeroAndOneProbability) {
  auto topo = build_grid(8, 8);
  EXPECT_TRUE(inject_faults(topo, 0.0, 7).failed.empty());
  auto all = inject_faults(topo, 1.0, 7);
  EXPECT_EQ(all.failed.size(), 62u);
  EXPECT_FALSE(all.is_failed({0, 0}));
  EXPECT_FALSE(all.is_failed({7, 0}));
  EXPECT_THROW(inject_faults(topo, 1.5, 1), std::invalid_argument);
  EXPECT_THROW(inject_faults(topo, -0.1, 1), std::invalid_argument);
}

TEST(Faults, DeterministicPerSeed) {
  auto topo = build_grid(24, 24);
  auto a = inject_faults(topo, 0.05, trial_seed(1, 3));
  auto b = inject_faults(topo, 0.05, trial_seed(1, 3));
  auto c = inject_faults(topo, 0.05, trial_seed(1, 4));
  EXPECT_EQ(a.failed, b.failed);
  EXPECT_NE(a.failed, c.failed);
  EXPECT_NE(trial_seed(1, 0), trial_seed(2, 0));
}

TEST(Faults, RateMatchesProbability) {
  auto topo = build_grid(24, 24);
  std::size_t failed = 0;
  const int trials = 400;
  for (int i = 0; i < trials; ++i) failed += inject_faults(topo, 0.04, trial_seed(9, i)).failed.size();
  const double n = 574.0 * trials;
  const double rate = failed / n;
  EXPECT_NEAR(rate, 0.04, 4 * std::sqrt(0.04 * 0.96 / n));
}

TEST(Reachability, SpecDisconnectionExample) {
  auto topo = build_grid(4, 4);
  FaultMap f(topo.shape(), {{2, 2}});
  auto r = reachable_from(topo, f, {0, 0});
  std::set<Coord> lost;
  for (int i = 0; i < 16; ++i) {
    Coord c = topo.shape().coord(i);
    if (!f.is_failed(c) && !r.count(c)) lost.insert(c);
  }
  EXPECT_EQ(lost, (std::set<Coord>{{2, 3}, {3, 2}, {3, 3}}));
  EXPECT_THROW(reachable_from(topo, f, {2, 2}), std::invalid_argument);
}

TEST(Reachability, FaultFreeGridIsStronglyConnected) {
  for (int n : {4, 6, 10}) {
    auto topo = build_grid(n, n);
    for (int i = 0; i < n * n; ++i) {
      EXPECT_EQ(reachable_from(topo, FaultMap{}, topo.shape().coord(i)).size(), static_cast<std::size_t>(n * n));
    }
  }
}

TEST(Reachability, AgreesWithClosureOracleOnRandomFaults) {
  std::mt19937_64 rng(42);
  for (int n : {4, 6, 8}) {
    auto topo = build_grid(n, n);
    auto ref = oracle::build(n, n);
    for (int t = 0; t < 30; ++t) {
      auto f = inject_faults(topo, 0.15, rng());
      std::set<std::pair<int, int>> bad;
      for (auto c : f.failed) bad.insert({c.col, c.row});
      for (Coord src : {Coord{0, 0}, Coord{n - 1, 0}}) {
        auto got = reachable_from(topo, f, src);
        auto want = oracle::reach(ref, bad, src.col, src.row);
        for (int i = 0; i < n * n; ++i) EXPECT_EQ(got.count(topo.shape().coord(i)) > 0, want[i]);
      }
    }
  }
}

TEST(Dot, ListsEveryNodeAndGateway) {
  auto dot = to_dot(build_grid(4, 6));
  EXPECT_NE(dot.find("gw_in"), std::string::npos);
  EXPECT_NE(dot.find("gw_ack"), std::string::npos);
  EXPECT_NE(dot.find("n5_3"), std::string::npos);
  EXPECT_NE(dot.find("kind=wrap"), std::string::npos);
}

}  // namespace
}  // namespace hsfnet
