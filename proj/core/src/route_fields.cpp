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

#include "route_fields.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <queue>
#include <shared_mutex>
#include <stdexcept>

namespace hsfnet::detail {

namespace {

using Cost = std::array<int, 3>;

Cost operator+(const Cost& a, const Cost& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }

enum class Move : std::uint8_t { East, West, North, South, RightWrap, LeftWrap, TopWrap, BottomWrap };

Move move_of(const GridShape& s, Coord c, Axis a) {
  if (a == Axis::Horizontal) {
    if (c.row % 2 == 0) return c.col + 1 < s.cols() ? Move::East : Move::RightWrap;
    return c.col > 0 ? Move::West : Move::LeftWrap;
  }
  if (c.col % 2 == 0) return c.row + 1 < s.rows() ? Move::North : Move::TopWrap;
  return c.row > 0 ? Move::South : Move::BottomWrap;
}

struct Bans {
  std::vector<char> node;
  std::vector<char> edge;  // index * 2 + axis
  explicit Bans(const GridShape& s) : node(s.size(), 0), edge(s.size() * 2, 0) {}
  void ban_edge(const GridShape& s, Coord c, Axis a) { edge[s.index(c) * 2 + static_cast<int>(a)] = 1; }
  bool edge_banned(const GridShape& s, Coord c, Axis a) const { return edge[s.index(c) * 2 + static_cast<int>(a)]; }
};

// Lexicographic shortest-path next-hop table towards `d`. Ties go to `pref`.
template <class CostFn>
RouteField shortest_field(const GridShape& s, Coord d, CostFn cost, Axis pref, const Bans& bans) {
  const int n = s.size();
  std::vector<std::optional<Cost>> dist(n);
  using Item = std::pair<Cost, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  dist[s.index(d)] = Cost{0, 0, 0};
  pq.push({Cost{0, 0, 0}, s.index(d)});
  while (!pq.empty()) {
    auto [c, m] = pq.top();
    pq.pop();
    if (dist[m] != c) continue;
    Coord mc = s.coord(m);
    for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
      auto p = s.prev(mc, a);
      if (!p) continue;
      int pi = s.index(*p);
      if (bans.node[pi] || bans.edge_banned(s, *p, a)) continue;
      Cost nd = c + cost(*p, a);
      if (!dist[pi] || nd < *dist[pi]) {
        dist[pi] = nd;
        pq.push({nd, pi});
      }
    }
  }
  RouteField f{s, d, std::vector<std::int8_t>(n, -1)};
  for (int i = 0; i < n; ++i) {
    Coord c = s.coord(i);
    if (c == d || !dist[i]) continue;
    std::optional<Cost> best;
    for (Axis k : {pref, other(pref)}) {
      if (bans.edge_banned(s, c, k)) continue;
      auto m = s.next(c, k);
      if (!m || !dist[s.index(*m)]) continue;
      Cost t = *dist[s.index(*m)] + cost(c, k);
      if (!best || t < *best) {
        best = t;
        f.next[i] = static_cast<std::int8_t>(k);
      }
    }
  }
  return f;
}

// Nodes the restricted table cannot route fall back to the unrestricted one.
void fill_from(RouteField& f, const RouteField& fallback) {
  for (std::size_t i = 0; i < f.next.size(); ++i)
    if (f.next[i] < 0) f.next[i] = fallback.next[i];
}

RouteField build_classic_xy(const GridShape& s, Coord d) {
  auto hops = [](Coord, Axis) { return Cost{0, 1, 0}; };
  Bans none(s);
  RouteField plain = shortest_field(s, d, hops, Axis::Horizontal, none);
  if (d.col % 2 == 0 || d.col + 1 >= s.cols()) return plain;
  // Odd destination column: keep the ascent in the even column east of it.
  Bans bans(s);
  for (int y = std::max(1, d.row); y < s.rows(); ++y)
    if (y % 2 == 0) bans.ban_edge(s, {d.col - 1, y}, Axis::Horizontal);
  bans.ban_edge(s, {d.col - 1, s.rows() - 1}, Axis::Vertical);
  RouteField f = shortest_field(s, d, hops, Axis::Horizontal, bans);
  fill_from(f, plain);
  return f;
}

RouteField build_dfxy_plain(const GridShape& s, Coord d) {
  auto cost = [&s](Coord c, Axis a) {
    Move m = move_of(s, c, a);
    return Cost{(m == Move::West || m == Move::LeftWrap) ? 1 : 0, 1, m == Move::RightWrap ? 1 : 0};
  };
  return shortest_field(s, d, cost, Axis::Vertical, Bans(s));
}

// West-free table that, among equally westward routes, avoids hops whose loss would strand the
// previous node (its other output either hits the same node or cannot reach the destination).
RouteField build_dfxy(const GridShape& s, Coord d) {
  const int n = s.size();
  std::vector<std::vector<char>> reaches_without(n);
  for (int v = 0; v < n; ++v) {
    if (s.coord(v) == d) continue;
    auto& r = reaches_without[v];
    r.assign(n, 0);
    std::deque<int> q{s.index(d)};
    r[s.index(d)] = 1;
    while (!q.empty()) {
      Coord m = s.coord(q.front());
      q.pop_front();
      for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
        auto p = s.prev(m, a);
        if (!p) continue;
        int pi = s.index(*p);
        if (pi == v || r[pi]) continue;
        r[pi] = 1;
        q.push_back(pi);
      }
    }
  }
  auto cost = [&](Coord c, Axis a) {
    Move m = move_of(s, c, a);
    int trap = 0;
    auto v = s.next(c, a);
    if (v && *v != d) {
      auto w = s.next(c, other(a));
      if (!w || *w == *v || !reaches_without[s.index(*v)][s.index(*w)]) trap = 1;
    }
    return Cost{(m == Move::West || m == Move::LeftWrap) ? 1 : 0, trap, 1};
  };
  return shortest_field(s, d, cost, Axis::Vertical, Bans(s));
}

RouteField build_yx(const GridShape& s, Coord d) {
  auto cost = [&s](Coord c, Axis a) {
    Move m = move_of(s, c, a);
    return Cost{m == Move::South ? 1 : 0, 1, m == Move::TopWrap ? 1 : 0};
  };
  return shortest_field(s, d, cost, Axis::Vertical, Bans(s));
}

// Detour around a known fault that enters the destination through the input the west-free
// route would not use, whenever that input is still reachable.
RouteField build_lfa_detour(const GridShape& s, Coord d, Coord fault) {
  const auto& base = route_field({s.rows(), s.cols(), d, FieldKind::Dfxy, {-1, -1}});
  auto cost = [&s](Coord c, Axis a) {
    auto m = s.next(c, a);
    return Cost{1, m ? m->col : 0, 0};
  };
  Bans open(s);
  open.node[s.index(fault)] = 1;
  Bans bans = open;
  auto p = base.walk(fault);
  if (p.size() >= 2) bans.ban_edge(s, p[p.size() - 2], *base.at(p[p.size() - 2]));
  RouteField f = shortest_field(s, d, cost, Axis::Vertical, bans);
  fill_from(f, shortest_field(s, d, cost, Axis::Vertical, open));
  return f;
}

RouteField build_rda_primary(const GridShape& s, Coord d, bool ack) {
  bool t3 = orientation(d, s) == OrientationType::T3;
  RouteField f = route_field({s.rows(), s.cols(), d, t3 ? FieldKind::ClassicXy : FieldKind::DfxyPlain, {-1, -1}});
  // Odd bottom-row nodes reach their east neighbour over two links: data takes the internal one,
  // acknowledgements the wraparound, so the two flows never share a channel there.
  for (int x = 1; x + 2 < s.cols(); x += 2) {
    Coord c{x, 0};
    if (c == d) continue;
    f.next[s.index(c)] = static_cast<std::int8_t>(ack ? Axis::Vertical : Axis::Horizontal);
  }
  return f;
}

RouteField build_rda_alternate(const GridShape& s, Coord d, bool ack) {
  const auto& primary =
      route_field({s.rows(), s.cols(), d, ack ? FieldKind::RdaPrimaryAck : FieldKind::RdaPrimaryData, {-1, -1}});
  auto gw = primary.walk(s.gateway_in_node());
  std::vector<char> on_primary(s.size(), 0);
  for (std::size_t i = 0; i + 1 < gw.size(); ++i) on_primary[s.index(gw[i])] = 1;
  auto cost = [&](Coord c, Axis a) {
    auto m = s.next(c, a);
    return Cost{m && on_primary[s.index(*m)] ? 1 : 0, 1, 0};
  };
  Bans open(s);
  Bans bans(s);
  if (gw.size() >= 2) bans.ban_edge(s, gw[gw.size() - 2], *primary.at(gw[gw.size() - 2]));
  RouteField f = shortest_field(s, d, cost, Axis::Horizontal, bans);
  fill_from(f, shortest_field(s, d, cost, Axis::Horizontal, open));
  return f;
}

RouteField build(const FieldKey& k) {
  GridShape s(k.rows, k.cols);
  if (!s.contains(k.dest)) throw std::out_of_range("destination outside grid: " + to_string(k.dest));
  switch (k.kind) {
    case FieldKind::ClassicXy: return build_classic_xy(s, k.dest);
    case FieldKind::Dfxy: return build_dfxy(s, k.dest);
    case FieldKind::DfxyPlain: return build_dfxy_plain(s, k.dest);
    case FieldKind::Yx: return build_yx(s, k.dest);
    case FieldKind::LfaDetour: return build_lfa_detour(s, k.dest, k.fault);
    case FieldKind::RdaPrimaryData: return build_rda_primary(s, k.dest, false);
    case FieldKind::RdaPrimaryAck: return build_rda_primary(s, k.dest, true);
    case FieldKind::RdaAlternateData: return build_rda_alternate(s, k.dest, false);
    case FieldKind::RdaAlternateAck: return build_rda_alternate(s, k.dest, true);
  }
  throw std::logic_error("unknown field kind");
}

}  // namespace

std::vector<Coord> RouteField::walk(Coord src) const {
  std::vector<Coord> path{src};
  Coord cur = src;
  while (cur != dest) {
    auto k = at(cur);
    if (!k) return {};
    auto n = shape.next(cur, *k);
    if (!n || path.size() > static_cast<std::size_t>(shape.size())) return {};
    cur = *n;
    path.push_back(cur);
  }
  return path;
}

const RouteField& route_field(const FieldKey& key) {
  static std::shared_mutex mu;
  static std::map<FieldKey, std::unique_ptr<RouteField>> cache;
  {
    std::shared_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return *it->second;
  }
  auto built = std::make_unique<RouteField>(build(key));
  std::unique_lock lock(mu);
  auto [it, inserted] = cache.try_emplace(key, std::move(built));
  return *it->second;
}

}  // namespace hsfnet::detail
