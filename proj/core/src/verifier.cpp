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

#include "hsfnet/verifier.hpp"

#include <algorithm>
#include <atomic>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>
#include <fmt/format.h>

namespace hsfnet {

namespace {

// Channel sequence of one packet: the link it entered on, then every output link it used.
std::vector<std::size_t> channels_of(const GridTopology& topo, const TraceResult& t, std::optional<std::size_t> entry,
                                     bool exits_to_ack_gateway) {
  std::vector<std::size_t> seq;
  if (entry) seq.push_back(*entry);
  for (std::size_t i = 0; i < t.out_axes.size(); ++i) seq.push_back(topo.out_link(t.path[i], t.out_axes[i]));
  if (exits_to_ack_gateway && t.delivered() && t.path.back() == topo.shape().gateway_ack_node()) {
    seq.push_back(topo.gateway_ack_link());
  }
  return seq;
}

void add_chain(ChannelDependencyGraph& g, const std::vector<std::size_t>& seq) {
  for (std::size_t i = 0; i < seq.size(); ++i) {
    g.vertices.insert(seq[i]);
    if (i + 1 < seq.size()) g.edges.emplace(seq[i], seq[i + 1]);
  }
}

}  // namespace

ChannelDependencyGraph build_cdg(const GridTopology& topo, const Router& router, CdgFlows flows) {
  const auto& s = topo.shape();
  const FaultMap none;
  const Coord gw = s.gateway_in_node();
  const Coord ack_node = s.gateway_ack_node();

  // ACK chains depend only on where the data packet was consumed.
  std::vector<std::vector<std::size_t>> ack_chain(s.size());
  for (int i = 0; i < s.size(); ++i) {
    Coord d = s.coord(i);
    auto t = trace_packet(s, none, router, d, ack_node, TraceOptions{PacketKind::Ack, std::nullopt});
    ack_chain[i] = channels_of(topo, t, std::nullopt, true);
  }

  ChannelDependencyGraph g;
  auto data_flow = [&](Coord src, Coord dst, std::optional<Direction> arrived, std::optional<std::size_t> entry) {
    auto t = trace_packet(s, none, router, src, dst, TraceOptions{PacketKind::Data, arrived});
    auto seq = channels_of(topo, t, entry, false);
    if (t.delivered()) {
      const auto& ack = ack_chain[s.index(t.path.back())];
      seq.insert(seq.end(), ack.begin(), ack.end());
    }
    add_chain(g, seq);
  };

  for (int i = 0; i < s.size(); ++i) {
    data_flow(gw, s.coord(i), s.input_side(gw, Axis::Vertical), topo.gateway_in_link());
  }
  if (flows == CdgFlows::AllPairs) {
    for (int a = 0; a < s.size(); ++a) {
      for (int b = 0; b < s.size(); ++b) {
        if (a != b) data_flow(s.coord(a), s.coord(b), std::nullopt, std::nullopt);
      }
    }
  }
  return g;
}

ChannelDependencyGraph build_cdg(const GridTopology& topo, Algorithm algo, CdgFlows flows) {
  return build_cdg(topo, make_router(algo), flows);
}

std::optional<std::vector<std::size_t>> assert_acyclic(const ChannelDependencyGraph& g) {
  // Compact vertex ids; edges may mention channels missing from `vertices`.
  std::map<std::size_t, int> id;
  std::vector<std::size_t> label;
  auto intern = [&](std::size_t v) {
    auto [it, fresh] = id.try_emplace(v, static_cast<int>(label.size()));
    if (fresh) label.push_back(v);
    return it->second;
  };
  for (auto v : g.vertices) intern(v);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(g.edges.size());
  for (auto [a, b] : g.edges) {
    int x = intern(a);
    edges.emplace_back(x, intern(b));
  }
  const int n = static_cast<int>(label.size());
  std::vector<std::vector<int>> adj(n);
  std::vector<int> indeg(n, 0);
  for (auto [a, b] : edges) {
    adj[a].push_back(b);
    ++indeg[b];
  }

  // Kahn pruning leaves exactly the vertices that lie on or feed into no cycle removed.
  std::vector<char> alive(n, 1);
  std::deque<int> q;
  for (int v = 0; v < n; ++v) {
    if (indeg[v] == 0) q.push_back(v);
  }
  int removed = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    alive[v] = 0;
    ++removed;
    for (int w : adj[v]) {
      if (--indeg[w] == 0) q.push_back(w);
    }
  }
  if (removed == n) return std::nullopt;

  // Shortest cycle: BFS from every surviving vertex back to itself.
  std::vector<int> best;
  std::vector<int> dist(n), parent(n);
  for (int s = 0; s < n; ++s) {
    if (!alive[s]) continue;
    std::fill(dist.begin(), dist.end(), -1);
    dist[s] = 0;
    std::deque<int> bq{s};
    int closing = -1;
    while (!bq.empty() && closing < 0) {
      int v = bq.front();
      bq.pop_front();
      if (!best.empty() && dist[v] + 1 >= static_cast<int>(best.size())) break;
      for (int w : adj[v]) {
        if (!alive[w]) continue;
        if (w == s) {
          closing = v;
          break;
        }
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          parent[w] = v;
          bq.push_back(w);
        }
      }
    }
    if (closing < 0) continue;
    std::vector<int> cyc;
    for (int v = closing; v != s; v = parent[v]) cyc.push_back(v);
    cyc.push_back(s);
    std::reverse(cyc.begin(), cyc.end());
    if (best.empty() || cyc.size() < best.size()) best = std::move(cyc);
    if (best.size() == 1) break;
  }
  std::vector<std::size_t> out;
  out.reserve(best.size());
  for (int v : best) out.push_back(label[v]);
  return out;
}

std::string describe_channel(const GridTopology& topo, std::size_t link) {
  const auto& l = topo.links().at(link);
  std::string from = l.src ? fmt::format("{}{}", to_string(l.src->owner), to_string(l.src->side)[0]) : "GWin";
  std::string to = l.dst ? to_string(l.dst->owner) : "GWack";
  return fmt::format("{}->{}", from, to);
}

std::string to_dot(const GridTopology& topo, const ChannelDependencyGraph& g,
                   const std::vector<std::size_t>& highlight_cycle) {
  std::set<std::pair<std::size_t, std::size_t>> hot;
  std::set<std::size_t> hot_v(highlight_cycle.begin(), highlight_cycle.end());
  for (std::size_t i = 0; i < highlight_cycle.size(); ++i) {
    hot.emplace(highlight_cycle[i], highlight_cycle[(i + 1) % highlight_cycle.size()]);
  }
  std::set<std::size_t> verts = g.vertices;
  for (auto [a, b] : g.edges) {
    verts.insert(a);
    verts.insert(b);
  }
  std::ostringstream os;
  os << "digraph cdg {\n  node [shape=box, fontsize=10];\n";
  for (auto v : verts) {
    os << fmt::format("  c{} [label=\"{}\"{}];\n", v, describe_channel(topo, v), hot_v.count(v) ? ", color=red" : "");
  }
  for (auto [a, b] : g.edges) {
    os << fmt::format("  c{} -> c{}{};\n", a, b, hot.count({a, b}) ? " [color=red, penwidth=2]" : "");
  }
  os << "}\n";
  return os.str();
}

std::vector<LivelockWitness> livelock_scan(const GridTopology& topo, const Router& router, int max_faults,
                                           const ScanOptions& opt) {
  if (max_faults < 0 || max_faults > 2) throw std::invalid_argument("livelock_scan supports 0..2 faults");
  const auto& s = topo.shape();
  std::vector<Coord> candidates;
  for (int i = 0; i < s.size(); ++i) {
    if (!s.is_gateway_node(s.coord(i))) candidates.push_back(s.coord(i));
  }
  std::sort(candidates.begin(), candidates.end());
  std::vector<std::set<Coord>> fault_sets{{}};
  if (max_faults >= 1) {
    for (auto c : candidates) fault_sets.push_back({c});
  }
  if (max_faults >= 2) {
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      for (std::size_t j = i + 1; j < candidates.size(); ++j) fault_sets.push_back({candidates[i], candidates[j]});
    }
  }

  std::vector<std::vector<LivelockWitness>> found(fault_sets.size());
  parallel_for(fault_sets.size(), opt.threads, [&](std::size_t k) {
    FaultMap faults(s, fault_sets[k]);
    for (int a = 0; a < s.size(); ++a) {
      Coord src = s.coord(a);
      if (faults.is_failed(src)) continue;
      std::optional<Direction> arrived;
      if (src == s.gateway_in_node()) arrived = s.input_side(src, Axis::Vertical);
      for (int b = 0; b < s.size(); ++b) {
        Coord dst = s.coord(b);
        if (dst == src) continue;
        auto t = trace_packet(s, faults, router, src, dst, TraceOptions{PacketKind::Data, arrived});
        if (t.outcome == TraceOutcome::Looped) found[k].push_back({fault_sets[k], src, dst, t.witness});
      }
    }
  });
  std::vector<LivelockWitness> out;
  for (auto& f : found) out.insert(out.end(), f.begin(), f.end());
  return out;
}

std::vector<LivelockWitness> livelock_scan(const GridTopology& topo, Algorithm algo, int max_faults,
                                           const ScanOptions& opt) {
  return livelock_scan(topo, make_router(algo), max_faults, opt);
}

DisjointCheck check_disjoint(const GridTopology& topo, Coord src, Coord dst, const PathsFn& paths) {
  if (src == dst) throw std::invalid_argument("check_disjoint needs distinct endpoints");
  const auto& s = topo.shape();
  RdaPaths p = paths(src, dst, s);
  auto arrives = [&](const std::vector<Coord>& v) { return v.size() >= 2 && v.front() == src && v.back() == dst; };
  DisjointCheck r;
  if (!arrives(p.primary)) {
    r.reason = "primary path does not reach the destination";
    return r;
  }
  if (!arrives(p.alternate)) {
    r.reason = "alternate path does not reach the destination";
    return r;
  }
  std::set<Coord> interior(p.primary.begin() + 1, p.primary.end() - 1);
  for (auto it = p.alternate.begin() + 1; it + 1 != p.alternate.end(); ++it) {
    if (interior.count(*it)) {
      r.witness = *it;
      r.reason = "paths share an intermediate node";
      return r;
    }
  }
  if (!p.primary_entry || !p.alternate_entry || *p.primary_entry == *p.alternate_entry) {
    r.witness = dst;
    r.reason = "paths enter the destination on the same input";
    return r;
  }
  r.ok = true;
  return r;
}

DisjointCheck check_disjoint(const GridTopology& topo, Coord src, Coord dst) {
  return check_disjoint(topo, src, dst, [](Coord a, Coord b, const GridShape& s) { return rda_paths(a, b, s); });
}

int disjoint_path_capacity(const GridTopology& topo, Coord src, Coord dst, int cap) {
  using Traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
  using Graph = boost::adjacency_list<
      boost::vecS, boost::vecS, boost::directedS, boost::no_property,
      boost::property<boost::edge_capacity_t, long,
                      boost::property<boost::edge_residual_capacity_t, long,
                                      boost::property<boost::edge_reverse_t, Traits::edge_descriptor>>>>;
  const auto& s = topo.shape();
  if (src == dst) throw std::invalid_argument("disjoint_path_capacity needs distinct endpoints");
  // Node split: v_in = 2i, v_out = 2i + 1, unit capacity between them except at the endpoints.
  Graph g(2 * s.size());
  auto cap_map = boost::get(boost::edge_capacity, g);
  auto rev_map = boost::get(boost::edge_reverse, g);
  auto add = [&](int u, int v, long c) {
    auto e = boost::add_edge(u, v, g).first;
    auto r = boost::add_edge(v, u, g).first;
    cap_map[e] = c;
    cap_map[r] = 0;
    rev_map[e] = r;
    rev_map[r] = e;
  };
  const long big = cap;
  for (int i = 0; i < s.size(); ++i) {
    Coord c = s.coord(i);
    add(2 * i, 2 * i + 1, (c == src || c == dst) ? big : 1);
    for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
      if (auto n = s.next(c, a)) add(2 * i + 1, 2 * s.index(*n), 1);
    }
  }
  long flow = boost::push_relabel_max_flow(g, 2 * s.index(src) + 1, 2 * s.index(dst));
  return static_cast<int>(std::min<long>(flow, cap));
}

std::set<Coord> disconnected_nodes(const GridTopology& topo, const FaultMap& faults, Coord src) {
  const auto& s = topo.shape();
  auto reach = reachable_from(topo, faults, src);
  std::set<Coord> out;
  for (int i = 0; i < s.size(); ++i) {
    Coord c = s.coord(i);
    if (!faults.is_failed(c) && !reach.count(c)) out.insert(c);
  }
  return out;
}

}  // namespace hsfnet
