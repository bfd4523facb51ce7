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

#include "hsfnet/routing.hpp"

#include <bit>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>

#include "hsfnet/trace.hpp"
#include "route_fields.hpp"

namespace hsfnet {

using detail::FieldKind;
using detail::route_field;
using detail::RouteField;

namespace {

int bits_for(int n) { return n <= 1 ? 1 : std::bit_width(static_cast<unsigned>(n - 1)); }

const RouteField& field(const GridShape& s, Coord d, FieldKind k, Coord fault = {-1, -1}) {
  return route_field({s.rows(), s.cols(), d, k, fault});
}

RoutingDecision forward_on(const LocalView& v, Axis a, const PacketHeader& h) {
  return RoutingDecision::forward(v.dims.output_side(v.here, a), h);
}

// Dimension-ordered routing that stalls when its chosen output is blocked.
RoutingDecision follow_or_stall(const LocalView& v, const PacketHeader& h, FieldKind kind) {
  if (v.here == h.dest) return RoutingDecision::consume(h);
  auto k = field(v.dims, h.dest, kind).at(v.here);
  if (!k) return RoutingDecision::drop(DropCause::Unreachable, h);
  if (v.healthy(*k)) return forward_on(v, *k, h);
  return RoutingDecision::stall(h);
}

// Leaving through `a` would undo the edge wraparound the packet just crossed.
bool reverses_wrap(const LocalView& v, Axis a) {
  if (!v.arrived_via) return false;
  Axis in = axis_of(*v.arrived_via);
  if (v.dims.in_kind(v.here, in) != LinkKind::EdgeWraparound) return false;
  return v.dims.next(v.here, a) == v.dims.prev(v.here, in);
}

FieldKind technique_field(Technique t) { return t == Technique::XY ? FieldKind::Dfxy : FieldKind::Yx; }

RoutingDecision lfa_core(const LocalView& v, const PacketHeader& h, const ForbiddenTurnSet* forbidden, bool aided) {
  if (v.here == h.dest) return RoutingDecision::consume(h);
  auto allowed = [&](Axis a) { return v.healthy(a) && !reverses_wrap(v, a); };
  auto k = field(v.dims, h.dest, technique_field(h.technique)).at(v.here);
  if (!k) return RoutingDecision::drop(DropCause::Unreachable, h);

  if (h.mode == Mode::Abnormal) {
    if (forbidden) {
      Direction from = v.arrived_via ? opposite(*v.arrived_via) : Direction::North;
      auto banned = [&](Axis a) { return forbidden->count({v.here, from, v.dims.output_side(v.here, a)}) > 0; };
      if (banned(*k)) {
        k = other(*k);
        if (banned(*k)) return RoutingDecision::drop(DropCause::LoopGuard, h);
      }
    }
    if (!allowed(*k)) return RoutingDecision::drop(DropCause::LoopGuard, h);
    return forward_on(v, *k, h);
  }

  if (allowed(*k)) return forward_on(v, *k, h);
  Axis alt = other(*k);
  if (v.healthy(*k)) {
    // Only the wraparound reversal rule blocks the preferred output.
    if (!allowed(alt)) return RoutingDecision::drop(DropCause::BothBlocked, h);
    return forward_on(v, alt, h);
  }
  auto fault = v.dims.next(v.here, *k);
  if (fault && *fault == h.dest) return RoutingDecision::drop(DropCause::Unreachable, h);
  if (!allowed(alt)) return RoutingDecision::drop(DropCause::BothBlocked, h);
  PacketHeader nh = h;
  nh.technique = h.technique == Technique::XY ? Technique::YX : Technique::XY;
  auto d = forward_on(v, alt, nh);
  if (aided && h.technique == Technique::XY && fault) {
    auto r = lfa_restriction_set(*fault, h.dest, v.dims);
    d.header.mode = r.mode;
    if (r.mode == Mode::Abnormal) d.restrictions = r.turns;
  }
  return d;
}

LfaRestriction derive_restriction(Coord fault, Coord dest, const GridShape& s) {
  FaultMap faults(s, {fault});
  const auto& base = field(s, dest, FieldKind::Dfxy);
  auto fp = base.walk(fault);
  std::optional<Direction> targeted;
  if (fp.size() >= 2) targeted = s.input_side(dest, *base.at(fp[fp.size() - 2]));

  Router unaided = [](const LocalView& v, const PacketHeader& h, const ForbiddenTurnSet*) {
    return xyyx_unaided_route(v, h);
  };
  bool abnormal = false;
  for (int i = 0; i < s.size() && !abnormal; ++i) {
    Coord src = s.coord(i);
    if (src == fault || src == dest) continue;
    auto r = trace_packet(s, faults, unaided, src, dest);
    if (!r.switched) continue;
    if (r.outcome == TraceOutcome::Looped) {
      abnormal = true;
    } else if (!r.delivered()) {
      abnormal = reachable_from(s, faults, src).count(dest) > 0;
    } else {
      abnormal = targeted && r.entered_via == targeted;
    }
  }
  LfaRestriction out;
  if (!abnormal) return out;
  out.mode = Mode::Abnormal;

  // Forbid every turn where YX would leave the detour, along the detours entered from each
  // neighbour feeding the fault.
  auto turns = std::make_shared<ForbiddenTurnSet>();
  const auto& yx = field(s, dest, FieldKind::Yx);
  const auto& detour = field(s, dest, FieldKind::LfaDetour, fault);
  for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
    auto u = s.prev(fault, a);
    if (!u || *u == dest) continue;
    Axis b = other(a);
    auto w = s.next(*u, b);
    if (!w || *w == fault) continue;
    Coord n = *w;
    Direction in = s.input_side(n, b);
    for (int steps = 0; n != dest && steps <= s.size(); ++steps) {
      auto kd = detour.at(n);
      auto ky = yx.at(n);
      if (!kd) break;
      if (ky && *ky != *kd) turns->insert({n, opposite(in), s.output_side(n, *ky)});
      Coord m = *s.next(n, *kd);
      in = s.input_side(m, *kd);
      n = m;
    }
  }
  out.turns = std::move(turns);
  return out;
}

}  // namespace

int header_bits(const GridShape& dims) { return 3 + bits_for(dims.cols()) + bits_for(dims.rows()); }

std::vector<std::uint8_t> encode_header(const PacketHeader& h, const GridShape& dims) {
  std::vector<std::uint8_t> bits;
  bits.reserve(header_bits(dims));
  bits.push_back(static_cast<std::uint8_t>(h.kind));
  bits.push_back(static_cast<std::uint8_t>(h.technique));
  bits.push_back(static_cast<std::uint8_t>(h.mode));
  auto put = [&](int value, int width) {
    for (int i = width - 1; i >= 0; --i) bits.push_back(static_cast<std::uint8_t>((value >> i) & 1));
  };
  put(h.dest.col, bits_for(dims.cols()));
  put(h.dest.row, bits_for(dims.rows()));
  return bits;
}

PacketHeader decode_header(std::span<const std::uint8_t> bits, const GridShape& dims) {
  if (static_cast<int>(bits.size()) < header_bits(dims)) throw std::invalid_argument("header truncated");
  PacketHeader h;
  h.kind = static_cast<PacketKind>(bits[0]);
  h.technique = static_cast<Technique>(bits[1]);
  h.mode = static_cast<Mode>(bits[2]);
  std::size_t pos = 3;
  auto get = [&](int width) {
    int v = 0;
    for (int i = 0; i < width; ++i) v = (v << 1) | bits[pos++];
    return v;
  };
  h.dest.col = get(bits_for(dims.cols()));
  h.dest.row = get(bits_for(dims.rows()));
  return h;
}

LocalView make_view(const GridShape& dims, const FaultMap& faults, Coord here, std::optional<Direction> arrived_via) {
  LocalView v{here, arrived_via, {true, true}, dims};
  for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
    auto n = dims.next(here, a);
    v.out_healthy[static_cast<int>(a)] = n && !faults.is_failed(*n);
  }
  return v;
}

const char* to_string(DropCause c) {
  switch (c) {
    case DropCause::BothBlocked: return "both_blocked";
    case DropCause::LoopGuard: return "loop_guard";
    case DropCause::Unreachable: return "unreachable";
  }
  return "?";
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Xy: return "xy";
    case Algorithm::Dfxy: return "dfxy";
    case Algorithm::Lfa: return "lfa";
    case Algorithm::Rda: return "rda";
    case Algorithm::XyYxUnaided: return "xyyx";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(std::string_view name) {
  for (Algorithm a : {Algorithm::Xy, Algorithm::Dfxy, Algorithm::Lfa, Algorithm::Rda, Algorithm::XyYxUnaided})
    if (name == to_string(a)) return a;
  return std::nullopt;
}

RoutingDecision route(Algorithm a, const LocalView& view, const PacketHeader& h, const ForbiddenTurnSet* forbidden) {
  switch (a) {
    case Algorithm::Xy: return xy_route(view, h);
    case Algorithm::Dfxy: return dfxy_route(view, h);
    case Algorithm::Lfa: return lfa_route(view, h, forbidden);
    case Algorithm::Rda: return rda_route(view, h);
    case Algorithm::XyYxUnaided: return xyyx_unaided_route(view, h);
  }
  throw std::logic_error("unknown algorithm");
}

Router make_router(Algorithm a) {
  return [a](const LocalView& v, const PacketHeader& h, const ForbiddenTurnSet* f) { return route(a, v, h, f); };
}

RoutingDecision xy_route(const LocalView& view, const PacketHeader& h) {
  return follow_or_stall(view, h, FieldKind::ClassicXy);
}

RoutingDecision dfxy_route(const LocalView& view, const PacketHeader& h) {
  return follow_or_stall(view, h, FieldKind::Dfxy);
}

RoutingDecision lfa_route(const LocalView& view, const PacketHeader& h, const ForbiddenTurnSet* forbidden) {
  return lfa_core(view, h, forbidden, true);
}

RoutingDecision xyyx_unaided_route(const LocalView& view, const PacketHeader& h) {
  PacketHeader nh = h;
  nh.mode = Mode::Normal;
  return lfa_core(view, nh, nullptr, false);
}

LfaRestriction lfa_restriction_set(Coord fault, Coord dest, const GridShape& dims) {
  if (fault == dest) throw std::invalid_argument("fault and destination coincide");
  if (!dims.contains(fault) || !dims.contains(dest)) throw std::out_of_range("coordinate outside grid");
  using Key = std::tuple<int, int, Coord, Coord>;
  static std::shared_mutex mu;
  static std::map<Key, LfaRestriction> cache;
  Key key{dims.rows(), dims.cols(), fault, dest};
  {
    std::shared_lock lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  auto r = derive_restriction(fault, dest, dims);
  std::unique_lock lock(mu);
  return cache.try_emplace(key, std::move(r)).first->second;
}

RoutingDecision rda_route(const LocalView& view, const PacketHeader& h) {
  if (view.here == h.dest) return RoutingDecision::consume(h);
  bool ack = h.kind == PacketKind::Ack;
  bool alternate = h.technique == Technique::YX;
  FieldKind kind = alternate ? (ack ? FieldKind::RdaAlternateAck : FieldKind::RdaAlternateData)
                             : (ack ? FieldKind::RdaPrimaryAck : FieldKind::RdaPrimaryData);
  auto k = field(view.dims, h.dest, kind).at(view.here);
  if (!k) return RoutingDecision::drop(DropCause::Unreachable, h);
  if (view.healthy(*k)) return forward_on(view, *k, h);
  auto blocked = view.dims.next(view.here, *k);
  if (blocked && *blocked == h.dest) return RoutingDecision::drop(DropCause::Unreachable, h);
  if (alternate || !view.healthy(other(*k))) return RoutingDecision::drop(DropCause::BothBlocked, h);
  PacketHeader nh = h;
  nh.technique = Technique::YX;
  return forward_on(view, other(*k), nh);
}

RdaPaths rda_paths(Coord src, Coord dst, const GridShape& dims) {
  if (src == dst) throw std::invalid_argument("rda_paths needs distinct endpoints");
  const auto& primary = field(dims, dst, FieldKind::RdaPrimaryData);
  const auto& alternate = field(dims, dst, FieldKind::RdaAlternateData);
  auto entry = [&](const RouteField& f, const std::vector<Coord>& p) -> std::optional<Direction> {
    if (p.size() < 2) return std::nullopt;
    return dims.input_side(dst, *f.at(p[p.size() - 2]));
  };
  RdaPaths out;
  out.primary = primary.walk(src);
  out.primary_entry = entry(primary, out.primary);
  auto k = primary.at(src);
  if (!k) return out;
  auto w = dims.next(src, other(*k));
  out.alternate.push_back(src);
  if (!w) return out;
  if (*w == dst) {
    out.alternate.push_back(dst);
    out.alternate_entry = dims.input_side(dst, other(*k));
    return out;
  }
  auto rest = alternate.walk(*w);
  if (rest.empty()) return out;
  out.alternate.insert(out.alternate.end(), rest.begin(), rest.end());
  out.alternate_entry = entry(alternate, rest);
  return out;
}

PacketHeader make_ack_header(Coord delivered_to, const GridShape& dims) {
  if (!dims.contains(delivered_to)) throw std::out_of_range("coordinate outside grid: " + to_string(delivered_to));
  return {dims.gateway_ack_node(), PacketKind::Ack, Technique::XY, Mode::Normal};
}

}  // namespace hsfnet
