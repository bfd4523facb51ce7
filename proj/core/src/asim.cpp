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

#include "hsfnet/asim.hpp"

#include <algorithm>
#include <ostream>
#include <queue>

#include <fmt/format.h>

#include "hsfnet/parallel.hpp"

namespace hsfnet {

const char* to_string(Wire w) {
  switch (w) {
    case Wire::Data: return "data";
    case Wire::Req: return "req";
    case Wire::BitAck: return "bit_ack";
    case Wire::Retry: return "retry";
  }
  return "?";
}

const char* to_string(Transition t) {
  switch (t) {
    case Transition::Rise: return "rise";
    case Transition::Fall: return "fall";
    case Transition::Zero: return "0";
    case Transition::One: return "1";
  }
  return "?";
}

const char* to_string(StallPolicy p) { return p == StallPolicy::Drop ? "drop" : "stall"; }

std::optional<StallPolicy> parse_policy(std::string_view s) {
  if (s == "drop") return StallPolicy::Drop;
  if (s == "stall") return StallPolicy::Stall;
  return std::nullopt;
}

const char* to_string(Phase p) {
  switch (p) {
    case Phase::Idle: return "idle";
    case Phase::Receiving: return "receiving";
    case Phase::Holding: return "holding";
    case Phase::Deciding: return "deciding";
    case Phase::Transmitting: return "transmitting";
  }
  return "?";
}

const char* to_string(PacketFate f) {
  switch (f) {
    case PacketFate::InFlight: return "in_flight";
    case PacketFate::Consumed: return "consumed";
    case PacketFate::Dropped: return "dropped";
    case PacketFate::StallDropped: return "stall_dropped";
    case PacketFate::TimedOut: return "timed_out";
  }
  return "?";
}

bool event_before(const SimEvent& a, const SimEvent& b) {
  if (a.time != b.time) return a.time < b.time;
  if (a.node != b.node) return a.node < b.node;
  if (a.wire != b.wire) return a.wire < b.wire;
  if (a.side != b.side) return a.side < b.side;
  return a.seq < b.seq;
}

Coord ingress_gateway_coord() { return {-1, 0}; }
Coord ack_gateway_coord(const GridShape& dims) { return {dims.cols(), 0}; }

namespace {

SimEvent make_event(std::int64_t t, PortRef at, Wire w, Transition tr) {
  SimEvent e;
  e.time = t;
  e.node = at.node;
  e.side = at.side;
  e.wire = w;
  e.transition = tr;
  return e;
}

// Far end of output `a` of `c`.
PortRef receiver_of(const GridShape& s, Coord c, Axis a) {
  if (auto n = s.next(c, a)) return {*n, s.input_side(*n, a)};
  return {ack_gateway_coord(s), opposite(s.output_side(c, a))};
}

// Near end of the channel feeding input side `side` of `c`.
PortRef sender_of(const GridShape& s, Coord c, Direction side) {
  Axis a = s.input_side(c, Axis::Horizontal) == side ? Axis::Horizontal : Axis::Vertical;
  if (auto p = s.prev(c, a)) return {*p, s.output_side(*p, a)};
  return {ingress_gateway_coord(), opposite(side)};
}

Axis output_axis(const GridShape& s, Coord c, Direction side) {
  if (s.output_side(c, Axis::Horizontal) == side) return Axis::Horizontal;
  if (s.output_side(c, Axis::Vertical) == side) return Axis::Vertical;
  throw ProtocolError(fmt::format("{} has no output on side {}", to_string(c), to_string(side)));
}

bool is_input_side(const GridShape& s, Coord c, Direction side) {
  return s.input_side(c, Axis::Horizontal) == side || s.input_side(c, Axis::Vertical) == side;
}

Transition bit_transition(std::uint8_t b) { return b ? Transition::One : Transition::Zero; }

void emit_bit(const NodeState& st, std::int64_t t, const NodeContext& ctx, StepResult& out) {
  const auto& s = *ctx.dims;
  PortRef to = receiver_of(s, st.at, output_axis(s, st.at, *st.tx_side));
  out.emitted.push_back(make_event(t, to, Wire::Data, bit_transition(st.tx_bits[st.tx_sent])));
  auto req = make_event(t + ctx.delays.req_rise, to, Wire::Req, Transition::Rise);
  if (st.tx_sent == 0) req.sideband = st.tx_restrictions;
  out.emitted.push_back(std::move(req));
}

void accept_bit(NodeState& st, Direction side, std::int64_t t, const NodeContext& ctx, StepResult& out) {
  st.rx_bits.push_back(st.data_in[static_cast<int>(side)]);
  out.emitted.push_back(
      make_event(t + ctx.delays.ack_rise, sender_of(*ctx.dims, st.at, side), Wire::BitAck, Transition::Rise));
}

void start_receiving(NodeState& st, Direction side) {
  st.phase = Phase::Receiving;
  st.rx_side = side;
  st.rx_bits.clear();
  st.rx_restrictions = st.sideband_in[static_cast<int>(side)];
}

void go_idle(NodeState& st, std::int64_t t, const NodeContext& ctx, StepResult& out) {
  st.phase = Phase::Idle;
  st.rx_side.reset();
  st.rx_bits.clear();
  st.rx_restrictions.reset();
  st.tx_side.reset();
  st.tx_bits.clear();
  st.tx_sent = 0;
  st.tx_restrictions.reset();
  if (st.pending.empty()) return;
  // A req that rose while busy is still high; serve the oldest one now.
  Direction side = st.pending.front();
  st.pending.erase(st.pending.begin());
  start_receiving(st, side);
  accept_bit(st, side, t, ctx, out);
}

void start_tx(NodeState& st, Direction side, std::vector<std::uint8_t> bits,
              std::shared_ptr<const ForbiddenTurnSet> restrictions, std::int64_t t, const NodeContext& ctx,
              StepResult& out) {
  st.phase = Phase::Transmitting;
  st.rx_side.reset();
  st.rx_bits.clear();
  st.rx_restrictions.reset();
  st.tx_side = side;
  st.tx_bits = std::move(bits);
  st.tx_sent = 0;
  st.tx_restrictions = std::move(restrictions);
  emit_bit(st, t, ctx, out);
}

std::vector<std::uint8_t> with_header(const PacketHeader& h, const std::vector<std::uint8_t>& packet,
                                      const GridShape& s) {
  auto bits = encode_header(h, s);
  bits.insert(bits.end(), packet.begin() + static_cast<std::ptrdiff_t>(bits.size()), packet.end());
  return bits;
}

// Holding -> Deciding -> {Transmitting, Idle, Holding}. Transmission starts at `t`.
void decide(NodeState& st, std::int64_t t, const NodeContext& ctx, StepResult& out) {
  const auto& s = *ctx.dims;
  const int hb = header_bits(s);
  st.phase = Phase::Deciding;
  PacketHeader h = decode_header(std::span(st.rx_bits).first(hb), s);
  auto d = (*ctx.router)(make_view(s, *ctx.faults, st.at, st.rx_side), h, st.rx_restrictions.get());
  using A = RoutingDecision::Action;
  switch (d.action) {
    case A::Forward: {
      Axis a = axis_of(d.direction);
      if (s.output_side(st.at, a) != d.direction) throw ProtocolError("router chose a side that is not an output");
      auto n = s.next(st.at, a);
      if (!n || ctx.faults->is_failed(*n)) throw ProtocolError("router forwarded onto a blocked output");
      auto restrictions = d.restrictions ? d.restrictions : st.rx_restrictions;
      out.notices.push_back({StepNotice::Kind::Forwarded, h.kind, {}, t});
      start_tx(st, d.direction, with_header(d.header, st.rx_bits, s), std::move(restrictions), t, ctx, out);
      return;
    }
    case A::Consume: {
      if (h.kind == PacketKind::Data) {
        out.notices.push_back({StepNotice::Kind::Consumed, PacketKind::Data, {}, t});
        std::vector<std::uint8_t> ack(st.rx_bits.size(), 0);
        auto hdr = encode_header(make_ack_header(st.at, s), s);
        std::copy(hdr.begin(), hdr.end(), ack.begin());
        st.rx_bits = std::move(ack);
        st.rx_side.reset();
        st.rx_restrictions.reset();
        decide(st, t, ctx, out);
        return;
      }
      // ACKs are consumed by the attach node and handed to the ACK gateway.
      for (Axis a : {Axis::Horizontal, Axis::Vertical}) {
        if (!s.next(st.at, a)) {
          start_tx(st, s.output_side(st.at, a), st.rx_bits, nullptr, t, ctx, out);
          return;
        }
      }
      throw ProtocolError("ACK consumed away from the ACK gateway attach node");
    }
    case A::Drop:
      out.notices.push_back({StepNotice::Kind::Dropped, h.kind, d.cause, t});
      go_idle(st, t, ctx, out);
      return;
    case A::Stall:
      if (ctx.policy == StallPolicy::Drop) {
        out.notices.push_back({StepNotice::Kind::StallDropped, h.kind, {}, t});
        go_idle(st, t, ctx, out);
        return;
      }
      st.phase = Phase::Holding;
      out.notices.push_back({StepNotice::Kind::Stalled, h.kind, {}, t});
      out.emitted.push_back(make_event(t + ctx.retry_period, {st.at, Direction::North}, Wire::Retry, Transition::Rise));
      return;
  }
}

}  // namespace

std::vector<SimEvent> handshake_transfer_bit(PortRef sender, PortRef receiver, std::uint8_t bit, std::int64_t start,
                                             const HandshakeDelays& delays) {
  std::vector<SimEvent> ev;
  std::int64_t t = start;
  ev.push_back(make_event(t, receiver, Wire::Data, bit_transition(bit)));
  ev.push_back(make_event(t += delays.req_rise, receiver, Wire::Req, Transition::Rise));
  ev.push_back(make_event(t += delays.ack_rise, sender, Wire::BitAck, Transition::Rise));
  ev.push_back(make_event(t += delays.req_fall, receiver, Wire::Req, Transition::Fall));
  ev.push_back(make_event(t += delays.ack_fall, sender, Wire::BitAck, Transition::Fall));
  return ev;
}

std::vector<SimEvent> handshake_transfer(PortRef sender, PortRef receiver, const std::vector<std::uint8_t>& bits,
                                         std::int64_t start, const HandshakeDelays& delays) {
  std::vector<SimEvent> ev;
  for (auto b : bits) {
    auto one = handshake_transfer_bit(sender, receiver, b, start, delays);
    start = one.back().time;
    ev.insert(ev.end(), one.begin(), one.end());
  }
  return ev;
}

void node_step(NodeState& st, const SimEvent& ev, const NodeContext& ctx, StepResult& out) {
  out.emitted.clear();
  out.notices.clear();
  const auto& s = *ctx.dims;
  const std::int64_t t = ev.time;
  const int side_ix = static_cast<int>(ev.side);
  switch (ev.wire) {
    case Wire::Data:
      st.data_in[side_ix] = ev.transition == Transition::One ? 1 : 0;
      return;
    case Wire::Req:
      if (!is_input_side(s, st.at, ev.side)) throw ProtocolError("req on a side that is not an input");
      if (ev.transition == Transition::Rise) {
        const bool continuing = st.phase == Phase::Receiving && st.rx_side == ev.side;
        if (!continuing) st.sideband_in[side_ix] = ev.sideband;
        if (st.phase == Phase::Idle) {
          start_receiving(st, ev.side);
        } else if (!continuing) {
          st.pending.push_back(ev.side);
          return;
        }
        if (st.rx_bits.size() >= ctx.packet_bits) throw ProtocolError("req rise beyond the packet length");
        accept_bit(st, ev.side, t, ctx, out);
        return;
      }
      if (st.phase != Phase::Receiving || st.rx_side != ev.side) {
        // A pending sender's req cannot fall before it was acknowledged.
        throw ProtocolError(fmt::format("req fall without a matching rise at {}", to_string(st.at)));
      }
      out.emitted.push_back(
          make_event(t + ctx.delays.ack_fall, sender_of(s, st.at, ev.side), Wire::BitAck, Transition::Fall));
      if (st.rx_bits.size() == ctx.packet_bits) {
        st.phase = Phase::Holding;
        decide(st, t + ctx.delays.ack_fall, ctx, out);
      }
      return;
    case Wire::BitAck:
      if (st.phase != Phase::Transmitting || st.tx_side != ev.side) {
        throw ProtocolError(fmt::format("bit_ack without req at {}", to_string(st.at)));
      }
      if (ev.transition == Transition::Rise) {
        PortRef to = receiver_of(s, st.at, output_axis(s, st.at, ev.side));
        out.emitted.push_back(make_event(t + ctx.delays.req_fall, to, Wire::Req, Transition::Fall));
        return;
      }
      if (++st.tx_sent < st.tx_bits.size()) {
        emit_bit(st, t, ctx, out);
      } else {
        go_idle(st, t, ctx, out);
      }
      return;
    case Wire::Retry:
      if (st.phase == Phase::Holding) decide(st, t, ctx, out);
      return;
  }
}

StepResult node_step(NodeState& state, const SimEvent& ev, const NodeContext& ctx) {
  StepResult out;
  node_step(state, ev, ctx, out);
  return out;
}

std::string format_event(const SimEvent& ev, const GridShape& dims) {
  std::string who;
  if (ev.node == ingress_gateway_coord()) {
    who = "GWin";
  } else if (ev.node == ack_gateway_coord(dims)) {
    who = "GWack";
  } else {
    who = to_string(ev.node);
  }
  return fmt::format("{}\t{}\t{}:{}\t{}", ev.time, who, to_string(ev.wire), to_string(ev.side)[0],
                     to_string(ev.transition));
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct EventAfter {
  bool operator()(const SimEvent& a, const SimEvent& b) const { return event_before(b, a); }
};

class Engine {
 public:
  Engine(const GridTopology& topo, const FaultMap& faults, const Router& router, const SimConfig& cfg,
         std::uint64_t seed)
      : s_(topo.shape()), cfg_(cfg), nodes_(s_.size()), delays_(s_.size(), cfg.delays) {
    ctx_.dims = &s_;
    ctx_.faults = &faults;
    ctx_.router = &router;
    ctx_.packet_bits = static_cast<std::size_t>(header_bits(s_) + cfg.payload_bits);
    ctx_.policy = cfg.policy;
    ctx_.retry_period = cfg.retry_period;
    for (int i = 0; i < s_.size(); ++i) {
      nodes_[i].at = s_.coord(i);
      if (cfg.jitter > 0) {
        int extra = static_cast<int>(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(i) + 1)) %
                                     static_cast<std::uint64_t>(cfg.jitter + 1));
        auto& d = delays_[i];
        d.req_rise += extra;
        d.ack_rise += extra;
        d.req_fall += extra;
        d.ack_fall += extra;
      }
    }
  }

  TrialResult run(Coord dst) {
    // Ingress gateway: a clocked sender with no routing logic.
    gw_bits_ = encode_header(PacketHeader{dst, PacketKind::Data, Technique::XY, Mode::Normal}, s_);
    gw_bits_.resize(ctx_.packet_bits, 0);
    gw_to_ = {s_.gateway_in_node(), s_.input_side(s_.gateway_in_node(), Axis::Vertical)};
    gw_send(0);

    while (!queue_.empty()) {
      SimEvent ev = queue_.top();
      queue_.pop();
      if (ev.time > cfg_.time_bound) {
        timed_out_ = true;
        break;
      }
      ++r_.events;
      r_.end_time = ev.time;
      if (cfg_.event_log) *cfg_.event_log << format_event(ev, s_) << '\n';
      dispatch(ev);
    }
    auto settle = [&](PacketFate& f) {
      if (f != PacketFate::InFlight) return;
      if (!timed_out_) throw std::logic_error("packet vanished without a recorded fate");
      f = PacketFate::TimedOut;
    };
    settle(r_.data_fate);
    if (r_.delivered) settle(r_.ack_fate);
    return r_;
  }

 private:
  void push(SimEvent e) {
    e.seq = seq_++;
    queue_.push(std::move(e));
  }

  void gw_send(std::int64_t t) {
    queue_batch(handshake_transfer_bit({ingress_gateway_coord(), opposite(gw_to_.side)}, gw_to_, gw_bits_[gw_sent_], t,
                                       cfg_.delays),
                2);
  }

  // Only the first `n` events of a canonical bit sequence are driven by the sender itself.
  void queue_batch(std::vector<SimEvent> ev, std::size_t n) {
    for (std::size_t i = 0; i < n && i < ev.size(); ++i) push(std::move(ev[i]));
  }

  void dispatch(const SimEvent& ev) {
    if (ev.node == ingress_gateway_coord()) {
      if (ev.wire != Wire::BitAck) throw ProtocolError("ingress gateway only observes bit_ack");
      if (ev.transition == Transition::Rise) {
        push(make_event(ev.time + cfg_.delays.req_fall, gw_to_, Wire::Req, Transition::Fall));
      } else if (++gw_sent_ < gw_bits_.size()) {
        gw_send(ev.time);
      }
      return;
    }
    if (ev.node == ack_gateway_coord(s_)) {
      ack_gateway(ev);
      return;
    }
    const int idx = s_.index(ev.node);
    auto& st = nodes_[idx];
    const Phase before = st.phase;
    const auto locked = st.rx_side;
    ctx_.delays = delays_[idx];
    node_step(st, ev, ctx_, step_);
    for (auto& e : step_.emitted) push(std::move(e));
    for (const auto& n : step_.notices) record(n);
    if (cfg_.check_invariants) check(st, before, locked);
  }

  void ack_gateway(const SimEvent& ev) {
    PortRef from = {s_.gateway_ack_node(), opposite(ev.side)};
    if (ev.wire == Wire::Data) {
      gw_ack_data_ = ev.transition == Transition::One ? 1 : 0;
    } else if (ev.wire == Wire::Req && ev.transition == Transition::Rise) {
      gw_ack_bits_.push_back(gw_ack_data_);
      push(make_event(ev.time + cfg_.delays.ack_rise, from, Wire::BitAck, Transition::Rise));
    } else if (ev.wire == Wire::Req) {
      push(make_event(ev.time + cfg_.delays.ack_fall, from, Wire::BitAck, Transition::Fall));
      if (gw_ack_bits_.size() == ctx_.packet_bits) {
        auto h = decode_header(std::span(gw_ack_bits_).first(header_bits(s_)), s_);
        if (h.kind != PacketKind::Ack) throw ProtocolError("data packet reached the ACK gateway");
        r_.ack_received = true;
        r_.ack_fate = PacketFate::Consumed;
        gw_ack_bits_.clear();
      }
    } else {
      throw ProtocolError("ACK gateway observed an unexpected wire");
    }
  }

  void record(const StepNotice& n) {
    using K = StepNotice::Kind;
    const bool data = n.packet == PacketKind::Data;
    PacketFate& fate = data ? r_.data_fate : r_.ack_fate;
    switch (n.kind) {
      case K::None:
      case K::Stalled: break;
      case K::Forwarded:
        if (data) ++r_.hops;
        break;
      case K::Consumed:
        r_.delivered = true;
        r_.latency = n.time;
        fate = PacketFate::Consumed;
        break;
      case K::Dropped:
        fate = PacketFate::Dropped;
        (data ? r_.drop_cause : r_.ack_drop_cause) = n.cause;
        break;
      case K::StallDropped: fate = PacketFate::StallDropped; break;
    }
  }

  void check(const NodeState& st, Phase before, std::optional<Direction> locked) const {
    auto fail = [&](const char* what) {
      throw std::logic_error(fmt::format("invariant violated at {}: {}", to_string(st.at), what));
    };
    if (st.phase == Phase::Receiving) {
      if (!st.rx_side || !is_input_side(s_, st.at, *st.rx_side)) fail("receiving without a locked input");
      if (st.tx_side) fail("receiving while transmitting");
      if (before == Phase::Receiving && locked != st.rx_side) fail("locked input changed mid-packet");
      if (std::find(st.pending.begin(), st.pending.end(), *st.rx_side) != st.pending.end()) {
        fail("locked input also pending");
      }
    }
    if (st.phase == Phase::Transmitting) {
      if (!st.tx_side) fail("transmitting without a locked output");
      if (st.rx_side) fail("transmitting while receiving");
      if (st.tx_sent >= st.tx_bits.size()) fail("transmit cursor past the packet");
    }
    if (st.rx_bits.size() > ctx_.packet_bits) fail("buffer holds more than one packet");
  }

  GridShape s_;
  SimConfig cfg_;
  NodeContext ctx_;
  std::vector<NodeState> nodes_;
  std::vector<HandshakeDelays> delays_;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventAfter> queue_;
  std::uint64_t seq_ = 0;
  StepResult step_;
  std::vector<std::uint8_t> gw_bits_;
  std::size_t gw_sent_ = 0;
  PortRef gw_to_;
  std::vector<std::uint8_t> gw_ack_bits_;
  std::uint8_t gw_ack_data_ = 0;
  bool timed_out_ = false;
  TrialResult r_;
};

}  // namespace

TrialResult run_trial(const GridTopology& topo, const FaultMap& faults, const Router& router, Coord dst,
                      const SimConfig& cfg, std::uint64_t seed) {
  const auto& s = topo.shape();
  if (!s.contains(dst)) throw std::invalid_argument("destination outside grid: " + to_string(dst));
  if (faults.is_failed(s.gateway_in_node()) || faults.is_failed(s.gateway_ack_node())) {
    throw std::invalid_argument("gateway attach node is failed");
  }
  if (cfg.payload_bits < 0) throw std::invalid_argument("payload_bits must be non-negative");
  return Engine(topo, faults, router, cfg, seed).run(dst);
}

TrialResult run_trial(const GridTopology& topo, const FaultMap& faults, Algorithm algo, Coord dst,
                      const SimConfig& cfg, std::uint64_t seed) {
  return run_trial(topo, faults, make_router(algo), dst, cfg, seed);
}

std::vector<TrialResult> run_trial_batch(const GridTopology& topo, Algorithm algo, Coord dst, double p_f, int trials,
                                         std::uint64_t base_seed, const SimConfig& cfg, unsigned threads) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  std::vector<TrialResult> out(static_cast<std::size_t>(trials));
  const Router router = make_router(algo);
  parallel_for(out.size(), threads, [&](std::size_t i) {
    const std::uint64_t seed = trial_seed(base_seed, i);
    out[i] = run_trial(topo, inject_faults(topo, p_f, seed), router, dst, cfg, seed);
  });
  return out;
}

}  // namespace hsfnet
