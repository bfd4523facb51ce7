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

// Next-hop tables backing the routing functions. Private to the library.

#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <vector>

#include "hsfnet/topology.hpp"

namespace hsfnet::detail {

enum class FieldKind : std::uint8_t {
  ClassicXy,
  Dfxy,
  DfxyPlain,
  Yx,
  LfaDetour,
  RdaPrimaryData,
  RdaPrimaryAck,
  RdaAlternateData,
  RdaAlternateAck,
};

struct FieldKey {
  int rows = 0;
  int cols = 0;
  Coord dest;
  FieldKind kind = FieldKind::ClassicXy;
  Coord fault{-1, -1};  // LfaDetour only
  auto operator<=>(const FieldKey&) const = default;
};

/// Next-hop axis per node index; -1 where the destination cannot be reached (or at the destination).
struct RouteField {
  GridShape shape;
  Coord dest;
  std::vector<std::int8_t> next;

  std::optional<Axis> at(Coord c) const {
    auto v = next[shape.index(c)];
    if (v < 0) return std::nullopt;
    return static_cast<Axis>(v);
  }
  bool covers(Coord c) const { return c == dest || next[shape.index(c)] >= 0; }

  /// Coordinates visited from `src` to the destination; empty if the walk does not arrive.
  std::vector<Coord> walk(Coord src) const;
};

/// Cached, thread-safe. References remain valid for the lifetime of the process.
const RouteField& route_field(const FieldKey& key);

}  // namespace hsfnet::detail
