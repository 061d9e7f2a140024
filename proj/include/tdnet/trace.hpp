/*
 * Copyright (c) 2026, the tdnet authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TDNET_TRACE_HPP_
#define TDNET_TRACE_HPP_

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"
#include "tdnet/transducer.hpp"

namespace tdnet {

/// One emission or delivery. Emissions carry the resolved destination set;
/// deliveries are recorded at most once per (fact, src, dst) with the round
/// the fact entered the receiver's state. `seq` orders emissions within a
/// round by derivation stratum, which is what per-channel FIFO preserves.
struct TraceEvent {
  enum class Kind { Emit, Deliver };
  Kind kind = Kind::Emit;
  int round = 0;  // emission round / delivery round
  NodeId src = 0;
  NodeId dst = 0;           // deliveries only
  int emit_round = 0;       // deliveries only
  std::set<NodeId> dsts;    // emissions only
  Fact fact;
  int seq = 0;

  friend bool operator<(const TraceEvent& a, const TraceEvent& b) {
    auto key = [](const TraceEvent& e) {
      return std::tuple(e.round, static_cast<int>(e.kind), e.src, e.dst, e.fact, e.seq);
    };
    return key(a) < key(b);
  }
};

struct InFlightMsg {
  Fact fact;
  NodeId src = 0, dst = 0;
  int emit_round = 0, due_round = 0;
  int seq = 0;

  friend bool operator<(const InFlightMsg& a, const InFlightMsg& b) {
    return std::tuple(a.due_round, a.emit_round, a.src, a.dst, a.fact, a.seq) <
           std::tuple(b.due_round, b.emit_round, b.src, b.dst, b.fact, b.seq);
  }
};

struct RoundSnapshot {
  int round = 0;
  std::map<NodeId, LocalState> nodes;
  std::map<NodeId, Instance> received;  // cumulative delivered store
  std::map<NodeId, Instance> emitted;
  std::map<NodeId, bool> derived_local;
  LocalState env;
  bool changed = false;
};

/// A complete run: per-round global snapshots, the event log, the quiescence
/// verdict, and whatever was still in flight when the run stopped.
struct Trace {
  std::string spec_name;
  std::set<NodeId> nodes;
  std::set<NodeId> active;
  int t0 = 0;
  std::string semantics;  // "rsfd" | "rsbv" | "rsync"
  int delay_bound = 0;    // var / max_delay
  bool fifo = false;
  std::string comm;  // "hashing" | "broadcast" | "comm_free"
  std::uint64_t seed = 0;

  std::vector<RelationDecl> db_schema, out_schema, emt_schema;

  std::vector<RoundSnapshot> rounds;
  std::vector<TraceEvent> events;
  std::vector<InFlightMsg> undelivered;  // pending past the final round

  std::optional<int> quiescence;  // nullopt encodes the bottom verdict
  Instance out_star;              // meaningful only when quiescence holds

  bool quiesced() const { return quiescence.has_value(); }
  int last_round() const { return rounds.empty() ? t0 - 1 : rounds.back().round; }
};

}  // namespace tdnet

#endif  // TDNET_TRACE_HPP_
