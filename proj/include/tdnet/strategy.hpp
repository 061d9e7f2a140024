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

#ifndef TDNET_STRATEGY_HPP_
#define TDNET_STRATEGY_HPP_

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"
#include "tdnet/rng.hpp"
#include "tdnet/trace.hpp"

namespace tdnet {

struct StrategyError : std::runtime_error {
  explicit StrategyError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A family of unary hash functions dom -> N. Seeded families are the
/// ordinary case; pinned and constant families build the degenerate and
/// adversarial strategies the analyses need.
struct HashFamily {
  enum class Mode { Seeded, Pinned, Constant };
  Mode mode = Mode::Seeded;
  std::uint64_t seed = 0;                  // Seeded
  std::map<std::string, NodeId> pins;      // Pinned, keyed by Constant::bytes()
  std::set<NodeId> active;                 // the codomain of the family

  static HashFamily seeded(std::uint64_t seed, std::set<NodeId> active) {
    HashFamily f;
    f.mode = Mode::Seeded;
    f.seed = seed;
    f.active = std::move(active);
    return f;
  }
  static HashFamily pinned(const std::map<Constant, NodeId>& pins, std::set<NodeId> active = {}) {
    HashFamily f;
    f.mode = Mode::Pinned;
    for (const auto& [c, n] : pins) {
      f.pins[c.bytes()] = n;
      f.active.insert(n);
    }
    if (!active.empty()) f.active = std::move(active);
    return f;
  }
  static HashFamily constant(NodeId n) {
    HashFamily f;
    f.mode = Mode::Constant;
    f.active = {n};
    return f;
  }

  bool partitioned(const std::set<NodeId>& nodes) const {
    for (NodeId n : nodes)
      if (!active.count(n)) return true;
    return false;
  }

  NodeId apply(const Constant& c) const {
    if (active.empty()) throw StrategyError("hash family has an empty active set");
    switch (mode) {
      case Mode::Constant:
        return *active.begin();
      case Mode::Pinned: {
        auto it = pins.find(c.bytes());
        if (it != pins.end()) return it->second;
        return *active.begin();  // unpinned constants land on the first active node
      }
      case Mode::Seeded: {
        std::uint64_t h = hash_bytes(seed, c.bytes());
        std::size_t idx = static_cast<std::size_t>(h % active.size());
        auto it = active.begin();
        std::advance(it, idx);
        return *it;
      }
    }
    throw StrategyError("unreachable");
  }
};

using KeySet = std::map<std::string, Key>;

inline KeySet key_set_of(const TransducerSpec& spec) {
  KeySet ks;
  for (const auto& d : spec.schema.emt) ks[d.name] = d.key;
  return ks;
}

/// The distributed hash mapping: a fact with finite key k goes to the hash
/// images of its first k terms; an unbounded key addresses every node the
/// family can reach.
inline std::set<NodeId> hash_address(const Fact& f, const KeySet& keys, const HashFamily& family) {
  auto it = keys.find(f.relation);
  if (it == keys.end() || it->second.is_absent())
    throw StrategyError("no key declared for relation " + f.relation);
  if (it->second.is_inf()) return family.active;
  std::set<NodeId> out;
  int k = it->second.k;
  for (int i = 0; i < k && i < static_cast<int>(f.tuple.size()); ++i)
    out.insert(family.apply(f.tuple[i]));
  return out;
}

enum class CommunicationKind { Broadcast, CommFree, Hashing };

inline const char* to_string(CommunicationKind k) {
  switch (k) {
    case CommunicationKind::Broadcast: return "broadcast";
    case CommunicationKind::CommFree: return "comm_free";
    case CommunicationKind::Hashing: return "hashing";
  }
  return "";
}

/// Destinations of one emitted fact under a communication function.
inline std::set<NodeId> route_fact(const Fact& f, NodeId src, CommunicationKind kind,
                                   const KeySet& keys, const HashFamily& family,
                                   const std::set<NodeId>& nodes) {
  switch (kind) {
    case CommunicationKind::Broadcast:
      return nodes;
    case CommunicationKind::CommFree:
      return {src};
    case CommunicationKind::Hashing:
      return hash_address(f, keys, family);
  }
  return {};
}

/// One-shot delivery mapping (the fixed-delivery picture): every node's inbox
/// from a round of emissions.
inline std::map<NodeId, Instance> deliver_set(const std::map<NodeId, Instance>& emissions,
                                              CommunicationKind kind, const KeySet& keys,
                                              const HashFamily& family,
                                              const std::set<NodeId>& nodes) {
  std::map<NodeId, Instance> inboxes;
  for (NodeId n : nodes) inboxes[n];
  for (const auto& [src, inst] : emissions) {
    for (const auto& f : inst.facts()) {
      for (NodeId dst : route_fact(f, src, kind, keys, family, nodes)) inboxes[dst].insert(f);
    }
  }
  return inboxes;
}

/// How the initial instance is split over the nodes. Union over all nodes
/// always reproduces the input; replication is allowed.
struct PartitionFunction {
  enum class Mode { ReplicateAll, SingleNode, HashSplit, Explicit };
  Mode mode = Mode::ReplicateAll;
  NodeId node = 0;                       // SingleNode
  std::uint64_t seed = 0;                // HashSplit
  std::map<NodeId, Instance> explicit_map;

  static PartitionFunction replicate_all() { return PartitionFunction{}; }
  static PartitionFunction single_node(NodeId n) {
    PartitionFunction p;
    p.mode = Mode::SingleNode;
    p.node = n;
    return p;
  }
  static PartitionFunction hash_split(std::uint64_t seed) {
    PartitionFunction p;
    p.mode = Mode::HashSplit;
    p.seed = seed;
    return p;
  }
  static PartitionFunction explicit_parts(std::map<NodeId, Instance> parts) {
    PartitionFunction p;
    p.mode = Mode::Explicit;
    p.explicit_map = std::move(parts);
    return p;
  }

  Instance apply(const Instance& input, NodeId i, const std::set<NodeId>& nodes) const {
    switch (mode) {
      case Mode::ReplicateAll:
        return input;
      case Mode::SingleNode:
        return i == node ? input : Instance{};
      case Mode::HashSplit: {
        Instance out;
        std::vector<NodeId> order(nodes.begin(), nodes.end());
        for (const auto& f : input.facts()) {
          std::uint64_t h = hash_bytes(seed, f.relation);
          for (const auto& c : f.tuple) h = hash_mix(h, hash_bytes(seed, c.bytes()));
          if (order[h % order.size()] == i) out.insert(f);
        }
        return out;
      }
      case Mode::Explicit: {
        auto it = explicit_map.find(i);
        return it == explicit_map.end() ? Instance{} : it->second;
      }
    }
    return {};
  }

  /// Union preservation and node coverage; throws on an ill-formed explicit
  /// map.
  void validate(const Instance& input, const std::set<NodeId>& nodes) const {
    if (mode == Mode::SingleNode && !nodes.count(node))
      throw StrategyError("partition assigns facts to unknown node " + std::to_string(node));
    if (mode != Mode::Explicit) return;
    Instance covered;
    for (const auto& [n, inst] : explicit_map) {
      if (!nodes.count(n))
        throw StrategyError("partition assigns facts to unknown node " + std::to_string(n));
      covered.merge(inst);
    }
    if (!(covered == input))
      throw StrategyError("explicit partition does not cover the initial instance exactly");
  }
};

/// True iff every emission in the trace was addressed exactly to its
/// emitting node.
inline bool is_communication_free_run(const Trace& trace) {
  for (const auto& e : trace.events) {
    if (e.kind != TraceEvent::Kind::Emit) continue;
    if (e.dsts != std::set<NodeId>{e.src}) return false;
  }
  return true;
}

}  // namespace tdnet

#endif  // TDNET_STRATEGY_HPP_
