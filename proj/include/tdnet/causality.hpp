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

#ifndef TDNET_CAUSALITY_HPP_
#define TDNET_CAUSALITY_HPP_

#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/network.hpp"
#include "tdnet/trace.hpp"

namespace tdnet {

// Generated-name prefixes shared with the rewriter: NULL marker relations
// are recognized by name when building indirect edges.
inline constexpr const char* kNullMarkerPrefix = "zznull_";

struct Point {
  NodeId node = 0;
  int round = 0;

  friend bool operator<(const Point& a, const Point& b) {
    return std::tie(a.round, a.node) < std::tie(b.round, b.node);
  }
  friend bool operator==(const Point& a, const Point& b) {
    return a.node == b.node && a.round == b.round;
  }
  std::string to_string() const {
    return "(" + std::to_string(node) + "," + std::to_string(round) + ")";
  }
};

struct CausalEdge {
  enum class Kind { DirectLocal, DirectMessage, IndirectNull };
  Kind kind = Kind::DirectLocal;
  Point from, to;
  std::string relation;  // emit relation; empty on local successor edges

  friend bool operator<(const CausalEdge& a, const CausalEdge& b) {
    return std::tie(a.from, a.to, a.kind, a.relation) <
           std::tie(b.from, b.to, b.kind, b.relation);
  }
};

class SyncausalityGraph {
 public:
  void add_edge(CausalEdge e) {
    int idx = static_cast<int>(edges_.size());
    points_.insert(e.from);
    points_.insert(e.to);
    out_[e.from].push_back(idx);
    edges_.push_back(std::move(e));
  }

  const std::vector<CausalEdge>& edges() const { return edges_; }
  const std::set<Point>& points() const { return points_; }

  const std::vector<int>& out_edges(const Point& p) const {
    static const std::vector<int> kEmpty;
    auto it = out_.find(p);
    return it == out_.end() ? kEmpty : it->second;
  }

  /// Transitive syncausal reachability.
  bool reachable(const Point& a, const Point& b) const {
    if (a == b) return true;
    std::set<Point> seen{a};
    std::queue<Point> q;
    q.push(a);
    while (!q.empty()) {
      Point p = q.front();
      q.pop();
      for (int idx : out_edges(p)) {
        const Point& n = edges_[idx].to;
        if (n == b) return true;
        if (seen.insert(n).second) q.push(n);
      }
    }
    return false;
  }

  /// All points reachable through paths whose first edge leaves `from` with
  /// the given label, visiting only rounds <= horizon.
  std::set<Point> reach_with_first_label(const Point& from, const std::string& relation,
                                         int horizon) const {
    std::set<Point> seen;
    std::queue<Point> q;
    for (int idx : out_edges(from)) {
      const CausalEdge& e = edges_[idx];
      if (e.relation != relation) continue;
      if (e.to.round > horizon) continue;
      if (seen.insert(e.to).second) q.push(e.to);
    }
    while (!q.empty()) {
      Point p = q.front();
      q.pop();
      for (int idx : out_edges(p)) {
        const Point& n = edges_[idx].to;
        if (n.round > horizon) continue;
        if (seen.insert(n).second) q.push(n);
      }
    }
    return seen;
  }

 private:
  std::vector<CausalEdge> edges_;
  std::set<Point> points_;
  std::map<Point, std::vector<int>> out_;
};

namespace detail {

/// Emit relations whose content feeds, directly or transitively, a negated
/// or COUNT/SUM-aggregated literal of the spec. Under fixed delivery these
/// are the relations whose per-round sealing carries information.
inline std::set<std::string> negation_relevant_emits(const TransducerSpec& spec) {
  std::set<std::string> sealed_reads;
  for (const auto& r : spec.rules) {
    bool strat_agg = r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum;
    for (const auto& l : r.body) {
      if (!l.is_atom()) continue;
      if (l.kind == Literal::Kind::Negative || strat_agg) sealed_reads.insert(l.atom.relation);
    }
  }
  // backward closure over the rule dependency graph (body -> head)
  std::set<std::string> closure = sealed_reads;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& r : spec.rules) {
      if (!closure.count(r.head.relation)) continue;
      for (const auto& l : r.body) {
        if (!l.is_atom()) continue;
        if (closure.insert(l.atom.relation).second) grew = true;
      }
    }
  }
  std::set<std::string> out;
  for (const auto& d : spec.schema.emt)
    if (closure.count(d.name)) out.insert(d.name);
  return out;
}

}  // namespace detail

/// Builds the predicate-level syncausality graph of a run. Direct local
/// edges follow Q_ins/Q_out derivations; direct message edges mirror the
/// delivery events; indirect NULL edges blanket the active pairs per round
/// under fixed delivery (for every sealing-relevant emit relation), and
/// otherwise appear only where explicit NULL-marker deliveries occur.
inline SyncausalityGraph build_graph(const Trace& trace, const TransducerSpec& spec) {
  SyncausalityGraph g;
  if (trace.rounds.empty()) return g;
  int last = trace.last_round();

  for (const auto& snap : trace.rounds) {
    if (snap.round + 1 > last) break;
    for (const auto& [i, derived] : snap.derived_local)
      if (derived) g.add_edge({CausalEdge::Kind::DirectLocal, {i, snap.round}, {i, snap.round + 1}, ""});
  }

  for (const auto& e : trace.events) {
    if (e.kind != TraceEvent::Kind::Deliver) continue;
    if (e.fact.relation.rfind(kNullMarkerPrefix, 0) == 0) {
      std::string sealed = e.fact.relation.substr(std::string(kNullMarkerPrefix).size());
      g.add_edge({CausalEdge::Kind::IndirectNull, {e.src, e.emit_round}, {e.dst, e.round}, sealed});
    } else {
      g.add_edge({CausalEdge::Kind::DirectMessage,
                  {e.src, e.emit_round},
                  {e.dst, e.round},
                  e.fact.relation});
    }
  }

  if (trace.semantics == "rsfd") {
    // the bounded-delay guarantee seals these relations at every node each
    // round, whether or not data flowed
    std::set<std::string> relevant = detail::negation_relevant_emits(spec);
    for (int r = trace.t0; r < last; ++r) {
      for (NodeId i : trace.nodes) {
        for (NodeId j : trace.nodes) {
          if (i == j) continue;
          for (const auto& rel : relevant)
            g.add_edge({CausalEdge::Kind::IndirectNull, {i, r}, {j, r + 1}, rel});
        }
      }
    }
  }
  return g;
}

struct CoordinationMaster {
  Point point;
  std::string relation;
};

/// Looks for the broom: a point whose R-labelled predicate chains reach
/// every active node no later than the quiescence round. When only one node
/// is actively reachable there is no message fan-out to speak of, so a
/// single covered node counts only for an intrinsically broadcasting
/// relation (key set to inf, or a broadcast run) or through an indirect
/// NULL edge (the sealing pattern exists under every strategy): a
/// single-destination strategy over finite keys without sealing is exactly
/// the pattern-free witness of the chained monotone classes.
inline std::optional<CoordinationMaster> detect_coordination_pattern(
    const SyncausalityGraph& g, const Trace& trace, const std::set<NodeId>& active) {
  if (!trace.quiesced()) throw NetworkError("coordination pattern needs a quiescent trace");
  if (active.empty()) return std::nullopt;
  int horizon = *trace.quiescence;

  auto broadcastish = [&](const std::string& rel) {
    if (trace.comm == "broadcast") return true;
    for (const auto& d : trace.emt_schema)
      if (d.name == rel) return d.key.is_inf();
    return false;
  };
  auto null_first_edge = [&](const Point& p, const std::string& rel) {
    for (int idx : g.out_edges(p)) {
      const CausalEdge& e = g.edges()[idx];
      if (e.kind == CausalEdge::Kind::IndirectNull && e.relation == rel &&
          e.to.round <= horizon)
        return true;
    }
    return false;
  };

  std::set<std::string> labels;
  for (const auto& e : g.edges())
    if (!e.relation.empty()) labels.insert(e.relation);

  for (const auto& p : g.points()) {
    if (p.round > horizon) continue;
    for (const auto& rel : labels) {
      if (active.size() < 2 && !broadcastish(rel) && !null_first_edge(p, rel)) continue;
      std::set<Point> reach = g.reach_with_first_label(p, rel, horizon);
      std::set<NodeId> covered;
      for (const auto& q : reach) covered.insert(q.node);
      bool all = true;
      for (NodeId j : active)
        if (!covered.count(j)) all = false;
      if (all) return CoordinationMaster{p, rel};
    }
  }
  return std::nullopt;
}

struct FreenessBudget {
  std::vector<int> node_counts = {2, 3};
  int hash_seeds = 2;
  int partition_seeds = 1;
  std::size_t max_configs = 48;
  int max_rounds = 60;
  DeliverySemantics semantics = DeliverySemantics::rsfd();
  std::uint64_t base_seed = 1;
};

struct FreenessVerdict {
  bool free = false;
  std::optional<Configuration> witness;
  std::optional<CoordinationMaster> sample_master;  // from the last pattern seen
  std::size_t runs = 0, correct_runs = 0;
  std::vector<std::string> notes;
};

/// Enumerates non-trivial configurations (node counts ascending, then
/// partitions, then families, then seeds). FREE on the first configuration
/// whose run reproduces the single-node reference output without a
/// coordination master; NOT_FREE when every correct run manifests one.
inline FreenessVerdict check_coordination_freeness(const TransducerSpec& spec,
                                                   const Instance& input,
                                                   const FreenessBudget& budget) {
  // single-node reference output
  Configuration trivial;
  trivial.nodes = {1};
  trivial.partition = PartitionFunction::replicate_all();
  trivial.hash_family = HashFamily::constant(1);
  trivial.comm = CommunicationKind::Hashing;
  trivial.semantics = budget.semantics;
  trivial.max_rounds = budget.max_rounds;
  Trace ref = run(spec, trivial, input);
  if (!ref.quiesced())
    throw NetworkError("coordination budget exhausted: the reference run never quiesced");
  const Instance& expect = ref.out_star;

  FreenessVerdict verdict;
  bool any_quiescent = false;

  for (int n : budget.node_counts) {
    if (n < 2) continue;  // non-trivial configurations only
    std::set<NodeId> nodes = detail::make_nodes(n);

    std::vector<PartitionFunction> partitions;
    partitions.push_back(PartitionFunction::replicate_all());
    partitions.push_back(PartitionFunction::single_node(1));
    for (int s = 0; s < budget.partition_seeds; ++s)
      partitions.push_back(PartitionFunction::hash_split(budget.base_seed + 50 + s));

    std::vector<HashFamily> families;
    families.push_back(HashFamily::constant(1));
    for (int s = 0; s < budget.hash_seeds; ++s)
      families.push_back(HashFamily::seeded(budget.base_seed + 11 * s, nodes));

    for (const auto& p : partitions) {
      for (const auto& h : families) {
        if (verdict.runs >= budget.max_configs) break;
        Configuration cfg;
        cfg.nodes = nodes;
        cfg.partition = p;
        cfg.hash_family = h;
        cfg.comm = CommunicationKind::Hashing;
        cfg.semantics = budget.semantics;
        cfg.seed = budget.base_seed;
        cfg.max_rounds = budget.max_rounds;
        Trace t = run(spec, cfg, input);
        ++verdict.runs;
        if (!t.quiesced()) continue;
        any_quiescent = true;
        if (!(t.out_star == expect)) continue;  // not a correct run
        ++verdict.correct_runs;
        SyncausalityGraph g = build_graph(t, spec);
        auto master = detect_coordination_pattern(g, t, t.active);
        if (!master) {
          verdict.free = true;
          verdict.witness = cfg;
          return verdict;
        }
        verdict.sample_master = master;
      }
    }
  }
  if (!any_quiescent)
    throw NetworkError("coordination budget exhausted with non-quiescent runs only");
  if (verdict.correct_runs == 0)
    verdict.notes.push_back("no enumerated configuration reproduced the reference output");
  verdict.free = false;
  return verdict;
}

}  // namespace tdnet

#endif  // TDNET_CAUSALITY_HPP_
