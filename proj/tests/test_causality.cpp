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

#include <catch2/catch_amalgamated.hpp>

#include "tdnet/causality.hpp"
#include "tdnet/io.hpp"

using namespace tdnet;

namespace {
std::string corpus(const std::string& f) { return std::string(TDNET_CORPUS_DIR) + "/" + f; }

Configuration cfg3(CommunicationKind comm = CommunicationKind::Hashing) {
  Configuration cfg;
  cfg.nodes = {1, 2, 3};
  cfg.partition = PartitionFunction::replicate_all();
  cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
  cfg.comm = comm;
  cfg.max_rounds = 40;
  return cfg;
}
}  // namespace

TEST_CASE("null edges blanket the active pairs for a sealed relation") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Trace t = run(spec, cfg3(), Instance{});  // empty R: nothing is ever emitted
  REQUIRE(t.quiesced());
  SyncausalityGraph g = build_graph(t, spec);
  int nulls = 0;
  for (const auto& e : g.edges()) {
    if (e.kind != CausalEdge::Kind::IndirectNull) continue;
    REQUIRE(e.relation == "S");
    REQUIRE(e.to.round == e.from.round + 1);
    REQUIRE(e.from.node != e.to.node);
    ++nulls;
  }
  // every ordered active pair, every round but the last
  REQUIRE(nulls == 6 * (static_cast<int>(t.rounds.size()) - 1));
}

TEST_CASE("single node with no emissions only chains locally") {
  TransducerSpec spec = load_spec(corpus("ex1_join.spec"));
  Configuration cfg;
  cfg.nodes = {1};
  cfg.hash_family = HashFamily::constant(1);
  Trace t = run(spec, cfg, load_instance(corpus("join_input.facts"), spec));
  SyncausalityGraph g = build_graph(t, spec);
  REQUIRE(!g.edges().empty());
  for (const auto& e : g.edges()) REQUIRE(e.kind == CausalEdge::Kind::DirectLocal);
}

TEST_CASE("message edges mirror the delivery events") {
  TransducerSpec spec = load_spec(corpus("ex2_dist_join.spec"));
  Configuration cfg = cfg3();
  cfg.partition = PartitionFunction::hash_split(4);
  Trace t = run(spec, cfg, load_instance(corpus("join_input.facts"), spec));
  SyncausalityGraph g = build_graph(t, spec);

  std::multiset<std::tuple<NodeId, int, NodeId, int, std::string>> edges, events;
  for (const auto& e : g.edges())
    if (e.kind == CausalEdge::Kind::DirectMessage)
      edges.insert({e.from.node, e.from.round, e.to.node, e.to.round, e.relation});
  for (const auto& e : t.events)
    if (e.kind == TraceEvent::Kind::Deliver)
      events.insert({e.src, e.emit_round, e.dst, e.round, e.fact.relation});
  REQUIRE(edges == events);
  bool labeled_s = false;
  for (const auto& e : edges) labeled_s |= std::get<4>(e) == "S";
  REQUIRE(labeled_s);
}

TEST_CASE("syncausal reachability is transitively closed") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Trace t = run(spec, cfg3(), parse_instance("R().\n"));
  SyncausalityGraph g = build_graph(t, spec);
  std::vector<Point> pts(g.points().begin(), g.points().end());
  for (const auto& a : pts)
    for (const auto& b : pts)
      for (const auto& c : pts)
        if (g.reachable(a, b) && g.reachable(b, c)) REQUIRE(g.reachable(a, c));
}

TEST_CASE("broadcast emptiness on nonempty input has a coordination master") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Trace t = run(spec, cfg3(), parse_instance("R().\n"));
  REQUIRE(t.quiesced());
  SyncausalityGraph g = build_graph(t, spec);
  auto master = detect_coordination_pattern(g, t, t.active);
  REQUIRE(master.has_value());
  REQUIRE(master->relation == "S");
}

TEST_CASE("constant family run of a chained monotone spec has no pattern") {
  TransducerSpec spec = load_spec(corpus("tc_local.spec"));
  Configuration cfg;
  cfg.nodes = {1, 2};
  cfg.partition = PartitionFunction::single_node(1);
  cfg.hash_family = HashFamily::constant(1);
  Trace t = run(spec, cfg, load_instance(corpus("tc_edges.facts"), spec));
  REQUIRE(t.quiesced());
  SyncausalityGraph g = build_graph(t, spec);
  REQUIRE(!detect_coordination_pattern(g, t, t.active).has_value());
}

TEST_CASE("pattern detection needs a quiescent trace") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Configuration cfg = cfg3();
  cfg.max_rounds = 1;  // cut the run off before it stabilizes
  Trace t = run(spec, cfg, parse_instance("R().\n"));
  REQUIRE(!t.quiesced());
  SyncausalityGraph g = build_graph(t, spec);
  REQUIRE_THROWS_AS(detect_coordination_pattern(g, t, t.active), NetworkError);
}

TEST_CASE("transitive closure is coordination-free") {
  TransducerSpec spec = load_spec(corpus("tc_local.spec"));
  FreenessBudget budget;
  FreenessVerdict v =
      check_coordination_freeness(spec, load_instance(corpus("tc_edges.facts"), spec), budget);
  REQUIRE(v.free);
  REQUIRE(v.witness.has_value());
  // the found witness re-runs identically: still quiescent, still no master
  Trace again = run(spec, *v.witness, load_instance(corpus("tc_edges.facts"), spec));
  REQUIRE(again.quiesced());
  SyncausalityGraph g = build_graph(again, spec);
  REQUIRE(!detect_coordination_pattern(g, again, again.active).has_value());
}

TEST_CASE("emptiness is not coordination-free on nonempty input") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  FreenessBudget budget;
  FreenessVerdict v = check_coordination_freeness(spec, parse_instance("R().\n"), budget);
  REQUIRE(!v.free);
  REQUIRE(v.correct_runs > 0);
}

TEST_CASE("the broadcast-dependent unchained spec is not coordination-free") {
  TransducerSpec spec = load_spec(corpus("ex6_broadcast.spec"));
  FreenessBudget budget;
  FreenessVerdict v = check_coordination_freeness(
      spec, load_instance(corpus("unchained_input.facts"), spec), budget);
  REQUIRE(!v.free);
  REQUIRE(v.correct_runs > 0);
}
