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

#include "tdnet/io.hpp"
#include "tdnet/network.hpp"
#include "tdnet/strategy.hpp"

using namespace tdnet;

namespace {
std::string corpus(const std::string& f) { return std::string(TDNET_CORPUS_DIR) + "/" + f; }

Fact fact(const std::string& rel, std::initializer_list<const char*> consts) {
  Fact f;
  f.relation = rel;
  for (const char* c : consts) f.tuple.push_back(Constant(c));
  return f;
}
}  // namespace

TEST_CASE("hash address for a pinned single-key relation") {
  KeySet keys{{"S", Key::finite(1)}};
  HashFamily fam = HashFamily::pinned({{Constant("a"), 2}}, {1, 2, 3});
  REQUIRE(hash_address(fact("S", {"a", "b"}), keys, fam) == std::set<NodeId>{2});
}

TEST_CASE("unbounded key addresses every active node") {
  KeySet keys{{"S", Key::inf()}};
  HashFamily fam = HashFamily::seeded(9, {1, 2, 3});
  REQUIRE(hash_address(fact("S", {"a", "b"}), keys, fam) == std::set<NodeId>{1, 2, 3});
}

TEST_CASE("two-key address is the union of the per-key images") {
  KeySet keys{{"S", Key::finite(2)}};
  HashFamily fam = HashFamily::pinned({{Constant("a"), 1}, {Constant("b"), 3}}, {1, 2, 3});
  REQUIRE(hash_address(fact("S", {"a", "b"}), keys, fam) == std::set<NodeId>{1, 3});
}

TEST_CASE("missing key is an error") {
  KeySet keys;
  HashFamily fam = HashFamily::seeded(1, {1});
  REQUIRE_THROWS_AS(hash_address(fact("S", {"a"}), keys, fam), StrategyError);
}

TEST_CASE("hash address is a pure function") {
  KeySet keys{{"S", Key::finite(2)}, {"U", Key::inf()}};
  HashFamily fam = HashFamily::seeded(77, {1, 2, 3, 4});
  for (const auto& f : {fact("S", {"a", "b"}), fact("S", {"x", "a"}), fact("U", {"q", "r"})}) {
    auto once = hash_address(f, keys, fam);
    for (int i = 0; i < 5; ++i) REQUIRE(hash_address(f, keys, fam) == once);
    for (NodeId n : once) REQUIRE(fam.active.count(n));
  }
}

TEST_CASE("facts sharing key constants co-locate") {
  // single-key relations: equal first terms always meet on the same node
  KeySet keys{{"S", Key::finite(1)}, {"U", Key::finite(1)}};
  for (std::uint64_t seed : {1ull, 2ull, 99ull}) {
    HashFamily fam = HashFamily::seeded(seed, {1, 2, 3});
    auto a = hash_address(fact("S", {"k", "v1"}), keys, fam);
    auto b = hash_address(fact("U", {"k", "v2"}), keys, fam);
    REQUIRE(a == b);
    REQUIRE(a.size() == 1);
  }
}

TEST_CASE("deliver_set broadcast reaches every node") {
  std::map<NodeId, Instance> emissions;
  emissions[1].insert(fact("S", {"a"}));
  auto inboxes = deliver_set(emissions, CommunicationKind::Broadcast, {}, HashFamily::constant(1),
                             {1, 2, 3});
  for (NodeId n : {1, 2, 3}) REQUIRE(inboxes[n].contains(fact("S", {"a"})));
}

TEST_CASE("deliver_set comm-free stays local") {
  std::map<NodeId, Instance> emissions;
  emissions[1].insert(fact("S", {"a"}));
  auto inboxes = deliver_set(emissions, CommunicationKind::CommFree, {}, HashFamily::constant(1),
                             {1, 2, 3});
  REQUIRE(inboxes[1].contains(fact("S", {"a"})));
  REQUIRE(inboxes[2].empty());
  REQUIRE(inboxes[3].empty());
}

TEST_CASE("deliver_set with a constant family lands everything on one node") {
  KeySet keys{{"S", Key::finite(1)}, {"U", Key::inf()}};
  std::map<NodeId, Instance> emissions;
  emissions[2].insert(fact("S", {"a", "b"}));
  emissions[3].insert(fact("U", {"c"}));
  auto inboxes =
      deliver_set(emissions, CommunicationKind::Hashing, keys, HashFamily::constant(1), {1, 2, 3});
  REQUIRE(inboxes[1].size() == 2);
  REQUIRE(inboxes[2].empty());
  REQUIRE(inboxes[3].empty());
}

TEST_CASE("partition functions preserve the union") {
  Instance input = parse_instance("R(a,b).\nR(c,d).\nR(e,f).\nT(a).\n");
  std::set<NodeId> nodes{1, 2, 3};
  for (const auto& p :
       {PartitionFunction::replicate_all(), PartitionFunction::single_node(2),
        PartitionFunction::hash_split(4), PartitionFunction::hash_split(11)}) {
    Instance covered;
    for (NodeId n : nodes) covered.merge(p.apply(input, n, nodes));
    REQUIRE(covered == input);
  }
}

TEST_CASE("explicit partition validates coverage and nodes") {
  Instance input = parse_instance("R(a,b).\nR(c,d).\n");
  std::map<NodeId, Instance> parts;
  parts[1] = parse_instance("R(a,b).\n");
  auto p = PartitionFunction::explicit_parts(parts);
  REQUIRE_THROWS_AS(p.validate(input, {1, 2}), StrategyError);
  parts[2] = parse_instance("R(c,d).\n");
  REQUIRE_NOTHROW(PartitionFunction::explicit_parts(parts).validate(input, {1, 2}));
  parts[9] = Instance{};
  REQUIRE_THROWS_AS(PartitionFunction::explicit_parts(parts).validate(input, {1, 2}),
                    StrategyError);
}

TEST_CASE("communication-free runs are recognized") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Instance input = parse_instance("R().\n");

  Configuration cfg;
  cfg.nodes = {1, 2, 3};
  cfg.partition = PartitionFunction::replicate_all();
  cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
  cfg.comm = CommunicationKind::CommFree;
  Trace free_run = run(spec, cfg, input);
  REQUIRE(is_communication_free_run(free_run));

  cfg.comm = CommunicationKind::Broadcast;
  Trace bc_run = run(spec, cfg, input);
  REQUIRE(!is_communication_free_run(bc_run));

  // constant family pooling everything on the emitter: communication-free
  TransducerSpec tc = load_spec(corpus("tc_local.spec"));
  Configuration pool;
  pool.nodes = {1, 2};
  pool.partition = PartitionFunction::single_node(1);
  pool.hash_family = HashFamily::constant(1);
  pool.comm = CommunicationKind::Hashing;
  Trace pooled = run(tc, pool, parse_instance("R(a,b).\nR(b,c).\n"));
  REQUIRE(is_communication_free_run(pooled));
}

TEST_CASE("unbounded keys with a non-partitioned family emulate broadcast") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  Instance input = parse_instance("R().\n");
  Configuration hashing;
  hashing.nodes = {1, 2, 3};
  hashing.partition = PartitionFunction::single_node(2);
  hashing.hash_family = HashFamily::seeded(7, {1, 2, 3});
  hashing.comm = CommunicationKind::Hashing;
  Configuration broadcast = hashing;
  broadcast.comm = CommunicationKind::Broadcast;

  Trace a = run(spec, hashing, input);
  Trace b = run(spec, broadcast, input);
  REQUIRE(a.quiescence == b.quiescence);
  REQUIRE(a.out_star == b.out_star);
  REQUIRE(a.rounds.size() == b.rounds.size());
  for (std::size_t i = 0; i < a.rounds.size(); ++i)
    REQUIRE(a.rounds[i].received == b.rounds[i].received);
}

TEST_CASE("passive nodes receive nothing under hashing") {
  TransducerSpec spec = load_spec(corpus("ex2_dist_join.spec"));
  Configuration cfg;
  cfg.nodes = {1, 2, 3};
  cfg.partition = PartitionFunction::replicate_all();
  cfg.hash_family = HashFamily::seeded(5, {1, 2});  // node 3 passive
  cfg.comm = CommunicationKind::Hashing;
  Trace t = run(spec, cfg, load_instance(corpus("join_input.facts"), spec));
  REQUIRE(t.quiesced());
  for (const auto& snap : t.rounds) REQUIRE(snap.received.at(3).empty());
  // and its All relation excludes it
  REQUIRE(t.rounds.back().nodes.at(3).sys.relation(kAllRel).size() == 2);
}
