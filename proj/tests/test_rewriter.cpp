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

#include "tdnet/eval.hpp"
#include "tdnet/io.hpp"
#include "tdnet/print.hpp"
#include "tdnet/rewriter.hpp"

using namespace tdnet;

namespace {
std::string corpus(const std::string& f) { return std::string(TDNET_CORPUS_DIR) + "/" + f; }

Instance restrict_to_out(const Instance& full, const TransducerSpec& spec) {
  std::set<std::string> outs;
  for (const auto& d : spec.schema.out) outs.insert(d.name);
  return full.restrict_to(outs);
}

Instance oracle_of(const Program& q, const Instance& input, const TransducerSpec& spec) {
  return restrict_to_out(evaluate(q, input), spec);
}

Instance trivial_out(const TransducerSpec& spec, const Instance& input) {
  Configuration cfg;
  cfg.nodes = {1};
  cfg.hash_family = HashFamily::constant(1);
  cfg.max_rounds = 60;
  Trace t = run(spec, cfg, input);
  REQUIRE(t.quiesced());
  return t.out_star;
}
}  // namespace

TEST_CASE("broadcast rewrite of the monotone appendix query") {
  Program q = load_program(corpus("proj_filter.dl"));
  TransducerSpec spec = to_broadcast_network(q);
  REQUIRE(spec.rules.size() == 3);  // two shuffles plus the primed query
  REQUIRE(spec.schema.mem.empty()); // monotone: no Ready
  REQUIRE(spec.schema.emt.size() == 2);
  for (const auto& d : spec.schema.emt) REQUIRE(d.key.is_inf());
  // the primed query reads the shipped copies
  bool found = false;
  for (const auto& r : spec.rules) {
    if (r.target != RuleTarget::Out) continue;
    REQUIRE(r.head.relation == "T");
    for (const auto& l : r.body) REQUIRE(l.atom.relation.back() == '\'');
    found = true;
  }
  REQUIRE(found);
  // output is valid spec text
  REQUIRE(parse_spec(print_spec(spec)) == spec);
}

TEST_CASE("broadcast rewrite guards a non-monotone query with Ready") {
  Program q = load_program(corpus("nonmono_join.dl"));
  TransducerSpec spec = to_broadcast_network(q);
  REQUIRE(spec.schema.in(spec.schema.mem, "Ready"));
  int guarded = 0, ready_rules = 0;
  for (const auto& r : spec.rules) {
    if (r.target == RuleTarget::Ins && r.head.relation == "Ready") {
      ++ready_rules;
      REQUIRE(r.body.size() == 1);
      REQUIRE(r.body[0].kind == Literal::Kind::Negative);
    }
    if (r.target == RuleTarget::Out || r.target == RuleTarget::Aux) {
      bool has_ready = false;
      for (const auto& l : r.body)
        has_ready |= l.is_atom() && l.atom.relation == "Ready";
      if (has_ready) ++guarded;
    }
  }
  REQUIRE(ready_rules == 1);
  REQUIRE(guarded == 2);  // both query rules
  REQUIRE(parse_spec(print_spec(spec)) == spec);
}

TEST_CASE("broadcast rewrite of a query with no rules ships only the inputs") {
  Program q = parse_program("decl R/2.");
  TransducerSpec spec = to_broadcast_network(q);
  REQUIRE(spec.rules.size() == 1);
  REQUIRE(spec.rules[0].target == RuleTarget::Emt);
}

TEST_CASE("broadcast rewrite rejects prime collisions") {
  Program q = parse_program("decl R/1. decl R'/1. decl Q/1. Q(u) <- R(u), R'(u).");
  REQUIRE_THROWS_AS(to_broadcast_network(q), RewriteError);
}

TEST_CASE("broadcast rewrite computes the query in two rounds") {
  struct Case {
    const char* query;
    const char* facts;
  } cases[] = {
      {"join.dl", "join_input.facts"},
      {"tc.dl", "tc_edges.facts"},
      {"filtered_tc.dl", "filtered_tc_input.facts"},
      {"nonmono_join.dl", nullptr},
  };
  for (const auto& c : cases) {
    Program q = load_program(corpus(c.query));
    TransducerSpec spec = to_broadcast_network(q);
    Instance input = c.facts ? load_instance(corpus(c.facts))
                             : parse_instance("R(a,b).\nP(b,c).\nP(c,d).\nS(a,b).\n");
    Configuration cfg;
    cfg.nodes = {1, 2, 3};
    cfg.t0 = 4;
    cfg.partition = PartitionFunction::hash_split(8);
    cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
    cfg.max_rounds = 30;
    Trace t = run(spec, cfg, input);
    INFO(c.query);
    REQUIRE(t.quiesced());
    REQUIRE(*t.quiescence == cfg.t0 + 2);
    REQUIRE(t.out_star == oracle_of(q, input, spec));
  }
}

TEST_CASE("hashing rewrite of transitive closure uses maximal keys") {
  Program q = load_program(corpus("tc.dl"));
  TransducerSpec spec = to_hashing_network(q);
  for (const auto& d : spec.schema.emt) {
    REQUIRE(d.key.is_finite());
    REQUIRE(d.key.k == d.arity);
  }
  // all query rules moved to the emission class, plus the output relay
  int emt_rules = 0, out_rules = 0;
  for (const auto& r : spec.rules) {
    if (r.target == RuleTarget::Emt) ++emt_rules;
    if (r.target == RuleTarget::Out) ++out_rules;
  }
  REQUIRE(emt_rules == 3);  // shuffle + two closure rules
  REQUIRE(out_rules == 1);
  REQUIRE(parse_spec(print_spec(spec)) == spec);
}

TEST_CASE("hashing rewrite stages the filtered closure") {
  Program q = load_program(corpus("filtered_tc.dl"));
  TransducerSpec spec = to_hashing_network(q);
  REQUIRE(spec.schema.in(spec.schema.mem, "zzstage1"));
  REQUIRE(spec.schema.in(spec.schema.mem, "zzstage2"));
  // the base rule carries stage 1 and the negation, the recursive rule stage 2
  bool base_staged = false, rec_staged = false, bootstrap = false;
  for (const auto& r : spec.rules) {
    bool neg = false, st1 = false, st2 = false;
    for (const auto& l : r.body) {
      if (l.kind == Literal::Kind::Negative && l.atom.relation == "F'") neg = true;
      if (l.is_atom() && l.atom.relation == "zzstage1") st1 = true;
      if (l.is_atom() && l.atom.relation == "zzstage2") st2 = true;
    }
    if (neg && st1) base_staged = true;
    if (st2 && r.target == RuleTarget::Emt && r.head.relation == "T'") rec_staged = true;
    if (r.target == RuleTarget::Ins && r.head.relation == "zzstage1" && r.body.size() == 2)
      bootstrap = true;
  }
  REQUIRE(base_staged);
  REQUIRE(rec_staged);
  REQUIRE(bootstrap);
  // the negated relation is keyed on its first term, as is the aligned copy
  REQUIRE(spec.key_of("F'") == Key::finite(1));
  bool has_aligned = false;
  for (const auto& d : spec.schema.emt)
    if (d.name.rfind("E'a", 0) == 0) {
      has_aligned = true;
      REQUIRE(d.key == Key::finite(1));
    }
  REQUIRE(has_aligned);
  REQUIRE(parse_spec(print_spec(spec)) == spec);
}

TEST_CASE("hashing rewrite rejects unchained and non-recursion-bounded queries") {
  REQUIRE_THROWS_AS(to_hashing_network(load_program(corpus("unchained.dl"))), RewriteError);
  REQUIRE_THROWS_AS(to_hashing_network(load_program(corpus("tc_complement.dl"))), RewriteError);
}

TEST_CASE("hashing rewrites match the oracle across configurations") {
  struct Case {
    const char* query;
    Instance input;
  } cases[] = {
      {"tc.dl", load_instance(corpus("tc_edges.facts"))},
      {"join.dl", load_instance(corpus("join_input.facts"))},
      {"filtered_tc.dl", load_instance(corpus("filtered_tc_input.facts"))},
  };
  for (const auto& c : cases) {
    Program q = load_program(corpus(c.query));
    TransducerSpec spec = to_hashing_network(q);
    Instance expect = oracle_of(q, c.input, spec);
    for (int n : {1, 2, 3}) {
      for (std::uint64_t hs : {1ull, 12ull}) {
        Configuration cfg;
        for (int i = 1; i <= n; ++i) cfg.nodes.insert(i);
        cfg.partition = PartitionFunction::hash_split(hs);
        cfg.hash_family = HashFamily::seeded(hs + 3, cfg.nodes);
        cfg.max_rounds = 40;
        Trace t = run(spec, cfg, c.input);
        INFO(c.query << " n=" << n << " seed=" << hs);
        REQUIRE(t.quiesced());
        REQUIRE(t.out_star == expect);
      }
    }
  }
}

TEST_CASE("snapshot injection adds the marker machinery") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  TransducerSpec fifo = inject_snapshot_fifo(spec);
  REQUIRE(fifo.schema.in(fifo.schema.emt, "zznull_S"));
  REQUIRE(fifo.key_of("zznull_S").is_inf());
  // the gated rule now waits for the seal
  bool gated = false;
  for (const auto& r : fifo.rules) {
    if (r.target != RuleTarget::Out) continue;
    for (const auto& l : r.body)
      if (l.is_atom() && l.atom.relation == "zzsc_S") gated = true;
  }
  REQUIRE(gated);
  // generated names all carry the reserved prefix
  for (const auto& d : fifo.schema.emt)
    if (!spec.schema.in(spec.schema.emt, d.name)) REQUIRE(d.name.rfind("zz", 0) == 0);
  REQUIRE(parse_spec(print_spec(fifo)) == fifo);

  TransducerSpec generic = inject_snapshot_generic(spec);
  bool binary_null = false;
  for (const auto& d : generic.schema.emt)
    if (d.name == "zznull_S" && d.arity == 2) binary_null = true;
  REQUIRE(binary_null);
  REQUIRE(parse_spec(print_spec(generic)) == generic);
}

TEST_CASE("injection is idempotent and leaves sealed-free specs unchanged") {
  TransducerSpec join = load_spec(corpus("ex2_dist_join.spec"));
  REQUIRE(inject_snapshot_fifo(join) == join);

  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  TransducerSpec once = inject_snapshot_fifo(spec);
  REQUIRE(inject_snapshot_fifo(once) == once);
  REQUIRE(inject_snapshot_generic(once) == once);
}

TEST_CASE("injection rejects reserved-name collisions") {
  TransducerSpec clash = parse_spec(R"(
@db
decl R/1.
@emt
decl zzcnt_S/1 key=inf.
@out
decl T/1.

zzcnt_S_emt(u) <- R(u).
T_out(u) <- not zzcnt_S(u), R(u).
)");
  REQUIRE_THROWS_AS(inject_snapshot_fifo(clash), RewriteError);
}

TEST_CASE("fifo injection makes the emptiness check correct under rsbv") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  TransducerSpec fixed = inject_snapshot_fifo(spec);
  for (const Instance& input : {Instance{}, parse_instance("R().\n")}) {
    Instance expect = trivial_out(spec, input);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Configuration cfg;
      cfg.nodes = {1, 2, 3};
      cfg.partition = PartitionFunction::single_node(1);
      cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
      cfg.semantics = DeliverySemantics::rsbv(2, true);
      cfg.seed = seed;
      cfg.max_rounds = 60;
      Trace t = run(fixed, cfg, input);
      INFO("seed " << seed);
      REQUIRE(t.quiesced());
      REQUIRE(t.out_star == expect);
    }
  }
}

TEST_CASE("generic injection survives reordered markers") {
  TransducerSpec spec = load_spec(corpus("ex3_emptiness.spec"));
  TransducerSpec fixed = inject_snapshot_generic(spec);
  for (const Instance& input : {Instance{}, parse_instance("R().\n")}) {
    Instance expect = trivial_out(spec, input);
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      Configuration cfg;
      cfg.nodes = {1, 2, 3};
      cfg.partition = PartitionFunction::single_node(1);
      cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
      cfg.semantics = DeliverySemantics::rsbv(2, false);  // no ordering guarantee
      cfg.seed = seed;
      cfg.max_rounds = 60;
      Trace t = run(fixed, cfg, input);
      INFO("seed " << seed);
      REQUIRE(t.quiesced());
      REQUIRE(t.out_star == expect);
    }
  }
}

TEST_CASE("staged complement spec with fifo injection matches the oracle") {
  TransducerSpec spec = load_spec(corpus("ex7_staged.spec"));
  TransducerSpec fixed = inject_snapshot_fifo(spec);
  // the negation on the local closure is gated by the seal of the shipped S
  bool gate = false;
  for (const auto& r : fixed.rules)
    for (const auto& l : r.body)
      if (l.is_atom() && l.atom.relation == "zzsc_CS") gate = true;
  REQUIRE(gate);

  Instance input = load_instance(corpus("tcc_input.facts"), spec);
  Instance expect = trivial_out(spec, input);
  REQUIRE(expect ==
          restrict_to_out(evaluate(load_program(corpus("tc_complement.dl")), input), spec));
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Configuration cfg;
    cfg.nodes = {1, 2, 3};
    cfg.partition = PartitionFunction::hash_split(4);
    cfg.hash_family = HashFamily::seeded(9, {1, 2, 3});
    cfg.semantics = DeliverySemantics::rsbv(2, true);
    cfg.seed = seed;
    cfg.max_rounds = 80;
    Trace t = run(fixed, cfg, input);
    INFO("seed " << seed);
    REQUIRE(t.quiesced());
    REQUIRE(t.out_star == expect);
  }
}

TEST_CASE("a rule negating two emitted relations is gated by both seals") {
  TransducerSpec spec = parse_spec(R"(
@db
decl R/1.
decl A/1.
decl B/1.
@mem
decl Ready/0.
@emt
decl SA/1 key=inf.
decl SB/1 key=inf.
@out
decl Q/1.

SA_emt(u) <- A(u).
SB_emt(u) <- B(u).
Ready_ins() <- not Ready().
Q_out(u) <- R(u), not SA(u), not SB(u), Ready().
)");
  TransducerSpec fixed = inject_snapshot_generic(spec);
  // both gates present on the output rule
  bool has_a = false, has_b = false;
  for (const auto& r : fixed.rules) {
    if (r.target != RuleTarget::Out) continue;
    for (const auto& l : r.body) {
      if (!l.is_atom()) continue;
      has_a |= l.atom.relation == "zzsc_SA";
      has_b |= l.atom.relation == "zzsc_SB";
    }
  }
  REQUIRE(has_a);
  REQUIRE(has_b);
  REQUIRE(parse_spec(print_spec(fixed)) == fixed);

  Instance input = parse_instance("R(x).\nR(y).\nR(z).\nA(x).\nB(y).\n");
  Configuration trivial;
  trivial.nodes = {1};
  trivial.hash_family = HashFamily::constant(1);
  Trace ref = run(spec, trivial, input);
  REQUIRE(ref.quiesced());
  REQUIRE(ref.out_star == parse_instance("Q(z).\n"));

  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    Configuration cfg;
    cfg.nodes = {1, 2, 3};
    cfg.partition = PartitionFunction::hash_split(3);
    cfg.hash_family = HashFamily::seeded(7, {1, 2, 3});
    cfg.semantics = DeliverySemantics::rsbv(2, false);
    cfg.seed = seed;
    cfg.max_rounds = 80;
    Trace t = run(fixed, cfg, input);
    INFO("seed " << seed);
    REQUIRE(t.quiesced());
    REQUIRE(t.out_star == ref.out_star);
  }
}
