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

#include <random>

#include "tdnet/eval.hpp"
#include "tdnet/parse.hpp"
#include "tdnet/print.hpp"
#include "tdnet/stratify.hpp"

using namespace tdnet;

namespace {

Instance inst(std::initializer_list<const char*> facts) {
  Instance i;
  std::string text;
  for (const char* f : facts) {
    text += f;
    text += ".\n";
  }
  return parse_instance(text);
}

const char* kJoinProgram = R"(
decl R/2. decl T/2. decl Q/3.
Q(u, v, w) <- R(u, v), T(v, w).
)";

const char* kTcProgram = R"(
decl R/2. decl T/2.
T(u, v) <- R(u, v).
T(u, w) <- R(u, v), T(v, w).
)";

}  // namespace

TEST_CASE("parse join program") {
  Program p = parse_program(kJoinProgram);
  REQUIRE(p.rules.size() == 1);
  REQUIRE(p.decls.size() == 3);
  REQUIRE(p.rules[0].head.relation == "Q");
  REQUIRE(p.rules[0].body.size() == 2);
}

TEST_CASE("parse empty program") {
  Program p = parse_program("");
  REQUIRE(p.rules.empty());
  REQUIRE(p.decls.empty());
}

TEST_CASE("unsafe rule rejected") {
  REQUIRE_THROWS_AS(parse_program("decl R/1. decl Q/1. Q(u) <- not R(u)."), ParseError);
}

TEST_CASE("undeclared relation and arity mismatch") {
  REQUIRE_THROWS_AS(parse_program("decl Q/1. Q(u) <- R(u)."), ParseError);
  REQUIRE_THROWS_AS(parse_program("decl R/2. decl Q/1. Q(u) <- R(u)."), ParseError);
}

TEST_CASE("syntax error carries position") {
  try {
    parse_program("decl R/2.\nQ(u,v <- R(u,v).");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    REQUIRE(e.line == 2);
  }
}

TEST_CASE("parse aggregates and arithmetic") {
  Program p = parse_program(R"(
decl S/2. decl T/2. decl C/1. decl W/1. decl A/3.
T(u, count<v>) <- S(u, v).
C(fs_count<u>) <- W(u).
A(u, v, w) <- S(u, v), w = u + v.
)");
  REQUIRE(p.rules[0].agg.kind == AggKind::Count);
  REQUIRE(p.rules[0].agg.over == std::vector<std::string>{"v"});
  REQUIRE(p.rules[1].agg.kind == AggKind::FsCount);
  REQUIRE(p.rules[2].body[1].kind == Literal::Kind::Arith);
}

TEST_CASE("parse tuple aggregate and empty tuple") {
  Program p = parse_program(R"(
decl R/2. decl C/1. decl N/1.
C(count<(u, v)>) <- R(u, v).
N(count<()>) <- R(u, v).
)");
  REQUIRE(p.rules[0].agg.over.size() == 2);
  REQUIRE(p.rules[1].agg.over.empty());
}

TEST_CASE("program round-trips through printer") {
  for (const char* src : {kJoinProgram, kTcProgram}) {
    Program p = parse_program(src);
    Program q = parse_program(print_program(p));
    REQUIRE(p == q);
  }
  Program withagg = parse_program(
      "decl S/2. decl T/2. decl F/1.\n"
      "T(u, count<v>) <- S(u, v), not F(u), u < v.\n");
  REQUIRE(parse_program(print_program(withagg)) == withagg);
}

TEST_CASE("stratify transitive closure into a single stratum") {
  Stratification s = stratify(parse_program(kTcProgram));
  REQUIRE(s.strata.size() == 1);
  REQUIRE(s.strata[0] == std::set<std::string>{"T"});
  REQUIRE(s.recursive_sccs.size() == 1);
}

TEST_CASE("stratify recursive relation below its negation") {
  // CS recursive, Q negates CS: CS must sit strictly below Q
  Program p = parse_program(R"(
decl R/2. decl T/2. decl CS/2. decl Q/2.
CS(u, v) <- R(u, v).
CS(v, w) <- R(u, v), CS(u, w).
Q(u, v) <- T(u, v), not CS(u, v).
)");
  Stratification s = stratify(p);
  REQUIRE(s.stratum("CS") < s.stratum("Q"));
  REQUIRE(s.strata.size() == 2);
}

TEST_CASE("self negation is not stratifiable") {
  REQUIRE_THROWS_AS(stratify(parse_program("decl P/0. P() <- not P().")), NotStratifiableError);
}

TEST_CASE("recursion through count is not stratifiable") {
  REQUIRE_THROWS_AS(stratify(parse_program(R"(
decl P/1. decl Q/1.
P(u) <- Q(u).
Q(count<u>) <- P(u).
)")),
                    NotStratifiableError);
}

TEST_CASE("evaluate join rule") {
  Program p = parse_program(kJoinProgram);
  Instance edb = inst({"R(a,b)", "T(b,c)"});
  Instance out = evaluate(p, edb);
  REQUIRE(out.contains("Q", {Constant("a"), Constant("b"), Constant("c")}));
  REQUIRE(out.relation("Q").size() == 1);
  REQUIRE(out.contains("R", {Constant("a"), Constant("b")}));  // edb kept
}

TEST_CASE("evaluate empty input derives nothing") {
  Program p = parse_program(kTcProgram);
  Instance out = evaluate(p, Instance{});
  REQUIRE(out.empty());
}

TEST_CASE("evaluate set-difference against local closure") {
  // local program: Q = T minus the transitive closure of R, guarded by Ready
  Program p = parse_program(R"(
decl R/2. decl T/2. decl Ready/0. decl CS/2. decl Q/2.
CS(u, v) <- R(u, v).
CS(u, w) <- R(u, v), CS(v, w).
Q(u, v) <- T(u, v), not CS(u, v), Ready().
)");
  Instance edb = inst({"R(a,b)", "R(b,c)", "T(a,c)", "T(a,d)", "Ready()"});
  Instance out = evaluate(p, edb);
  // brute-force closure of {(a,b),(b,c)} is {(a,b),(b,c),(a,c)}
  REQUIRE(out.relation("CS").size() == 3);
  REQUIRE(out.relation("Q") == std::set<Tuple>{{Constant("a"), Constant("d")}});
}

TEST_CASE("naive oracle agrees on the worked examples") {
  struct Case {
    const char* prog;
    Instance edb;
  } cases[] = {
      {kJoinProgram, inst({"R(a,b)", "T(b,c)"})},
      {kTcProgram, Instance{}},
      {kTcProgram, inst({"R(a,b)", "R(b,c)", "R(c,d)"})},
  };
  for (const auto& c : cases) {
    Program p = parse_program(c.prog);
    REQUIRE(evaluate(p, c.edb) == evaluate_naive(p, c.edb));
  }
}

TEST_CASE("count and sum aggregates") {
  Program p = parse_program(R"(
decl S/2. decl T/2. decl U/2.
T(u, count<v>) <- S(u, v).
U(u, sum<v>) <- S(u, v).
)");
  Instance edb = inst({"S(a,1)", "S(a,2)", "S(b,5)"});
  Instance out = evaluate(p, edb);
  REQUIRE(out.contains("T", {Constant("a"), Constant(std::int64_t{2})}));
  REQUIRE(out.contains("T", {Constant("b"), Constant(std::int64_t{1})}));
  REQUIRE(out.contains("U", {Constant("a"), Constant(std::int64_t{3})}));
  REQUIRE(out.contains("U", {Constant("b"), Constant(std::int64_t{5})}));
}

TEST_CASE("ungrouped count of an empty body yields zero") {
  Program p = parse_program(R"(
decl R/1. decl C/1.
C(count<u>) <- R(u).
)");
  Instance out = evaluate(p, Instance{});
  REQUIRE(out.contains("C", {Constant(std::int64_t{0})}));
}

TEST_CASE("fs_count is an inflationary ladder") {
  Program p = parse_program(R"(
decl R/1. decl C/1.
C(fs_count<u>) <- R(u).
)");
  Instance out = evaluate(p, inst({"R(a)", "R(b)", "R(c)"}));
  for (std::int64_t j = 0; j <= 3; ++j)
    REQUIRE(out.contains("C", {Constant(j)}));
  REQUIRE(out.relation("C").size() == 4);
}

TEST_CASE("count over recursive stratum waits for its fixpoint") {
  Program p = parse_program(R"(
decl R/2. decl T/2. decl C/1.
T(u, v) <- R(u, v).
T(u, w) <- R(u, v), T(v, w).
C(count<(u, v)>) <- T(u, v).
)");
  Instance out = evaluate(p, inst({"R(a,b)", "R(b,c)"}));
  REQUIRE(out.contains("C", {Constant(std::int64_t{3})}));
  REQUIRE(out.relation("C").size() == 1);
}

TEST_CASE("arithmetic binding and comparison") {
  Program p = parse_program(R"(
decl S/2. decl P/1.
P(w) <- S(u, v), u < v, w = u * v.
)");
  Instance out = evaluate(p, inst({"S(2,3)", "S(4,1)"}));
  REQUIRE(out.relation("P") == std::set<Tuple>{{Constant(std::int64_t{6})}});
}

// --------------------------------------------------------------------------
// Random-program properties
// --------------------------------------------------------------------------

namespace {

struct RandomProgram {
  Program program;
  Instance edb;
};

RandomProgram random_program(std::mt19937_64& rng, bool allow_negation) {
  auto pick = [&](int n) { return static_cast<int>(rng() % n); };
  const std::vector<std::string> consts = {"a", "b", "c", "d", "e", "f"};
  const std::vector<std::string> vars = {"x", "y", "z"};

  Program p;
  std::vector<std::pair<std::string, int>> edb_rels, idb_rels;
  int nedb = 1 + pick(2), nidb = 1 + pick(3);
  for (int i = 0; i < nedb; ++i) {
    std::string name = "E" + std::to_string(i);
    int ar = 1 + pick(2);
    edb_rels.push_back({name, ar});
    p.decls.push_back({name, ar, Key::absent()});
  }
  for (int i = 0; i < nidb; ++i) {
    std::string name = "P" + std::to_string(i);
    int ar = 1 + pick(2);
    idb_rels.push_back({name, ar});
    p.decls.push_back({name, ar, Key::absent()});
  }

  int nrules = 1 + pick(6);
  for (int i = 0; i < nrules && static_cast<int>(p.rules.size()) < 6; ++i) {
    int hi = pick(nidb);
    Rule r;
    r.head.relation = idb_rels[hi].first;
    for (int k = 0; k < idb_rels[hi].second; ++k)
      r.head.terms.push_back(Term::make_var(vars[pick(static_cast<int>(vars.size()))]));
    int nlits = 1 + pick(3);
    for (int k = 0; k < nlits; ++k) {
      bool use_edb = pick(2) == 0;
      // stratifiable by construction: idb bodies only at or below the head
      // index, negated ones strictly below
      bool neg = allow_negation && pick(4) == 0;
      std::pair<std::string, int> rel;
      if (use_edb || (neg && hi == 0)) {
        rel = edb_rels[pick(nedb)];
      } else if (neg) {
        rel = idb_rels[pick(hi)];
      } else {
        rel = idb_rels[pick(hi + 1)];
      }
      Atom a;
      a.relation = rel.first;
      for (int t = 0; t < rel.second; ++t)
        a.terms.push_back(Term::make_var(vars[pick(static_cast<int>(vars.size()))]));
      r.body.push_back(neg ? Literal::negative(a) : Literal::positive(a));
    }
    if (rule_safety_error(r)) continue;  // resample
    p.rules.push_back(r);
  }

  RandomProgram out;
  out.program = p;
  int nfacts = pick(31);
  for (int i = 0; i < nfacts; ++i) {
    const auto& rel = edb_rels[pick(nedb)];
    Tuple t;
    for (int k = 0; k < rel.second; ++k)
      t.push_back(Constant(consts[pick(static_cast<int>(consts.size()))]));
    out.edb.insert(rel.first, t);
  }
  return out;
}

}  // namespace

TEST_CASE("semi-naive equals naive on random programs") {
  std::mt19937_64 rng(20260810);
  for (int i = 0; i < 500; ++i) {
    RandomProgram rp = random_program(rng, /*allow_negation=*/true);
    Instance a = evaluate(rp.program, rp.edb);
    Instance b = evaluate_naive(rp.program, rp.edb);
    INFO(print_program(rp.program));
    INFO(print_instance(rp.edb));
    REQUIRE(a == b);
  }
}

TEST_CASE("monotonicity of negation-free programs") {
  std::mt19937_64 rng(42);
  for (int i = 0; i < 120; ++i) {
    RandomProgram rp = random_program(rng, /*allow_negation=*/false);
    Instance small;
    for (const auto& f : rp.edb.facts())
      if (rng() % 2) small.insert(f);
    Instance big_out = evaluate(rp.program, rp.edb);
    Instance small_out = evaluate(rp.program, small);
    for (const auto& f : small_out.facts()) {
      INFO(print_program(rp.program));
      REQUIRE(big_out.contains(f));
    }
  }
}

TEST_CASE("genericity under constant permutation") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> consts = {"a", "b", "c", "d", "e", "f"};
  for (int i = 0; i < 120; ++i) {
    RandomProgram rp = random_program(rng, /*allow_negation=*/true);
    std::vector<std::string> perm = consts;
    std::shuffle(perm.begin(), perm.end(), rng);
    std::map<std::string, std::string> pi;
    for (std::size_t k = 0; k < consts.size(); ++k) pi[consts[k]] = perm[k];
    auto apply = [&](const Instance& in) {
      Instance out;
      for (const auto& f : in.facts()) {
        Tuple t;
        for (const auto& c : f.tuple) t.push_back(Constant(pi.at(c.as_symbol())));
        out.insert(f.relation, t);
      }
      return out;
    };
    Instance lhs = evaluate(rp.program, apply(rp.edb));
    Instance rhs = apply(evaluate(rp.program, rp.edb));
    REQUIRE(lhs == rhs);
  }
}

TEST_CASE("evaluation is idempotent on derived relations") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 120; ++i) {
    RandomProgram rp = random_program(rng, /*allow_negation=*/true);
    Instance once = evaluate(rp.program, rp.edb);
    Instance twice = evaluate(rp.program, once);
    REQUIRE(once == twice);
  }
}

TEST_CASE("divergent arithmetic recursion hits the evaluation budget") {
  Program p = parse_program(R"(
decl S/1. decl P/1.
P(u) <- S(u).
P(w) <- P(u), w = u + 1.
)");
  Instance edb = inst({"S(1)"});
  EvalLimits tight;
  tight.max_facts = 10000;
  REQUIRE_THROWS_AS(evaluate(p, edb, tight), EvalError);
}
