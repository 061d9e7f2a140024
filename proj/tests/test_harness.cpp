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

#include <cstdio>
#include <cstdlib>

#include "tdnet/config.hpp"
#include "tdnet/corpus.hpp"
#include "tdnet/io.hpp"
#include "tdnet/print.hpp"
#include "tdnet/trace_io.hpp"

using namespace tdnet;

namespace {
std::string corpus(const std::string& f) { return std::string(TDNET_CORPUS_DIR) + "/" + f; }

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult cli(const std::string& args) {
  std::string cmd = std::string(TDNET_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CliResult res;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) res.output.append(buf, n);
  int status = pclose(pipe);
  res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return res;
}
}  // namespace

TEST_CASE("run config files parse") {
  Configuration cfg = parse_run_config(slurp(corpus("n3_replicate.cfg")));
  REQUIRE(cfg.nodes == std::set<NodeId>{1, 2, 3});
  REQUIRE(cfg.partition.mode == PartitionFunction::Mode::ReplicateAll);
  REQUIRE(cfg.hash_family.mode == HashFamily::Mode::Seeded);
  REQUIRE(cfg.seed == 42);
  REQUIRE(cfg.max_rounds == 40);

  Configuration rsbv = parse_run_config(slurp(corpus("n3_rsbv.cfg")));
  REQUIRE(rsbv.semantics.kind == DeliverySemantics::Kind::Rsbv);
  REQUIRE(rsbv.semantics.var == 2);
  REQUIRE(rsbv.semantics.fifo);

  Configuration pinned = parse_run_config(
      "nodes = [1, 5]\nhash = pinned{a:1, b:5, 3:1}\nsemantics = rsync(max_delay=4)\n"
      "partition = single_node(5)\ncomm = comm_free\n");
  REQUIRE(pinned.nodes == std::set<NodeId>{1, 5});
  REQUIRE(pinned.hash_family.mode == HashFamily::Mode::Pinned);
  REQUIRE(pinned.hash_family.apply(Constant("b")) == 5);
  REQUIRE(pinned.hash_family.apply(Constant(std::int64_t{3})) == 1);
  REQUIRE(pinned.semantics.kind == DeliverySemantics::Kind::Rsync);
  REQUIRE(pinned.comm == CommunicationKind::CommFree);

  Configuration expl = parse_run_config(
      "nodes = 2\npartition = explicit{1: [R(a,b), T(c)], 2: []}\n");
  REQUIRE(expl.partition.mode == PartitionFunction::Mode::Explicit);
  REQUIRE(expl.partition.explicit_map.at(1).size() == 2);

  REQUIRE_THROWS_AS(parse_run_config("t0 = 3\n"), ParseError);       // nodes missing
  REQUIRE_THROWS_AS(parse_run_config("nodes = 2\nbogus = 1\n"), ParseError);
}

TEST_CASE("fact loading validates arity against the spec") {
  TransducerSpec spec = load_spec(corpus("ex2_dist_join.spec"));
  REQUIRE(load_instance(corpus("join_input.facts"), spec).size() == 5);
  REQUIRE(load_instance(corpus("empty.facts"), spec).empty());
  // "R(a)." against R/2
  std::string tmp = "/tmp/tdnet_bad.facts";
  {
    std::ofstream out(tmp);
    out << "R(a).\n";
  }
  REQUIRE_THROWS_AS(load_instance(tmp, spec), IoError);
}

TEST_CASE("the full corpus replays green") {
  CorpusReport rep = run_corpus(TDNET_CORPUS_DIR);
  for (const auto& f : rep.failures) INFO(f);
  REQUIRE(rep.ok());
  REQUIRE(rep.checks > 30);
}

TEST_CASE("every worked example appears exactly once in the corpus") {
  std::set<std::string> origins;
  for (const auto& e : corpus_entries()) {
    INFO(e.name);
    REQUIRE(origins.insert(e.origin).second);
  }
}

TEST_CASE("cli runs a spec and reports the output") {
  CliResult r = cli("run " + corpus("ex3_emptiness.spec") + " --input " + corpus("empty.facts") +
                    " --config " + corpus("n3_replicate.cfg"));
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("out(*): {T()}") != std::string::npos);
  REQUIRE(r.output.find("quiescence round=2") != std::string::npos);

  CliResult nonempty = cli("run " + corpus("ex3_emptiness.spec") + " --input " +
                           corpus("r_nullary.facts") + " --config " + corpus("n3_replicate.cfg") +
                           " --quiet");
  REQUIRE(nonempty.exit_code == 0);
  REQUIRE(nonempty.output == "out(*): {}\n");
}

TEST_CASE("cli output is byte-identical across invocations") {
  std::string args = "run " + corpus("ex7_tc_complement.spec") + " --input " +
                     corpus("tcc_input.facts") + " --config " + corpus("n3_rsbv.cfg");
  CliResult a = cli(args);
  CliResult b = cli(args);
  REQUIRE(a.exit_code == b.exit_code);
  REQUIRE(a.output == b.output);
  REQUIRE(!a.output.empty());
}

TEST_CASE("cli exit codes distinguish verdicts from usage errors") {
  // analyze: plain success
  CliResult ok = cli("analyze " + corpus("tc.dl"));
  REQUIRE(ok.exit_code == 0);
  REQUIRE(ok.output.find("monotone chained recursion-bounded hashing coordination-free(rsfd)") !=
          std::string::npos);

  // verdict-negative: divergent independence
  CliResult div = cli("check-independence " + corpus("ex6_maxkey.spec") + " --input " +
                      corpus("unchained_input.facts") + " --dimension strategy");
  REQUIRE(div.exit_code == 1);
  REQUIRE(div.output.find("verdict divergent") != std::string::npos);
  REQUIRE(div.output.find("witness-a") != std::string::npos);

  // verdict-negative: rejected rewrite
  CliResult rej = cli("rewrite " + corpus("unchained.dl") + " --target hashing");
  REQUIRE(rej.exit_code == 1);

  // usage: missing file
  CliResult missing = cli("analyze /nonexistent/query.dl");
  REQUIRE(missing.exit_code == 2);

  // usage: malformed program
  std::string bad = "/tmp/tdnet_bad.dl";
  {
    std::ofstream out(bad);
    out << "decl R/1.\nQ(u <- R(u).\n";
  }
  CliResult parse_err = cli("analyze " + bad);
  REQUIRE(parse_err.exit_code == 2);

  // usage: unknown subcommand
  REQUIRE(cli("frobnicate").exit_code == 2);
}

TEST_CASE("cli rewrite output re-parses") {
  std::string out = "/tmp/tdnet_rewrite.spec";
  CliResult r = cli("rewrite " + corpus("tc.dl") + " --target hashing -o " + out);
  REQUIRE(r.exit_code == 0);
  TransducerSpec spec = load_spec(out);
  REQUIRE(!spec.rules.empty());

  CliResult inj = cli("rewrite " + corpus("ex3_emptiness.spec") + " --target snapshot-generic");
  REQUIRE(inj.exit_code == 0);
  REQUIRE(inj.output.find("zznull_S") != std::string::npos);
  REQUIRE(parse_spec(inj.output).schema.emt.size() >= 2);
}

TEST_CASE("cli consistency compares the two communication functions") {
  std::string cf_cfg = "/tmp/tdnet_cf.cfg";
  {
    std::ofstream out(cf_cfg);
    out << "nodes = 3\npartition = replicate_all\ncomm = comm_free\n";
  }
  CliResult r = cli("check-consistency " + corpus("ex3_emptiness.spec") + " " +
                    corpus("ex3_emptiness.spec") + " --input " + corpus("empty.facts") +
                    " --config-a " + corpus("n3_replicate.cfg") + " --config-b " + cf_cfg);
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("verdict consistent") != std::string::npos);
}

TEST_CASE("cli coordination verdicts") {
  CliResult free_v = cli("coordination " + corpus("tc_local.spec") + " --input " +
                         corpus("tc_edges.facts"));
  REQUIRE(free_v.exit_code == 0);
  REQUIRE(free_v.output.find("verdict free") != std::string::npos);

  CliResult not_free = cli("coordination " + corpus("ex6_broadcast.spec") + " --input " +
                           corpus("unchained_input.facts"));
  REQUIRE(not_free.exit_code == 1);
  REQUIRE(not_free.output.find("verdict not-free") != std::string::npos);
}

TEST_CASE("cli corpus subcommand") {
  CliResult r = cli("corpus --dir " + std::string(TDNET_CORPUS_DIR) + " --all");
  REQUIRE(r.exit_code == 0);
  REQUIRE(r.output.find("failures=0") != std::string::npos);
}
