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

#ifndef TDNET_CORPUS_HPP_
#define TDNET_CORPUS_HPP_

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tdnet/analyzer.hpp"
#include "tdnet/io.hpp"
#include "tdnet/network.hpp"
#include "tdnet/print.hpp"

namespace tdnet {

/// One run expectation: configuration, input, and either agreement with the
/// single-node reference or a deliberate mismatch (the wrongness witnesses).
struct CorpusRun {
  std::string label;
  Configuration cfg;
  std::string input_file;    // empty means the empty instance
  std::string inline_input;  // literal facts, used when input_file is empty
  bool expect_oracle = true; // false: the run must NOT reproduce the reference
  bool query_oracle = false; // reference = the query's evaluation, not the
                             // spec's trivial run (for specs that are wrong
                             // even on one node)
};

struct CorpusClass {
  bool monotone, chained, recursion_bounded, hashing;
  CoordClass rsfd_class;
};

struct CorpusEntry {
  std::string name;
  std::string origin;  // which worked example this reproduces
  std::string query_file;
  std::string spec_file;
  std::optional<CorpusClass> expect_class;  // checked on the query file
  std::vector<CorpusRun> runs;              // checked on the spec file
};

namespace detail {

inline Configuration corpus_cfg(int n, PartitionFunction p,
                                CommunicationKind comm = CommunicationKind::Hashing,
                                HashFamily h = {}) {
  Configuration cfg;
  for (int i = 1; i <= n; ++i) cfg.nodes.insert(i);
  cfg.partition = std::move(p);
  cfg.hash_family = h.active.empty() ? HashFamily::seeded(7, cfg.nodes) : std::move(h);
  cfg.comm = comm;
  cfg.max_rounds = 60;
  return cfg;
}

}  // namespace detail

inline const std::vector<CorpusEntry>& corpus_entries() {
  static const std::vector<CorpusEntry> entries = [] {
    using PF = PartitionFunction;
    std::vector<CorpusEntry> es;

    es.push_back({"local_join", "local join transducer", "join.dl", "ex1_join.spec",
                  CorpusClass{true, true, true, true, CoordClass::None},
                  {{"trivial", detail::corpus_cfg(1, PF::replicate_all()), "join_input.facts", "", true},
                   {"n3", detail::corpus_cfg(3, PF::replicate_all()), "join_input.facts", "", true}}});

    es.push_back({"dist_join", "broadcast distributed join", "", "ex2_dist_join.spec",
                  std::nullopt,
                  {{"n3-split", detail::corpus_cfg(3, PF::hash_split(9)), "join_input.facts", "", true},
                   {"n2-single", detail::corpus_cfg(2, PF::single_node(2)), "join_input.facts", "", true}}});

    es.push_back({"emptiness", "emptiness test", "emptiness.dl", "ex3_emptiness.spec",
                  CorpusClass{false, false, true, false, CoordClass::Snapshot},
                  {{"n3-empty", detail::corpus_cfg(3, PF::replicate_all()), "empty.facts", "", true},
                   {"n3-nonempty", detail::corpus_cfg(3, PF::single_node(1)), "r_nullary.facts", "", true},
                   {"n2-empty", detail::corpus_cfg(2, PF::hash_split(3)), "empty.facts", "", true}}});

    es.push_back({"hash_join", "hash-partitioned join", "", "ex4_hashed_join.spec",
                  std::nullopt,
                  {{"n3-split", detail::corpus_cfg(3, PF::hash_split(5)), "join_input.facts", "", true}}});

    es.push_back(
        {"wrong_keys", "join keyed on the wrong column", "", "ex5_wrong_keys.spec",
         std::nullopt,
         {{"n2-adversarial",
           detail::corpus_cfg(2, PF::replicate_all(), CommunicationKind::Hashing,
                              HashFamily::pinned({{Constant("b"), 1}, {Constant("c"), 2}},
                                                 {1, 2})),
           "", "R(a,b).\nT(a,c).\n", false}}});

    es.push_back({"unchained", "whole-R-if-T-nonempty", "unchained.dl", "ex6_broadcast.spec",
                  CorpusClass{true, false, true, false, CoordClass::Broadcast},
                  {{"n3-bcast", detail::corpus_cfg(3, PF::hash_split(2)), "unchained_input.facts", "", true}}});

    es.push_back(
        {"unchained_maxkey", "whole-R-if-T-nonempty, maximal keys", "", "ex6_maxkey.spec",
         std::nullopt,
         {{"n3-adversarial",
           detail::corpus_cfg(3, PF::replicate_all(), CommunicationKind::Hashing,
                              HashFamily::pinned({{Constant("a"), 1},
                                                  {Constant("b"), 1},
                                                  {Constant("c"), 2},
                                                  {Constant("d"), 2},
                                                  {Constant("e"), 2},
                                                  {Constant("f"), 2},
                                                  {Constant("g"), 3}},
                                                 {1, 2, 3})),
           "unchained_input.facts", "", false}}});

    es.push_back({"closure_complement", "T minus the closure of R", "tc_complement.dl",
                  "ex7_tc_complement.spec",
                  CorpusClass{false, true, false, false, CoordClass::Synchronized},
                  {{"n3-early-negation", detail::corpus_cfg(3, PF::hash_split(13)),
                    "tcc_input.facts", "", false, true}}});

    es.push_back({"closure_complement_staged", "staged variant of the complement", "",
                  "ex7_staged.spec", std::nullopt,
                  {{"n3", detail::corpus_cfg(3, PF::hash_split(4)), "tcc_input.facts", "", true}}});

    es.push_back({"closure_local_emit", "closure by local growth", "tc.dl", "tc_local.spec",
                  CorpusClass{true, true, true, true, CoordClass::None},
                  {{"pooled",
                    detail::corpus_cfg(2, PF::single_node(1), CommunicationKind::Hashing,
                                       HashFamily::constant(1)),
                    "tc_edges.facts", "", true}}});

    es.push_back({"neg_select", "negation with aligned keys", "negselect.dl", "negselect.spec",
                  CorpusClass{false, true, true, true, CoordClass::Snapshot},
                  {{"n3-split", detail::corpus_cfg(3, PF::hash_split(6)), "negselect_input.facts", "", true},
                   {"n2-replicate", detail::corpus_cfg(2, PF::replicate_all()), "negselect_input.facts", "", true}}});

    es.push_back({"filtered_closure", "closure over filtered edges", "filtered_tc.dl", "",
                  CorpusClass{false, true, true, true, CoordClass::Snapshot},
                  {}});

    // the filter relation must be installed everywhere for the counts to be
    // complete, so these runs replicate (or explicitly co-locate) F
    es.push_back({"filter_count", "filter then count", "", "filter_count.spec", std::nullopt,
                  {{"n3-replicate", detail::corpus_cfg(3, PF::replicate_all()), "",
                    "R(a,1).\nR(a,2).\nR(b,3).\nF(a).\nF(b).\n", true}}});

    es.push_back(
        {"filter_combiner_count", "filter and count with sender-side partials", "",
         "filter_monotone_count.spec", std::nullopt,
         {{"n2-explicit",
           detail::corpus_cfg(
               2, PF::explicit_parts(
                      {{1, parse_instance("R(a,1).\nF(a).\nF(b).\n")},
                       {2, parse_instance("R(a,2).\nR(a,3).\nR(b,7).\nF(a).\nF(b).\n")}})),
           "", "R(a,1).\nR(a,2).\nR(a,3).\nR(b,7).\nF(a).\nF(b).\n", true}}});

    es.push_back(
        {"local_count", "count of the local fragment", "", "local_count.spec", std::nullopt,
         {{"n2-spread",
           detail::corpus_cfg(2, PF::replicate_all(), CommunicationKind::Hashing,
                              HashFamily::pinned({{Constant("a"), 1}, {Constant("b"), 2}},
                                                 {1, 2})),
           "", "R(a).\nR(b).\n", false}}});

    es.push_back({"union_query", "union of two relations", "union_pairs.dl", "", std::nullopt, {}});
    es.push_back({"projection_filter", "filtered projection", "proj_filter.dl", "", std::nullopt, {}});
    es.push_back({"join_minus_join", "join with negated join", "nonmono_join.dl", "", std::nullopt, {}});
    es.push_back({"rsync_unchained", "unchained query with a local answer path", "",
                  "rsync_unchained.spec", std::nullopt,
                  {{"n2", detail::corpus_cfg(2, PF::replicate_all()), "unchained_input.facts", "", true}}});
    return es;
  }();
  return entries;
}

struct CorpusReport {
  int checks = 0;
  std::vector<std::string> failures;
  bool ok() const { return failures.empty(); }
};

/// Replays every corpus expectation: classification of the query files,
/// round-trips through the printer, and run outputs against the single-node
/// reference (or deliberately against it, for the wrongness witnesses).
inline CorpusReport run_corpus(const std::string& dir,
                               const std::function<void(const std::string&)>& log = {}) {
  CorpusReport rep;
  auto fail = [&](const std::string& msg) { rep.failures.push_back(msg); };
  auto note = [&](const std::string& msg) {
    if (log) log(msg);
  };

  for (const auto& e : corpus_entries()) {
    if (!e.query_file.empty()) {
      ++rep.checks;
      Program q = load_program(dir + "/" + e.query_file);
      if (!(parse_program(print_program(q)) == q)) fail(e.name + ": query round-trip");
      if (e.expect_class) {
        TaxonomyReport rep_q = classify(q);
        const CorpusClass& want = *e.expect_class;
        if (rep_q.monotone != want.monotone || rep_q.chained != want.chained ||
            rep_q.recursion_bounded != want.recursion_bounded ||
            rep_q.hashing != want.hashing ||
            rep_q.coordination_class.at("rsfd") != want.rsfd_class) {
          fail(e.name + ": classification mismatch");
        }
      }
      note(e.name + ": query checks passed");
    }
    if (e.spec_file.empty()) continue;

    ++rep.checks;
    TransducerSpec spec = load_spec(dir + "/" + e.spec_file);
    if (!(parse_spec(print_spec(spec), spec.name) == spec)) fail(e.name + ": spec round-trip");

    for (const auto& r : e.runs) {
      ++rep.checks;
      Instance input = r.input_file.empty() ? parse_instance(r.inline_input)
                                            : load_instance(dir + "/" + r.input_file, spec);
      Instance reference;
      if (r.query_oracle) {
        Program q = load_program(dir + "/" + e.query_file);
        std::set<std::string> outs;
        for (const auto& d : spec.schema.out) outs.insert(d.name);
        reference = evaluate(q, input).restrict_to(outs);
      } else {
        Configuration trivial;
        trivial.nodes = {1};
        trivial.hash_family = HashFamily::constant(1);
        trivial.max_rounds = 80;
        Trace ref = run(spec, trivial, input);
        if (!ref.quiesced()) {
          fail(e.name + "/" + r.label + ": reference run never quiesced");
          continue;
        }
        reference = ref.out_star;
      }
      Trace t = run(spec, r.cfg, input);
      if (!t.quiesced()) {
        fail(e.name + "/" + r.label + ": run never quiesced");
        continue;
      }
      bool agrees = t.out_star == reference;
      if (agrees != r.expect_oracle) {
        fail(e.name + "/" + r.label + (r.expect_oracle
                                           ? ": output differs from the reference: got " +
                                                 t.out_star.to_string() + ", want " +
                                                 reference.to_string()
                                           : ": expected a wrong output but the run agreed"));
      } else {
        note(e.name + "/" + r.label + ": ok");
      }
    }
  }
  return rep;
}

}  // namespace tdnet

#endif  // TDNET_CORPUS_HPP_
