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

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "tdnet/analyzer.hpp"
#include "tdnet/causality.hpp"
#include "tdnet/config.hpp"
#include "tdnet/corpus.hpp"
#include "tdnet/io.hpp"
#include "tdnet/network.hpp"
#include "tdnet/print.hpp"
#include "tdnet/rewriter.hpp"
#include "tdnet/trace_io.hpp"

namespace {

using namespace tdnet;

constexpr int kOk = 0;
constexpr int kNegative = 1;  // verdict-negative: divergent, inconsistent, bottom, rejected
constexpr int kUsage = 2;

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string config_text(const Configuration& cfg) {
  std::ostringstream os;
  os << "nodes = [" << detail::node_set_text(cfg.nodes) << "]  t0 = " << cfg.t0;
  os << "  partition = ";
  switch (cfg.partition.mode) {
    case PartitionFunction::Mode::ReplicateAll: os << "replicate_all"; break;
    case PartitionFunction::Mode::SingleNode: os << "single_node(" << cfg.partition.node << ")"; break;
    case PartitionFunction::Mode::HashSplit: os << "hash_split(seed=" << cfg.partition.seed << ")"; break;
    case PartitionFunction::Mode::Explicit: os << "explicit{...}"; break;
  }
  os << "  hash = ";
  switch (cfg.hash_family.mode) {
    case HashFamily::Mode::Seeded:
      os << "seeded(seed=" << cfg.hash_family.seed << ", active=["
         << detail::node_set_text(cfg.hash_family.active) << "])";
      break;
    case HashFamily::Mode::Constant:
      os << "constant(" << *cfg.hash_family.active.begin() << ")";
      break;
    case HashFamily::Mode::Pinned: {
      os << "pinned{";
      bool first = true;
      for (const auto& [bytes, n] : cfg.hash_family.pins) {
        if (!first) os << ", ";
        first = false;
        os << (bytes.size() > 2 ? bytes.substr(2) : bytes) << ":" << n;
      }
      os << "}";
      break;
    }
  }
  os << "  comm = " << to_string(cfg.comm) << "  semantics = " << cfg.semantics.name();
  if (cfg.semantics.kind == DeliverySemantics::Kind::Rsbv)
    os << "(var=" << cfg.semantics.var << ", fifo=" << (cfg.semantics.fifo ? "true" : "false") << ")";
  if (cfg.semantics.kind == DeliverySemantics::Kind::Rsync)
    os << "(max_delay=" << cfg.semantics.max_delay << ")";
  os << "  seed = " << cfg.seed;
  return os.str();
}

struct CommonRunFlags {
  std::string input_file;
  std::string config_file;
  std::optional<std::int64_t> seed_override;
  std::optional<int> max_rounds_override;
};

Configuration load_config(const CommonRunFlags& flags) {
  Configuration cfg = parse_run_config(slurp(flags.config_file));
  if (flags.seed_override) cfg.seed = static_cast<std::uint64_t>(*flags.seed_override);
  if (flags.max_rounds_override) cfg.max_rounds = *flags.max_rounds_override;
  return cfg;
}

int cmd_run(const std::string& spec_file, const CommonRunFlags& flags, bool quiet) {
  TransducerSpec spec = load_spec(spec_file);
  Configuration cfg = load_config(flags);
  Instance input =
      flags.input_file.empty() ? Instance{} : load_instance(flags.input_file, spec);
  Trace t = run(spec, cfg, input);
  if (!quiet) write_trace(std::cout, t);
  std::cout << out_star_text(t) << "\n";
  return t.quiesced() ? kOk : kNegative;
}

int cmd_analyze(const std::string& file, const std::string& semantics, const std::string& format) {
  TaxonomyReport rep;
  if (ends_with(file, ".spec")) {
    rep = classify(load_spec(file));
  } else {
    rep = classify(load_program(file));
  }
  if (format == "structured") {
    write_report(std::cout, rep);
  } else {
    std::cout << report_summary(rep, semantics) << "\n";
    for (const auto& n : rep.notes) std::cout << "  note: " << n << "\n";
  }
  return kOk;
}

int cmd_rewrite(const std::string& file, const std::string& target, const std::string& out_file,
                const std::vector<std::string>& outputs) {
  TransducerSpec result;
  std::set<std::string> outs(outputs.begin(), outputs.end());
  if (target == "broadcast") {
    result = to_broadcast_network(load_program(file), outs);
  } else if (target == "hashing") {
    result = to_hashing_network(load_program(file), outs);
  } else if (target == "snapshot-fifo") {
    result = inject_snapshot_fifo(load_spec(file));
  } else if (target == "snapshot-generic") {
    result = inject_snapshot_generic(load_spec(file));
  } else {
    std::cerr << "unknown rewrite target " << target << "\n";
    return kUsage;
  }
  std::string text = print_spec(result);
  if (out_file.empty() || out_file == "-") {
    std::cout << text;
  } else {
    std::ofstream out(out_file);
    if (!out) throw IoError("cannot write " + out_file);
    out << text;
  }
  return kOk;
}

int cmd_check_consistency(const std::string& spec_a, const std::string& spec_b,
                          const std::string& input_file, const std::string& cfg_a,
                          const std::string& cfg_b) {
  TransducerSpec a = load_spec(spec_a);
  TransducerSpec b = load_spec(spec_b);
  Configuration ca = parse_run_config(slurp(cfg_a));
  Configuration cb = parse_run_config(slurp(cfg_b.empty() ? cfg_a : cfg_b));
  Instance input = input_file.empty() ? Instance{} : load_instance(input_file, a);
  Trace ta = run(a, ca, input);
  Trace tb = run(b, cb, input);
  ConsistencyVerdict v = check_eventual_consistency(ta, tb);
  std::cout << "verdict " << (v.consistent ? "consistent" : "inconsistent") << "\n";
  std::cout << "left " << out_star_text(ta) << "\n";
  std::cout << "right " << out_star_text(tb) << "\n";
  return v.consistent ? kOk : kNegative;
}

int cmd_check_independence(const std::string& spec_file, const std::string& input_file,
                           const std::string& dimension, const IndependenceBudget& budget) {
  TransducerSpec spec = load_spec(spec_file);
  Instance input = input_file.empty() ? Instance{} : load_instance(input_file, spec);
  Dimension dim;
  if (dimension == "network") {
    dim = Dimension::Network;
  } else if (dimension == "time") {
    dim = Dimension::Time;
  } else if (dimension == "partition") {
    dim = Dimension::Partition;
  } else if (dimension == "strategy") {
    dim = Dimension::Strategy;
  } else if (dimension == "all") {
    dim = Dimension::All;
  } else {
    std::cerr << "unknown dimension " << dimension << "\n";
    return kUsage;
  }
  IndependenceVerdict v = check_independence(spec, input, dim, budget);
  if (v.convergent) {
    std::cout << "verdict convergent runs=" << v.runs << "\n";
    return kOk;
  }
  std::cout << "verdict divergent runs=" << v.runs << "\n";
  if (v.witness) {
    std::cout << "witness-a " << config_text(v.witness->first) << "\n";
    std::cout << "witness-b " << config_text(v.witness->second) << "\n";
  }
  if (v.outputs) {
    auto show = [](const std::optional<Instance>& o) {
      return o ? detail::instance_inline(*o) : std::string("bottom");
    };
    std::cout << "output-a " << show(v.outputs->first) << "\n";
    std::cout << "output-b " << show(v.outputs->second) << "\n";
  }
  return kNegative;
}

int cmd_coordination(const std::string& spec_file, const std::string& input_file,
                     const FreenessBudget& budget, bool dump_graph) {
  TransducerSpec spec = load_spec(spec_file);
  Instance input = input_file.empty() ? Instance{} : load_instance(input_file, spec);
  FreenessVerdict v = check_coordination_freeness(spec, input, budget);
  if (v.free) {
    std::cout << "verdict free runs=" << v.runs << "\n";
    std::cout << "witness " << config_text(*v.witness) << "\n";
    if (dump_graph) {
      Trace t = run(spec, *v.witness, input);
      SyncausalityGraph g = build_graph(t, spec);
      for (const auto& e : g.edges()) {
        const char* kind = e.kind == CausalEdge::Kind::DirectLocal      ? "local"
                           : e.kind == CausalEdge::Kind::DirectMessage ? "message"
                                                                        : "null";
        std::cout << "edge kind=" << kind << " from=" << e.from.node << "@" << e.from.round
                  << " to=" << e.to.node << "@" << e.to.round
                  << " rel=" << (e.relation.empty() ? "-" : e.relation) << "\n";
      }
    }
    return kOk;
  }
  std::cout << "verdict not-free runs=" << v.runs << " correct_runs=" << v.correct_runs << "\n";
  if (v.sample_master) {
    std::cout << "master node=" << v.sample_master->point.node
              << " round=" << v.sample_master->point.round << " relation=" << v.sample_master->relation
              << "\n";
  }
  for (const auto& n : v.notes) std::cout << "note " << n << "\n";
  return kNegative;
}

int cmd_corpus(const std::string& dir, bool verbose) {
  CorpusReport rep = run_corpus(dir, verbose ? [](const std::string& m) {
    std::cout << "  " << m << "\n";
  } : std::function<void(const std::string&)>{});
  for (const auto& f : rep.failures) std::cout << "FAIL " << f << "\n";
  std::cout << "corpus checks=" << rep.checks << " failures=" << rep.failures.size() << "\n";
  return rep.ok() ? kOk : kNegative;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stratified-Datalog transducer network simulator and analyzer"};
  app.require_subcommand(1);

  // run
  auto* runc = app.add_subcommand("run", "run a configured network to quiescence");
  std::string spec_file;
  CommonRunFlags flags;
  bool quiet = false;
  runc->add_option("spec", spec_file, "transducer spec file")->required();
  runc->add_option("--input", flags.input_file, "initial instance (fact file)");
  runc->add_option("--config", flags.config_file, "run configuration file")->required();
  std::int64_t seed_opt = -1;
  int rounds_opt = -1;
  runc->add_option("--seed", seed_opt, "override the config seed");
  runc->add_option("--max-rounds", rounds_opt, "override the round cap");
  runc->add_flag("--quiet", quiet, "only print the final output");

  // analyze
  auto* analyzec = app.add_subcommand("analyze", "classify a query or spec");
  std::string analyze_file, semantics = "rsfd", format = "text";
  analyzec->add_option("file", analyze_file, "query (.dl) or spec (.spec)")->required();
  analyzec->add_option("--semantics", semantics, "rsfd | rsbv | rsync")
      ->check(CLI::IsMember({"rsfd", "rsbv", "rsync"}));
  analyzec->add_option("--format", format, "text | structured")
      ->check(CLI::IsMember({"text", "structured"}));

  // rewrite
  auto* rewritec = app.add_subcommand("rewrite", "mechanical network constructions");
  std::string rewrite_file, target, out_file;
  std::vector<std::string> outputs;
  rewritec->add_option("file", rewrite_file, "query file (.dl), or spec (.spec) for snapshot targets")
      ->required();
  rewritec->add_option("--target", target, "broadcast | hashing | snapshot-fifo | snapshot-generic")
      ->required();
  rewritec->add_option("-o,--out", out_file, "output spec file (default stdout)");
  rewritec->add_option("--output", outputs, "designated output relation (repeatable)");

  // check-consistency
  auto* consc = app.add_subcommand("check-consistency", "compare two configured runs");
  std::string spec_a, spec_b, cons_input, cfg_a, cfg_b;
  consc->add_option("spec-a", spec_a)->required();
  consc->add_option("spec-b", spec_b)->required();
  consc->add_option("--input", cons_input, "shared initial instance");
  consc->add_option("--config-a", cfg_a, "configuration for the first spec")->required();
  consc->add_option("--config-b", cfg_b, "configuration for the second spec (defaults to the first)");

  // check-independence
  auto* indc = app.add_subcommand("check-independence", "convergence across configurations");
  std::string ind_spec, ind_input, dimension = "all";
  IndependenceBudget ind_budget;
  std::size_t ind_max = 64;
  int ind_rounds = 60;
  indc->add_option("spec", ind_spec)->required();
  indc->add_option("--input", ind_input);
  indc->add_option("--dimension", dimension, "network | time | partition | strategy | all");
  indc->add_option("--budget,--max-configs", ind_max, "enumeration cap");
  indc->add_option("--max-rounds", ind_rounds);

  // coordination
  auto* coordc = app.add_subcommand("coordination", "coordination-freeness over a budget");
  std::string coord_spec, coord_input;
  FreenessBudget coord_budget;
  std::size_t coord_max = 48;
  bool dump_graph = false;
  coordc->add_option("spec", coord_spec)->required();
  coordc->add_option("--input", coord_input);
  coordc->add_option("--budget,--max-configs", coord_max, "enumeration cap");
  coordc->add_flag("--graph", dump_graph, "dump the witness run's causality graph");

  // corpus
  auto* corpusc = app.add_subcommand("corpus", "replay the bundled example corpus");
  std::string corpus_dir = "corpus";
  bool corpus_all = false, corpus_verbose = false;
  corpusc->add_option("--dir", corpus_dir, "corpus directory");
  corpusc->add_flag("--all", corpus_all, "run every expectation");
  corpusc->add_flag("--verbose", corpus_verbose, "log every passing check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (runc->parsed()) {
      if (seed_opt >= 0) flags.seed_override = seed_opt;
      if (rounds_opt > 0) flags.max_rounds_override = rounds_opt;
      return cmd_run(spec_file, flags, quiet);
    }
    if (analyzec->parsed()) return cmd_analyze(analyze_file, semantics, format);
    if (rewritec->parsed()) return cmd_rewrite(rewrite_file, target, out_file, outputs);
    if (consc->parsed()) return cmd_check_consistency(spec_a, spec_b, cons_input, cfg_a, cfg_b);
    if (indc->parsed()) {
      ind_budget.max_configs = ind_max;
      ind_budget.max_rounds = ind_rounds;
      return cmd_check_independence(ind_spec, ind_input, dimension, ind_budget);
    }
    if (coordc->parsed()) {
      coord_budget.max_configs = coord_max;
      return cmd_coordination(coord_spec, coord_input, coord_budget, dump_graph);
    }
    if (corpusc->parsed()) return cmd_corpus(corpus_dir, corpus_verbose);
  } catch (const RewriteError& e) {
    std::cerr << "rejected: " << e.what() << "\n";
    return kNegative;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
