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

#ifndef TDNET_ANALYZER_HPP_
#define TDNET_ANALYZER_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/eval.hpp"
#include "tdnet/network.hpp"
#include "tdnet/parse.hpp"
#include "tdnet/print.hpp"
#include "tdnet/strategy.hpp"
#include "tdnet/stratify.hpp"
#include "tdnet/transducer.hpp"

namespace tdnet {

// ---------------------------------------------------------------------------
// Chained queries
// ---------------------------------------------------------------------------

/// A rule body is chained when its relational atoms form one connected
/// component of the variable-sharing graph, with no nullary atom. A single
/// positive non-nullary atom passes by definition. Wildcards are fresh per
/// occurrence and never create edges; comparisons and arithmetic are not
/// vertices.
inline bool rule_is_chained(const Rule& r) {
  std::vector<const Atom*> atoms;
  std::vector<bool> positive;
  for (const auto& l : r.body) {
    if (!l.is_atom()) continue;
    atoms.push_back(&l.atom);
    positive.push_back(l.kind == Literal::Kind::Positive);
  }
  if (atoms.empty()) return true;  // fact rules and pure computations
  for (const auto* a : atoms)
    if (a->terms.empty()) return false;  // nullary atom
  if (atoms.size() == 1) return positive[0];

  auto vars = [](const Atom& a) {
    std::set<std::string> vs;
    for (const auto& t : a.terms)
      if (t.is_var() && t.var.rfind("_#", 0) != 0) vs.insert(t.var);
    return vs;
  };
  std::vector<std::set<std::string>> atom_vars;
  for (const auto* a : atoms) atom_vars.push_back(vars(*a));

  std::vector<bool> seen(atoms.size(), false);
  std::vector<std::size_t> frontier{0};
  seen[0] = true;
  while (!frontier.empty()) {
    std::size_t i = frontier.back();
    frontier.pop_back();
    for (std::size_t j = 0; j < atoms.size(); ++j) {
      if (seen[j]) continue;
      bool shares = false;
      for (const auto& v : atom_vars[i])
        if (atom_vars[j].count(v)) shares = true;
      if (shares) {
        seen[j] = true;
        frontier.push_back(j);
      }
    }
  }
  for (bool s : seen)
    if (!s) return false;
  return true;
}

struct ChainReport {
  bool chained = true;
  std::vector<Rule> offending;
};

inline ChainReport is_chained(const Program& p) {
  ChainReport rep;
  for (const auto& r : p.rules) {
    if (!rule_is_chained(r)) {
      rep.chained = false;
      rep.offending.push_back(r);
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Recursion boundedness
// ---------------------------------------------------------------------------

/// True iff every recursive component sits in the topmost stratum of the
/// canonical (finest) stratification. Any coarser legal stratification only
/// merges components upward, so checking the finest one decides the
/// universally quantified definition.
inline bool is_recursion_bounded(const Program& p) {
  Stratification s = stratify(p);
  int top = s.top_stratum();
  for (int scc : s.recursive_sccs)
    if (s.scc_stratum.at(scc) != top) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Taxonomy
// ---------------------------------------------------------------------------

enum class CoordClass { None, Snapshot, Broadcast, Synchronized };

inline const char* to_string(CoordClass c) {
  switch (c) {
    case CoordClass::None: return "none";
    case CoordClass::Snapshot: return "snapshot";
    case CoordClass::Broadcast: return "broadcast";
    case CoordClass::Synchronized: return "synchronized";
  }
  return "";
}

struct TaxonomyReport {
  bool monotone = false;
  bool chained = false;
  bool recursion_bounded = false;
  bool hashing = false;
  std::map<std::string, bool> embarrassingly_parallel;  // per semantics name
  std::map<std::string, CoordClass> coordination_class;
  std::map<std::string, bool> requires_injected_protocol;
  std::vector<std::string> notes;
};

namespace detail {

inline TaxonomyReport classify_rules(const std::vector<Rule>& rules,
                                     const std::vector<Rule>& strat_rules) {
  TaxonomyReport rep;

  bool has_neg = false, has_strat_agg = false;
  for (const auto& r : rules) {
    if (r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum) has_strat_agg = true;
    for (const auto& l : r.body)
      if (l.kind == Literal::Kind::Negative) has_neg = true;
  }
  rep.monotone = !has_neg && !has_strat_agg;
  if (!rep.monotone)
    rep.notes.push_back(
        "monotone flag is the syntactic class; a semantically monotone program "
        "may be reported unknown-monotone");

  rep.chained = true;
  for (const auto& r : rules) {
    if (!rule_is_chained(r)) {
      rep.chained = false;
      rep.notes.push_back("unchained rule: " + detail::rule_text(r, false));
    }
  }

  Stratification s = stratify_rules(strat_rules, {});
  int top = s.top_stratum();
  rep.recursion_bounded = true;
  for (int scc : s.recursive_sccs) {
    if (s.scc_stratum.at(scc) != top) {
      rep.recursion_bounded = false;
      std::string comp;
      for (const auto& n : s.sccs[scc]) comp += (comp.empty() ? "" : ", ") + n;
      rep.notes.push_back("recursive component {" + comp + "} below the top stratum");
    }
  }

  rep.hashing = (rep.monotone && rep.chained) || (rep.recursion_bounded && rep.chained);
  if (!rep.hashing)
    rep.notes.push_back("not shown hashing: outside the chained-monotone and "
                        "recursion-bounded-chained classes");

  rep.embarrassingly_parallel["rsfd"] =
      rep.monotone || (rep.recursion_bounded && rep.chained);
  rep.embarrassingly_parallel["rsbv"] = rep.monotone;
  rep.embarrassingly_parallel["rsync"] = rep.monotone;

  CoordClass rsfd;
  if (rep.monotone) {
    rsfd = rep.chained ? CoordClass::None : CoordClass::Broadcast;
  } else if (!rep.recursion_bounded) {
    rsfd = CoordClass::Synchronized;
  } else {
    rsfd = CoordClass::Snapshot;
    if (!rep.chained)
      rep.notes.push_back(
          "non-monotone unchained recursion-bounded: snapshot sealing plus "
          "broadcast shipping of the data");
  }
  rep.coordination_class["rsfd"] = rsfd;
  rep.coordination_class["rsbv"] = rsfd;
  rep.coordination_class["rsync"] = rep.monotone ? CoordClass::None : rsfd;

  rep.requires_injected_protocol["rsfd"] = false;
  rep.requires_injected_protocol["rsbv"] = rsfd == CoordClass::Snapshot;
  rep.requires_injected_protocol["rsync"] =
      rep.coordination_class["rsync"] == CoordClass::Snapshot;
  return rep;
}

}  // namespace detail

inline TaxonomyReport classify(const Program& q) {
  return detail::classify_rules(q.rules, q.rules);
}

/// Spec-level classification over the union of the four query classes.
/// Insertion and deletion rules read the previous round's memory, so their
/// negated memory literals (the Ready toggle, stage bootstraps) are
/// cross-round conditions, not recursion through negation, and are dropped
/// from the stratification view.
inline TaxonomyReport classify(const TransducerSpec& spec) {
  std::set<std::string> mem = spec.schema.names(spec.schema.mem);
  std::vector<Rule> strat_rules;
  for (const auto& r : spec.rules) {
    Rule flat = r;
    if (r.target == RuleTarget::Ins || r.target == RuleTarget::Del) {
      std::vector<Literal> body;
      for (const auto& l : flat.body) {
        if (l.kind == Literal::Kind::Negative && mem.count(l.atom.relation)) continue;
        body.push_back(l);
      }
      flat.body = std::move(body);
    }
    strat_rules.push_back(flat);
  }
  try {
    return detail::classify_rules(spec.rules, strat_rules);
  } catch (const NotStratifiableError& e) {
    // round-level recursion through negation: report instead of failing
    TaxonomyReport rep = detail::classify_rules(spec.rules, {});
    rep.recursion_bounded = false;
    rep.hashing = false;
    for (auto& [sem, v] : rep.embarrassingly_parallel) v = v && rep.monotone;
    for (auto& [sem, v] : rep.coordination_class)
      if (!rep.monotone) v = CoordClass::Synchronized;
    rep.notes.push_back(std::string("round-level dependency graph: ") + e.what());
    return rep;
  }
}

// ---------------------------------------------------------------------------
// Live / safe / proper-instance audit
// ---------------------------------------------------------------------------

struct StrategyViolation {
  std::string rule;      // text of the offending rule (when rule-scoped)
  std::string relation;  // the emit relation involved
  std::string detail;
};

struct StrategyAudit {
  std::vector<StrategyViolation> liveness;
  std::vector<StrategyViolation> safety;
  std::vector<StrategyViolation> proper_instance;
  bool clean() const { return liveness.empty() && safety.empty() && proper_instance.empty(); }
};

namespace detail {

/// Every binding of the positive part of a rule over `pool`, as grounded
/// atoms. Implemented by evaluating a synthetic rule whose head collects all
/// variables of the positive literals.
inline std::vector<std::map<std::string, Constant>> positive_bindings(const Rule& r,
                                                                      const Instance& pool) {
  Rule probe;
  probe.head.relation = "#probe";
  std::set<std::string> vars;
  for (const auto& l : r.body) {
    if (l.kind == Literal::Kind::Positive) {
      probe.body.push_back(l);
      for (const auto& t : l.atom.terms)
        if (t.is_var()) vars.insert(t.var);
    } else if (l.kind == Literal::Kind::Compare || l.kind == Literal::Kind::Arith) {
      probe.body.push_back(l);
      if (l.kind == Literal::Kind::Arith && l.res.is_var()) vars.insert(l.res.var);
    }
  }
  std::vector<std::string> ordered(vars.begin(), vars.end());
  for (const auto& v : ordered) probe.head.terms.push_back(Term::make_var(v));
  if (rule_safety_error(probe)) return {};

  auto pairs = NaiveMatcher(probe, pool).all_bindings();
  std::vector<std::map<std::string, Constant>> out;
  for (const auto& [g, o] : pairs) {
    (void)o;
    std::map<std::string, Constant> env;
    for (std::size_t i = 0; i < ordered.size(); ++i) env[ordered[i]] = g[i];
    out.push_back(std::move(env));
  }
  return out;
}

inline Fact ground_atom(const Atom& a, const std::map<std::string, Constant>& env) {
  Fact f;
  f.relation = a.relation;
  for (const auto& t : a.terms) f.tuple.push_back(t.is_var() ? env.at(t.var) : t.value);
  return f;
}

}  // namespace detail

/// Audits one configured run per sample instance: liveness (joining facts
/// must meet somewhere), safety (negated emit literals must be evaluated
/// against globally complete instances) and proper delivery (a hashed fact
/// addressed to a node is in its state once a round has passed).
inline StrategyAudit check_strategy(const TransducerSpec& spec, const Configuration& cfg,
                                    const std::vector<Instance>& samples) {
  StrategyAudit audit;
  KeySet keys = key_set_of(spec);
  std::set<std::string> emt = spec.schema.names(spec.schema.emt);

  for (const auto& sample : samples) {
    Trace t = run(spec, cfg, sample);

    // the pool of everything that ever existed anywhere in this run
    Instance pool = sample;
    for (const auto& snap : t.rounds) {
      for (const auto& [i, st] : snap.nodes) {
        pool.merge(st.mem);
        pool.merge(st.out);
      }
      for (const auto& [i, rcv] : snap.received) pool.merge(rcv);
      for (const auto& [i, em] : snap.emitted) pool.merge(em);
    }

    for (const auto& r : spec.rules) {
      // liveness: positive emit atoms of one satisfying body instance must
      // share at least one destination
      std::vector<const Atom*> pos_emt;
      for (const auto& l : r.body)
        if (l.kind == Literal::Kind::Positive && emt.count(l.atom.relation))
          pos_emt.push_back(&l.atom);
      if (pos_emt.size() >= 2) {
        for (const auto& env : detail::positive_bindings(r, pool)) {
          std::set<NodeId> meet = cfg.nodes;
          std::string atoms_text;
          for (const auto* a : pos_emt) {
            Fact f = detail::ground_atom(*a, env);
            auto dsts = hash_address(f, keys, cfg.hash_family);
            std::set<NodeId> inter;
            for (NodeId n : meet)
              if (dsts.count(n)) inter.insert(n);
            meet = std::move(inter);
            atoms_text += (atoms_text.empty() ? "" : " , ") + f.to_string();
          }
          if (meet.empty()) {
            audit.liveness.push_back({detail::rule_text(r, true), pos_emt.front()->relation,
                                      "joining facts never co-located: " + atoms_text});
            break;
          }
        }
      }

      // safety: every fact of a negated emit-derived literal must be
      // addressed to every node
      for (const auto& l : r.body) {
        if (l.kind != Literal::Kind::Negative || !emt.count(l.atom.relation)) continue;
        for (const auto& tuple : pool.relation(l.atom.relation)) {
          Fact f{l.atom.relation, tuple};
          auto dsts = hash_address(f, keys, cfg.hash_family);
          bool covers_all = true;
          for (NodeId n : cfg.nodes)
            if (!dsts.count(n)) covers_all = false;
          if (!covers_all) {
            audit.safety.push_back({detail::rule_text(r, true), l.atom.relation,
                                    "negation evaluated at nodes outside the address set of " +
                                        f.to_string()});
            break;
          }
        }
      }
    }

    // proper instances: one round after emission, a fact addressed to a node
    // must be in its state
    std::map<Fact, int> first_emit;
    for (const auto& e : t.events)
      if (e.kind == TraceEvent::Kind::Emit && !first_emit.count(e.fact))
        first_emit[e.fact] = e.round;
    for (const auto& snap : t.rounds) {
      for (const auto& [f, r0] : first_emit) {
        if (snap.round <= r0) continue;
        for (NodeId n : hash_address(f, keys, cfg.hash_family)) {
          if (!snap.received.at(n).contains(f)) {
            audit.proper_instance.push_back(
                {"", f.relation,
                 f.to_string() + " addressed to node " + std::to_string(n) +
                     " still missing at round " + std::to_string(snap.round)});
          }
        }
      }
    }
  }
  return audit;
}

}  // namespace tdnet

#endif  // TDNET_ANALYZER_HPP_
