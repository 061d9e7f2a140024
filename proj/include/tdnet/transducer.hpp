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

#ifndef TDNET_TRANSDUCER_HPP_
#define TDNET_TRANSDUCER_HPP_

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"
#include "tdnet/eval.hpp"
#include "tdnet/stratify.hpp"

namespace tdnet {

using NodeId = int;

struct TransducerError : std::runtime_error {
  explicit TransducerError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Per-node state: immutable db and sys, memory, accumulated output, and the
/// round of the last transition.
struct LocalState {
  Instance db, mem, out, sys;
  int clock = 0;

  friend bool operator==(const LocalState& a, const LocalState& b) {
    return a.db == b.db && a.mem == b.mem && a.out == b.out && a.sys == b.sys;
  }
};

/// Syntactic transducer classes.
struct Flags {
  bool space_oblivious = false;
  bool time_oblivious = false;
  bool oblivious = false;
  bool inflationary = false;
  bool monotone = false;
};

inline Flags flags_of(const TransducerSpec& spec) {
  Flags f;
  bool reads_sys = false, reads_time = false, has_neg = false, has_strat_agg = false,
       has_del = false;
  for (const auto& r : spec.rules) {
    if (r.target == RuleTarget::Del) has_del = true;
    if (r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum) has_strat_agg = true;
    for (const auto& l : r.body) {
      if (!l.is_atom()) continue;
      if (l.atom.relation == kIdRel || l.atom.relation == kAllRel) reads_sys = true;
      if (l.atom.relation == kTimeRel) reads_time = true;
      if (l.kind == Literal::Kind::Negative) has_neg = true;
    }
  }
  f.space_oblivious = !reads_sys;
  f.time_oblivious = !reads_time;
  f.oblivious = f.space_oblivious && f.time_oblivious;
  f.inflationary = !has_del;
  f.monotone = !has_neg && !has_strat_agg;
  return f;
}

struct TransitionResult {
  LocalState state;
  Instance emitted;                       // the emission query result, exactly
  bool derived_mem_or_out = false;        // any Q_ins/Q_out derivation fired
  std::set<std::string> derived_locals;   // which mem/out relations got derived
};

namespace detail {

inline std::string target_head(const std::string& rel, RuleTarget t) {
  switch (t) {
    case RuleTarget::Ins: return rel + "#ins";
    case RuleTarget::Del: return rel + "#del";
    case RuleTarget::Out: return rel + "#out";
    case RuleTarget::Emt: return rel + "#emt";
    case RuleTarget::Aux: return rel;
  }
  return rel;
}

}  // namespace detail

/// A spec compiled for repeated transitions: the four query classes plus the
/// auxiliary rules form one per-transition stratified program whose heads are
/// renamed result relations, so schema relations are read-only inputs.
class CompiledTransducer {
 public:
  explicit CompiledTransducer(const TransducerSpec& spec) : spec_(spec) {
    for (const auto& r : spec.rules) {
      Rule renamed = r;
      renamed.head.relation = detail::target_head(r.head.relation, r.target);
      rules_.push_back(std::move(renamed));
    }
    strat_ = detail::stratify_rules(rules_, {});
    for (const auto& d : spec.schema.emt) emt_arity_[d.name] = d.arity;
  }

  const TransducerSpec& spec() const { return spec_; }

  /// Stratum of an emission head inside the per-transition program; orders
  /// same-round emissions by derivation stage (per-channel FIFO keeps it).
  int emission_stratum(const std::string& emt_rel) const {
    return strat_.stratum(emt_rel + "#emt");
  }

  /// One timed local transition over state, received facts and the injected
  /// clock fact Time(clock).
  TransitionResult transition(const LocalState& state, const Instance& inbox, int clock,
                              const EvalLimits& lim = {}) const {
    for (const auto& [rel, tuples] : inbox.relations()) {
      auto it = emt_arity_.find(rel);
      if (it == emt_arity_.end() && !tuples.empty())
        throw TransducerError("inbox fact over non-emit relation " + rel);
      for (const auto& t : tuples)
        if (it != emt_arity_.end() && static_cast<int>(t.size()) != it->second)
          throw TransducerError("inbox fact arity mismatch for " + rel);
    }
    if (clock < state.clock)
      throw TransducerError("clock must not run backwards");

    Instance in = state.db;
    in.merge(state.mem);
    in.merge(state.out);
    in.merge(state.sys);
    in.merge(inbox);
    in.insert(kTimeRel, Tuple{Constant(static_cast<std::int64_t>(clock))});

    Instance result = detail::evaluate_prepared(rules_, strat_, in, lim);

    TransitionResult res;
    res.state = state;
    res.state.clock = clock;

    // J_mem = (I_mem ∪ I+_ins) \ I−_del with no-op conflict resolution
    Instance new_mem;
    for (const auto& d : spec_.schema.mem) {
      const auto& ins = result.relation(d.name + "#ins");
      const auto& del = result.relation(d.name + "#del");
      std::set<Tuple> cur = state.mem.relation(d.name);
      for (const auto& t : ins)
        if (!del.count(t)) cur.insert(t);
      for (const auto& t : del)
        if (!ins.count(t)) cur.erase(t);
      for (const auto& t : cur) new_mem.insert(d.name, t);
      if (!ins.empty()) {
        res.derived_mem_or_out = true;
        res.derived_locals.insert(d.name);
      }
    }
    res.state.mem = std::move(new_mem);

    for (const auto& d : spec_.schema.out) {
      const auto& derived = result.relation(d.name + "#out");
      for (const auto& t : derived) res.state.out.insert(d.name, t);
      if (!derived.empty()) {
        res.derived_mem_or_out = true;
        res.derived_locals.insert(d.name);
      }
    }

    for (const auto& d : spec_.schema.emt)
      for (const auto& t : result.relation(d.name + "#emt")) res.emitted.insert(d.name, t);
    return res;
  }

 private:
  TransducerSpec spec_;
  std::vector<Rule> rules_;
  Stratification strat_;
  std::map<std::string, int> emt_arity_;
};

/// Seed state for node `me`: Id(me) plus All(j) for every actively reachable
/// node. For non-partitioned families `active` equals `nodes`.
inline LocalState configure(const TransducerSpec& spec, const std::set<NodeId>& nodes, NodeId me,
                            const std::set<NodeId>& active) {
  (void)spec;
  if (!nodes.count(me)) throw TransducerError("node " + std::to_string(me) + " not in the network");
  LocalState s;
  s.sys.insert(kIdRel, Tuple{Constant(static_cast<std::int64_t>(me))});
  for (NodeId j : active)
    s.sys.insert(kAllRel, Tuple{Constant(static_cast<std::int64_t>(j))});
  return s;
}

inline TransitionResult local_transition(const TransducerSpec& spec, const LocalState& state,
                                         const Instance& inbox, int clock) {
  return CompiledTransducer(spec).transition(state, inbox, clock);
}

}  // namespace tdnet

#endif  // TDNET_TRANSDUCER_HPP_
