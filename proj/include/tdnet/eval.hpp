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

#ifndef TDNET_EVAL_HPP_
#define TDNET_EVAL_HPP_

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"
#include "tdnet/stratify.hpp"

namespace tdnet {

struct EvalError : std::runtime_error {
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EvalLimits {
  std::size_t max_facts = 2000000;
  std::size_t max_iterations = 100000;
};

namespace detail {

// ---------------------------------------------------------------------------
// Rule plans: literals ordered so that every negated atom, comparison and
// arithmetic binding runs once its variables are bound. Variables live in
// integer slots.
// ---------------------------------------------------------------------------

struct PTerm {
  bool is_const = false;
  Constant c;
  int slot = -1;
};

struct PlanStep {
  Literal::Kind kind = Literal::Kind::Positive;
  // atoms
  std::string relation;
  std::vector<PTerm> terms;
  // compare / arith
  CmpOp cmp = CmpOp::Eq;
  ArithOp arith = ArithOp::Add;
  PTerm lhs, rhs, res;
  bool binds_lhs = false, binds_rhs = false;  // Eq-binding comparisons
};

struct RulePlan {
  const Rule* rule = nullptr;
  std::map<std::string, int> slot_of;
  int nvars = 0;
  std::vector<PlanStep> steps;
  std::vector<int> positive_steps;  // indices into steps
  std::vector<PTerm> head_terms;
  std::vector<PTerm> agg_over;
};

inline RulePlan build_plan(const Rule& r) {
  RulePlan plan;
  plan.rule = &r;
  auto slot = [&](const std::string& v) {
    auto it = plan.slot_of.find(v);
    if (it != plan.slot_of.end()) return it->second;
    int s = plan.nvars++;
    plan.slot_of[v] = s;
    return s;
  };
  auto pterm = [&](const Term& t) {
    PTerm p;
    if (t.is_var()) {
      p.slot = slot(t.var);
    } else {
      p.is_const = true;
      p.c = t.value;
    }
    return p;
  };

  std::set<std::string> bound;
  std::vector<bool> done(r.body.size(), false);
  auto t_bound = [&](const Term& t) { return !t.is_var() || bound.count(t.var) > 0; };

  bool progressed = true;
  while (progressed) {
    progressed = false;
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (done[i]) continue;
      const Literal& l = r.body[i];
      if (l.kind == Literal::Kind::Negative) {
        bool ready = true;
        for (const auto& t : l.atom.terms)
          if (t.is_var() && !bound.count(t.var) && t.var.rfind("_#", 0) != 0) ready = false;
        if (!ready) continue;
        PlanStep st;
        st.kind = l.kind;
        st.relation = l.atom.relation;
        for (const auto& t : l.atom.terms) st.terms.push_back(pterm(t));
        plan.steps.push_back(st);
        done[i] = true;
        progressed = true;
      } else if (l.kind == Literal::Kind::Compare) {
        bool lb = t_bound(l.lhs), rb = t_bound(l.rhs);
        if (lb && rb) {
          PlanStep st;
          st.kind = l.kind;
          st.cmp = l.cmp;
          st.lhs = pterm(l.lhs);
          st.rhs = pterm(l.rhs);
          plan.steps.push_back(st);
          done[i] = true;
          progressed = true;
        } else if (l.cmp == CmpOp::Eq && (lb || rb)) {
          PlanStep st;
          st.kind = l.kind;
          st.cmp = l.cmp;
          st.lhs = pterm(l.lhs);
          st.rhs = pterm(l.rhs);
          st.binds_lhs = !lb;
          st.binds_rhs = !rb;
          if (!lb) bound.insert(l.lhs.var);
          if (!rb) bound.insert(l.rhs.var);
          plan.steps.push_back(st);
          done[i] = true;
          progressed = true;
        }
      } else if (l.kind == Literal::Kind::Arith) {
        if (t_bound(l.lhs) && t_bound(l.rhs)) {
          PlanStep st;
          st.kind = l.kind;
          st.arith = l.arith;
          st.lhs = pterm(l.lhs);
          st.rhs = pterm(l.rhs);
          bool res_was_bound = t_bound(l.res);
          st.res = pterm(l.res);
          st.binds_lhs = false;
          st.binds_rhs = !res_was_bound;  // reuse: res binds
          if (l.res.is_var()) bound.insert(l.res.var);
          plan.steps.push_back(st);
          done[i] = true;
          progressed = true;
        }
      }
    }
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (done[i] || r.body[i].kind != Literal::Kind::Positive) continue;
      const Literal& l = r.body[i];
      PlanStep st;
      st.kind = l.kind;
      st.relation = l.atom.relation;
      for (const auto& t : l.atom.terms) st.terms.push_back(pterm(t));
      for (const auto& t : l.atom.terms)
        if (t.is_var()) bound.insert(t.var);
      plan.positive_steps.push_back(static_cast<int>(plan.steps.size()));
      plan.steps.push_back(st);
      done[i] = true;
      progressed = true;
      break;
    }
  }
  for (std::size_t i = 0; i < r.body.size(); ++i)
    if (!done[i]) throw EvalError("unsafe rule reached evaluation");

  for (const auto& t : r.head.terms) plan.head_terms.push_back(pterm(t));
  for (const auto& v : r.agg.over) plan.agg_over.push_back(pterm(Term::make_var(v)));
  return plan;
}

/// Resolves relation lookups during a plan run. `delta_step` (an index into
/// plan.steps) selects the positive scan that reads the delta instead of the
/// full instance; -1 reads full everywhere.
struct EvalView {
  const Instance* full = nullptr;
  const Instance* delta = nullptr;
  int delta_step = -1;
};

inline std::int64_t to_int(const Constant& c) {
  if (!c.is_int()) throw EvalError("arithmetic on non-integer constant " + c.to_string());
  return c.as_int();
}

inline bool cmp_holds(CmpOp op, const Constant& a, const Constant& b) {
  switch (op) {
    case CmpOp::Eq: return a == b;
    case CmpOp::Ne: return a != b;
    case CmpOp::Lt: return a < b;
    case CmpOp::Le: return a <= b;
    case CmpOp::Gt: return a > b;
    case CmpOp::Ge: return a >= b;
  }
  return false;
}

/// Runs a plan, invoking `sink(group_tuple, over_tuple)` per binding.
class PlanRunner {
 public:
  PlanRunner(const RulePlan& plan, const EvalView& view,
             std::function<void(const Tuple&, const Tuple&)> sink)
      : plan_(plan), view_(view), sink_(std::move(sink)), binding_(plan.nvars) {}

  void run() { step(0); }

 private:
  const Constant& value_of(const PTerm& t) const {
    if (t.is_const) return t.c;
    return *binding_[t.slot];
  }
  bool is_bound(const PTerm& t) const { return t.is_const || binding_[t.slot].has_value(); }

  const std::set<Tuple>& rel_tuples(const std::string& rel, int step_index) const {
    if (step_index == view_.delta_step && view_.delta) return view_.delta->relation(rel);
    return view_.full->relation(rel);
  }

  void step(std::size_t i) {
    if (i == plan_.steps.size()) {
      Tuple group, over;
      for (const auto& t : plan_.head_terms) group.push_back(value_of(t));
      for (const auto& t : plan_.agg_over) over.push_back(value_of(t));
      sink_(group, over);
      return;
    }
    const PlanStep& st = plan_.steps[i];
    switch (st.kind) {
      case Literal::Kind::Positive: {
        for (const Tuple& tup : rel_tuples(st.relation, static_cast<int>(i))) {
          if (tup.size() != st.terms.size()) continue;
          std::vector<int> bound_here;
          bool ok = true;
          for (std::size_t k = 0; k < st.terms.size() && ok; ++k) {
            const PTerm& t = st.terms[k];
            if (t.is_const) {
              ok = (t.c == tup[k]);
            } else if (binding_[t.slot]) {
              ok = (*binding_[t.slot] == tup[k]);
            } else {
              binding_[t.slot] = tup[k];
              bound_here.push_back(t.slot);
            }
          }
          if (ok) step(i + 1);
          for (int s : bound_here) binding_[s].reset();
        }
        return;
      }
      case Literal::Kind::Negative: {
        for (const Tuple& tup : rel_tuples(st.relation, -2)) {
          bool match = true;
          for (std::size_t k = 0; k < st.terms.size() && match; ++k) {
            const PTerm& t = st.terms[k];
            if (t.is_const) {
              match = (t.c == tup[k]);
            } else if (binding_[t.slot]) {
              match = (*binding_[t.slot] == tup[k]);
            }  // unbound slot in a negated atom matches anything (wildcard)
          }
          if (match) return;  // an instance exists: negation fails
        }
        step(i + 1);
        return;
      }
      case Literal::Kind::Compare: {
        if (st.binds_lhs || st.binds_rhs) {
          if (st.binds_lhs) {
            binding_[st.lhs.slot] = value_of(st.rhs);
            step(i + 1);
            binding_[st.lhs.slot].reset();
          } else {
            binding_[st.rhs.slot] = value_of(st.lhs);
            step(i + 1);
            binding_[st.rhs.slot].reset();
          }
          return;
        }
        if (cmp_holds(st.cmp, value_of(st.lhs), value_of(st.rhs))) step(i + 1);
        return;
      }
      case Literal::Kind::Arith: {
        std::int64_t a = to_int(value_of(st.lhs)), b = to_int(value_of(st.rhs));
        Constant r(st.arith == ArithOp::Add ? a + b : a * b);
        if (st.binds_rhs) {  // res was unbound
          binding_[st.res.slot] = r;
          step(i + 1);
          binding_[st.res.slot].reset();
        } else if (value_of(st.res) == r) {
          step(i + 1);
        }
        return;
      }
    }
  }

  const RulePlan& plan_;
  const EvalView& view_;
  std::function<void(const Tuple&, const Tuple&)> sink_;
  std::vector<std::optional<Constant>> binding_;
};

// ---------------------------------------------------------------------------
// Aggregation. Grouping is by the plain head terms; the aggregated multiset
// follows set-of-facts semantics (each distinct (group, over) pair counts
// once). Ungrouped COUNT/SUM yield 0 on an empty body; FS_COUNT yields every
// cardinality reached so far, which keeps it inflationary.
// ---------------------------------------------------------------------------

inline void aggregate_pairs(const Rule& r, const std::set<std::pair<Tuple, Tuple>>& pairs,
                            const std::function<void(Tuple)>& emit) {
  std::map<Tuple, std::set<Tuple>> groups;
  for (const auto& [g, o] : pairs) groups[g].insert(o);
  bool ungrouped = r.head.terms.empty();
  if (ungrouped && groups.empty()) groups[{}] = {};

  for (const auto& [g, overs] : groups) {
    Tuple fact = g;
    switch (r.agg.kind) {
      case AggKind::Count: {
        fact.push_back(Constant(static_cast<std::int64_t>(overs.size())));
        emit(std::move(fact));
        break;
      }
      case AggKind::Sum: {
        std::int64_t total = 0;
        for (const auto& o : overs) {
          if (o.size() != 1) throw EvalError("sum aggregate needs a single term");
          total += to_int(o[0]);
        }
        fact.push_back(Constant(total));
        emit(std::move(fact));
        break;
      }
      case AggKind::FsCount: {
        std::int64_t n = static_cast<std::int64_t>(overs.size());
        std::int64_t lo = ungrouped ? 0 : 1;
        for (std::int64_t j = lo; j <= n; ++j) {
          Tuple f = g;
          f.push_back(Constant(j));
          emit(std::move(f));
        }
        break;
      }
      case AggKind::None:
        break;
    }
  }
}

/// Derives the facts of one rule over the given view into `out`. Returns the
/// number of new facts.
inline std::size_t apply_rule(const RulePlan& plan, const EvalView& view, Instance& out) {
  const Rule& r = *plan.rule;
  std::size_t added = 0;
  if (!r.has_agg()) {
    PlanRunner(plan, view, [&](const Tuple& g, const Tuple&) {
      if (out.insert(r.head.relation, g)) ++added;
    }).run();
    return added;
  }
  std::set<std::pair<Tuple, Tuple>> pairs;
  PlanRunner(plan, view, [&](const Tuple& g, const Tuple& o) { pairs.insert({g, o}); }).run();
  aggregate_pairs(r, pairs, [&](Tuple f) {
    if (out.insert(r.head.relation, std::move(f))) ++added;
  });
  return added;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Stratum-by-stratum semi-naive evaluation.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_edb(const Program& p, const Instance& edb) {
  for (const auto& [rel, tuples] : edb.relations()) {
    const RelationDecl* d = p.find_decl(rel);
    if (!d) throw EvalError("input fact over undeclared relation " + rel);
    for (const auto& t : tuples)
      if (static_cast<int>(t.size()) != d->arity)
        throw EvalError("input fact arity mismatch for " + rel);
  }
}

inline Instance evaluate_prepared(const std::vector<Rule>& rules, const Stratification& strat,
                                  const Instance& edb, const EvalLimits& lim) {
  Instance inst = edb;
  std::vector<RulePlan> plans;
  plans.reserve(rules.size());
  for (const auto& r : rules) plans.push_back(build_plan(r));

  for (const auto& stratum : strat.strata) {
    std::vector<const RulePlan*> once, iter;
    for (const auto& plan : plans) {
      if (!stratum.count(plan.rule->head.relation)) continue;
      bool stratified_agg =
          plan.rule->agg.kind == AggKind::Count || plan.rule->agg.kind == AggKind::Sum;
      (stratified_agg ? once : iter).push_back(&plan);
    }
    for (const auto* plan : once) {
      EvalView view{&inst, nullptr, -1};
      apply_rule(*plan, view, inst);
    }
    // first pass: everything against the full instance
    Instance delta;
    for (const auto* plan : iter) {
      Instance derived;
      EvalView view{&inst, nullptr, -1};
      apply_rule(*plan, view, derived);
      for (const auto& f : derived.facts())
        if (inst.insert(f)) delta.insert(f);
    }
    std::size_t iterations = 0;
    while (!delta.empty()) {
      if (++iterations > lim.max_iterations) throw EvalError("evaluation iteration budget exceeded");
      if (inst.size() > lim.max_facts) throw EvalError("evaluation fact budget exceeded");
      Instance next_delta;
      for (const auto* plan : iter) {
        Instance derived;
        if (plan->rule->agg.kind == AggKind::FsCount) {
          // monotone aggregate: recompute over the grown instance
          EvalView view{&inst, nullptr, -1};
          apply_rule(*plan, view, derived);
        } else if (plan->positive_steps.empty()) {
          continue;  // constant rule, already fired in the first pass
        } else {
          for (int ds : plan->positive_steps) {
            EvalView view{&inst, &delta, ds};
            apply_rule(*plan, view, derived);
          }
        }
        for (const auto& f : derived.facts())
          if (inst.insert(f)) next_delta.insert(f);
      }
      delta = std::move(next_delta);
    }
  }
  return inst;
}

}  // namespace detail

/// Stratified evaluation with semi-naive iteration. Returns derived facts
/// plus the input.
inline Instance evaluate(const Program& p, const Instance& edb, const EvalLimits& lim = {}) {
  detail::check_edb(p, edb);
  Stratification strat = stratify(p);
  return detail::evaluate_prepared(p.rules, strat, edb, lim);
}

// ---------------------------------------------------------------------------
// Naive oracle: identical contract, full re-derivation per iteration with a
// direct recursive matcher. Kept free of the plan/delta machinery on purpose.
// ---------------------------------------------------------------------------

namespace detail {

class NaiveMatcher {
 public:
  NaiveMatcher(const Rule& r, const Instance& inst) : rule_(r), inst_(inst) {
    order_ = literal_order(r);
  }

  /// All (group, over) pairs derivable for the rule on the instance.
  std::set<std::pair<Tuple, Tuple>> all_bindings() {
    std::set<std::pair<Tuple, Tuple>> out;
    std::map<std::string, Constant> env;
    match(0, env, out);
    return out;
  }

 private:
  static std::vector<int> literal_order(const Rule& r) {
    // same safety discipline, recomputed independently: positives in textual
    // order, each non-positive literal as soon as its variables are bound
    std::vector<int> order;
    std::set<std::string> bound;
    std::vector<bool> used(r.body.size(), false);
    auto tb = [&](const Term& t) { return !t.is_var() || bound.count(t.var) > 0; };
    bool progressed = true;
    while (progressed) {
      progressed = false;
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (used[i]) continue;
        const Literal& l = r.body[i];
        bool ready = false;
        if (l.kind == Literal::Kind::Negative) {
          ready = true;
          for (const auto& t : l.atom.terms)
            if (t.is_var() && !bound.count(t.var) && t.var.rfind("_#", 0) != 0) ready = false;
        } else if (l.kind == Literal::Kind::Compare) {
          ready = (tb(l.lhs) && tb(l.rhs)) || (l.cmp == CmpOp::Eq && (tb(l.lhs) || tb(l.rhs)));
          if (ready) {
            if (l.lhs.is_var()) bound.insert(l.lhs.var);
            if (l.rhs.is_var()) bound.insert(l.rhs.var);
          }
        } else if (l.kind == Literal::Kind::Arith) {
          ready = tb(l.lhs) && tb(l.rhs);
          if (ready && l.res.is_var()) bound.insert(l.res.var);
        }
        if (ready) {
          order.push_back(static_cast<int>(i));
          used[i] = true;
          progressed = true;
        }
      }
      for (std::size_t i = 0; i < r.body.size(); ++i) {
        if (used[i] || r.body[i].kind != Literal::Kind::Positive) continue;
        for (const auto& t : r.body[i].atom.terms)
          if (t.is_var()) bound.insert(t.var);
        order.push_back(static_cast<int>(i));
        used[i] = true;
        progressed = true;
        break;
      }
    }
    return order;
  }

  static std::optional<Constant> term_value(const Term& t, const std::map<std::string, Constant>& env) {
    if (!t.is_var()) return t.value;
    auto it = env.find(t.var);
    if (it == env.end()) return std::nullopt;
    return it->second;
  }

  void match(std::size_t oi, std::map<std::string, Constant>& env,
             std::set<std::pair<Tuple, Tuple>>& out) {
    if (oi == order_.size()) {
      Tuple g, o;
      for (const auto& t : rule_.head.terms) g.push_back(*term_value(t, env));
      for (const auto& v : rule_.agg.over) o.push_back(env.at(v));
      out.insert({g, o});
      return;
    }
    const Literal& l = rule_.body[order_[oi]];
    switch (l.kind) {
      case Literal::Kind::Positive: {
        for (const Tuple& tup : inst_.relation(l.atom.relation)) {
          std::vector<std::string> added;
          bool ok = tup.size() == l.atom.terms.size();
          for (std::size_t k = 0; k < l.atom.terms.size() && ok; ++k) {
            const Term& t = l.atom.terms[k];
            if (!t.is_var()) {
              ok = t.value == tup[k];
            } else if (auto v = term_value(t, env)) {
              ok = *v == tup[k];
            } else {
              env.emplace(t.var, tup[k]);
              added.push_back(t.var);
            }
          }
          if (ok) match(oi + 1, env, out);
          for (const auto& v : added) env.erase(v);
        }
        return;
      }
      case Literal::Kind::Negative: {
        for (const Tuple& tup : inst_.relation(l.atom.relation)) {
          bool m = tup.size() == l.atom.terms.size();
          for (std::size_t k = 0; k < l.atom.terms.size() && m; ++k) {
            const Term& t = l.atom.terms[k];
            auto v = term_value(t, env);
            if (v) m = *v == tup[k];
          }
          if (m) return;
        }
        match(oi + 1, env, out);
        return;
      }
      case Literal::Kind::Compare: {
        auto lv = term_value(l.lhs, env), rv = term_value(l.rhs, env);
        if (lv && rv) {
          if (cmp_holds(l.cmp, *lv, *rv)) match(oi + 1, env, out);
        } else if (l.cmp == CmpOp::Eq && (lv || rv)) {
          const Term& free = lv ? l.rhs : l.lhs;
          env.emplace(free.var, lv ? *lv : *rv);
          match(oi + 1, env, out);
          env.erase(free.var);
        }
        return;
      }
      case Literal::Kind::Arith: {
        auto lv = term_value(l.lhs, env), rv = term_value(l.rhs, env);
        Constant r(l.arith == ArithOp::Add ? to_int(*lv) + to_int(*rv) : to_int(*lv) * to_int(*rv));
        if (auto existing = term_value(l.res, env)) {
          if (*existing == r) match(oi + 1, env, out);
        } else {
          env.emplace(l.res.var, r);
          match(oi + 1, env, out);
          env.erase(l.res.var);
        }
        return;
      }
    }
  }

  const Rule& rule_;
  const Instance& inst_;
  std::vector<int> order_;
};

}  // namespace detail

/// Test oracle: same contract as evaluate, computed by naive full
/// re-derivation per iteration.
inline Instance evaluate_naive(const Program& p, const Instance& edb, const EvalLimits& lim = {}) {
  detail::check_edb(p, edb);
  Stratification strat = stratify(p);
  Instance inst = edb;
  for (const auto& stratum : strat.strata) {
    bool changed = true;
    std::size_t iterations = 0;
    while (changed) {
      if (++iterations > lim.max_iterations) throw EvalError("evaluation iteration budget exceeded");
      if (inst.size() > lim.max_facts) throw EvalError("evaluation fact budget exceeded");
      changed = false;
      for (const auto& r : p.rules) {
        if (!stratum.count(r.head.relation)) continue;
        auto pairs = detail::NaiveMatcher(r, inst).all_bindings();
        if (!r.has_agg()) {
          for (const auto& [g, o] : pairs)
            if (inst.insert(r.head.relation, g)) changed = true;
        } else {
          detail::aggregate_pairs(r, pairs, [&](Tuple f) {
            if (inst.insert(r.head.relation, std::move(f))) changed = true;
          });
        }
      }
    }
  }
  return inst;
}

}  // namespace tdnet

#endif  // TDNET_EVAL_HPP_
