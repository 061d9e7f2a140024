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

#ifndef TDNET_REWRITER_HPP_
#define TDNET_REWRITER_HPP_

#include <map>
#include <set>
#include <string>
#include <vector>

#include "tdnet/analyzer.hpp"
#include "tdnet/ast.hpp"
#include "tdnet/causality.hpp"
#include "tdnet/stratify.hpp"

namespace tdnet {

struct RewriteError : std::runtime_error {
  explicit RewriteError(const std::string& msg) : std::runtime_error(msg) {}
};

// Generated relation names: primes mark shipped copies, the zz prefix marks
// protocol machinery (zznull_* doubles as the NULL-marker the causality
// graph recognizes).
inline constexpr const char* kGenPrefix = "zz";
inline constexpr const char* kStagePrefix = "zzstage";

namespace detail {

inline std::string primed(const std::string& rel) { return rel + kPrimeSuffix; }

inline std::vector<Term> fresh_vars(int arity, const std::string& stem = "u") {
  std::vector<Term> out;
  for (int i = 1; i <= arity; ++i) out.push_back(Term::make_var(stem + std::to_string(i)));
  return out;
}

inline Rule make_rule(std::string head_rel, std::vector<Term> head_terms, RuleTarget target,
                      std::vector<Literal> body) {
  Rule r;
  r.head.relation = std::move(head_rel);
  r.head.terms = std::move(head_terms);
  r.target = target;
  r.body = std::move(body);
  return r;
}

/// Input relations (declared, never derived) and output relations (derived
/// heads; by default the ones no rule reads back, falling back to all
/// heads for purely recursive queries).
struct QuerySchema {
  std::set<std::string> inputs, outputs, derived;
};

inline QuerySchema split_schema(const Program& q, const std::set<std::string>& requested) {
  QuerySchema s;
  s.derived = q.head_relations();
  for (const auto& d : q.decls)
    if (!s.derived.count(d.name)) s.inputs.insert(d.name);
  if (!requested.empty()) {
    for (const auto& r : requested) {
      if (!s.derived.count(r))
        throw RewriteError("requested output " + r + " is not derived by the query");
      s.outputs.insert(r);
    }
    return s;
  }
  std::set<std::string> read;
  for (const auto& r : q.rules)
    for (const auto& l : r.body)
      if (l.is_atom()) read.insert(l.atom.relation);
  for (const auto& h : s.derived)
    if (!read.count(h)) s.outputs.insert(h);
  if (s.outputs.empty()) s.outputs = s.derived;
  return s;
}

inline int arity_of(const Program& q, const std::string& rel) {
  const RelationDecl* d = q.find_decl(rel);
  if (!d) throw RewriteError("undeclared relation " + rel);
  return d->arity;
}

inline void check_prime_collisions(const Program& q) {
  std::set<std::string> names;
  for (const auto& d : q.decls) names.insert(d.name);
  for (const auto& d : q.decls)
    if (names.count(primed(d.name)))
      throw RewriteError("name collision with the reserved prime suffix: " + primed(d.name));
}

inline bool query_is_monotone(const Program& q) {
  for (const auto& r : q.rules) {
    if (r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum) return false;
    for (const auto& l : r.body)
      if (l.kind == Literal::Kind::Negative) return false;
  }
  return true;
}

/// Copies a rule, priming the given relations wherever they occur.
inline Rule prime_rule(const Rule& r, const std::set<std::string>& to_prime) {
  Rule out = r;
  if (to_prime.count(out.head.relation)) out.head.relation = primed(out.head.relation);
  for (auto& l : out.body)
    if (l.is_atom() && to_prime.count(l.atom.relation)) l.atom.relation = primed(l.atom.relation);
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Broadcast network: ship every database fact to everyone, then evaluate the
// whole query locally. Two rounds under fixed delivery; Ready delays a
// non-monotone query past the shipping round.
// ---------------------------------------------------------------------------

inline TransducerSpec to_broadcast_network(const Program& q,
                                           const std::set<std::string>& outputs = {}) {
  stratify(q);  // rejects unstratifiable queries up front
  detail::check_prime_collisions(q);
  detail::QuerySchema schema = detail::split_schema(q, outputs);
  bool monotone = detail::query_is_monotone(q);

  TransducerSpec spec;
  spec.name = "broadcast";
  for (const auto& rel : schema.inputs) {
    int a = detail::arity_of(q, rel);
    spec.schema.db.push_back({rel, a, Key::absent()});
    spec.schema.emt.push_back({detail::primed(rel), a, Key::inf()});
    auto vars = detail::fresh_vars(a);
    spec.rules.push_back(detail::make_rule(detail::primed(rel), vars, RuleTarget::Emt,
                                           {Literal::positive(Atom{rel, vars})}));
  }
  for (const auto& rel : schema.outputs)
    spec.schema.out.push_back({rel, detail::arity_of(q, rel), Key::absent()});
  if (!monotone) spec.schema.mem.push_back({"Ready", 0, Key::absent()});

  // an output relation the query reads back (recursion) is computed in a
  // primed per-transition auxiliary and relayed, so the whole fixpoint still
  // lands within one round
  std::set<std::string> read;
  for (const auto& r : q.rules)
    for (const auto& l : r.body)
      if (l.is_atom()) read.insert(l.atom.relation);
  std::set<std::string> prime_rels = schema.inputs;
  for (const auto& rel : schema.outputs)
    if (read.count(rel)) prime_rels.insert(rel);

  for (const auto& r : q.rules) {
    Rule copy = detail::prime_rule(r, prime_rels);
    copy.target = schema.outputs.count(r.head.relation) && !read.count(r.head.relation)
                      ? RuleTarget::Out
                      : RuleTarget::Aux;
    if (!monotone) copy.body.push_back(Literal::positive(Atom{"Ready", {}}));
    spec.rules.push_back(copy);
  }
  for (const auto& rel : schema.outputs) {
    if (!read.count(rel)) continue;
    auto vars = detail::fresh_vars(detail::arity_of(q, rel));
    spec.rules.push_back(detail::make_rule(
        rel, vars, RuleTarget::Out, {Literal::positive(Atom{detail::primed(rel), vars})}));
  }
  if (!monotone)
    spec.rules.push_back(detail::make_rule(
        "Ready", {}, RuleTarget::Ins, {Literal::negative(Atom{"Ready", {}})}));
  return spec;
}

// ---------------------------------------------------------------------------
// Hashing network: shuffle the inputs on maximal keys and run the query as
// emission rules. Non-monotone recursion-bounded queries get per-round
// stages, and every rule applying negation is re-keyed so it only fires on
// nodes that hold the authoritative slice of the negated relation.
// ---------------------------------------------------------------------------

namespace detail {

/// Stage of each rule: non-recursive rules by dependency depth, everything
/// in or above a recursive component in the final stage.
inline std::vector<int> rule_stages(const Program& q, int* out_nstages) {
  int n = static_cast<int>(q.rules.size());
  // rule -> rules it depends on (whose head it reads)
  std::vector<std::set<int>> deps(n);
  for (int i = 0; i < n; ++i)
    for (const auto& l : q.rules[i].body) {
      if (!l.is_atom()) continue;
      for (int j = 0; j < n; ++j)
        if (q.rules[j].head.relation == l.atom.relation) deps[i].insert(j);
    }
  // recursive rules: on a dependency cycle
  std::vector<bool> recursive(n, false);
  for (int i = 0; i < n; ++i) {
    // DFS from i through deps, looking for a path back to i
    std::vector<int> stack(deps[i].begin(), deps[i].end());
    std::set<int> seen(deps[i].begin(), deps[i].end());
    while (!stack.empty()) {
      int j = stack.back();
      stack.pop_back();
      if (j == i) {
        recursive[i] = true;
        break;
      }
      for (int k : deps[j])
        if (seen.insert(k).second) stack.push_back(k);
    }
  }
  // depends-on-recursive closure
  std::vector<bool> final_stage = recursive;
  bool grew = true;
  while (grew) {
    grew = false;
    for (int i = 0; i < n; ++i) {
      if (final_stage[i]) continue;
      for (int j : deps[i])
        if (final_stage[j]) {
          final_stage[i] = true;
          grew = true;
        }
    }
  }
  std::vector<int> depth(n, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (final_stage[i]) continue;
      for (int j : deps[i]) {
        if (final_stage[j]) continue;
        if (depth[i] < depth[j] + 1) {
          depth[i] = depth[j] + 1;
          changed = true;
        }
      }
    }
  }
  int m = 1;
  for (int i = 0; i < n; ++i)
    if (!final_stage[i]) m = std::max(m, depth[i]);
  int last = m + 1;
  bool any_final = false;
  for (int i = 0; i < n; ++i) any_final |= final_stage[i];
  if (!any_final) last = m;  // no recursion: stages are just the depths
  std::vector<int> stages(n);
  for (int i = 0; i < n; ++i) stages[i] = final_stage[i] ? last : depth[i];
  *out_nstages = last;
  return stages;
}

inline std::string stage_rel(int j) { return std::string(kStagePrefix) + std::to_string(j); }

}  // namespace detail

inline TransducerSpec to_hashing_network(const Program& q,
                                         const std::set<std::string>& outputs = {}) {
  stratify(q);
  detail::check_prime_collisions(q);
  TaxonomyReport taxonomy = classify(q);
  if (!taxonomy.chained) {
    std::string why = "query is not chained";
    for (const auto& n : taxonomy.notes)
      if (n.rfind("unchained rule", 0) == 0) why += "; " + n;
    throw RewriteError("hashing rewrite rejected: " + why);
  }
  if (!taxonomy.monotone && !taxonomy.recursion_bounded)
    throw RewriteError(
        "hashing rewrite rejected: non-monotone query is not recursion-bounded "
        "(recursion feeds a negated or aggregated literal)");

  detail::QuerySchema schema = detail::split_schema(q, outputs);
  bool monotone = taxonomy.monotone;

  TransducerSpec spec;
  spec.name = "hashing";

  auto maximal_key = [](int arity) { return arity >= 1 ? Key::finite(arity) : Key::inf(); };

  for (const auto& rel : schema.inputs) {
    int a = detail::arity_of(q, rel);
    spec.schema.db.push_back({rel, a, Key::absent()});
    spec.schema.emt.push_back({detail::primed(rel), a, maximal_key(a)});
    auto vars = detail::fresh_vars(a);
    spec.rules.push_back(detail::make_rule(detail::primed(rel), vars, RuleTarget::Emt,
                                           {Literal::positive(Atom{rel, vars})}));
  }
  for (const auto& rel : schema.derived) {
    int a = detail::arity_of(q, rel);
    spec.schema.emt.push_back({detail::primed(rel), a, maximal_key(a)});
  }
  for (const auto& rel : schema.outputs) {
    int a = detail::arity_of(q, rel);
    spec.schema.out.push_back({rel, a, Key::absent()});
    auto vars = detail::fresh_vars(a);
    spec.rules.push_back(detail::make_rule(rel, vars, RuleTarget::Out,
                                           {Literal::positive(Atom{detail::primed(rel), vars})}));
  }

  std::set<std::string> prime_all = schema.inputs;
  for (const auto& rel : schema.derived) prime_all.insert(rel);

  int nstages = 0;
  std::vector<int> stages;
  if (!monotone) stages = detail::rule_stages(q, &nstages);

  // negation alignment: a rule evaluating not X'(x, ...) must only fire on
  // the node the X facts keyed on x are addressed to, so the positive atom
  // binding x is shipped in a copy keyed on x alone (term reordered to the
  // front when needed); X' itself is re-keyed on its first term. A relation
  // that is also read positively keeps full coverage by broadcasting.
  std::set<std::string> read_positively;
  for (const auto& r : q.rules)
    for (const auto& l : r.body)
      if (l.kind == Literal::Kind::Positive && prime_all.count(l.atom.relation))
        read_positively.insert(detail::primed(l.atom.relation));

  std::map<std::string, int> narrow_key;  // primed relation -> 1, or -1 for inf
  std::map<std::pair<std::string, int>, std::string> aligned;  // (rel, term pos) -> copy
  int align_counter = 0;

  std::vector<Rule> query_rules;
  for (std::size_t ri = 0; ri < q.rules.size(); ++ri) {
    Rule copy = detail::prime_rule(q.rules[ri], prime_all);
    copy.target = RuleTarget::Emt;
    if (!monotone) {
      copy.body.push_back(
          Literal::positive(Atom{detail::stage_rel(stages[ri]), {}}));
    }

    for (auto& l : copy.body) {
      if (l.kind != Literal::Kind::Negative) continue;
      if (l.atom.terms.empty() || !l.atom.terms.front().is_var() ||
          read_positively.count(l.atom.relation)) {
        narrow_key[l.atom.relation] = -1;  // nullary / shared use: broadcast
        continue;
      }
      const std::string& anchor = l.atom.terms.front().var;
      narrow_key[l.atom.relation] = 1;

      // find a positive atom binding the anchor and swap in an aligned copy
      bool found = false;
      for (auto& pos : copy.body) {
        if (pos.kind != Literal::Kind::Positive) continue;
        for (std::size_t k = 0; k < pos.atom.terms.size(); ++k) {
          if (!pos.atom.terms[k].is_var() || pos.atom.terms[k].var != anchor) continue;
          std::string base = pos.atom.relation;
          auto key = std::make_pair(base, static_cast<int>(k));
          if (!aligned.count(key)) {
            std::string copy_name = base + "a" + std::to_string(++align_counter);
            aligned[key] = copy_name;
          }
          // rotate the anchor term to the front of the copy
          std::vector<Term> rot = pos.atom.terms;
          std::rotate(rot.begin(), rot.begin() + k, rot.begin() + k + 1);
          pos.atom.relation = aligned[key];
          pos.atom.terms = rot;
          found = true;
          break;
        }
        if (found) break;
      }
      if (!found) narrow_key[l.atom.relation] = -1;  // fall back to broadcast
    }
    query_rules.push_back(copy);
  }

  // declare and feed the aligned copies; copies of input shuffles read the
  // local database directly so they are complete as early as the shuffles
  for (const auto& [key, copy_name] : aligned) {
    const auto& [base, pos] = key;
    int a = 0;
    for (const auto& d : spec.schema.emt)
      if (d.name == base) a = d.arity;
    spec.schema.emt.push_back({copy_name, a, Key::finite(1)});
    std::string source = base;
    for (const auto& rel : schema.inputs)
      if (detail::primed(rel) == base) source = rel;
    auto vars = detail::fresh_vars(a);
    std::vector<Term> rot = vars;
    std::rotate(rot.begin(), rot.begin() + pos, rot.begin() + pos + 1);
    spec.rules.push_back(detail::make_rule(copy_name, rot, RuleTarget::Emt,
                                           {Literal::positive(Atom{source, vars})}));
  }
  for (auto& d : spec.schema.emt) {
    auto it = narrow_key.find(d.name);
    if (it == narrow_key.end()) continue;
    d.key = it->second == -1 ? Key::inf() : Key::finite(it->second);
  }

  for (auto& r : query_rules) spec.rules.push_back(std::move(r));

  if (!monotone) {
    for (int j = 1; j <= nstages; ++j)
      spec.schema.mem.push_back({detail::stage_rel(j), 0, Key::absent()});
    std::vector<Literal> boot;
    for (int j = 1; j <= nstages; ++j)
      boot.push_back(Literal::negative(Atom{detail::stage_rel(j), {}}));
    spec.rules.push_back(detail::make_rule(detail::stage_rel(1), {}, RuleTarget::Ins, boot));
    for (int j = 1; j < nstages; ++j)
      spec.rules.push_back(
          detail::make_rule(detail::stage_rel(j + 1), {}, RuleTarget::Ins,
                            {Literal::positive(Atom{detail::stage_rel(j), {}})}));
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Snapshot coordination injection: seal every emit relation that feeds a
// negated or COUNT/SUM-aggregated literal. Senders count what they emitted
// and broadcast a NULL marker once the count is complete (the marker sits in
// a higher stratum of the emission program, so per-channel FIFO delivers it
// after the data). Receivers gate the affected rules until a marker from
// every active node has arrived -- and, without FIFO, until the announced
// totals match what was received (gap detection).
// ---------------------------------------------------------------------------

namespace detail {

struct SnapshotNames {
  std::string pre, cnt, null, nullcnt, rcv, sum, tot, seal;
  explicit SnapshotNames(const std::string& rel)
      : pre(std::string(kGenPrefix) + "pre_" + rel),
        cnt(std::string(kGenPrefix) + "cnt_" + rel),
        null(std::string(kNullMarkerPrefix) + rel),
        nullcnt(std::string(kGenPrefix) + "nullcnt_" + rel),
        rcv(std::string(kGenPrefix) + "rcv_" + rel),
        sum(std::string(kGenPrefix) + "sum_" + rel),
        tot(std::string(kGenPrefix) + "tot_" + rel),
        seal(std::string(kGenPrefix) + "seal_" + rel) {}
};

inline bool already_injected(const TransducerSpec& spec) {
  for (const auto& d : spec.schema.emt)
    if (d.name.rfind(kNullMarkerPrefix, 0) == 0) return true;
  return false;
}

inline void check_gen_collisions(const TransducerSpec& spec) {
  // stage relations come from the hashing rewrite and coexist with injection
  auto reserved = [](const std::string& n) {
    return n.rfind(kGenPrefix, 0) == 0 && n.rfind(kStagePrefix, 0) != 0;
  };
  for (const auto* part :
       {&spec.schema.db, &spec.schema.mem, &spec.schema.emt, &spec.schema.out})
    for (const auto& d : *part)
      if (reserved(d.name))
        throw RewriteError("reserved-name collision: " + d.name);
  for (const auto& r : spec.rules)
    if (r.target == RuleTarget::Aux && reserved(r.head.relation))
      throw RewriteError("reserved-name collision: " + r.head.relation);
}

/// Emit relations feeding each relation, transitively (backward closure over
/// the rule dependency graph).
inline std::set<std::string> emt_ancestors(const TransducerSpec& spec, const std::string& rel) {
  std::set<std::string> emt = spec.schema.names(spec.schema.emt);
  std::set<std::string> closure{rel};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const auto& r : spec.rules) {
      if (!closure.count(r.head.relation)) continue;
      for (const auto& l : r.body)
        if (l.is_atom() && closure.insert(l.atom.relation).second) grew = true;
    }
  }
  std::set<std::string> out;
  for (const auto& e : emt)
    if (closure.count(e)) out.insert(e);
  return out;
}

inline TransducerSpec inject_snapshot(const TransducerSpec& spec, bool fifo) {
  if (already_injected(spec)) return spec;
  check_gen_collisions(spec);

  TransducerSpec out = spec;

  // which emit relations need sealing, and which rules get gated
  std::set<std::string> sealed;
  struct GatedRule {
    std::size_t index;
    std::set<std::string> negated;  // relations negated in the rule (sealable)
    std::set<std::string> seals;    // emit ancestors to wait for
  };
  std::vector<GatedRule> gated;
  for (std::size_t i = 0; i < spec.rules.size(); ++i) {
    const Rule& r = spec.rules[i];
    GatedRule g;
    g.index = i;
    for (const auto& l : r.body) {
      if (l.kind != Literal::Kind::Negative) continue;
      auto anc = emt_ancestors(spec, l.atom.relation);
      if (anc.empty()) continue;
      g.negated.insert(l.atom.relation);
      g.seals.insert(anc.begin(), anc.end());
    }
    if (r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum) {
      for (const auto& l : r.body) {
        if (!l.is_atom() || l.kind != Literal::Kind::Positive) continue;
        auto anc = emt_ancestors(spec, l.atom.relation);
        g.seals.insert(anc.begin(), anc.end());
      }
    }
    if (!g.seals.empty()) {
      sealed.insert(g.seals.begin(), g.seals.end());
      gated.push_back(std::move(g));
    }
  }
  if (sealed.empty()) return out;  // nothing to seal

  // shared: the size of the active network
  std::string allcnt = std::string(kGenPrefix) + "allcnt";
  {
    Rule r = make_rule(allcnt, {}, RuleTarget::Aux,
                       {Literal::positive(Atom{kAllRel, {Term::make_var("a")}})});
    r.agg.kind = AggKind::Count;
    r.agg.over = {"a"};
    out.rules.push_back(r);
  }

  // node ordering helpers for the announced-total fold (generic only)
  if (!fifo) {
    std::string lt = std::string(kGenPrefix) + "lt";
    std::string mid = std::string(kGenPrefix) + "mid";
    std::string nxt = std::string(kGenPrefix) + "nxt";
    std::string fst = std::string(kGenPrefix) + "fst";
    std::string lst = std::string(kGenPrefix) + "lst";
    std::string hasprev = std::string(kGenPrefix) + "hasprev";
    std::string hassucc = std::string(kGenPrefix) + "hassucc";
    auto i = Term::make_var("i"), j = Term::make_var("j"), k = Term::make_var("k");
    Literal cmp;
    cmp.kind = Literal::Kind::Compare;
    cmp.cmp = CmpOp::Lt;
    cmp.lhs = i;
    cmp.rhs = j;
    out.rules.push_back(make_rule(lt, {i, j}, RuleTarget::Aux,
                                  {Literal::positive(Atom{kAllRel, {i}}),
                                   Literal::positive(Atom{kAllRel, {j}}), cmp}));
    out.rules.push_back(make_rule(mid, {i, j}, RuleTarget::Aux,
                                  {Literal::positive(Atom{lt, {i, k}}),
                                   Literal::positive(Atom{lt, {k, j}})}));
    out.rules.push_back(make_rule(nxt, {i, j}, RuleTarget::Aux,
                                  {Literal::positive(Atom{lt, {i, j}}),
                                   Literal::negative(Atom{mid, {i, j}})}));
    out.rules.push_back(make_rule(hasprev, {j}, RuleTarget::Aux,
                                  {Literal::positive(Atom{lt, {i, j}})}));
    out.rules.push_back(make_rule(fst, {i}, RuleTarget::Aux,
                                  {Literal::positive(Atom{kAllRel, {i}}),
                                   Literal::negative(Atom{hasprev, {i}})}));
    out.rules.push_back(make_rule(hassucc, {i}, RuleTarget::Aux,
                                  {Literal::positive(Atom{lt, {i, j}})}));
    out.rules.push_back(make_rule(lst, {i}, RuleTarget::Aux,
                                  {Literal::positive(Atom{kAllRel, {i}}),
                                   Literal::negative(Atom{hassucc, {i}})}));
  }

  for (const auto& rel : sealed) {
    SnapshotNames names(rel);
    int arity = 0;
    for (const auto& d : spec.schema.emt)
      if (d.name == rel) arity = d.arity;

    // without FIFO the gate compares a locally received count against the
    // globally announced total, which is only meaningful when the whole
    // relation reaches every node: sealed relations become broadcasting
    if (!fifo) {
      for (auto& d : out.schema.emt)
        if (d.name == rel) d.key = Key::inf();
    }

    // sender side: collect the emission, count it, announce the count
    for (const auto& r : spec.rules) {
      if (r.target != RuleTarget::Emt || r.head.relation != rel) continue;
      Rule pre = r;
      pre.head.relation = names.pre;
      pre.target = RuleTarget::Aux;
      out.rules.push_back(pre);
    }
    auto vars = fresh_vars(arity, "x");
    {
      Rule cnt = make_rule(names.cnt, {}, RuleTarget::Aux,
                           {Literal::positive(Atom{names.pre, vars})});
      cnt.agg.kind = AggKind::Count;
      for (const auto& v : vars) cnt.agg.over.push_back(v.var);
      out.rules.push_back(cnt);
    }
    auto c = Term::make_var("c"), id = Term::make_var("i");
    if (fifo) {
      out.schema.emt.push_back({names.null, 1, Key::inf()});
      out.rules.push_back(make_rule(names.null, {id}, RuleTarget::Emt,
                                    {Literal::positive(Atom{names.cnt, {c}}),
                                     Literal::positive(Atom{kIdRel, {id}})}));
    } else {
      out.schema.emt.push_back({names.null, 2, Key::inf()});
      out.rules.push_back(make_rule(names.null, {id, c}, RuleTarget::Emt,
                                    {Literal::positive(Atom{names.cnt, {c}}),
                                     Literal::positive(Atom{kIdRel, {id}})}));
    }

    // receiver side: a marker from every active node
    auto s = Term::make_var("s"), n = Term::make_var("n");
    {
      std::vector<Term> null_terms = fifo ? std::vector<Term>{s} : std::vector<Term>{s, c};
      Rule ncnt = make_rule(names.nullcnt, {}, RuleTarget::Aux,
                            {Literal::positive(Atom{names.null, null_terms})});
      ncnt.agg.kind = AggKind::FsCount;
      ncnt.agg.over = {"s"};
      out.rules.push_back(ncnt);
    }
    std::vector<Literal> seal_body{Literal::positive(Atom{names.nullcnt, {n}}),
                                   Literal::positive(Atom{allcnt, {n}})};
    if (!fifo) {
      // gap detection: the received facts must also add up to the announced
      // totals, folded over the node order
      {
        Rule rcv = make_rule(names.rcv, {}, RuleTarget::Aux,
                             {Literal::positive(Atom{rel, vars})});
        rcv.agg.kind = AggKind::FsCount;
        for (const auto& v : vars) rcv.agg.over.push_back(v.var);
        out.rules.push_back(rcv);
      }
      auto i = Term::make_var("i"), j = Term::make_var("j");
      auto u = Term::make_var("u"), v = Term::make_var("v"), w = Term::make_var("w");
      std::string fst = std::string(kGenPrefix) + "fst";
      std::string nxt = std::string(kGenPrefix) + "nxt";
      std::string lst = std::string(kGenPrefix) + "lst";
      out.rules.push_back(make_rule(names.sum, {i, c}, RuleTarget::Aux,
                                    {Literal::positive(Atom{fst, {i}}),
                                     Literal::positive(Atom{names.null, {i, c}})}));
      Literal add;
      add.kind = Literal::Kind::Arith;
      add.arith = ArithOp::Add;
      add.res = w;
      add.lhs = u;
      add.rhs = v;
      out.rules.push_back(make_rule(names.sum, {j, w}, RuleTarget::Aux,
                                    {Literal::positive(Atom{names.sum, {i, u}}),
                                     Literal::positive(Atom{nxt, {i, j}}),
                                     Literal::positive(Atom{names.null, {j, v}}), add}));
      out.rules.push_back(make_rule(names.tot, {w}, RuleTarget::Aux,
                                    {Literal::positive(Atom{names.sum, {i, w}}),
                                     Literal::positive(Atom{lst, {i}})}));
      seal_body.push_back(Literal::positive(Atom{names.tot, {c}}));
      seal_body.push_back(Literal::positive(Atom{names.rcv, {c}}));
    }
    out.rules.push_back(make_rule(names.seal, {}, RuleTarget::Aux, std::move(seal_body)));
  }

  // per negated relation, one gate over all its upstream seals
  std::set<std::string> gates_defined;
  for (const auto& g : gated) {
    if (!g.negated.empty()) {
      for (const auto& x : g.negated) {
        std::string gate = std::string(kGenPrefix) + "sc_" + x;
        if (gates_defined.insert(gate).second) {
          std::vector<Literal> body;
          for (const auto& r : emt_ancestors(spec, x))
            body.push_back(Literal::positive(Atom{SnapshotNames(r).seal, {}}));
          out.rules.push_back(make_rule(gate, {}, RuleTarget::Aux, std::move(body)));
        }
        out.rules[g.index].body.push_back(Literal::positive(Atom{gate, {}}));
      }
    } else {
      for (const auto& r : g.seals)
        out.rules[g.index].body.push_back(Literal::positive(Atom{SnapshotNames(r).seal, {}}));
    }
  }
  return out;
}

}  // namespace detail

/// FIFO variant (Chandy-Lamport style marker): per-channel order makes a
/// received marker certify everything the sender emitted before it.
inline TransducerSpec inject_snapshot_fifo(const TransducerSpec& spec) {
  return detail::inject_snapshot(spec, true);
}

/// Generic variant: markers carry the emitted count, and sealing requires
/// both every marker and a received-count equal to the announced total.
inline TransducerSpec inject_snapshot_generic(const TransducerSpec& spec) {
  return detail::inject_snapshot(spec, false);
}

}  // namespace tdnet

#endif  // TDNET_REWRITER_HPP_
