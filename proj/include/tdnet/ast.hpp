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

#ifndef TDNET_AST_HPP_
#define TDNET_AST_HPP_

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdnet/constant.hpp"

namespace tdnet {

// Reserved relation names shared by every transducer.
inline constexpr const char* kTimeRel = "Time";
inline constexpr const char* kIdRel = "Id";
inline constexpr const char* kAllRel = "All";

/// Hash key of an emit relation: the first k terms, every term (k = arity is
/// "maximal"), or inf (broadcast to every reachable node).
struct Key {
  enum class Kind { Absent, Finite, Inf };
  Kind kind = Kind::Absent;
  int k = 0;  // meaningful for Finite

  static Key absent() { return Key{}; }
  static Key finite(int k) { return Key{Kind::Finite, k}; }
  static Key inf() { return Key{Kind::Inf, 0}; }

  bool is_absent() const { return kind == Kind::Absent; }
  bool is_inf() const { return kind == Kind::Inf; }
  bool is_finite() const { return kind == Kind::Finite; }

  friend bool operator==(const Key& a, const Key& b) {
    return a.kind == b.kind && (a.kind != Kind::Finite || a.k == b.k);
  }
};

struct RelationDecl {
  std::string name;
  int arity = 0;
  Key key;  // only emit relations carry keys

  friend bool operator==(const RelationDecl& a, const RelationDecl& b) {
    return a.name == b.name && a.arity == b.arity && a.key == b.key;
  }
};

struct Term {
  enum class Kind { Var, Const };
  Kind kind = Kind::Var;
  std::string var;  // Var; wildcards are freshened by the parser
  Constant value;   // Const

  static Term make_var(std::string v) { return Term{Kind::Var, std::move(v), Constant{}}; }
  static Term make_const(Constant c) { return Term{Kind::Const, "", std::move(c)}; }
  bool is_var() const { return kind == Kind::Var; }

  friend bool operator==(const Term& a, const Term& b) {
    if (a.kind != b.kind) return false;
    return a.is_var() ? a.var == b.var : a.value == b.value;
  }
};

struct Atom {
  std::string relation;
  std::vector<Term> terms;

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.relation == b.relation && a.terms == b.terms;
  }
};

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };
enum class ArithOp { Add, Mul };

/// One body literal: a (possibly negated) atom, a comparison, or an
/// arithmetic binding `res = lhs op rhs`.
struct Literal {
  enum class Kind { Positive, Negative, Compare, Arith };
  Kind kind = Kind::Positive;

  Atom atom;  // Positive / Negative

  CmpOp cmp = CmpOp::Eq;  // Compare: lhs cmp rhs
  Term lhs, rhs;

  ArithOp arith = ArithOp::Add;  // Arith: res = lhs arith rhs
  Term res;

  static Literal positive(Atom a) {
    Literal l;
    l.kind = Kind::Positive;
    l.atom = std::move(a);
    return l;
  }
  static Literal negative(Atom a) {
    Literal l;
    l.kind = Kind::Negative;
    l.atom = std::move(a);
    return l;
  }

  bool is_atom() const { return kind == Kind::Positive || kind == Kind::Negative; }

  friend bool operator==(const Literal& a, const Literal& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Kind::Positive:
      case Kind::Negative:
        return a.atom == b.atom;
      case Kind::Compare:
        return a.cmp == b.cmp && a.lhs == b.lhs && a.rhs == b.rhs;
      case Kind::Arith:
        return a.arith == b.arith && a.res == b.res && a.lhs == b.lhs && a.rhs == b.rhs;
    }
    return false;
  }
};

enum class AggKind { None, Count, Sum, FsCount };

/// Aggregate head term, e.g. T(u, count<v>): `over` is the counted variable
/// tuple (possibly empty), the plain head terms are the grouping terms.
struct HeadAgg {
  AggKind kind = AggKind::None;
  std::vector<std::string> over;

  friend bool operator==(const HeadAgg& a, const HeadAgg& b) {
    return a.kind == b.kind && a.over == b.over;
  }
};

/// Which transducer query a rule belongs to. Plain Datalog programs use Aux.
enum class RuleTarget { Aux, Ins, Del, Out, Emt };

struct Rule {
  Atom head;  // grouping terms only when agg.kind != None
  HeadAgg agg;
  std::vector<Literal> body;
  RuleTarget target = RuleTarget::Aux;
  int line = 0, col = 0;

  bool has_agg() const { return agg.kind != AggKind::None; }

  std::set<std::string> head_vars() const {
    std::set<std::string> vs;
    for (const auto& t : head.terms)
      if (t.is_var()) vs.insert(t.var);
    for (const auto& v : agg.over) vs.insert(v);
    return vs;
  }

  friend bool operator==(const Rule& a, const Rule& b) {
    return a.head == b.head && a.agg == b.agg && a.body == b.body && a.target == b.target;
  }
};

struct Program {
  std::vector<RelationDecl> decls;
  std::vector<Rule> rules;

  const RelationDecl* find_decl(const std::string& name) const {
    for (const auto& d : decls)
      if (d.name == name) return &d;
    return nullptr;
  }

  std::set<std::string> head_relations() const {
    std::set<std::string> hs;
    for (const auto& r : rules) hs.insert(r.head.relation);
    return hs;
  }

  friend bool operator==(const Program& a, const Program& b) {
    return a.decls == b.decls && a.rules == b.rules;
  }
};

/// The six-part transducer schema. Time and the system relations Id/All are
/// implicit and shared by every transducer.
struct TransducerSchema {
  std::vector<RelationDecl> db, mem, emt, out;

  const RelationDecl* find(const std::string& name) const {
    for (const auto* part : {&db, &mem, &emt, &out})
      for (const auto& d : *part)
        if (d.name == name) return &d;
    return nullptr;
  }
  bool in(const std::vector<RelationDecl>& part, const std::string& name) const {
    return std::any_of(part.begin(), part.end(),
                       [&](const RelationDecl& d) { return d.name == name; });
  }
  std::set<std::string> names(const std::vector<RelationDecl>& part) const {
    std::set<std::string> out_;
    for (const auto& d : part) out_.insert(d.name);
    return out_;
  }

  friend bool operator==(const TransducerSchema& a, const TransducerSchema& b) {
    return a.db == b.db && a.mem == b.mem && a.emt == b.emt && a.out == b.out;
  }
};

/// A transducer: schema plus the rules of the four query classes (targets on
/// the rules) and any per-transition auxiliary rules. The key-set lives on
/// the emt declarations.
struct TransducerSpec {
  std::string name;
  TransducerSchema schema;
  std::vector<Rule> rules;

  std::vector<Rule> rules_for(RuleTarget t) const {
    std::vector<Rule> out_;
    for (const auto& r : rules)
      if (r.target == t) out_.push_back(r);
    return out_;
  }

  Key key_of(const std::string& emt_rel) const {
    for (const auto& d : schema.emt)
      if (d.name == emt_rel) return d.key;
    return Key::absent();
  }

  friend bool operator==(const TransducerSpec& a, const TransducerSpec& b) {
    return a.schema == b.schema && a.rules == b.rules;
  }
};

}  // namespace tdnet

#endif  // TDNET_AST_HPP_
