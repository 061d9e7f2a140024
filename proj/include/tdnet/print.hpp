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

#ifndef TDNET_PRINT_HPP_
#define TDNET_PRINT_HPP_

#include <sstream>
#include <string>

#include "tdnet/ast.hpp"

namespace tdnet {
namespace detail {

inline std::string term_text(const Term& t) {
  if (t.is_var()) {
    if (t.var.rfind("_#", 0) == 0) return "_";
    return t.var;
  }
  if (t.value.is_int()) return std::to_string(t.value.as_int());
  return "\"" + t.value.as_symbol() + "\"";  // bare symbols would reparse as variables
}

inline std::string atom_text(const Atom& a) {
  std::ostringstream os;
  os << a.relation << '(';
  for (std::size_t i = 0; i < a.terms.size(); ++i) {
    if (i) os << ", ";
    os << term_text(a.terms[i]);
  }
  os << ')';
  return os.str();
}

inline const char* agg_name(AggKind k) {
  switch (k) {
    case AggKind::Count: return "count";
    case AggKind::Sum: return "sum";
    case AggKind::FsCount: return "fs_count";
    default: return "";
  }
}

inline const char* cmp_text(CmpOp op) {
  switch (op) {
    case CmpOp::Eq: return "=";
    case CmpOp::Ne: return "!=";
    case CmpOp::Lt: return "<";
    case CmpOp::Le: return "<=";
    case CmpOp::Gt: return ">";
    case CmpOp::Ge: return ">=";
  }
  return "=";
}

inline std::string head_text(const Rule& r, bool spec_mode) {
  std::ostringstream os;
  os << r.head.relation;
  if (spec_mode) {
    switch (r.target) {
      case RuleTarget::Ins: os << "_ins"; break;
      case RuleTarget::Del: os << "_del"; break;
      case RuleTarget::Out: os << "_out"; break;
      case RuleTarget::Emt: os << "_emt"; break;
      case RuleTarget::Aux: break;
    }
  }
  os << '(';
  bool first = true;
  for (const auto& t : r.head.terms) {
    if (!first) os << ", ";
    first = false;
    os << term_text(t);
  }
  if (r.has_agg()) {
    if (!first) os << ", ";
    os << agg_name(r.agg.kind) << '<';
    if (r.agg.over.size() == 1) {
      os << r.agg.over[0];
    } else {
      os << '(';
      for (std::size_t i = 0; i < r.agg.over.size(); ++i) {
        if (i) os << ", ";
        os << r.agg.over[i];
      }
      os << ')';
    }
    os << '>';
  }
  os << ')';
  return os.str();
}

inline std::string literal_text(const Literal& l) {
  switch (l.kind) {
    case Literal::Kind::Positive:
      return atom_text(l.atom);
    case Literal::Kind::Negative:
      return "not " + atom_text(l.atom);
    case Literal::Kind::Compare:
      return term_text(l.lhs) + " " + cmp_text(l.cmp) + " " + term_text(l.rhs);
    case Literal::Kind::Arith:
      return term_text(l.res) + " = " + term_text(l.lhs) +
             (l.arith == ArithOp::Add ? " + " : " * ") + term_text(l.rhs);
  }
  return "";
}

inline std::string rule_text(const Rule& r, bool spec_mode) {
  std::ostringstream os;
  os << head_text(r, spec_mode);
  if (!r.body.empty()) {
    os << " <- ";
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (i) os << ", ";
      os << literal_text(r.body[i]);
    }
  }
  os << '.';
  return os.str();
}

inline std::string decl_text(const RelationDecl& d) {
  std::ostringstream os;
  os << "decl " << d.name << '/' << d.arity;
  if (d.key.is_inf()) os << " key=inf";
  if (d.key.is_finite()) os << " key=" << d.key.k;
  os << '.';
  return os.str();
}

}  // namespace detail

inline std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& d : p.decls) os << detail::decl_text(d) << '\n';
  if (!p.decls.empty() && !p.rules.empty()) os << '\n';
  for (const auto& r : p.rules) os << detail::rule_text(r, false) << '\n';
  return os.str();
}

inline std::string print_spec(const TransducerSpec& spec) {
  std::ostringstream os;
  auto section = [&](const char* name, const std::vector<RelationDecl>& decls) {
    if (decls.empty()) return;
    os << '@' << name << '\n';
    for (const auto& d : decls) os << detail::decl_text(d) << '\n';
  };
  section("db", spec.schema.db);
  section("mem", spec.schema.mem);
  section("emt", spec.schema.emt);
  section("out", spec.schema.out);
  os << '\n';
  for (const auto& r : spec.rules) os << detail::rule_text(r, true) << '\n';
  return os.str();
}

inline std::string print_instance(const Instance& inst) {
  std::ostringstream os;
  for (const auto& f : inst.facts()) os << f.to_string() << ".\n";
  return os.str();
}

}  // namespace tdnet

#endif  // TDNET_PRINT_HPP_
