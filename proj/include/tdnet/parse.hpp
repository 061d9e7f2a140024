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

#ifndef TDNET_PARSE_HPP_
#define TDNET_PARSE_HPP_

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"

namespace tdnet {

struct ParseError : std::runtime_error {
  int line, col;
  ParseError(const std::string& msg, int line_, int col_)
      : std::runtime_error(msg + " (line " + std::to_string(line_) + ", col " +
                           std::to_string(col_) + ")"),
        line(line_),
        col(col_) {}
};

namespace detail {

struct Token {
  enum class Kind { Ident, Int, String, Punct, End };
  Kind kind = Kind::End;
  std::string text;
  std::int64_t int_val = 0;
  int line = 1, col = 1;
};

/// Tokenizer for programs, spec files, fact files and run configs.
/// Comments run from '%' to end of line. Identifiers may contain primes.
class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) { next(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    next();
    return t;
  }

  bool at(const std::string& punct) const {
    return tok_.kind == Token::Kind::Punct && tok_.text == punct;
  }
  bool at_ident(const std::string& id) const {
    return tok_.kind == Token::Kind::Ident && tok_.text == id;
  }
  bool eat(const std::string& punct) {
    if (!at(punct)) return false;
    next();
    return true;
  }
  void expect(const std::string& punct) {
    if (!eat(punct)) fail("expected '" + punct + "'");
  }
  std::string expect_ident() {
    if (tok_.kind != Token::Kind::Ident) fail("expected identifier");
    return take().text;
  }
  std::int64_t expect_int() {
    if (tok_.kind != Token::Kind::Int) fail("expected integer");
    return take().int_val;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError(msg, tok_.line, tok_.col);
  }
  bool done() const { return tok_.kind == Token::Kind::End; }

 private:
  void next() {
    skip_ws();
    tok_ = Token{};
    tok_.line = line_;
    tok_.col = col_;
    if (pos_ >= src_.size()) {
      tok_.kind = Token::Kind::End;
      return;
    }
    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::string id;
      while (pos_ < src_.size()) {
        char d = src_[pos_];
        if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '\'') {
          id += d;
          advance();
        } else {
          break;
        }
      }
      tok_.kind = Token::Kind::Ident;
      tok_.text = id;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      std::string num;
      if (c == '-') {
        num += c;
        advance();
      }
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        num += src_[pos_];
        advance();
      }
      tok_.kind = Token::Kind::Int;
      tok_.text = num;
      tok_.int_val = std::stoll(num);
      return;
    }
    if (c == '"') {
      advance();
      std::string s;
      while (pos_ < src_.size() && src_[pos_] != '"') {
        s += src_[pos_];
        advance();
      }
      if (pos_ >= src_.size()) throw ParseError("unterminated string", tok_.line, tok_.col);
      advance();
      tok_.kind = Token::Kind::String;
      tok_.text = s;
      return;
    }
    // multi-char operators first
    for (const char* op : {"<-", "<=", ">=", "!="}) {
      if (src_.compare(pos_, 2, op) == 0) {
        tok_.kind = Token::Kind::Punct;
        tok_.text = op;
        advance();
        advance();
        return;
      }
    }
    static const std::string kSingles = "(),.<>=+*/@{}[]:;";
    if (kSingles.find(c) != std::string::npos) {
      tok_.kind = Token::Kind::Punct;
      tok_.text = std::string(1, c);
      advance();
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void skip_ws() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '%') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1, col_ = 1;
  Token tok_;
};

inline bool is_agg_name(const std::string& s) {
  return s == "count" || s == "sum" || s == "fs_count";
}

inline AggKind agg_kind_of(const std::string& s) {
  if (s == "count") return AggKind::Count;
  if (s == "sum") return AggKind::Sum;
  return AggKind::FsCount;
}

}  // namespace detail

/// Safety: every head variable is bound, negated atoms / comparisons only
/// see bound variables, and arithmetic `w = u + v` may bind w once u, v are
/// bound. Returns an error message or nullopt.
inline std::optional<std::string> rule_safety_error(const Rule& r) {
  std::set<std::string> bound;
  std::vector<bool> done(r.body.size(), false);
  auto term_bound = [&](const Term& t) { return !t.is_var() || bound.count(t.var) > 0; };

  bool progressed = true;
  while (progressed) {
    progressed = false;
    // evaluate everything already grounded
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (done[i]) continue;
      const Literal& l = r.body[i];
      switch (l.kind) {
        case Literal::Kind::Negative: {
          bool ok = true;
          for (const auto& t : l.atom.terms)
            if (t.is_var() && !bound.count(t.var)) ok = false;
          if (ok) {
            done[i] = true;
            progressed = true;
          }
          break;
        }
        case Literal::Kind::Compare: {
          if (term_bound(l.lhs) && term_bound(l.rhs)) {
            done[i] = true;
            progressed = true;
          } else if (l.cmp == CmpOp::Eq && (term_bound(l.lhs) || term_bound(l.rhs))) {
            // x = y with one side bound binds the other
            if (l.lhs.is_var() && !term_bound(l.lhs)) bound.insert(l.lhs.var);
            if (l.rhs.is_var() && !term_bound(l.rhs)) bound.insert(l.rhs.var);
            done[i] = true;
            progressed = true;
          }
          break;
        }
        case Literal::Kind::Arith: {
          if (term_bound(l.lhs) && term_bound(l.rhs)) {
            if (l.res.is_var()) bound.insert(l.res.var);
            done[i] = true;
            progressed = true;
          }
          break;
        }
        case Literal::Kind::Positive:
          break;
      }
    }
    // then bind via the next positive atom in textual order
    for (std::size_t i = 0; i < r.body.size(); ++i) {
      if (done[i] || r.body[i].kind != Literal::Kind::Positive) continue;
      for (const auto& t : r.body[i].atom.terms)
        if (t.is_var()) bound.insert(t.var);
      done[i] = true;
      progressed = true;
      break;
    }
  }

  for (std::size_t i = 0; i < r.body.size(); ++i) {
    if (done[i]) continue;
    const Literal& l = r.body[i];
    if (l.kind == Literal::Kind::Negative)
      return "unsafe rule: variable in negated " + l.atom.relation + " not bound positively";
    return "unsafe rule: comparison or arithmetic over unbound variables";
  }
  for (const auto& v : r.head_vars())
    if (!bound.count(v)) return "unsafe rule: head variable " + v + " not bound";
  return std::nullopt;
}

namespace detail {

class ProgramParser {
 public:
  explicit ProgramParser(std::string_view src) : lex_(src) {}

  /// Plain Datalog program: declarations plus rules; every referenced
  /// relation must be declared.
  Program parse_program() {
    Program p;
    while (!lex_.done()) {
      if (lex_.at_ident("decl")) {
        p.decls.push_back(parse_decl());
      } else {
        p.rules.push_back(parse_rule(/*spec_mode=*/false));
      }
    }
    validate_program(p);
    return p;
  }

  /// Transducer spec file: section headers assign declarations to the
  /// sub-schemas; rule heads carry _ins/_del/_out/_emt suffixes; suffix-free
  /// heads declare per-transition auxiliary relations.
  TransducerSpec parse_spec(const std::string& name) {
    TransducerSpec spec;
    spec.name = name;
    std::vector<RelationDecl>* section = nullptr;
    bool in_emt = false;
    while (!lex_.done()) {
      if (lex_.eat("@")) {
        auto t = lex_.peek();
        std::string s = lex_.expect_ident();
        if (s == "db") {
          section = &spec.schema.db;
        } else if (s == "mem") {
          section = &spec.schema.mem;
        } else if (s == "emt") {
          section = &spec.schema.emt;
        } else if (s == "out") {
          section = &spec.schema.out;
        } else {
          throw ParseError("unknown section @" + s, t.line, t.col);
        }
        in_emt = (s == "emt");
        continue;
      }
      if (lex_.at_ident("decl")) {
        auto t = lex_.peek();
        if (!section) throw ParseError("declaration outside @db/@mem/@emt/@out section", t.line, t.col);
        RelationDecl d = parse_decl();
        if (!in_emt && !d.key.is_absent())
          throw ParseError("key only allowed on @emt declarations", t.line, t.col);
        if (in_emt && d.key.is_absent())
          throw ParseError("emit relation " + d.name + " needs key=<k> or key=inf", t.line, t.col);
        section->push_back(d);
        continue;
      }
      spec.rules.push_back(parse_rule(/*spec_mode=*/true));
    }
    validate_spec(spec);
    return spec;
  }

  Instance parse_instance() {
    Instance inst;
    while (!lex_.done()) {
      std::string rel = lex_.expect_ident();
      lex_.expect("(");
      Tuple t;
      if (!lex_.at(")")) {
        do {
          t.push_back(parse_constant());
        } while (lex_.eat(","));
      }
      lex_.expect(")");
      lex_.expect(".");
      inst.insert(rel, std::move(t));
    }
    return inst;
  }

  Constant parse_constant() {
    auto tok = lex_.take();
    switch (tok.kind) {
      case Token::Kind::Int:
        return Constant(tok.int_val);
      case Token::Kind::Ident:
      case Token::Kind::String:
        return Constant(tok.text);
      default:
        throw ParseError("expected constant", tok.line, tok.col);
    }
  }

 private:
  RelationDecl parse_decl() {
    lex_.take();  // decl
    RelationDecl d;
    d.name = lex_.expect_ident();
    lex_.expect("/");
    d.arity = static_cast<int>(lex_.expect_int());
    if (d.arity < 0) lex_.fail("negative arity");
    if (lex_.at_ident("key")) {
      auto kt = lex_.take();
      lex_.expect("=");
      if (lex_.at_ident("inf")) {
        lex_.take();
        d.key = Key::inf();
      } else {
        int k = static_cast<int>(lex_.expect_int());
        if (k < 1 || k > d.arity)
          throw ParseError("key must satisfy 1 <= k <= arity", kt.line, kt.col);
        d.key = Key::finite(k);
      }
    }
    lex_.expect(".");
    return d;
  }

  Rule parse_rule(bool spec_mode) {
    Rule r;
    auto head_tok = lex_.peek();
    r.line = head_tok.line;
    r.col = head_tok.col;
    std::string head_name = lex_.expect_ident();
    if (spec_mode) {
      r.target = strip_target(head_name);
    }
    r.head.relation = head_name;
    lex_.expect("(");
    bool saw_agg = false;
    if (!lex_.at(")")) {
      do {
        if (lex_.peek().kind == Token::Kind::Ident && is_agg_name(lex_.peek().text)) {
          // lookahead for '<'
          std::string agg_name = lex_.peek().text;
          Lexer save = lex_;
          lex_.take();
          if (lex_.at("<")) {
            if (saw_agg) lex_.fail("at most one aggregate per head");
            saw_agg = true;
            r.agg.kind = agg_kind_of(agg_name);
            lex_.take();  // <
            if (lex_.eat("(")) {
              if (!lex_.at(")")) {
                do {
                  r.agg.over.push_back(lex_.expect_ident());
                } while (lex_.eat(","));
              }
              lex_.expect(")");
            } else {
              r.agg.over.push_back(lex_.expect_ident());
            }
            lex_.expect(">");
            continue;
          }
          lex_ = save;  // plain term named count/sum/fs_count
        }
        if (saw_agg) lex_.fail("aggregate must be the last head term");
        r.head.terms.push_back(parse_term());
      } while (lex_.eat(","));
    }
    lex_.expect(")");
    if (lex_.eat("<-")) {
      do {
        r.body.push_back(parse_literal());
      } while (lex_.eat(","));
    }
    lex_.expect(".");
    if (auto err = rule_safety_error(r))
      throw ParseError(*err, r.line, r.col);
    return r;
  }

  RuleTarget strip_target(std::string& name) {
    struct Suffix {
      const char* text;
      RuleTarget target;
    };
    static const Suffix kSuffixes[] = {{"_ins", RuleTarget::Ins},
                                       {"_del", RuleTarget::Del},
                                       {"_out", RuleTarget::Out},
                                       {"_emt", RuleTarget::Emt}};
    for (const auto& s : kSuffixes) {
      std::string suf = s.text;
      if (name.size() > suf.size() && name.compare(name.size() - suf.size(), suf.size(), suf) == 0) {
        name = name.substr(0, name.size() - suf.size());
        return s.target;
      }
    }
    return RuleTarget::Aux;
  }

  Literal parse_literal() {
    if (lex_.at_ident("not")) {
      lex_.take();
      Literal l = Literal::negative(parse_atom());
      return l;
    }
    // atom iff IDENT followed by '('
    if (lex_.peek().kind == Token::Kind::Ident) {
      Lexer save = lex_;
      std::string id = lex_.take().text;
      if (lex_.at("(")) {
        lex_ = save;
        return Literal::positive(parse_atom());
      }
      lex_ = save;
    }
    // comparison or arithmetic binding
    Literal l;
    l.lhs = parse_term();
    auto op_tok = lex_.take();
    if (op_tok.kind != Token::Kind::Punct) throw ParseError("expected comparison operator", op_tok.line, op_tok.col);
    std::string op = op_tok.text;
    Term second = parse_term();
    if (op == "=" && (lex_.at("+") || lex_.at("*"))) {
      l.kind = Literal::Kind::Arith;
      l.arith = lex_.take().text == "+" ? ArithOp::Add : ArithOp::Mul;
      l.res = l.lhs;
      l.lhs = second;
      l.rhs = parse_term();
      return l;
    }
    l.kind = Literal::Kind::Compare;
    l.rhs = second;
    if (op == "=") {
      l.cmp = CmpOp::Eq;
    } else if (op == "!=") {
      l.cmp = CmpOp::Ne;
    } else if (op == "<") {
      l.cmp = CmpOp::Lt;
    } else if (op == "<=") {
      l.cmp = CmpOp::Le;
    } else if (op == ">") {
      l.cmp = CmpOp::Gt;
    } else if (op == ">=") {
      l.cmp = CmpOp::Ge;
    } else {
      throw ParseError("unknown operator '" + op + "'", op_tok.line, op_tok.col);
    }
    return l;
  }

  Atom parse_atom() {
    Atom a;
    a.relation = lex_.expect_ident();
    lex_.expect("(");
    if (!lex_.at(")")) {
      do {
        a.terms.push_back(parse_term());
      } while (lex_.eat(","));
    }
    lex_.expect(")");
    return a;
  }

  Term parse_term() {
    auto tok = lex_.take();
    switch (tok.kind) {
      case Token::Kind::Ident:
        if (tok.text == "_") return Term::make_var("_#" + std::to_string(wildcard_counter_++));
        return Term::make_var(tok.text);
      case Token::Kind::Int:
        return Term::make_const(Constant(tok.int_val));
      case Token::Kind::String:
        return Term::make_const(Constant(tok.text));
      default:
        throw ParseError("expected term", tok.line, tok.col);
    }
  }

  void validate_program(const Program& p) {
    std::map<std::string, int> arity;
    for (const auto& d : p.decls) {
      if (arity.count(d.name))
        throw ParseError("relation " + d.name + " declared twice", 1, 1);
      arity[d.name] = d.arity;
    }
    auto check = [&](const Atom& a, int line, int col) {
      auto it = arity.find(a.relation);
      if (it == arity.end())
        throw ParseError("undeclared relation " + a.relation, line, col);
      if (it->second != static_cast<int>(a.terms.size()))
        throw ParseError("arity mismatch for " + a.relation + ": declared " +
                             std::to_string(it->second) + ", used with " +
                             std::to_string(a.terms.size()),
                         line, col);
    };
    for (const auto& r : p.rules) {
      Atom h = r.head;
      // aggregate term participates in the head arity
      for (std::size_t i = 0; i < (r.has_agg() ? 1u : 0u); ++i)
        h.terms.push_back(Term::make_var("#agg"));
      check(h, r.line, r.col);
      for (const auto& l : r.body)
        if (l.is_atom()) check(l.atom, r.line, r.col);
    }
  }

  void validate_spec(const TransducerSpec& spec) {
    std::map<std::string, int> schema_arity;
    auto add = [&](const RelationDecl& d, const char* part) {
      if (schema_arity.count(d.name))
        throw ParseError("relation " + d.name + " declared in two sub-schemas", 1, 1);
      if (d.name == kTimeRel || d.name == kIdRel || d.name == kAllRel)
        throw ParseError(std::string("relation name ") + d.name + " is reserved", 1, 1);
      (void)part;
      schema_arity[d.name] = d.arity;
    };
    for (const auto& d : spec.schema.db) add(d, "db");
    for (const auto& d : spec.schema.mem) add(d, "mem");
    for (const auto& d : spec.schema.emt) add(d, "emt");
    for (const auto& d : spec.schema.out) add(d, "out");
    schema_arity[kTimeRel] = 1;
    schema_arity[kIdRel] = 1;
    schema_arity[kAllRel] = 1;

    // auxiliary arities from suffix-free heads
    std::map<std::string, int> aux_arity;
    for (const auto& r : spec.rules) {
      if (r.target != RuleTarget::Aux) continue;
      const std::string& n = r.head.relation;
      if (schema_arity.count(n))
        throw ParseError("rule derives into schema relation " + n +
                             " without an _ins/_del/_out/_emt target suffix",
                         r.line, r.col);
      int ar = static_cast<int>(r.head.terms.size()) + (r.has_agg() ? 1 : 0);
      auto it = aux_arity.find(n);
      if (it == aux_arity.end()) {
        aux_arity[n] = ar;
      } else if (it->second != ar) {
        throw ParseError("auxiliary relation " + n + " used with two arities", r.line, r.col);
      }
    }

    for (const auto& r : spec.rules) {
      // head target placement
      int head_ar = static_cast<int>(r.head.terms.size()) + (r.has_agg() ? 1 : 0);
      const std::string& n = r.head.relation;
      switch (r.target) {
        case RuleTarget::Ins:
        case RuleTarget::Del:
          if (!spec.schema.in(spec.schema.mem, n))
            throw ParseError(n + "_ins/_del head must name a @mem relation", r.line, r.col);
          break;
        case RuleTarget::Out:
          if (!spec.schema.in(spec.schema.out, n))
            throw ParseError(n + "_out head must name an @out relation", r.line, r.col);
          break;
        case RuleTarget::Emt:
          if (!spec.schema.in(spec.schema.emt, n))
            throw ParseError(n + "_emt head must name an @emt relation", r.line, r.col);
          break;
        case RuleTarget::Aux:
          break;
      }
      if (r.target != RuleTarget::Aux && schema_arity.at(n) != head_ar)
        throw ParseError("arity mismatch for " + n, r.line, r.col);
      for (const auto& l : r.body) {
        if (!l.is_atom()) continue;
        const std::string& b = l.atom.relation;
        int ar = static_cast<int>(l.atom.terms.size());
        if (schema_arity.count(b)) {
          if (schema_arity.at(b) != ar)
            throw ParseError("arity mismatch for " + b, r.line, r.col);
        } else if (aux_arity.count(b)) {
          if (aux_arity.at(b) != ar)
            throw ParseError("arity mismatch for auxiliary " + b, r.line, r.col);
        } else {
          throw ParseError("undeclared relation " + b, r.line, r.col);
        }
      }
    }
  }

  Lexer lex_;
  int wildcard_counter_ = 0;
};

}  // namespace detail

inline Program parse_program(std::string_view text) {
  return detail::ProgramParser(text).parse_program();
}

inline TransducerSpec parse_spec(std::string_view text, const std::string& name = "") {
  return detail::ProgramParser(text).parse_spec(name);
}

inline Instance parse_instance(std::string_view text) {
  return detail::ProgramParser(text).parse_instance();
}

}  // namespace tdnet

#endif  // TDNET_PARSE_HPP_
