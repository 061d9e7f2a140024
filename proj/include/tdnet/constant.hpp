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

#ifndef TDNET_CONSTANT_HPP_
#define TDNET_CONSTANT_HPP_

#include <cctype>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace tdnet {

/// A domain constant: an integer or a symbol. Totally ordered (integers
/// before symbols) so that every container iteration is deterministic.
class Constant {
 public:
  Constant() : v_(std::int64_t{0}) {}
  explicit Constant(std::int64_t i) : v_(i) {}
  explicit Constant(std::string s) : v_(std::move(s)) {}
  explicit Constant(const char* s) : v_(std::string(s)) {}

  bool is_int() const { return v_.index() == 0; }
  std::int64_t as_int() const {
    if (!is_int()) throw std::runtime_error("constant is not an integer: " + to_string());
    return std::get<0>(v_);
  }
  const std::string& as_symbol() const { return std::get<1>(v_); }

  friend bool operator==(const Constant& a, const Constant& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Constant& a, const Constant& b) { return a.v_ != b.v_; }
  friend bool operator<(const Constant& a, const Constant& b) { return a.v_ < b.v_; }
  friend bool operator<=(const Constant& a, const Constant& b) { return a.v_ <= b.v_; }
  friend bool operator>(const Constant& a, const Constant& b) { return a.v_ > b.v_; }
  friend bool operator>=(const Constant& a, const Constant& b) { return a.v_ >= b.v_; }

  std::string to_string() const {
    if (is_int()) return std::to_string(std::get<0>(v_));
    const std::string& s = std::get<1>(v_);
    for (char c : s) {
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'')) {
        return "\"" + s + "\"";
      }
    }
    if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0]))) return "\"" + s + "\"";
    return s;
  }

  /// Canonical byte encoding, used by seeded hash families.
  std::string bytes() const {
    if (is_int()) return "i:" + std::to_string(std::get<0>(v_));
    return "s:" + std::get<1>(v_);
  }

 private:
  std::variant<std::int64_t, std::string> v_;
};

using Tuple = std::vector<Constant>;

struct Fact {
  std::string relation;
  Tuple tuple;

  friend bool operator==(const Fact& a, const Fact& b) {
    return a.relation == b.relation && a.tuple == b.tuple;
  }
  friend bool operator<(const Fact& a, const Fact& b) {
    if (a.relation != b.relation) return a.relation < b.relation;
    return a.tuple < b.tuple;
  }

  std::string to_string() const {
    std::ostringstream os;
    os << relation << '(';
    for (std::size_t i = 0; i < tuple.size(); ++i) {
      if (i) os << ',';
      os << tuple[i].to_string();
    }
    os << ')';
    return os.str();
  }
};

/// A finite set of facts grouped by relation. Set semantics, sorted storage.
class Instance {
 public:
  using RelMap = std::map<std::string, std::set<Tuple>>;

  Instance() = default;

  bool insert(const std::string& rel, Tuple t) {
    return rels_[rel].insert(std::move(t)).second;
  }
  bool insert(const Fact& f) { return insert(f.relation, f.tuple); }

  bool contains(const std::string& rel, const Tuple& t) const {
    auto it = rels_.find(rel);
    return it != rels_.end() && it->second.count(t) > 0;
  }
  bool contains(const Fact& f) const { return contains(f.relation, f.tuple); }

  const std::set<Tuple>& relation(const std::string& rel) const {
    static const std::set<Tuple> kEmpty;
    auto it = rels_.find(rel);
    return it == rels_.end() ? kEmpty : it->second;
  }

  bool relation_empty(const std::string& rel) const { return relation(rel).empty(); }

  const RelMap& relations() const { return rels_; }

  std::size_t size() const {
    std::size_t n = 0;
    for (const auto& [r, ts] : rels_) n += ts.size();
    return n;
  }
  bool empty() const { return size() == 0; }

  void merge(const Instance& other) {
    for (const auto& [r, ts] : other.rels_) rels_[r].insert(ts.begin(), ts.end());
  }

  /// Keep only the named relations.
  Instance restrict_to(const std::set<std::string>& keep) const {
    Instance out;
    for (const auto& [r, ts] : rels_) {
      if (keep.count(r)) out.rels_[r] = ts;
    }
    return out;
  }

  Instance without(const std::set<std::string>& drop) const {
    Instance out;
    for (const auto& [r, ts] : rels_) {
      if (!drop.count(r)) out.rels_[r] = ts;
    }
    return out;
  }

  std::vector<Fact> facts() const {
    std::vector<Fact> out;
    for (const auto& [r, ts] : rels_)
      for (const auto& t : ts) out.push_back(Fact{r, t});
    return out;
  }

  /// All constants appearing anywhere in the instance.
  std::set<Constant> active_domain() const {
    std::set<Constant> dom;
    for (const auto& [r, ts] : rels_)
      for (const auto& t : ts) dom.insert(t.begin(), t.end());
    return dom;
  }

  friend bool operator==(const Instance& a, const Instance& b) {
    // Empty relation entries do not distinguish instances.
    auto norm = [](const Instance& x) {
      RelMap m;
      for (const auto& [r, ts] : x.rels_)
        if (!ts.empty()) m[r] = ts;
      return m;
    };
    return norm(a) == norm(b);
  }
  friend bool operator!=(const Instance& a, const Instance& b) { return !(a == b); }
  friend bool operator<(const Instance& a, const Instance& b) {
    return a.facts() < b.facts();
  }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& f : facts()) {
      if (!first) os << ", ";
      first = false;
      os << f.to_string();
    }
    os << '}';
    return os.str();
  }

 private:
  RelMap rels_;
};

}  // namespace tdnet

#endif  // TDNET_CONSTANT_HPP_
