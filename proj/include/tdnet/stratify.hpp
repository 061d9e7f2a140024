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

#ifndef TDNET_STRATIFY_HPP_
#define TDNET_STRATIFY_HPP_

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"

namespace tdnet {

struct NotStratifiableError : std::runtime_error {
  explicit NotStratifiableError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Canonical stratification: SCC condensation of the predicate dependency
/// graph, strata assigned by longest path counting stratum-raising edges
/// (negation and COUNT/SUM aggregation), components with equal index merged.
struct Stratification {
  std::vector<std::set<std::string>> strata;  // derived relations, bottom-up
  std::map<std::string, int> stratum_of;      // derived relations only
  std::set<std::string> edb;                  // referenced, never derived

  std::vector<std::set<std::string>> sccs;
  std::map<std::string, int> scc_of;
  std::set<int> recursive_sccs;
  std::map<int, int> scc_stratum;

  int stratum(const std::string& rel) const {
    auto it = stratum_of.find(rel);
    return it == stratum_of.end() ? -1 : it->second;
  }
  int top_stratum() const { return static_cast<int>(strata.size()) - 1; }
};

namespace detail {

struct DepEdge {
  std::string from, to;
  bool raising = false;
};

inline std::vector<DepEdge> dependency_edges(const std::vector<Rule>& rules) {
  std::vector<DepEdge> edges;
  for (const auto& r : rules) {
    bool agg_raises = r.agg.kind == AggKind::Count || r.agg.kind == AggKind::Sum;
    for (const auto& l : r.body) {
      if (!l.is_atom()) continue;
      bool raising = agg_raises || l.kind == Literal::Kind::Negative;
      edges.push_back({l.atom.relation, r.head.relation, raising});
    }
  }
  return edges;
}

class Tarjan {
 public:
  Tarjan(const std::vector<std::string>& nodes,
         const std::map<std::string, std::set<std::string>>& succ)
      : succ_(succ) {
    for (const auto& n : nodes)
      if (!index_.count(n)) strongconnect(n);
    // Tarjan emits components in reverse topological order.
    std::reverse(sccs_.begin(), sccs_.end());
  }

  const std::vector<std::vector<std::string>>& sccs() const { return sccs_; }

 private:
  // iterative DFS to stay clear of deep recursion on chain-shaped programs
  struct Frame {
    std::string node;
    std::vector<std::string> succs;
    std::size_t next = 0;
  };

  void strongconnect(const std::string& v) {
    std::vector<Frame> stack;
    push_node(v, stack);
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next < f.succs.size()) {
        const std::string& w = f.succs[f.next++];
        if (!index_.count(w)) {
          push_node(w, stack);
        } else if (on_stack_.count(w)) {
          low_[f.node] = std::min(low_[f.node], index_[w]);
        }
      } else {
        if (low_[f.node] == index_[f.node]) {
          std::vector<std::string> comp;
          while (true) {
            std::string w = scc_stack_.back();
            scc_stack_.pop_back();
            on_stack_.erase(w);
            comp.push_back(w);
            if (w == f.node) break;
          }
          std::sort(comp.begin(), comp.end());
          sccs_.push_back(comp);
        }
        std::string done = f.node;
        stack.pop_back();
        if (!stack.empty()) low_[stack.back().node] = std::min(low_[stack.back().node], low_[done]);
      }
    }
  }

  void push_node(const std::string& n, std::vector<Frame>& stack) {
    index_[n] = low_[n] = counter_++;
    scc_stack_.push_back(n);
    on_stack_.insert(n);
    std::vector<std::string> ss;
    auto it = succ_.find(n);
    if (it != succ_.end()) ss.assign(it->second.begin(), it->second.end());
    stack.push_back({n, std::move(ss), 0});
  }

  const std::map<std::string, std::set<std::string>>& succ_;
  std::map<std::string, int> index_, low_;
  std::vector<std::string> scc_stack_;
  std::set<std::string> on_stack_;
  std::vector<std::vector<std::string>> sccs_;
  int counter_ = 0;
};

/// Stratify an arbitrary rule set. `edb_like` relations are inputs: edges out
/// of them carry no constraint and they are excluded from the strata.
inline Stratification stratify_rules(const std::vector<Rule>& rules,
                                     const std::set<std::string>& edb_like) {
  Stratification s;
  std::set<std::string> idb;
  for (const auto& r : rules) idb.insert(r.head.relation);

  std::set<std::string> referenced;
  for (const auto& r : rules)
    for (const auto& l : r.body)
      if (l.is_atom()) referenced.insert(l.atom.relation);
  for (const auto& rel : referenced)
    if (!idb.count(rel)) s.edb.insert(rel);
  for (const auto& rel : edb_like) s.edb.insert(rel);

  auto edges = dependency_edges(rules);
  std::map<std::string, std::set<std::string>> succ;
  std::vector<DepEdge> idb_edges;
  for (const auto& e : edges) {
    if (!idb.count(e.from) || !idb.count(e.to)) continue;  // edb edges are free
    succ[e.from].insert(e.to);
    idb_edges.push_back(e);
  }

  std::vector<std::string> nodes(idb.begin(), idb.end());
  Tarjan tarjan(nodes, succ);
  const auto& comps = tarjan.sccs();
  for (std::size_t i = 0; i < comps.size(); ++i) {
    s.sccs.emplace_back(comps[i].begin(), comps[i].end());
    for (const auto& n : comps[i]) s.scc_of[n] = static_cast<int>(i);
  }

  // recursive components: size > 1 or a self edge
  std::set<std::pair<std::string, std::string>> edge_set;
  for (const auto& e : idb_edges) edge_set.insert({e.from, e.to});
  for (std::size_t i = 0; i < s.sccs.size(); ++i) {
    if (s.sccs[i].size() > 1) {
      s.recursive_sccs.insert(static_cast<int>(i));
    } else {
      const std::string& only = *s.sccs[i].begin();
      if (edge_set.count({only, only})) s.recursive_sccs.insert(static_cast<int>(i));
    }
  }

  // a raising edge inside a component is a recursion through negation or a
  // stratified aggregate
  for (const auto& e : idb_edges) {
    if (e.raising && s.scc_of.at(e.from) == s.scc_of.at(e.to)) {
      std::string cycle;
      for (const auto& n : s.sccs[s.scc_of.at(e.from)]) cycle += (cycle.empty() ? "" : ", ") + n;
      throw NotStratifiableError("not stratifiable: " + e.to + " depends on " + e.from +
                                 " through negation or aggregation inside the recursive "
                                 "component {" + cycle + "}");
    }
  }

  // strata by longest raising path over the condensation; Tarjan order is
  // topological already
  std::vector<int> comp_stratum(s.sccs.size(), 0);
  for (const auto& e : idb_edges) {
    int cf = s.scc_of.at(e.from), ct = s.scc_of.at(e.to);
    if (cf == ct) continue;
    comp_stratum[ct] = std::max(comp_stratum[ct], comp_stratum[cf] + (e.raising ? 1 : 0));
  }
  // propagate along topological order until stable (edges are not sorted)
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& e : idb_edges) {
      int cf = s.scc_of.at(e.from), ct = s.scc_of.at(e.to);
      if (cf == ct) continue;
      int want = comp_stratum[cf] + (e.raising ? 1 : 0);
      if (comp_stratum[ct] < want) {
        comp_stratum[ct] = want;
        changed = true;
      }
    }
  }

  int max_stratum = 0;
  for (std::size_t i = 0; i < s.sccs.size(); ++i)
    max_stratum = std::max(max_stratum, comp_stratum[i]);
  s.strata.assign(idb.empty() ? 0 : max_stratum + 1, {});
  for (std::size_t i = 0; i < s.sccs.size(); ++i) {
    s.scc_stratum[static_cast<int>(i)] = comp_stratum[i];
    for (const auto& n : s.sccs[i]) {
      s.strata[comp_stratum[i]].insert(n);
      s.stratum_of[n] = comp_stratum[i];
    }
  }
  return s;
}

}  // namespace detail

/// Stratify a program. Throws NotStratifiableError with the offending cycle.
inline Stratification stratify(const Program& p) {
  return detail::stratify_rules(p.rules, {});
}

}  // namespace tdnet

#endif  // TDNET_STRATIFY_HPP_
