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

#ifndef TDNET_TRACE_IO_HPP_
#define TDNET_TRACE_IO_HPP_

#include <ostream>
#include <string>

#include "tdnet/analyzer.hpp"
#include "tdnet/trace.hpp"

namespace tdnet {

namespace detail {

inline std::string node_set_text(const std::set<NodeId>& nodes) {
  std::string out;
  for (NodeId n : nodes) out += (out.empty() ? "" : ",") + std::to_string(n);
  return out;
}

inline std::string instance_inline(const Instance& inst) {
  std::string out = "{";
  bool first = true;
  for (const auto& f : inst.facts()) {
    if (!first) out += ",";
    first = false;
    out += f.to_string();
  }
  return out + "}";
}

}  // namespace detail

/// Line-delimited trace records with a leading record-type token and stable
/// field order; identical runs print byte-identically.
inline void write_trace(std::ostream& os, const Trace& t) {
  os << "run spec=" << (t.spec_name.empty() ? "-" : t.spec_name)
     << " nodes=" << detail::node_set_text(t.nodes) << " active=" << detail::node_set_text(t.active)
     << " t0=" << t.t0 << " semantics=" << t.semantics << " delay_bound=" << t.delay_bound
     << " fifo=" << (t.fifo ? 1 : 0) << " comm=" << t.comm << " seed=" << t.seed << "\n";
  for (const auto& snap : t.rounds) {
    for (const auto& [i, s] : snap.nodes) {
      os << "state round=" << snap.round << " node=" << i
         << " mem=" << detail::instance_inline(s.mem) << " out=" << detail::instance_inline(s.out)
         << " received=" << detail::instance_inline(snap.received.at(i)) << "\n";
    }
  }
  for (const auto& e : t.events) {
    if (e.kind == TraceEvent::Kind::Emit) {
      os << "emit round=" << e.round << " src=" << e.src << " fact=" << e.fact.to_string()
         << " dst=" << detail::node_set_text(e.dsts) << " seq=" << e.seq << "\n";
    } else {
      os << "deliver round=" << e.round << " src=" << e.src << " dst=" << e.dst
         << " emit_round=" << e.emit_round << " fact=" << e.fact.to_string() << "\n";
    }
  }
  for (const auto& m : t.undelivered) {
    os << "pending due=" << m.due_round << " src=" << m.src << " dst=" << m.dst
       << " emit_round=" << m.emit_round << " fact=" << m.fact.to_string() << "\n";
  }
  if (t.quiesced()) {
    os << "quiescence round=" << *t.quiescence << "\n";
    for (const auto& f : t.out_star.facts()) os << "out " << f.to_string() << "\n";
  } else {
    os << "quiescence bottom\n";
  }
}

inline std::string out_star_text(const Trace& t) {
  if (!t.quiesced()) return "out(*): bottom";
  return "out(*): " + detail::instance_inline(t.out_star);
}

/// Structured taxonomy report: one record per line, stable field order.
inline void write_report(std::ostream& os, const TaxonomyReport& rep) {
  os << "taxonomy monotone=" << (rep.monotone ? "true" : "false")
     << " chained=" << (rep.chained ? "true" : "false")
     << " recursion_bounded=" << (rep.recursion_bounded ? "true" : "false")
     << " hashing=" << (rep.hashing ? "true" : "false") << "\n";
  for (const auto& [sem, ep] : rep.embarrassingly_parallel)
    os << "ep semantics=" << sem << " value=" << (ep ? "true" : "false") << "\n";
  for (const auto& [sem, cls] : rep.coordination_class)
    os << "class semantics=" << sem << " value=" << to_string(cls)
       << " injected_protocol=" << (rep.requires_injected_protocol.at(sem) ? "true" : "false")
       << "\n";
  for (const auto& n : rep.notes) os << "note " << n << "\n";
}

inline std::string report_summary(const TaxonomyReport& rep, const std::string& semantics) {
  std::string out;
  out += rep.monotone ? "monotone" : "non-monotone";
  out += rep.chained ? " chained" : " unchained";
  out += rep.recursion_bounded ? " recursion-bounded" : " recursion-unbounded";
  if (rep.hashing) out += " hashing";
  CoordClass cls = rep.coordination_class.at(semantics);
  if (cls == CoordClass::None) {
    out += " coordination-free(" + semantics + ")";
  } else {
    out += " " + std::string(to_string(cls)) + "-coordination(" + semantics + ")";
  }
  return out;
}

}  // namespace tdnet

#endif  // TDNET_TRACE_IO_HPP_
