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

#ifndef TDNET_NETWORK_HPP_
#define TDNET_NETWORK_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "tdnet/ast.hpp"
#include "tdnet/constant.hpp"
#include "tdnet/rng.hpp"
#include "tdnet/strategy.hpp"
#include "tdnet/trace.hpp"
#include "tdnet/transducer.hpp"

namespace tdnet {

struct NetworkError : std::runtime_error {
  explicit NetworkError(const std::string& msg) : std::runtime_error(msg) {}
};

inline constexpr const char* kSTimeRel = "STime";
inline constexpr char kPrimeSuffix = '\'';

/// Delivery semantics: fixed delivery at s+1, bounded variance within
/// [s+1, s+1+var] (optionally per-channel FIFO), or arbitrary finite
/// variance within [s+1, s+1+max_delay] with no ordering guarantee.
struct DeliverySemantics {
  enum class Kind { Rsfd, Rsbv, Rsync };
  Kind kind = Kind::Rsfd;
  int var = 0;
  bool fifo = false;
  int max_delay = 0;

  static DeliverySemantics rsfd() { return DeliverySemantics{}; }
  static DeliverySemantics rsbv(int var, bool fifo) {
    if (var < 1) throw NetworkError("rsbv needs var >= 1");
    DeliverySemantics d;
    d.kind = Kind::Rsbv;
    d.var = var;
    d.fifo = fifo;
    return d;
  }
  static DeliverySemantics rsync(int max_delay) {
    if (max_delay < 1) throw NetworkError("rsync needs max_delay >= 1");
    DeliverySemantics d;
    d.kind = Kind::Rsync;
    d.max_delay = max_delay;
    return d;
  }

  const char* name() const {
    switch (kind) {
      case Kind::Rsfd: return "rsfd";
      case Kind::Rsbv: return "rsbv";
      case Kind::Rsync: return "rsync";
    }
    return "";
  }
  int bound() const {
    switch (kind) {
      case Kind::Rsfd: return 0;
      case Kind::Rsbv: return var;
      case Kind::Rsync: return max_delay;
    }
    return 0;
  }
};

/// The (N, t, P, H) tuple plus run controls.
struct Configuration {
  std::set<NodeId> nodes;
  int t0 = 0;
  PartitionFunction partition;
  HashFamily hash_family;
  CommunicationKind comm = CommunicationKind::Hashing;
  DeliverySemantics semantics;
  std::uint64_t seed = 0;
  int max_rounds = 60;
  std::vector<NodeId> node_order;  // processing order override, tests only

  bool trivial() const { return nodes.size() == 1; }

  std::set<NodeId> active() const {
    return comm == CommunicationKind::Hashing ? hash_family.active : nodes;
  }

  void validate() const {
    if (nodes.empty()) throw NetworkError("configuration needs at least one node");
    if (max_rounds < 1) throw NetworkError("max_rounds must be positive");
    if (comm == CommunicationKind::Hashing) {
      if (hash_family.active.empty())
        throw NetworkError("hash family reaches no node");
      for (NodeId n : hash_family.active)
        if (!nodes.count(n))
          throw NetworkError("hash family reaches unknown node " + std::to_string(n));
      if (hash_family.mode == HashFamily::Mode::Pinned)
        for (const auto& [c, n] : hash_family.pins)
          if (!nodes.count(n))
            throw NetworkError("hash family pins to unknown node " + std::to_string(n));
    }
  }
};

// ---------------------------------------------------------------------------
// Environment construction
// ---------------------------------------------------------------------------

/// The environment transducer for a spec: a primed memory relation per emit
/// relation with memorize and relay rules, plus the clock rules over Time
/// and STime. Successor arithmetic is native.
inline TransducerSpec build_environment(const TransducerSpec& spec) {
  TransducerSpec env;
  env.name = spec.name.empty() ? "environment" : spec.name + ".environment";

  for (const auto& d : spec.schema.emt) {
    std::string primed = d.name + kPrimeSuffix;
    if (spec.schema.find(primed))
      throw NetworkError("name collision with the reserved prime suffix: " + primed);
    if (d.name == kSTimeRel) throw NetworkError("relation name STime is reserved");
    env.schema.mem.push_back({primed, d.arity, Key::absent()});
    env.schema.emt.push_back(d);

    Atom body;
    body.relation = d.name;
    Atom memorize, relay;
    memorize.relation = primed;
    relay.relation = d.name;
    for (int i = 0; i < d.arity; ++i) {
      Term v = Term::make_var("u" + std::to_string(i + 1));
      body.terms.push_back(v);
      memorize.terms.push_back(v);
      relay.terms.push_back(v);
    }
    Rule mem_rule;
    mem_rule.head = memorize;
    mem_rule.target = RuleTarget::Ins;
    mem_rule.body.push_back(Literal::positive(body));
    env.rules.push_back(mem_rule);

    Rule relay_rule;
    relay_rule.head = relay;
    relay_rule.target = RuleTarget::Emt;
    relay_rule.body.push_back(Literal::positive(body));
    env.rules.push_back(relay_rule);
  }

  // clock rules: advance Time, drop the old value, emit STime
  env.schema.mem.push_back({kTimeRel, 1, Key::absent()});
  env.schema.emt.push_back({kSTimeRel, 1, Key::inf()});
  {
    Rule adv;
    adv.head.relation = kTimeRel;
    adv.head.terms.push_back(Term::make_var("s"));
    adv.target = RuleTarget::Ins;
    adv.body.push_back(Literal::positive(Atom{kTimeRel, {Term::make_var("t")}}));
    Literal succ;
    succ.kind = Literal::Kind::Arith;
    succ.arith = ArithOp::Add;
    succ.res = Term::make_var("s");
    succ.lhs = Term::make_var("t");
    succ.rhs = Term::make_const(Constant(std::int64_t{1}));
    adv.body.push_back(succ);
    env.rules.push_back(adv);

    Rule drop;
    drop.head.relation = kTimeRel;
    drop.head.terms.push_back(Term::make_var("t"));
    drop.target = RuleTarget::Del;
    drop.body.push_back(Literal::positive(Atom{kTimeRel, {Term::make_var("t")}}));
    env.rules.push_back(drop);

    Rule stime;
    stime.head.relation = kSTimeRel;
    stime.head.terms.push_back(Term::make_var("t"));
    stime.target = RuleTarget::Emt;
    stime.body.push_back(Literal::positive(Atom{kTimeRel, {Term::make_var("t")}}));
    env.rules.push_back(stime);
  }
  return env;
}

// ---------------------------------------------------------------------------
// The bulk-synchronous engine
// ---------------------------------------------------------------------------

namespace detail {

struct ChannelKey {
  NodeId src, dst;
  friend bool operator<(const ChannelKey& a, const ChannelKey& b) {
    return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
  }
};

struct ScheduledKey {
  Fact fact;
  NodeId src, dst;
  friend bool operator<(const ScheduledKey& a, const ScheduledKey& b) {
    return std::tie(a.src, a.dst, a.fact) < std::tie(b.src, b.dst, b.fact);
  }
};

inline int draw_due(const DeliverySemantics& sem, std::uint64_t seed, int round, NodeId src,
                    NodeId dst, const Fact& f) {
  switch (sem.kind) {
    case DeliverySemantics::Kind::Rsfd:
      return round + 1;
    case DeliverySemantics::Kind::Rsbv:
    case DeliverySemantics::Kind::Rsync: {
      int window = sem.bound() + 1;
      std::uint64_t h = hash_bytes(seed, f.relation);
      for (const auto& c : f.tuple) h = hash_mix(h, hash_bytes(seed, c.bytes()));
      h = hash_mix(h, splitmix64(static_cast<std::uint64_t>(round) * 0x9e37ULL + 17));
      h = hash_mix(h, splitmix64(static_cast<std::uint64_t>(src) * 31 +
                                 static_cast<std::uint64_t>(dst)));
      return round + 1 + static_cast<int>(h % static_cast<std::uint64_t>(window));
    }
  }
  return round + 1;
}

}  // namespace detail

/// The global state the engine evolves: node states, the environment, the
/// cumulative delivered stores and the undelivered messages.
struct GlobalState {
  std::map<NodeId, LocalState> nodes;
  std::map<NodeId, Instance> received;
  LocalState env;
  std::vector<InFlightMsg> in_flight;
};

class NetworkEngine {
 public:
  NetworkEngine(const TransducerSpec& spec, const Configuration& cfg)
      : spec_(spec),
        cfg_(cfg),
        compiled_(spec),
        env_spec_(build_environment(spec)),
        env_compiled_(env_spec_),
        keys_(key_set_of(spec)) {
    cfg_.validate();
    if (cfg_.trivial()) cfg_.partition = PartitionFunction::replicate_all();
    order_ = cfg_.node_order.empty()
                 ? std::vector<NodeId>(cfg_.nodes.begin(), cfg_.nodes.end())
                 : cfg_.node_order;
  }

  Trace run(const Instance& input) {
    validate_input(input);
    cfg_.partition.validate(input, cfg_.nodes);

    Trace trace;
    init_trace_header(trace);

    GlobalState g;
    std::set<NodeId> active = cfg_.active();
    for (NodeId i : cfg_.nodes) {
      LocalState s = configure(spec_, cfg_.nodes, i, active);
      s.db = cfg_.partition.apply(input, i, cfg_.nodes);
      s.clock = cfg_.t0 - 1;
      g.nodes.emplace(i, std::move(s));
      g.received.emplace(i, Instance{});
    }
    g.env.mem.insert(kTimeRel, Tuple{Constant(static_cast<std::int64_t>(cfg_.t0))});
    g.env.clock = cfg_.t0 - 1;

    std::set<detail::ScheduledKey> scheduled;
    std::map<detail::ChannelKey, int> channel_due;  // FIFO clamp
    std::map<detail::ChannelKey, int> channel_seq;

    // `changed` drives termination (anything moved at all); the reported
    // quiescence round only tracks node mem/out stability, so deliveries that
    // no longer affect any state may land after it
    int last_state_change = cfg_.t0 - 1;
    bool stabilized = false;

    for (int r = cfg_.t0; r < cfg_.t0 + cfg_.max_rounds; ++r) {
      bool changed = false;
      bool state_changed = false;

      // 1. deliveries due this round enter the receive stores
      std::vector<InFlightMsg> still;
      std::vector<InFlightMsg> due;
      for (const auto& m : g.in_flight)
        (m.due_round <= r ? due : still).push_back(m);
      std::sort(due.begin(), due.end());
      for (const auto& m : due) {
        if (g.received[m.dst].insert(m.fact)) changed = true;
        TraceEvent ev;
        ev.kind = TraceEvent::Kind::Deliver;
        ev.round = r;
        ev.src = m.src;
        ev.dst = m.dst;
        ev.emit_round = m.emit_round;
        ev.fact = m.fact;
        ev.seq = m.seq;
        trace.events.push_back(ev);
      }
      g.in_flight = std::move(still);

      // 2. simultaneous node transitions
      std::map<NodeId, Instance> emitted;
      std::map<NodeId, bool> derived;
      std::map<NodeId, LocalState> next_states;
      for (NodeId i : order_) {
        const LocalState& cur = g.nodes.at(i);
        TransitionResult res = compiled_.transition(cur, g.received.at(i), r);
        if (!(res.state.mem == cur.mem) || !(res.state.out == cur.out)) {
          changed = true;
          state_changed = true;
        }
        emitted[i] = res.emitted;
        derived[i] = res.derived_mem_or_out;
        next_states.emplace(i, std::move(res.state));
      }
      for (auto& [i, s] : next_states) g.nodes.at(i) = std::move(s);

      // 3. the environment absorbs and relays the union of the emissions
      Instance env_inbox;
      for (const auto& [i, inst] : emitted) env_inbox.merge(inst);
      TransitionResult env_res = env_compiled_.transition(g.env, env_inbox, r);
      g.env = std::move(env_res.state);

      // 4. route and schedule the new emissions
      for (NodeId i : cfg_.nodes) {
        auto facts = ordered_emissions(emitted[i]);
        for (const auto& [seq_hint, f] : facts) {
          std::set<NodeId> dsts =
              route_fact(f, i, cfg_.comm, keys_, cfg_.hash_family, cfg_.nodes);
          TraceEvent ev;
          ev.kind = TraceEvent::Kind::Emit;
          ev.round = r;
          ev.src = i;
          ev.dsts = dsts;
          ev.fact = f;
          ev.seq = seq_hint;
          trace.events.push_back(ev);
          for (NodeId dst : dsts) {
            detail::ScheduledKey key{f, i, dst};
            if (scheduled.count(key)) continue;
            scheduled.insert(key);
            int due_round = detail::draw_due(cfg_.semantics, cfg_.seed, r, i, dst, f);
            detail::ChannelKey ch{i, dst};
            if (cfg_.semantics.kind == DeliverySemantics::Kind::Rsbv && cfg_.semantics.fifo) {
              auto it = channel_due.find(ch);
              if (it != channel_due.end() && due_round < it->second) due_round = it->second;
              channel_due[ch] = due_round;
            }
            InFlightMsg m;
            m.fact = f;
            m.src = i;
            m.dst = dst;
            m.emit_round = r;
            m.due_round = due_round;
            m.seq = ++channel_seq[ch];
            g.in_flight.push_back(m);
            changed = true;
          }
        }
      }

      // 5. snapshot
      RoundSnapshot snap;
      snap.round = r;
      snap.nodes = g.nodes;
      snap.received = g.received;
      snap.emitted = emitted;
      snap.derived_local = derived;
      snap.env = g.env;
      snap.changed = changed;
      trace.rounds.push_back(std::move(snap));

      if (state_changed) last_state_change = r;
      if (!changed && g.in_flight.empty()) {
        stabilized = true;
        break;
      }
    }

    if (stabilized) {
      trace.quiescence = std::max(cfg_.t0, last_state_change + 1);
      Instance out;
      for (const auto& [i, s] : g.nodes) out.merge(s.out);
      trace.out_star = out;
    } else {
      trace.quiescence = std::nullopt;
      std::sort(g.in_flight.begin(), g.in_flight.end());
      trace.undelivered = g.in_flight;
    }
    return trace;
  }

 private:
  void validate_input(const Instance& input) const {
    for (const auto& [rel, tuples] : input.relations()) {
      if (tuples.empty()) continue;
      bool found = false;
      for (const auto& d : spec_.schema.db) {
        if (d.name != rel) continue;
        found = true;
        for (const auto& t : tuples)
          if (static_cast<int>(t.size()) != d.arity)
            throw NetworkError("input fact arity mismatch for " + rel);
      }
      if (!found) throw NetworkError("input fact over non-database relation " + rel);
    }
  }

  void init_trace_header(Trace& trace) const {
    trace.spec_name = spec_.name;
    trace.nodes = cfg_.nodes;
    trace.active = cfg_.active();
    trace.t0 = cfg_.t0;
    trace.semantics = cfg_.semantics.name();
    trace.delay_bound = cfg_.semantics.bound();
    trace.fifo = cfg_.semantics.fifo;
    trace.comm = to_string(cfg_.comm);
    trace.seed = cfg_.seed;
    trace.db_schema = spec_.schema.db;
    trace.out_schema = spec_.schema.out;
    trace.emt_schema = spec_.schema.emt;
  }

  /// Emissions of one node in derivation order: by emission-program stratum,
  /// then relation, then tuple. Per-channel FIFO preserves this order.
  std::vector<std::pair<int, Fact>> ordered_emissions(const Instance& emitted) const {
    std::vector<std::pair<int, Fact>> out;
    for (const auto& f : emitted.facts())
      out.push_back({compiled_emt_stratum(f.relation), f});
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
      return std::tie(a.first, a.second) < std::tie(b.first, b.second);
    });
    return out;
  }

  int compiled_emt_stratum(const std::string& rel) const {
    auto it = emt_stratum_cache_.find(rel);
    if (it != emt_stratum_cache_.end()) return it->second;
    int s = compiled_.emission_stratum(rel);
    emt_stratum_cache_[rel] = s;
    return s;
  }

  TransducerSpec spec_;
  Configuration cfg_;
  CompiledTransducer compiled_;
  TransducerSpec env_spec_;
  CompiledTransducer env_compiled_;
  KeySet keys_;
  std::vector<NodeId> order_;
  mutable std::map<std::string, int> emt_stratum_cache_;
};

/// Runs a configured network to quiescence or the round cap.
inline Trace run(const TransducerSpec& spec, const Configuration& cfg, const Instance& input) {
  return NetworkEngine(spec, cfg).run(input);
}

// ---------------------------------------------------------------------------
// Reliability (R1-R2) audit over a trace
// ---------------------------------------------------------------------------

struct ReliabilityReport {
  bool ok = true;
  std::vector<std::string> violations;
};

inline ReliabilityReport check_reliability(const Trace& trace) {
  ReliabilityReport rep;
  std::set<std::tuple<Fact, NodeId, int>> emits;           // fact, src, round
  std::map<std::tuple<Fact, NodeId, NodeId>, int> delivered;  // -> round
  std::set<std::tuple<Fact, NodeId, NodeId>> pending;
  for (const auto& m : trace.undelivered) pending.insert({m.fact, m.src, m.dst});
  for (const auto& e : trace.events) {
    if (e.kind == TraceEvent::Kind::Emit) emits.insert({e.fact, e.src, e.round});
  }
  for (const auto& e : trace.events) {
    if (e.kind != TraceEvent::Kind::Deliver) continue;
    auto key = std::tuple(e.fact, e.src, e.dst);
    if (!delivered.count(key)) delivered[key] = e.round;
    // R1: a matching earlier emission exists
    if (!emits.count({e.fact, e.src, e.emit_round}) || e.emit_round >= e.round) {
      rep.ok = false;
      rep.violations.push_back("delivery without a prior matching emission: " +
                               e.fact.to_string());
    }
  }
  // R2: every emission's destinations are covered by deliveries (or are
  // still pending when the run was cut off at the round cap)
  for (const auto& e : trace.events) {
    if (e.kind != TraceEvent::Kind::Emit) continue;
    for (NodeId dst : e.dsts) {
      auto key = std::tuple(e.fact, e.src, dst);
      if (!delivered.count(key) && !pending.count(key)) {
        rep.ok = false;
        rep.violations.push_back("emission never delivered to node " + std::to_string(dst) +
                                 ": " + e.fact.to_string());
      }
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Eventual consistency and independence
// ---------------------------------------------------------------------------

struct ConsistencyVerdict {
  bool consistent = false;
  bool a_bottom = false, b_bottom = false;

  std::string to_string() const {
    if (a_bottom || b_bottom)
      return std::string("inconsistent: ") + (a_bottom ? "left" : "right") +
             " run never quiesced";
    return consistent ? "eventually consistent" : "inconsistent: outputs differ";
  }
};

inline ConsistencyVerdict check_eventual_consistency(const Trace& a, const Trace& b) {
  auto schema_sig = [](const std::vector<RelationDecl>& decls) {
    std::set<std::pair<std::string, int>> sig;
    for (const auto& d : decls) sig.insert({d.name, d.arity});
    return sig;
  };
  if (schema_sig(a.db_schema) != schema_sig(b.db_schema) ||
      schema_sig(a.out_schema) != schema_sig(b.out_schema))
    throw NetworkError("eventual consistency needs matching database and output schemas");
  ConsistencyVerdict v;
  v.a_bottom = !a.quiesced();
  v.b_bottom = !b.quiesced();
  v.consistent = a.quiesced() && b.quiesced() && a.out_star == b.out_star;
  return v;
}

enum class Dimension { Network, Time, Partition, Strategy, All };

inline const char* to_string(Dimension d) {
  switch (d) {
    case Dimension::Network: return "network";
    case Dimension::Time: return "time";
    case Dimension::Partition: return "partition";
    case Dimension::Strategy: return "strategy";
    case Dimension::All: return "all";
  }
  return "";
}

struct IndependenceBudget {
  std::vector<int> node_counts = {1, 2, 3};
  std::vector<int> t0_values = {0, 3};
  int hash_seeds = 2;
  int partition_seeds = 1;
  bool partitioned_families = true;
  bool degenerate_families = true;
  std::size_t max_configs = 64;
  int max_rounds = 60;
  DeliverySemantics semantics = DeliverySemantics::rsfd();
  CommunicationKind comm = CommunicationKind::Hashing;
  std::uint64_t base_seed = 1;
};

struct IndependenceVerdict {
  bool convergent = false;
  std::size_t runs = 0;
  std::optional<std::pair<Configuration, Configuration>> witness;
  std::optional<std::pair<std::optional<Instance>, std::optional<Instance>>> outputs;
  std::vector<std::string> notes;
};

namespace detail {

inline std::set<NodeId> make_nodes(int n) {
  std::set<NodeId> out;
  for (int i = 1; i <= n; ++i) out.insert(i);
  return out;
}

inline std::vector<PartitionFunction> partition_variants(const IndependenceBudget& b,
                                                         const std::set<NodeId>& nodes) {
  std::vector<PartitionFunction> out;
  out.push_back(PartitionFunction::replicate_all());
  out.push_back(PartitionFunction::single_node(*nodes.begin()));
  for (int s = 0; s < b.partition_seeds; ++s)
    out.push_back(PartitionFunction::hash_split(b.base_seed + 100 + s));
  return out;
}

inline std::vector<HashFamily> family_variants(const IndependenceBudget& b,
                                               const std::set<NodeId>& nodes,
                                               const Instance& input) {
  std::vector<HashFamily> out;
  for (int s = 0; s < b.hash_seeds; ++s)
    out.push_back(HashFamily::seeded(b.base_seed + 7 * s, nodes));
  if (b.partitioned_families && nodes.size() > 1) {
    std::set<NodeId> sub(nodes.begin(), std::prev(nodes.end()));
    out.push_back(HashFamily::seeded(b.base_seed + 3, sub));
  }
  if (b.degenerate_families) {
    out.push_back(HashFamily::constant(*nodes.begin()));
    // adversarial spread: the active domain round-robined over the nodes
    std::map<Constant, NodeId> pins;
    std::vector<NodeId> order(nodes.begin(), nodes.end());
    std::size_t k = 0;
    for (const auto& c : input.active_domain()) pins[c] = order[k++ % order.size()];
    if (!pins.empty()) out.push_back(HashFamily::pinned(pins, nodes));
  }
  return out;
}

}  // namespace detail

/// Runs the spec over a family of configurations that differ only along the
/// chosen dimension. Convergent iff every quiescent run agrees; a bottom run
/// against a quiescent one is a divergence witness.
inline IndependenceVerdict check_independence(const TransducerSpec& spec, const Instance& input,
                                              Dimension dim, const IndependenceBudget& budget) {
  std::vector<Configuration> configs;

  auto base_cfg = [&](int n_nodes) {
    Configuration c;
    c.nodes = detail::make_nodes(n_nodes);
    c.t0 = budget.t0_values.empty() ? 0 : budget.t0_values.front();
    c.partition = PartitionFunction::replicate_all();
    c.hash_family = HashFamily::seeded(budget.base_seed, c.nodes);
    c.comm = budget.comm;
    c.semantics = budget.semantics;
    c.seed = budget.base_seed;
    c.max_rounds = budget.max_rounds;
    return c;
  };
  int default_nodes = budget.node_counts.empty() ? 2 : budget.node_counts.back();

  switch (dim) {
    case Dimension::Network:
      for (int n : budget.node_counts) configs.push_back(base_cfg(n));
      break;
    case Dimension::Time:
      for (int t : budget.t0_values) {
        Configuration c = base_cfg(default_nodes);
        c.t0 = t;
        configs.push_back(c);
      }
      break;
    case Dimension::Partition:
      for (const auto& p : detail::partition_variants(budget, detail::make_nodes(default_nodes))) {
        Configuration c = base_cfg(default_nodes);
        c.partition = p;
        configs.push_back(c);
      }
      break;
    case Dimension::Strategy:
      for (const auto& h :
           detail::family_variants(budget, detail::make_nodes(default_nodes), input)) {
        Configuration c = base_cfg(default_nodes);
        c.hash_family = h;
        configs.push_back(c);
      }
      break;
    case Dimension::All:
      for (int n : budget.node_counts) {
        std::set<NodeId> nodes = detail::make_nodes(n);
        for (int t : budget.t0_values) {
          for (const auto& p : detail::partition_variants(budget, nodes)) {
            for (const auto& h : detail::family_variants(budget, nodes, input)) {
              // a partitioned family only reaches the active nodes, so the
              // input must be replicated for the run to see all of it
              if (h.partitioned(nodes) && p.mode != PartitionFunction::Mode::ReplicateAll)
                continue;
              Configuration c = base_cfg(n);
              c.t0 = t;
              c.partition = p;
              c.hash_family = h;
              configs.push_back(c);
              if (configs.size() >= budget.max_configs) break;
            }
            if (configs.size() >= budget.max_configs) break;
          }
          if (configs.size() >= budget.max_configs) break;
        }
        if (configs.size() >= budget.max_configs) break;
      }
      break;
  }
  if (configs.size() > budget.max_configs) configs.resize(budget.max_configs);

  IndependenceVerdict verdict;
  std::optional<std::pair<Configuration, std::optional<Instance>>> reference;
  bool any_quiescent = false;

  for (const auto& cfg : configs) {
    Trace t = run(spec, cfg, input);
    ++verdict.runs;
    std::optional<Instance> out;
    if (t.quiesced()) {
      out = t.out_star;
      any_quiescent = true;
    }
    if (!reference) {
      reference = {cfg, out};
      continue;
    }
    if (reference->second != out) {
      verdict.convergent = false;
      verdict.witness = {reference->first, cfg};
      verdict.outputs = {{reference->second, out}};
      verdict.notes.push_back("outputs diverge between two configurations along dimension " +
                              std::string(to_string(dim)));
      return verdict;
    }
  }
  if (!any_quiescent && verdict.runs > 0)
    throw NetworkError("independence budget exhausted without any quiescent run");
  verdict.convergent = true;
  return verdict;
}

}  // namespace tdnet

#endif  // TDNET_NETWORK_HPP_
