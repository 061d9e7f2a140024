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

#ifndef TDNET_CONFIG_HPP_
#define TDNET_CONFIG_HPP_

#include <map>
#include <set>
#include <string>

#include "tdnet/network.hpp"
#include "tdnet/parse.hpp"
#include "tdnet/strategy.hpp"

namespace tdnet {

/// Run configuration file: `key = value` pairs.
///
///   nodes      = 3                or  [1, 2, 5]
///   t0         = 0
///   partition  = replicate_all | single_node(1) | hash_split(seed=5)
///                | explicit{1: [R(a,b)], 2: []}
///   hash       = seeded(seed=7, active=[1,2,3]) | pinned{a:1, b:3} | constant(1)
///   comm       = hashing | broadcast | comm_free
///   semantics  = rsfd | rsbv(var=2, fifo=true) | rsync(max_delay=4)
///   seed       = 42
///   max_rounds = 50
inline Configuration parse_run_config(std::string_view text) {
  detail::Lexer lex(text);
  Configuration cfg;
  bool have_nodes = false, have_hash = false;

  auto expect_kv_int = [&](const std::string& key) {
    lex.expect("=");
    (void)key;
    return lex.expect_int();
  };

  auto parse_node_list = [&]() {
    std::set<NodeId> out;
    lex.expect("[");
    if (!lex.at("]")) {
      do {
        out.insert(static_cast<NodeId>(lex.expect_int()));
      } while (lex.eat(","));
    }
    lex.expect("]");
    return out;
  };

  while (!lex.done()) {
    std::string key = lex.expect_ident();
    if (key == "nodes") {
      lex.expect("=");
      if (lex.at("[")) {
        cfg.nodes = parse_node_list();
      } else {
        int n = static_cast<int>(lex.expect_int());
        if (n < 1) lex.fail("node count must be positive");
        for (int i = 1; i <= n; ++i) cfg.nodes.insert(i);
      }
      have_nodes = true;
    } else if (key == "t0") {
      cfg.t0 = static_cast<int>(expect_kv_int(key));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(expect_kv_int(key));
    } else if (key == "max_rounds") {
      cfg.max_rounds = static_cast<int>(expect_kv_int(key));
    } else if (key == "comm") {
      lex.expect("=");
      std::string v = lex.expect_ident();
      if (v == "hashing") {
        cfg.comm = CommunicationKind::Hashing;
      } else if (v == "broadcast") {
        cfg.comm = CommunicationKind::Broadcast;
      } else if (v == "comm_free") {
        cfg.comm = CommunicationKind::CommFree;
      } else {
        lex.fail("unknown communication kind " + v);
      }
    } else if (key == "semantics") {
      lex.expect("=");
      std::string v = lex.expect_ident();
      if (v == "rsfd") {
        cfg.semantics = DeliverySemantics::rsfd();
      } else if (v == "rsbv") {
        lex.expect("(");
        int var = 1;
        bool fifo = false;
        do {
          std::string p = lex.expect_ident();
          lex.expect("=");
          if (p == "var") {
            var = static_cast<int>(lex.expect_int());
          } else if (p == "fifo") {
            fifo = lex.expect_ident() == "true";
          } else {
            lex.fail("unknown rsbv parameter " + p);
          }
        } while (lex.eat(","));
        lex.expect(")");
        cfg.semantics = DeliverySemantics::rsbv(var, fifo);
      } else if (v == "rsync") {
        lex.expect("(");
        std::string p = lex.expect_ident();
        lex.expect("=");
        int d = static_cast<int>(lex.expect_int());
        lex.expect(")");
        if (p != "max_delay") lex.fail("unknown rsync parameter " + p);
        cfg.semantics = DeliverySemantics::rsync(d);
      } else {
        lex.fail("unknown semantics " + v);
      }
    } else if (key == "partition") {
      lex.expect("=");
      std::string v = lex.expect_ident();
      if (v == "replicate_all") {
        cfg.partition = PartitionFunction::replicate_all();
      } else if (v == "single_node") {
        lex.expect("(");
        cfg.partition = PartitionFunction::single_node(static_cast<NodeId>(lex.expect_int()));
        lex.expect(")");
      } else if (v == "hash_split") {
        lex.expect("(");
        std::string p = lex.expect_ident();
        lex.expect("=");
        cfg.partition = PartitionFunction::hash_split(static_cast<std::uint64_t>(lex.expect_int()));
        lex.expect(")");
        if (p != "seed") lex.fail("unknown hash_split parameter " + p);
      } else if (v == "explicit") {
        lex.expect("{");
        std::map<NodeId, Instance> parts;
        if (!lex.at("}")) {
          do {
            NodeId n = static_cast<NodeId>(lex.expect_int());
            lex.expect(":");
            lex.expect("[");
            Instance inst;
            while (!lex.at("]")) {
              std::string rel = lex.expect_ident();
              lex.expect("(");
              Tuple t;
              if (!lex.at(")")) {
                do {
                  auto tok = lex.take();
                  switch (tok.kind) {
                    case detail::Token::Kind::Int:
                      t.push_back(Constant(tok.int_val));
                      break;
                    case detail::Token::Kind::Ident:
                    case detail::Token::Kind::String:
                      t.push_back(Constant(tok.text));
                      break;
                    default:
                      lex.fail("expected constant");
                  }
                } while (lex.eat(","));
              }
              lex.expect(")");
              inst.insert(rel, t);
              lex.eat(",");
            }
            lex.expect("]");
            parts[n] = std::move(inst);
          } while (lex.eat(","));
        }
        lex.expect("}");
        cfg.partition = PartitionFunction::explicit_parts(std::move(parts));
      } else {
        lex.fail("unknown partition " + v);
      }
    } else if (key == "hash") {
      lex.expect("=");
      std::string v = lex.expect_ident();
      if (v == "seeded") {
        lex.expect("(");
        std::uint64_t seed = 0;
        std::set<NodeId> active;
        do {
          std::string p = lex.expect_ident();
          lex.expect("=");
          if (p == "seed") {
            seed = static_cast<std::uint64_t>(lex.expect_int());
          } else if (p == "active") {
            active = parse_node_list();
          } else {
            lex.fail("unknown seeded parameter " + p);
          }
        } while (lex.eat(","));
        lex.expect(")");
        cfg.hash_family = HashFamily::seeded(seed, active);  // empty active filled below
      } else if (v == "pinned") {
        lex.expect("{");
        std::map<Constant, NodeId> pins;
        if (!lex.at("}")) {
          do {
            auto tok = lex.take();
            Constant c;
            switch (tok.kind) {
              case detail::Token::Kind::Int:
                c = Constant(tok.int_val);
                break;
              case detail::Token::Kind::Ident:
              case detail::Token::Kind::String:
                c = Constant(tok.text);
                break;
              default:
                lex.fail("expected constant");
            }
            lex.expect(":");
            pins[c] = static_cast<NodeId>(lex.expect_int());
          } while (lex.eat(","));
        }
        lex.expect("}");
        cfg.hash_family = HashFamily::pinned(pins);
      } else if (v == "constant") {
        lex.expect("(");
        cfg.hash_family = HashFamily::constant(static_cast<NodeId>(lex.expect_int()));
        lex.expect(")");
      } else {
        lex.fail("unknown hash family " + v);
      }
      have_hash = true;
    } else {
      lex.fail("unknown configuration key " + key);
    }
  }

  if (!have_nodes) throw ParseError("run config needs a nodes entry", 1, 1);
  if (!have_hash || cfg.hash_family.active.empty())
    cfg.hash_family = HashFamily::seeded(cfg.hash_family.seed, cfg.nodes);
  return cfg;
}

}  // namespace tdnet

#endif  // TDNET_CONFIG_HPP_
