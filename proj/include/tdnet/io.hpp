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

#ifndef TDNET_IO_HPP_
#define TDNET_IO_HPP_

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "tdnet/ast.hpp"
#include "tdnet/parse.hpp"

namespace tdnet {

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Program load_program(const std::string& path) {
  return parse_program(slurp(path));
}

inline TransducerSpec load_spec(const std::string& path) {
  std::string name = path;
  auto slash = name.find_last_of('/');
  if (slash != std::string::npos) name = name.substr(slash + 1);
  auto dot = name.find_last_of('.');
  if (dot != std::string::npos) name = name.substr(0, dot);
  return parse_spec(slurp(path), name);
}

inline Instance load_instance(const std::string& path) {
  return parse_instance(slurp(path));
}

/// Fact file load with arity checks against the referenced spec's database
/// schema.
inline Instance load_instance(const std::string& path, const TransducerSpec& spec) {
  Instance inst = load_instance(path);
  for (const auto& [rel, tuples] : inst.relations()) {
    if (tuples.empty()) continue;
    const RelationDecl* d = spec.schema.find(rel);
    if (!d) throw IoError(path + ": fact over undeclared relation " + rel);
    for (const auto& t : tuples)
      if (static_cast<int>(t.size()) != d->arity)
        throw IoError(path + ": arity mismatch for " + rel + " (declared " +
                      std::to_string(d->arity) + ", got " + std::to_string(t.size()) + ")");
  }
  return inst;
}

}  // namespace tdnet

#endif  // TDNET_IO_HPP_
