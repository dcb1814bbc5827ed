// Copyright 2026 The semtwin Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Forward-chaining rules with geospatial built-ins.
//
// Rule file syntax:
//
//   @prefix ex: <https://example.org/> .
//   [spacing: (?a type :Turbine) (?b type :Turbine)
//             (?a :hasGeometry ?ga) (?b :hasGeometry ?gb)
//             notEqual(?a, ?b) withinDistance(?ga, ?gb, 1200)
//             -> (?a :hasConflict "true"^^boolean)]
//
// Built-ins are guards: every variable they mention must also occur in a
// triple pattern of the same body.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semtwin/term_graph.hpp"

namespace semtwin {

struct BuiltinCall {
  std::string name;
  std::vector<PatternTerm> args;
};

using BodyItem = std::variant<TriplePattern, BuiltinCall>;

struct Rule {
  std::string name;
  std::vector<BodyItem> body;
  std::vector<TriplePattern> head;
};

class RuleSet {
 public:
  RuleSet() = default;

  // Checks the rule (range restriction, built-in arity, guard variables,
  // unique name) and appends it. Throws ValidationError.
  void add(Rule rule);

  const std::vector<Rule>& rules() const { return rules_; }
  std::size_t size() const { return rules_.size(); }
  bool empty() const { return rules_.empty(); }
  const Rule* find(std::string_view name) const;

 private:
  std::vector<Rule> rules_;
};

// Registered built-ins and their arities.
const std::map<std::string, std::size_t, std::less<>>& builtin_registry();

// Evaluates a built-in on ground arguments. Throws ReasonError on type
// errors (non-WKT geometry argument, string compared with a number, ...).
bool eval_builtin(std::string_view name, const std::vector<Term>& args);

// Throws ParseError (with line/column) or ValidationError.
RuleSet parse_rules(std::string_view text);
std::string serialize_rules(const RuleSet& rules);
std::string format_rule(const Rule& rule);
std::string format_pattern(const TriplePattern& p);
// Compact rendering with ':' for the built-in namespace.
std::string format_triple(const Triple& t);

// Least fixpoint of `graph` under `rules`. Throws ReasonError naming the rule
// and binding when a built-in cannot be evaluated.
Graph reason(const Graph& graph, const RuleSet& rules);

// Fixpoint together with the round in which each triple first appeared:
// 0 for input triples, k for triples first derived in round k.
struct Inference {
  Graph graph;
  std::map<Triple, int> round;
};

Inference reason_traced(const Graph& graph, const RuleSet& rules);

// A proof tree. Leaves are input facts and carry an empty rule name.
struct Derivation {
  Triple conclusion;
  std::string rule;
  Binding binding;
  // One entry per body triple pattern, in body order.
  std::vector<Derivation> premises;
};

// nullopt for input facts. For derived facts returns one complete
// derivation, taken from the first rule (in file order) that derives the
// triple from strictly earlier facts. Throws ReasonError if `triple` is not
// in the fixpoint.
std::optional<Derivation> explain(const Inference& inference,
                                  const RuleSet& rules, const Triple& triple);

// Indented text rendering; empty for nullopt.
std::string format_derivation(const std::optional<Derivation>& d);

}  // namespace semtwin
