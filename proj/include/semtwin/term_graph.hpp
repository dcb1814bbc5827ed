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

// In-memory triple store, the built-in planning vocabulary, ontology checks
// and the N-Triples subset used on disk.

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "semtwin/geo.hpp"

namespace semtwin {

struct Iri {
  std::string value;

  Iri() = default;
  // Throws ValidationError unless `v` is an absolute IRI.
  explicit Iri(std::string v);

  friend auto operator<=>(const Iri&, const Iri&) = default;
  friend bool operator==(const Iri&, const Iri&) = default;
};

bool is_absolute_iri(std::string_view v);

enum class Datatype { String, Double, Integer, Boolean, DateTime, WktLiteral };

std::string_view datatype_iri(Datatype d);
std::optional<Datatype> datatype_from_iri(std::string_view iri);
// Short names used in rule files ("double", "wktLiteral", ...).
std::string_view datatype_name(Datatype d);
std::optional<Datatype> datatype_from_name(std::string_view name);

// Literals are stored in canonical lexical form so that set semantics match
// value semantics: doubles in shortest round-trip form (always with a '.' or
// exponent), integers without leading zeros, booleans as true/false, WKT
// re-serialized.
struct Literal {
  std::string lexical;
  Datatype datatype = Datatype::String;

  // Validates and canonicalizes. Throws ValidationError.
  static Literal make(std::string_view lexical, Datatype datatype);
  static Literal of_string(std::string_view s);
  static Literal of_double(double v);
  static Literal of_integer(std::int64_t v);
  static Literal of_bool(bool v);
  static Literal of_wkt(const geo::Geometry& g);

  bool is_numeric() const {
    return datatype == Datatype::Double || datatype == Datatype::Integer;
  }
  double as_double() const;
  bool as_bool() const;
  geo::Geometry as_geometry() const;

  friend auto operator<=>(const Literal&, const Literal&) = default;
  friend bool operator==(const Literal&, const Literal&) = default;
};

std::string format_double(double v);

using Term = std::variant<Iri, Literal>;

bool is_iri(const Term& t);
const Iri* as_iri(const Term& t);
const Literal* as_literal(const Term& t);
// Sort key used for deterministic ordering: the IRI string or the lexical form.
const std::string& lexical_form(const Term& t);

struct Triple {
  Iri subject;
  Iri predicate;
  Term object;

  friend bool operator==(const Triple&, const Triple&) = default;
};

// Orders by subject, predicate, then object lexical form.
std::strong_ordering operator<=>(const Triple& a, const Triple& b);

struct Variable {
  std::string name;  // without the leading '?'
  friend auto operator<=>(const Variable&, const Variable&) = default;
  friend bool operator==(const Variable&, const Variable&) = default;
};

using PatternTerm = std::variant<Variable, Term>;

struct TriplePattern {
  PatternTerm subject;
  PatternTerm predicate;
  PatternTerm object;
};

using Binding = std::map<std::string, Term>;

// Built-in vocabulary. Every name lives in one namespace.
namespace vocab {

inline constexpr std::string_view kNamespace = "https://semtwin.dev/ns#";

Iri term(std::string_view local);

// Classes.
extern const Iri Infrastructure, WindFarm, Turbine, Cable, Regulation, Event,
    GoverningEntity, Document, Class, TurbineStatus;
// Core properties.
extern const Iri hasGeometry, hasConflict, hasTurbineStatus, hasPitchAngle,
    hasYawAngle, hasWindSpeed, hasRegulationDescription, hasImpactArea,
    hasImpactValue, hasImpactUnit, type, subClassOf;
// Ontology-file properties.
extern const Iri domain, range;
// Ingestion properties.
extern const Iri hasTitle, hasProjectName, hasProjectLocation, hasName,
    hasAcronym, hasDescription, hasSourceSection, hasCategory, hasContextQuote,
    appliesTo, describedIn, hasJurisdiction, hasRole, violatesConstraint,
    hasRuleTemplate;
// Turbine status individuals. Shutdown is read as an alias of Parked.
extern const Iri Operational, Parked, Shutdown;

}  // namespace vocab

// A set of triples plus a prefix table. Plain value type: copies are
// independent, const access is thread-safe.
class Graph {
 public:
  using const_iterator = std::set<Triple>::const_iterator;

  Graph() = default;

  // Returns true when the triple was not already present.
  bool insert(const Triple& t);
  bool erase(const Triple& t);
  bool contains(const Triple& t) const { return triples_.count(t) != 0; }
  void merge(const Graph& other);

  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }
  const_iterator begin() const { return triples_.begin(); }
  const_iterator end() const { return triples_.end(); }
  const_iterator lower_bound(const Triple& t) const {
    return triples_.lower_bound(t);
  }

  // Objects of (subject, predicate, *) in sorted order.
  std::vector<Term> objects(const Iri& subject, const Iri& predicate) const;
  // Subjects having (*, type, cls).
  std::vector<Iri> instances_of(const Iri& cls) const;
  // Removes every (subject, predicate, *) triple.
  void erase_all(const Iri& subject, const Iri& predicate);

  const std::map<std::string, std::string>& prefixes() const {
    return prefixes_;
  }
  void set_prefix(const std::string& prefix, const std::string& base) {
    prefixes_[prefix] = base;
  }

  // Triple-set equality; prefixes are presentation only.
  friend bool operator==(const Graph& a, const Graph& b) {
    return a.triples_ == b.triples_;
  }

 private:
  std::set<Triple> triples_;
  std::map<std::string, std::string> prefixes_;
};

// Functional insert: returns a copy of `graph` containing `triple`.
Graph insert(Graph graph, const Triple& triple);

// Every binding under which `pattern` instantiates to a triple of `graph`,
// sorted and without duplicates.
std::vector<Binding> match(const Graph& graph, const TriplePattern& pattern);

struct PropertyAxiom {
  Iri property;
  std::optional<Iri> domain;
  // Either a class IRI or a datatype.
  std::optional<std::variant<Iri, Datatype>> range;
};

class Ontology {
 public:
  // The built-in planning vocabulary.
  static Ontology core();
  // Extends `base` with (C type Class), (C subClassOf D), (p domain C) and
  // (p range X) triples from `g`. Throws ValidationError on unknown shapes.
  static Ontology extend(Ontology base, const Graph& g);

  void add_class(const Iri& c);
  void add_subclass(const Iri& child, const Iri& parent);
  void add_property(PropertyAxiom axiom);

  const std::set<Iri>& classes() const { return classes_; }
  const std::vector<std::pair<Iri, Iri>>& subclass_axioms() const {
    return subclass_;
  }
  const std::map<Iri, PropertyAxiom>& properties() const { return properties_; }
  bool has_class(const Iri& c) const { return classes_.count(c) != 0; }

  // Throws ValidationError for undeclared classes or a subclass cycle; the
  // message names the cycle.
  void check() const;

  // Reflexive-transitive superclasses of `c`.
  std::set<Iri> superclasses(const Iri& c) const;
  bool is_subclass(const Iri& child, const Iri& parent) const;
  // Declared classes neither of which subsumes the other.
  bool disjoint(const Iri& a, const Iri& b) const;

 private:
  std::set<Iri> classes_;
  std::vector<std::pair<Iri, Iri>> subclass_;
  std::map<Iri, PropertyAxiom> properties_;
};

struct Violation {
  Triple triple;
  std::string reason;
};

std::vector<Violation> validate(const Graph& graph, const Ontology& ontology);

// Adds (x type D) for every (x type C) with C below D. Throws
// ValidationError if the subclass axioms contain a cycle.
Graph subsumption_closure(const Graph& graph, const Ontology& ontology);

// N-Triples subset. serialize() emits one sorted triple per line with full
// IRIs; parse() also accepts '#' comments and "@prefix p: <iri> ." lines.
std::string serialize(const Graph& graph);
std::string format_term(const Term& t);
Graph parse_graph(std::string_view text);

}  // namespace semtwin
