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

#include "semtwin/term_graph.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <regex>
#include <sstream>

#include "semtwin/error.hpp"

namespace semtwin {

namespace {

constexpr std::string_view kXsd = "http://www.w3.org/2001/XMLSchema#";
constexpr std::string_view kWktIri =
    "http://www.opengis.net/ont/geosparql#wktLiteral";

Iri make_vocab(std::string_view local) {
  return Iri(std::string(vocab::kNamespace) + std::string(local));
}

}  // namespace

bool is_absolute_iri(std::string_view v) {
  if (v.empty()) return false;
  std::size_t colon = v.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(v[0]))) return false;
  for (std::size_t i = 1; i < colon; ++i) {
    char c = v[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' &&
        c != '.') {
      return false;
    }
  }
  if (colon + 1 >= v.size()) return false;
  for (char c : v) {
    if (static_cast<unsigned char>(c) <= 0x20) return false;
    switch (c) {
      case '<': case '>': case '"': case '{': case '}':
      case '|': case '^': case '`': case '\\':
        return false;
      default:
        break;
    }
  }
  return true;
}

Iri::Iri(std::string v) : value(std::move(v)) {
  if (!is_absolute_iri(value)) {
    throw ValidationError("malformed IRI '" + value + "'");
  }
}

std::string_view datatype_iri(Datatype d) {
  static const std::string kIris[] = {
      std::string(kXsd) + "string",  std::string(kXsd) + "double",
      std::string(kXsd) + "integer", std::string(kXsd) + "boolean",
      std::string(kXsd) + "dateTime", std::string(kWktIri)};
  return kIris[static_cast<int>(d)];
}

std::optional<Datatype> datatype_from_iri(std::string_view iri) {
  for (Datatype d : {Datatype::String, Datatype::Double, Datatype::Integer,
                     Datatype::Boolean, Datatype::DateTime,
                     Datatype::WktLiteral}) {
    if (datatype_iri(d) == iri) return d;
  }
  return std::nullopt;
}

std::string_view datatype_name(Datatype d) {
  static constexpr std::string_view kNames[] = {
      "string", "double", "integer", "boolean", "dateTime", "wktLiteral"};
  return kNames[static_cast<int>(d)];
}

std::optional<Datatype> datatype_from_name(std::string_view name) {
  for (Datatype d : {Datatype::String, Datatype::Double, Datatype::Integer,
                     Datatype::Boolean, Datatype::DateTime,
                     Datatype::WktLiteral}) {
    if (datatype_name(d) == name) return d;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  std::string out(buf, ptr);
  if (out.find_first_of(".e") == std::string::npos) out += ".0";
  return out;
}

Literal Literal::make(std::string_view lexical, Datatype datatype) {
  auto bad = [&](const std::string& why) {
    return ValidationError("invalid " + std::string(datatype_name(datatype)) +
                           " literal \"" + std::string(lexical) + "\": " + why);
  };
  Literal lit;
  lit.datatype = datatype;
  switch (datatype) {
    case Datatype::String:
      lit.lexical = std::string(lexical);
      break;
    case Datatype::Double: {
      std::string_view s = lexical;
      if (!s.empty() && s.front() == '+') s.remove_prefix(1);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw bad("not a number");
      }
      if (!std::isfinite(v)) throw bad("not finite");
      lit.lexical = format_double(v);
      break;
    }
    case Datatype::Integer: {
      std::string_view s = lexical;
      if (!s.empty() && s.front() == '+') s.remove_prefix(1);
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        throw bad("not an integer");
      }
      lit.lexical = std::to_string(v);
      break;
    }
    case Datatype::Boolean:
      if (lexical == "true" || lexical == "1") {
        lit.lexical = "true";
      } else if (lexical == "false" || lexical == "0") {
        lit.lexical = "false";
      } else {
        throw bad("expected true or false");
      }
      break;
    case Datatype::DateTime: {
      static const std::regex kDateTime(
          R"(^-?\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})?$)");
      if (!std::regex_match(lexical.begin(), lexical.end(), kDateTime)) {
        throw bad("expected YYYY-MM-DDThh:mm:ss");
      }
      lit.lexical = std::string(lexical);
      break;
    }
    case Datatype::WktLiteral:
      try {
        lit.lexical = geo::serialize_wkt(geo::parse_wkt(lexical));
      } catch (const Error& e) {
        throw bad(e.what());
      }
      break;
  }
  return lit;
}

Literal Literal::of_string(std::string_view s) {
  return make(s, Datatype::String);
}

Literal Literal::of_double(double v) {
  if (!std::isfinite(v)) {
    throw ValidationError("double literal must be finite");
  }
  return Literal{format_double(v), Datatype::Double};
}

Literal Literal::of_integer(std::int64_t v) {
  return Literal{std::to_string(v), Datatype::Integer};
}

Literal Literal::of_bool(bool v) {
  return Literal{v ? "true" : "false", Datatype::Boolean};
}

Literal Literal::of_wkt(const geo::Geometry& g) {
  geo::check_geometry(g);
  return Literal{geo::serialize_wkt(g), Datatype::WktLiteral};
}

double Literal::as_double() const {
  if (!is_numeric()) {
    throw ValidationError("literal \"" + lexical + "\" is not numeric");
  }
  double v = 0.0;
  std::from_chars(lexical.data(), lexical.data() + lexical.size(), v);
  return v;
}

bool Literal::as_bool() const {
  if (datatype != Datatype::Boolean) {
    throw ValidationError("literal \"" + lexical + "\" is not a boolean");
  }
  return lexical == "true";
}

geo::Geometry Literal::as_geometry() const {
  if (datatype != Datatype::WktLiteral) {
    throw ValidationError("literal \"" + lexical + "\" is not a wktLiteral");
  }
  return geo::parse_wkt(lexical);
}

bool is_iri(const Term& t) { return std::holds_alternative<Iri>(t); }
const Iri* as_iri(const Term& t) { return std::get_if<Iri>(&t); }
const Literal* as_literal(const Term& t) { return std::get_if<Literal>(&t); }

const std::string& lexical_form(const Term& t) {
  if (const auto* i = as_iri(t)) return i->value;
  return std::get<Literal>(t).lexical;
}

std::strong_ordering operator<=>(const Triple& a, const Triple& b) {
  if (auto c = a.subject.value <=> b.subject.value; c != 0) return c;
  if (auto c = a.predicate.value <=> b.predicate.value; c != 0) return c;
  if (auto c = lexical_form(a.object) <=> lexical_form(b.object); c != 0) {
    return c;
  }
  if (auto c = a.object.index() <=> b.object.index(); c != 0) return c;
  if (const auto* la = as_literal(a.object)) {
    return static_cast<int>(la->datatype) <=>
           static_cast<int>(as_literal(b.object)->datatype);
  }
  return std::strong_ordering::equal;
}

namespace vocab {

Iri term(std::string_view local) { return make_vocab(local); }

const Iri Infrastructure = make_vocab("Infrastructure");
const Iri WindFarm = make_vocab("WindFarm");
const Iri Turbine = make_vocab("Turbine");
const Iri Cable = make_vocab("Cable");
const Iri Regulation = make_vocab("Regulation");
const Iri Event = make_vocab("Event");
const Iri GoverningEntity = make_vocab("GoverningEntity");
const Iri Document = make_vocab("Document");
const Iri Class = make_vocab("Class");
const Iri TurbineStatus = make_vocab("TurbineStatus");

const Iri hasGeometry = make_vocab("hasGeometry");
const Iri hasConflict = make_vocab("hasConflict");
const Iri hasTurbineStatus = make_vocab("hasTurbineStatus");
const Iri hasPitchAngle = make_vocab("hasPitchAngle");
const Iri hasYawAngle = make_vocab("hasYawAngle");
const Iri hasWindSpeed = make_vocab("hasWindSpeed");
const Iri hasRegulationDescription = make_vocab("hasRegulationDescription");
const Iri hasImpactArea = make_vocab("hasImpactArea");
const Iri hasImpactValue = make_vocab("hasImpactValue");
const Iri hasImpactUnit = make_vocab("hasImpactUnit");
const Iri type = make_vocab("type");
const Iri subClassOf = make_vocab("subClassOf");

const Iri domain = make_vocab("domain");
const Iri range = make_vocab("range");

const Iri hasTitle = make_vocab("hasTitle");
const Iri hasProjectName = make_vocab("hasProjectName");
const Iri hasProjectLocation = make_vocab("hasProjectLocation");
const Iri hasName = make_vocab("hasName");
const Iri hasAcronym = make_vocab("hasAcronym");
const Iri hasDescription = make_vocab("hasDescription");
const Iri hasSourceSection = make_vocab("hasSourceSection");
const Iri hasCategory = make_vocab("hasCategory");
const Iri hasContextQuote = make_vocab("hasContextQuote");
const Iri appliesTo = make_vocab("appliesTo");
const Iri describedIn = make_vocab("describedIn");
const Iri hasJurisdiction = make_vocab("hasJurisdiction");
const Iri hasRole = make_vocab("hasRole");
const Iri violatesConstraint = make_vocab("violatesConstraint");
const Iri hasRuleTemplate = make_vocab("hasRuleTemplate");

const Iri Operational = make_vocab("Operational");
const Iri Parked = make_vocab("Parked");
const Iri Shutdown = make_vocab("Shutdown");

}  // namespace vocab

bool Graph::insert(const Triple& t) { return triples_.insert(t).second; }

bool Graph::erase(const Triple& t) { return triples_.erase(t) != 0; }

void Graph::merge(const Graph& other) {
  triples_.insert(other.triples_.begin(), other.triples_.end());
  for (const auto& [p, base] : other.prefixes_) prefixes_.emplace(p, base);
}

std::vector<Term> Graph::objects(const Iri& subject,
                                 const Iri& predicate) const {
  std::vector<Term> out;
  Triple probe{subject, predicate, Iri{}};
  for (auto it = triples_.lower_bound(probe);
       it != triples_.end() && it->subject == subject &&
       it->predicate == predicate;
       ++it) {
    out.push_back(it->object);
  }
  return out;
}

std::vector<Iri> Graph::instances_of(const Iri& cls) const {
  std::vector<Iri> out;
  for (const auto& t : triples_) {
    if (t.predicate == vocab::type && t.object == Term{cls}) {
      out.push_back(t.subject);
    }
  }
  return out;
}

void Graph::erase_all(const Iri& subject, const Iri& predicate) {
  Triple probe{subject, predicate, Iri{}};
  auto it = triples_.lower_bound(probe);
  while (it != triples_.end() && it->subject == subject &&
         it->predicate == predicate) {
    it = triples_.erase(it);
  }
}

Graph insert(Graph graph, const Triple& triple) {
  graph.insert(triple);
  return graph;
}

namespace {

bool unify(const PatternTerm& p, const Term& value, Binding& binding) {
  if (const auto* v = std::get_if<Variable>(&p)) {
    auto [it, inserted] = binding.emplace(v->name, value);
    return inserted || it->second == value;
  }
  return std::get<Term>(p) == value;
}

}  // namespace

std::vector<Binding> match(const Graph& graph, const TriplePattern& pattern) {
  std::vector<Binding> out;
  auto try_triple = [&](const Triple& t) {
    Binding b;
    if (unify(pattern.subject, Term{t.subject}, b) &&
        unify(pattern.predicate, Term{t.predicate}, b) &&
        unify(pattern.object, t.object, b)) {
      out.push_back(std::move(b));
    }
  };
  const Term* subject = std::get_if<Term>(&pattern.subject);
  if (subject && is_iri(*subject)) {
    const Iri& s = std::get<Iri>(*subject);
    Triple probe{s, Iri{}, Iri{}};
    for (auto it = graph.lower_bound(probe);
         it != graph.end() && it->subject == s; ++it) {
      try_triple(*it);
    }
  } else if (!subject) {
    for (const auto& t : graph) try_triple(t);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

Ontology Ontology::core() {
  using namespace vocab;
  Ontology o;
  for (const Iri* c : {&Infrastructure, &WindFarm, &Turbine, &Cable,
                       &Regulation, &Event, &GoverningEntity, &Document,
                       &TurbineStatus}) {
    o.add_class(*c);
  }
  o.add_subclass(WindFarm, Infrastructure);
  o.add_subclass(Turbine, Infrastructure);
  o.add_subclass(Cable, Infrastructure);

  auto prop = [&](const Iri& p, std::optional<Iri> dom,
                  std::optional<std::variant<Iri, Datatype>> rng) {
    o.add_property(PropertyAxiom{p, std::move(dom), std::move(rng)});
  };
  prop(hasGeometry, std::nullopt, Datatype::WktLiteral);
  prop(hasConflict, std::nullopt, Datatype::Boolean);
  prop(hasTurbineStatus, Turbine, TurbineStatus);
  prop(hasPitchAngle, Turbine, Datatype::Double);
  prop(hasYawAngle, Turbine, Datatype::Double);
  prop(hasWindSpeed, std::nullopt, Datatype::Double);
  prop(hasRegulationDescription, Regulation, Datatype::String);
  prop(hasImpactArea, Regulation, Datatype::String);
  prop(hasImpactValue, Regulation, Datatype::Double);
  prop(hasImpactUnit, Regulation, Datatype::String);

  prop(hasTitle, Document, Datatype::String);
  prop(hasProjectName, Document, Datatype::String);
  prop(hasProjectLocation, Document, Datatype::String);
  prop(hasName, std::nullopt, Datatype::String);
  prop(hasAcronym, std::nullopt, Datatype::String);
  prop(hasDescription, std::nullopt, Datatype::String);
  prop(hasSourceSection, std::nullopt, Datatype::String);
  prop(hasCategory, Regulation, Datatype::String);
  prop(hasContextQuote, Regulation, Datatype::String);
  prop(appliesTo, Regulation, Infrastructure);
  prop(describedIn, std::nullopt, Document);
  prop(hasJurisdiction, GoverningEntity, Datatype::String);
  prop(hasRole, GoverningEntity, Datatype::String);
  prop(violatesConstraint, std::nullopt, Regulation);
  prop(hasRuleTemplate, Regulation, Datatype::String);
  return o;
}

Ontology Ontology::extend(Ontology base, const Graph& g) {
  std::map<Iri, PropertyAxiom> props = base.properties_;
  for (const auto& t : g) {
    const Iri* obj = as_iri(t.object);
    if (t.predicate == vocab::type) {
      if (obj && *obj == vocab::Class) base.add_class(t.subject);
    } else if (t.predicate == vocab::subClassOf) {
      if (!obj) throw ValidationError("subClassOf object must be an IRI");
      base.add_class(t.subject);
      base.add_class(*obj);
      base.add_subclass(t.subject, *obj);
    } else if (t.predicate == vocab::domain) {
      if (!obj) throw ValidationError("domain object must be an IRI");
      auto& ax = props[t.subject];
      ax.property = t.subject;
      ax.domain = *obj;
    } else if (t.predicate == vocab::range) {
      if (!obj) throw ValidationError("range object must be an IRI");
      auto& ax = props[t.subject];
      ax.property = t.subject;
      if (auto d = datatype_from_iri(obj->value)) {
        ax.range = *d;
      } else {
        ax.range = *obj;
      }
    } else {
      throw ValidationError("unsupported ontology triple with predicate <" +
                            t.predicate.value + ">");
    }
  }
  for (auto& [_, ax] : props) base.add_property(ax);
  base.check();
  return base;
}

void Ontology::add_class(const Iri& c) { classes_.insert(c); }

void Ontology::add_subclass(const Iri& child, const Iri& parent) {
  auto axiom = std::make_pair(child, parent);
  if (std::find(subclass_.begin(), subclass_.end(), axiom) == subclass_.end()) {
    subclass_.push_back(axiom);
  }
}

void Ontology::add_property(PropertyAxiom axiom) {
  properties_[axiom.property] = std::move(axiom);
}

void Ontology::check() const {
  for (const auto& [child, parent] : subclass_) {
    if (!has_class(child) || !has_class(parent)) {
      throw ValidationError("subclass axiom references undeclared class: <" +
                            child.value + "> subClassOf <" + parent.value +
                            ">");
    }
  }
  for (const auto& [p, ax] : properties_) {
    if (ax.domain && !has_class(*ax.domain)) {
      throw ValidationError("domain of <" + p.value +
                            "> is an undeclared class");
    }
    if (ax.range) {
      if (const auto* c = std::get_if<Iri>(&*ax.range); c && !has_class(*c)) {
        throw ValidationError("range of <" + p.value +
                              "> is an undeclared class");
      }
    }
  }
  // Depth-first search for a back edge.
  std::map<Iri, std::vector<Iri>> parents;
  for (const auto& [child, parent] : subclass_) parents[child].push_back(parent);
  std::map<Iri, int> state;  // 0 unseen, 1 on stack, 2 done
  std::vector<Iri> stack;
  std::function<void(const Iri&)> visit = [&](const Iri& c) {
    state[c] = 1;
    stack.push_back(c);
    for (const auto& p : parents[c]) {
      if (state[p] == 1) {
        auto from = std::find(stack.begin(), stack.end(), p);
        std::string cycle;
        for (auto it = from; it != stack.end(); ++it) cycle += it->value + " -> ";
        cycle += p.value;
        throw ValidationError("subclass cycle: " + cycle);
      }
      if (state[p] == 0) visit(p);
    }
    stack.pop_back();
    state[c] = 2;
  };
  for (const auto& c : classes_) {
    if (state[c] == 0) visit(c);
  }
}

std::set<Iri> Ontology::superclasses(const Iri& c) const {
  std::set<Iri> out{c};
  std::vector<Iri> todo{c};
  while (!todo.empty()) {
    Iri cur = todo.back();
    todo.pop_back();
    for (const auto& [child, parent] : subclass_) {
      if (child == cur && out.insert(parent).second) todo.push_back(parent);
    }
  }
  return out;
}

bool Ontology::is_subclass(const Iri& child, const Iri& parent) const {
  return superclasses(child).count(parent) != 0;
}

bool Ontology::disjoint(const Iri& a, const Iri& b) const {
  if (!has_class(a) || !has_class(b)) return false;
  return !is_subclass(a, b) && !is_subclass(b, a);
}

std::vector<Violation> validate(const Graph& graph, const Ontology& ontology) {
  std::vector<Violation> out;
  auto types_of = [&](const Iri& s) {
    std::vector<Iri> types;
    for (const auto& t : graph.objects(s, vocab::type)) {
      if (const auto* i = as_iri(t)) types.push_back(*i);
    }
    return types;
  };
  for (const auto& t : graph) {
    auto it = ontology.properties().find(t.predicate);
    if (it == ontology.properties().end()) continue;
    const PropertyAxiom& ax = it->second;
    if (ax.domain) {
      for (const auto& c : types_of(t.subject)) {
        if (ontology.disjoint(c, *ax.domain)) {
          out.push_back({t, "subject typed <" + c.value +
                                "> is outside the domain <" +
                                ax.domain->value + ">"});
          break;
        }
      }
    }
    if (!ax.range) continue;
    if (const auto* dt = std::get_if<Datatype>(&*ax.range)) {
      const Literal* lit = as_literal(t.object);
      bool ok = lit && (lit->datatype == *dt ||
                        (*dt == Datatype::Double &&
                         lit->datatype == Datatype::Integer));
      if (!ok) {
        out.push_back({t, "object is not a " +
                              std::string(datatype_name(*dt)) + " literal"});
      }
    } else {
      const Iri& cls = std::get<Iri>(*ax.range);
      const Iri* obj = as_iri(t.object);
      if (!obj) {
        out.push_back({t, "object must be an IRI of class <" + cls.value + ">"});
        continue;
      }
      for (const auto& c : types_of(*obj)) {
        if (ontology.disjoint(c, cls)) {
          out.push_back({t, "object typed <" + c.value +
                                "> is outside the range <" + cls.value + ">"});
          break;
        }
      }
    }
  }
  return out;
}

Graph subsumption_closure(const Graph& graph, const Ontology& ontology) {
  ontology.check();
  Graph out = graph;
  for (const auto& t : graph) {
    if (t.predicate != vocab::type) continue;
    const Iri* cls = as_iri(t.object);
    if (!cls) continue;
    for (const auto& sup : ontology.superclasses(*cls)) {
      out.insert(Triple{t.subject, vocab::type, sup});
    }
  }
  return out;
}

namespace {

std::string escape_string(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (char c : s) {
    switch (c) {
      case '\\': out += "\\\\"; break;
      case '"': out += "\\\""; break;
      case '\n': out += "\\n"; break;
      case '\r': out += "\\r"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  return out;
}

void append_utf8(std::string& out, std::uint32_t cp) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

class NTriplesReader {
 public:
  explicit NTriplesReader(std::string_view text) : text_(text) {}

  Graph read() {
    Graph g;
    while (true) {
      skip_ws_and_comments();
      if (at_end()) break;
      if (peek() == '@') {
        read_prefix(g);
        continue;
      }
      Iri s = read_iri_term("subject");
      Iri p = read_iri_term("predicate");
      Term o = read_object();
      skip_inline_ws();
      expect('.');
      skip_inline_ws();
      if (!at_end() && peek() == '#') skip_comment();
      if (!at_end() && peek() != '\n' && peek() != '\r') {
        fail("expected end of line after '.'");
      }
      g.insert(Triple{std::move(s), std::move(p), std::move(o)});
    }
    for (const auto& [p, base] : prefixes_) g.set_prefix(p, base);
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError(message, line_, col_);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  void advance() {
    if (text_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void skip_inline_ws() {
    while (!at_end() && (peek() == ' ' || peek() == '\t')) advance();
  }

  void skip_comment() {
    while (!at_end() && peek() != '\n') advance();
  }

  void skip_ws_and_comments() {
    while (!at_end()) {
      char c = peek();
      if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
        advance();
      } else if (c == '#') {
        skip_comment();
      } else {
        break;
      }
    }
  }

  void expect(char c) {
    if (at_end() || peek() != c) fail(std::string("expected '") + c + "'");
    advance();
  }

  std::string read_angle_iri() {
    expect('<');
    std::string out;
    while (!at_end() && peek() != '>') {
      if (peek() == '\n') fail("unterminated IRI");
      out += peek();
      advance();
    }
    expect('>');
    if (!is_absolute_iri(out)) fail("malformed IRI '" + out + "'");
    return out;
  }

  std::string read_prefixed_name() {
    std::string prefix;
    while (!at_end() && peek() != ':' &&
           (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
            peek() == '-')) {
      prefix += peek();
      advance();
    }
    if (at_end() || peek() != ':') fail("expected IRI or prefixed name");
    advance();
    std::string local;
    while (!at_end()) {
      char c = peek();
      if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
          c == '.' || static_cast<unsigned char>(c) >= 0x80) {
        // A trailing '.' terminates the statement.
        if (c == '.' && (pos_ + 1 >= text_.size() ||
                         std::isspace(static_cast<unsigned char>(
                             text_[pos_ + 1])))) {
          break;
        }
        local += c;
        advance();
      } else {
        break;
      }
    }
    auto it = prefixes_.find(prefix);
    if (it == prefixes_.end()) fail("undeclared prefix '" + prefix + ":'");
    return it->second + local;
  }

  Iri read_iri_term(const char* role) {
    skip_inline_ws();
    if (at_end()) fail(std::string("expected ") + role);
    std::string v = peek() == '<' ? read_angle_iri() : read_prefixed_name();
    return Iri(std::move(v));
  }

  Term read_object() {
    skip_inline_ws();
    if (at_end()) fail("expected object");
    if (peek() != '"') return read_iri_term("object");
    std::size_t line = line_;
    std::size_t col = col_;
    advance();
    std::string lex;
    while (true) {
      if (at_end() || peek() == '\n') fail("unterminated string literal");
      char c = peek();
      advance();
      if (c == '"') break;
      if (c != '\\') {
        lex += c;
        continue;
      }
      if (at_end()) fail("dangling escape");
      char e = peek();
      advance();
      switch (e) {
        case 'n': lex += '\n'; break;
        case 'r': lex += '\r'; break;
        case 't': lex += '\t'; break;
        case '"': lex += '"'; break;
        case '\\': lex += '\\'; break;
        case 'u':
        case 'U': {
          int n = e == 'u' ? 4 : 8;
          std::uint32_t cp = 0;
          for (int i = 0; i < n; ++i) {
            if (at_end() || !std::isxdigit(static_cast<unsigned char>(peek()))) {
              fail("bad unicode escape");
            }
            char h = peek();
            advance();
            cp = cp * 16 + static_cast<std::uint32_t>(
                               std::isdigit(static_cast<unsigned char>(h))
                                   ? h - '0'
                                   : std::tolower(h) - 'a' + 10);
          }
          append_utf8(lex, cp);
          break;
        }
        default:
          fail(std::string("unknown escape '\\") + e + "'");
      }
    }
    Datatype dt = Datatype::String;
    if (!at_end() && peek() == '^') {
      advance();
      expect('^');
      std::string iri = peek() == '<' ? read_angle_iri() : read_prefixed_name();
      auto d = datatype_from_iri(iri);
      if (!d) fail("unsupported datatype <" + iri + ">");
      dt = *d;
    }
    try {
      return Literal::make(lex, dt);
    } catch (const ValidationError& e) {
      throw ParseError(e.what(), line, col);
    }
  }

  void read_prefix(Graph&) {
    std::string kw;
    while (!at_end() && !std::isspace(static_cast<unsigned char>(peek()))) {
      kw += peek();
      advance();
    }
    if (kw != "@prefix") fail("unknown directive '" + kw + "'");
    skip_inline_ws();
    std::string name;
    while (!at_end() && peek() != ':') {
      if (std::isspace(static_cast<unsigned char>(peek()))) {
        fail("malformed prefix name");
      }
      name += peek();
      advance();
    }
    expect(':');
    skip_inline_ws();
    std::string base = read_angle_iri();
    skip_inline_ws();
    expect('.');
    prefixes_[name] = base;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::map<std::string, std::string> prefixes_;
};

}  // namespace

std::string format_term(const Term& t) {
  if (const auto* i = as_iri(t)) return "<" + i->value + ">";
  const auto& lit = std::get<Literal>(t);
  return "\"" + escape_string(lit.lexical) + "\"^^<" +
         std::string(datatype_iri(lit.datatype)) + ">";
}

std::string serialize(const Graph& graph) {
  std::string out;
  for (const auto& t : graph) {
    out += "<" + t.subject.value + "> <" + t.predicate.value + "> " +
           format_term(t.object) + " .\n";
  }
  return out;
}

Graph parse_graph(std::string_view text) { return NTriplesReader(text).read(); }

}  // namespace semtwin
