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

#include "semtwin/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "semtwin/error.hpp"

namespace semtwin::ingest {

using nlohmann::json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

bool mentions(std::string_view text, const std::regex& re) {
  std::string l = lower(text);
  return std::regex_search(l, re);
}

}  // namespace

std::string_view category_name(Category c) {
  switch (c) {
    case Category::DesignSpecification: return "Design Specification";
    case Category::EnvironmentalMitigation: return "Environmental Mitigation";
    case Category::OperationalParameter: return "Operational Parameter";
    case Category::SafetyStandard: return "Safety Standard";
    case Category::RegulatoryRequirement: return "Regulatory Requirement";
  }
  return "";
}

std::optional<Category> category_from_name(std::string_view name) {
  for (Category c :
       {Category::DesignSpecification, Category::EnvironmentalMitigation,
        Category::OperationalParameter, Category::SafetyStandard,
        Category::RegulatoryRequirement}) {
    if (lower(category_name(c)) == lower(trim(name))) return c;
  }
  return std::nullopt;
}

const Component* ExtractionDocument::find_component(std::string_view id) const {
  for (const auto& c : components) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// Schema parsing

namespace {

std::string strip_fences(std::string_view raw) {
  std::size_t fence = raw.find("```");
  if (fence != std::string_view::npos) {
    std::size_t body = raw.find('\n', fence);
    if (body != std::string_view::npos) {
      std::size_t close = raw.find("```", body + 1);
      if (close != std::string_view::npos) {
        return std::string(raw.substr(body + 1, close - body - 1));
      }
    }
  }
  std::size_t open = raw.find('{');
  std::size_t close = raw.rfind('}');
  if (open == std::string_view::npos || close == std::string_view::npos ||
      close < open) {
    return std::string(raw);
  }
  return std::string(raw.substr(open, close - open + 1));
}

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string where, Warnings& warnings)
      : j_(j), where_(std::move(where)), warnings_(warnings) {
    if (!j_.is_object()) throw IngestError(where_ + " must be an object");
  }

  std::optional<std::string> text(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number()) return it->dump();
    throw IngestError(where_ + ": field '" + key + "' must be a string");
  }

  std::string required(const std::string& key) {
    auto v = text(key);
    if (!v || trim(*v).empty()) {
      throw IngestError(where_ + ": missing required field '" + key + "'");
    }
    return *v;
  }

  std::string optional_text(const std::string& key) {
    return text(key).value_or("");
  }

  std::optional<double> number(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return std::nullopt;
    if (it->is_number()) return it->get<double>();
    if (it->is_string()) {
      std::string s;
      for (char c : it->get<std::string>()) {
        if (c != ',' && !std::isspace(static_cast<unsigned char>(c))) s += c;
      }
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec == std::errc() && ptr == s.data() + s.size() && !s.empty()) {
        return v;
      }
    }
    throw IngestError(where_ + ": field '" + key + "' must be a number");
  }

  const json* array(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    if (!it->is_array()) {
      throw IngestError(where_ + ": field '" + key + "' must be an array");
    }
    return &*it;
  }

  const json* object(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end() || it->is_null()) return nullptr;
    return &*it;
  }

  void finish() {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        warnings_.push_back(where_ + ": ignoring unknown field '" + it.key() +
                            "'");
      }
    }
  }

 private:
  const json& j_;
  std::string where_;
  Warnings& warnings_;
  std::set<std::string> seen_;
};

void check_id(const std::string& id, const std::regex& pattern,
              const char* kind, std::set<std::string>& seen) {
  if (!std::regex_match(id, pattern)) {
    throw IngestError(std::string("malformed ") + kind + " id '" + id + "'");
  }
  if (!seen.insert(id).second) {
    throw IngestError(std::string("duplicate ") + kind + " id '" + id + "'");
  }
}

}  // namespace

ParsedExtraction parse_extraction(std::string_view raw) {
  json root;
  try {
    root = json::parse(strip_fences(raw));
  } catch (const json::parse_error& e) {
    throw IngestError(std::string("malformed extraction JSON: ") + e.what());
  }
  ParsedExtraction out;
  Warnings& w = out.warnings;
  ExtractionDocument& doc = out.document;
  ObjectReader top(root, "document", w);

  if (const json* meta = top.object("document_metadata")) {
    ObjectReader r(*meta, "document_metadata", w);
    doc.metadata.title = r.optional_text("title");
    doc.metadata.project_name = r.optional_text("project_name");
    doc.metadata.project_location = r.optional_text("project_location");
    r.finish();
  }

  static const std::regex kComp(R"(COMP-\d{2,})");
  static const std::regex kCons(R"(C-\d{3,})");
  static const std::regex kEnt(R"(E-\d{2,})");

  std::set<std::string> ids;
  if (const json* arr = top.array("project_components")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      ObjectReader r((*arr)[i], "project_components[" + std::to_string(i) + "]",
                     w);
      Component c;
      c.id = r.required("component_id");
      check_id(c.id, kComp, "component", ids);
      c.name = r.required("component_name");
      c.acronym = r.text("component_acronym");
      c.description = r.optional_text("description");
      c.source_section = r.optional_text("source_section_number");
      r.finish();
      doc.components.push_back(std::move(c));
    }
  }

  ids.clear();
  if (const json* arr = top.array("project_constraints")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      ObjectReader r((*arr)[i],
                     "project_constraints[" + std::to_string(i) + "]", w);
      ConstraintSnippet c;
      c.id = r.required("constraint_id");
      check_id(c.id, kCons, "constraint", ids);
      c.linked_component_id = r.required("linked_component_id");
      std::string cat = r.required("category");
      auto category = category_from_name(cat);
      if (!category) {
        throw IngestError(c.id + ": unknown category '" + cat + "'");
      }
      c.category = *category;
      c.description = r.required("description");
      c.value = r.number("value");
      c.unit = r.text("unit");
      if (c.unit && trim(*c.unit).empty()) c.unit.reset();
      if (c.value && !c.unit) {
        throw IngestError(c.id + ": value present without a unit");
      }
      if (c.value && !std::isfinite(*c.value)) {
        throw IngestError(c.id + ": value is not finite");
      }
      c.source_section = r.optional_text("source_section_number");
      c.geographic_scope = r.optional_text("geographic_scope");
      auto quote = r.text("context_quote");
      if (!quote || trim(*quote).empty()) {
        throw IngestError(c.id + ": context_quote must be non-empty");
      }
      c.context_quote = *quote;
      r.finish();
      doc.constraints.push_back(std::move(c));
    }
  }

  ids.clear();
  if (const json* arr = top.array("governing_entities")) {
    for (std::size_t i = 0; i < arr->size(); ++i) {
      ObjectReader r((*arr)[i], "governing_entities[" + std::to_string(i) + "]",
                     w);
      GoverningEntity e;
      e.id = r.required("entity_id");
      check_id(e.id, kEnt, "entity", ids);
      e.name = r.required("entity_name");
      e.acronym = r.text("entity_acronym");
      e.jurisdiction = r.optional_text("jurisdiction");
      e.role = r.optional_text("role_description");
      e.source_section = r.optional_text("source_section_number");
      r.finish();
      doc.entities.push_back(std::move(e));
    }
  }
  top.finish();

  for (const auto& c : doc.constraints) {
    if (!doc.find_component(c.linked_component_id)) {
      throw IngestError(c.id + ": linked_component_id '" +
                        c.linked_component_id +
                        "' does not name a project component");
    }
    if (c.unit) normalize_quantity(c.value.value_or(0.0), *c.unit);
  }
  return out;
}

std::string to_json(const ExtractionDocument& doc) {
  json root;
  root["document_metadata"] = {{"title", doc.metadata.title},
                               {"project_name", doc.metadata.project_name},
                               {"project_location",
                                doc.metadata.project_location}};
  json comps = json::array();
  for (const auto& c : doc.components) {
    json j = {{"component_id", c.id},
              {"component_name", c.name},
              {"description", c.description},
              {"source_section_number", c.source_section}};
    if (c.acronym) j["component_acronym"] = *c.acronym;
    comps.push_back(std::move(j));
  }
  json cons = json::array();
  for (const auto& c : doc.constraints) {
    json j = {{"constraint_id", c.id},
              {"linked_component_id", c.linked_component_id},
              {"category", std::string(category_name(c.category))},
              {"description", c.description},
              {"source_section_number", c.source_section},
              {"geographic_scope", c.geographic_scope},
              {"context_quote", c.context_quote}};
    if (c.value) j["value"] = *c.value;
    if (c.unit) j["unit"] = *c.unit;
    cons.push_back(std::move(j));
  }
  json ents = json::array();
  for (const auto& e : doc.entities) {
    json j = {{"entity_id", e.id},
              {"entity_name", e.name},
              {"jurisdiction", e.jurisdiction},
              {"role_description", e.role},
              {"source_section_number", e.source_section}};
    if (e.acronym) j["entity_acronym"] = *e.acronym;
    ents.push_back(std::move(j));
  }
  root["project_components"] = std::move(comps);
  root["project_constraints"] = std::move(cons);
  root["governing_entities"] = std::move(ents);
  return root.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Units

namespace {

struct UnitEntry {
  const char* name;
  Dimension dimension;
  double factor;
};

constexpr UnitEntry kUnits[] = {
    {"m", Dimension::Length, 1.0},
    {"meter", Dimension::Length, 1.0},
    {"meters", Dimension::Length, 1.0},
    {"metre", Dimension::Length, 1.0},
    {"metres", Dimension::Length, 1.0},
    {"ft", Dimension::Length, 0.3048},
    {"foot", Dimension::Length, 0.3048},
    {"feet", Dimension::Length, 0.3048},
    {"km", Dimension::Length, 1000.0},
    {"kilometer", Dimension::Length, 1000.0},
    {"kilometers", Dimension::Length, 1000.0},
    {"nm", Dimension::Length, 1852.0},
    {"nautical mile", Dimension::Length, 1852.0},
    {"nautical miles", Dimension::Length, 1852.0},
    {"knot", Dimension::Speed, 0.514444},
    {"knots", Dimension::Speed, 0.514444},
    {"kt", Dimension::Speed, 0.514444},
    {"kts", Dimension::Speed, 0.514444},
    {"mph", Dimension::Speed, 0.44704},
    {"m/s", Dimension::Speed, 1.0},
    {"count", Dimension::Count, 1.0},
};

const UnitEntry* find_unit(std::string_view unit) {
  std::string key = lower(trim(unit));
  while (!key.empty() && key.back() == '.') key.pop_back();
  for (const auto& u : kUnits) {
    if (key == u.name) return &u;
  }
  return nullptr;
}

}  // namespace

std::string_view QuantityValue::unit() const {
  switch (dimension) {
    case Dimension::Length: return "m";
    case Dimension::Speed: return "m/s";
    case Dimension::Count: return "count";
  }
  return "";
}

QuantityValue normalize_quantity(double value, std::string_view unit) {
  const UnitEntry* u = find_unit(unit);
  if (!u) {
    throw IngestError("unsupported unit '" + std::string(unit) +
                      "' for value " + format_double(value));
  }
  if (!std::isfinite(value)) {
    throw IngestError("non-finite quantity with unit '" + std::string(unit) +
                      "'");
  }
  return {value * u->factor, u->dimension};
}

double convert_to(const QuantityValue& q, std::string_view unit) {
  const UnitEntry* u = find_unit(unit);
  if (!u || u->dimension != q.dimension) {
    throw IngestError("cannot express " + std::string(q.unit()) + " in '" +
                      std::string(unit) + "'");
  }
  return q.magnitude / u->factor;
}

// ---------------------------------------------------------------------------
// Partition

Split split(const ExtractionDocument& doc) {
  Split out;
  for (const auto& c : doc.components) {
    out.attributes.push_back({c.id, c.id, vocab::hasName, c.name});
    if (c.acronym) {
      out.attributes.push_back({c.id, c.id, vocab::hasAcronym, *c.acronym});
    }
    if (!c.description.empty()) {
      out.attributes.push_back({c.id, c.id, vocab::hasDescription,
                                c.description});
    }
  }
  for (const auto& c : doc.constraints) {
    if (c.value || !trim(c.geographic_scope).empty()) {
      out.constraints.push_back(c);
    } else {
      out.attributes.push_back({c.id, c.linked_component_id,
                                vocab::hasDescription, c.description});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// IRIs and gazetteer

Iri component_iri(std::string_view id) {
  return vocab::term("Component_" + std::string(id));
}

Iri constraint_iri(std::string_view id) {
  return vocab::term("Constraint_" + std::string(id));
}

Iri entity_iri(std::string_view id) {
  return vocab::term("Entity_" + std::string(id));
}

Iri document_iri(const DocumentMetadata& meta) {
  std::string source =
      !meta.project_name.empty() ? meta.project_name : meta.title;
  std::string slug;
  for (char c : source) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      slug += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!slug.empty() && slug.back() != '-') {
      slug += '-';
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  if (slug.empty()) slug = "document";
  return vocab::term("Document_" + slug);
}

Gazetteer Gazetteer::parse(std::string_view text) {
  Gazetteer g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw ParseError("expected name<TAB>WKT", lineno, 1);
    }
    std::string name = trim(line.substr(0, tab));
    if (name.empty()) throw ParseError("empty gazetteer name", lineno, 1);
    try {
      g.add(name, geo::parse_wkt(line.substr(tab + 1)));
    } catch (const ParseError& e) {
      throw ParseError(std::string("gazetteer WKT: ") + e.what(), lineno,
                       tab + 1 + e.column());
    }
  }
  return g;
}

Gazetteer Gazetteer::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read gazetteer " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void Gazetteer::add(std::string name, geo::Geometry geometry) {
  geo::check_geometry(geometry);
  entries_.emplace_back(std::move(name), std::move(geometry));
}

std::optional<geo::Geometry> Gazetteer::lookup(std::string_view scope) const {
  std::string s = lower(scope);
  const std::pair<std::string, geo::Geometry>* best = nullptr;
  for (const auto& e : entries_) {
    if (s.find(lower(e.first)) == std::string::npos) continue;
    if (!best || e.first.size() > best->first.size()) best = &e;
  }
  if (!best) return std::nullopt;
  return best->second;
}

std::optional<geo::Geometry> resolve_scope(std::string_view scope,
                                           const Gazetteer& gazetteer) {
  std::string s = trim(scope);
  if (s.empty()) return std::nullopt;
  try {
    return geo::parse_wkt(s);
  } catch (const Error&) {
  }
  return gazetteer.lookup(s);
}

// ---------------------------------------------------------------------------
// F_inst

namespace {

Iri component_class(const Component& c) {
  std::string name = lower(c.name + " " + c.acronym.value_or(""));
  if (name.find("turbine") != std::string::npos ||
      name.find("wtg") != std::string::npos) {
    return vocab::Turbine;
  }
  if (name.find("cable") != std::string::npos) return vocab::Cable;
  if (name.find("wind farm") != std::string::npos ||
      name.find("windfarm") != std::string::npos) {
    return vocab::WindFarm;
  }
  return vocab::Infrastructure;
}

void add_text(Graph& g, const Iri& s, const Iri& p, const std::string& v) {
  if (!v.empty()) g.insert({s, p, Literal::of_string(v)});
}

}  // namespace

Graph instantiate(const ExtractionDocument& doc, const Ontology& ontology,
                  const Gazetteer& gazetteer) {
  Graph g;
  g.set_prefix("", std::string(vocab::kNamespace));
  Iri d = document_iri(doc.metadata);
  g.insert({d, vocab::type, vocab::Document});
  add_text(g, d, vocab::hasTitle, doc.metadata.title);
  add_text(g, d, vocab::hasProjectName, doc.metadata.project_name);
  add_text(g, d, vocab::hasProjectLocation, doc.metadata.project_location);

  // Snippet id per subject, for error messages.
  std::map<Iri, std::string> origin;

  for (const auto& c : doc.components) {
    Iri s = component_iri(c.id);
    g.insert({s, vocab::type, component_class(c)});
    add_text(g, s, vocab::hasName, c.name);
    if (c.acronym) add_text(g, s, vocab::hasAcronym, *c.acronym);
    add_text(g, s, vocab::hasDescription, c.description);
    add_text(g, s, vocab::hasSourceSection, c.source_section);
    g.insert({s, vocab::describedIn, d});
    origin.emplace(s, c.id);
  }
  for (const auto& c : doc.constraints) {
    Iri s = constraint_iri(c.id);
    g.insert({s, vocab::type, vocab::Regulation});
    add_text(g, s, vocab::hasRegulationDescription, c.description);
    add_text(g, s, vocab::hasCategory, std::string(category_name(c.category)));
    add_text(g, s, vocab::hasSourceSection, c.source_section);
    add_text(g, s, vocab::hasContextQuote, c.context_quote);
    add_text(g, s, vocab::hasImpactArea, c.geographic_scope);
    if (c.value && c.unit) {
      QuantityValue q = normalize_quantity(*c.value, *c.unit);
      g.insert({s, vocab::hasImpactValue, Literal::of_double(q.magnitude)});
      g.insert({s, vocab::hasImpactUnit,
                Literal::of_string(std::string(q.unit()))});
    }
    if (auto geom = resolve_scope(c.geographic_scope, gazetteer)) {
      g.insert({s, vocab::hasGeometry, Literal::of_wkt(*geom)});
    }
    g.insert({s, vocab::appliesTo, component_iri(c.linked_component_id)});
    g.insert({s, vocab::hasConflict, Literal::of_bool(false)});
    g.insert({s, vocab::describedIn, d});
    origin.emplace(s, c.id);
  }
  for (const auto& e : doc.entities) {
    Iri s = entity_iri(e.id);
    g.insert({s, vocab::type, vocab::GoverningEntity});
    add_text(g, s, vocab::hasName, e.name);
    if (e.acronym) add_text(g, s, vocab::hasAcronym, *e.acronym);
    add_text(g, s, vocab::hasJurisdiction, e.jurisdiction);
    add_text(g, s, vocab::hasRole, e.role);
    add_text(g, s, vocab::hasSourceSection, e.source_section);
    g.insert({s, vocab::describedIn, d});
    origin.emplace(s, e.id);
  }

  auto violations = validate(g, ontology);
  if (!violations.empty()) {
    std::string msg = "extraction does not fit the ontology:";
    for (const auto& v : violations) {
      auto it = origin.find(v.triple.subject);
      msg += "\n  " + (it != origin.end() ? it->second : std::string("metadata")) +
             ": " + format_triple(v.triple) + ": " + v.reason;
    }
    throw IngestError(msg);
  }
  return g;
}

// ---------------------------------------------------------------------------
// F_rule

namespace {

const std::regex& spacing_words() {
  static const std::regex re(R"(spac|separat)");
  return re;
}
const std::regex& buffer_words() {
  static const std::regex re(
      R"(buffer|setback|within|prohibit|avoid|exclu|distance|away from|forbid)");
  return re;
}
const std::regex& prohibition_words() {
  static const std::regex re(
      R"(prohibit|exclu|avoid|forbid|not (be )?(permitted|allowed)|shall not|must not|no [a-z ]*(shall|may|will))");
  return re;
}
const std::regex& wind_words() {
  static const std::regex re(R"(wind)");
  return re;
}
const std::regex& lower_bound_words() {
  static const std::regex re(R"(minimum|at least|no less than|not less than|below which)");
  return re;
}

PatternTerm var(const char* name) { return Variable{name}; }
PatternTerm term(const Iri& i) { return Term{i}; }
PatternTerm term(const Literal& l) { return Term{l}; }

std::vector<TriplePattern> conflict_head(const char* v, const Iri& constraint) {
  return {
      {var(v), term(vocab::hasConflict), term(Literal::of_bool(true))},
      {var(v), term(vocab::violatesConstraint), term(constraint)},
      {term(constraint), term(vocab::hasConflict),
       term(Literal::of_bool(true))},
  };
}

std::string rule_name(const char* kind, const std::string& id) {
  return std::string(kind) + "_" + id;
}

}  // namespace

CompiledRules compile_rules(const ExtractionDocument& doc,
                            const Gazetteer& gazetteer) {
  CompiledRules out;
  for (const auto& c : doc.constraints) {
    Iri ci = constraint_iri(c.id);
    std::string text = c.description + " " + c.context_quote;
    std::optional<QuantityValue> q;
    if (c.value && c.unit) q = normalize_quantity(*c.value, *c.unit);
    std::optional<geo::Geometry> scope =
        resolve_scope(c.geographic_scope, gazetteer);
    const Component* comp = doc.find_component(c.linked_component_id);
    bool turbine = comp && component_class(*comp) == vocab::Turbine;

    std::string kind;
    Rule rule;
    if (q && q->dimension == Dimension::Length &&
        c.category == Category::DesignSpecification &&
        mentions(text, spacing_words())) {
      kind = "spacing";
      rule.name = rule_name("spacing", c.id);
      rule.body = {
          TriplePattern{var("a"), term(vocab::type), term(vocab::Turbine)},
          TriplePattern{var("b"), term(vocab::type), term(vocab::Turbine)},
          TriplePattern{var("a"), term(vocab::hasGeometry), var("ga")},
          TriplePattern{var("b"), term(vocab::hasGeometry), var("gb")},
          BuiltinCall{"notEqual", {var("a"), var("b")}},
          BuiltinCall{"withinDistance",
                      {var("ga"), var("gb"),
                       term(Literal::of_double(q->magnitude))}},
      };
      rule.head = conflict_head("a", ci);
    } else if (q && q->dimension == Dimension::Length && scope &&
               mentions(text, buffer_words()) &&
               lower(text).find("depth") == std::string::npos) {
      kind = "buffer";
      rule.name = rule_name("buffer", c.id);
      rule.body = {
          TriplePattern{var("t"), term(vocab::type),
                        term(vocab::Infrastructure)},
          TriplePattern{var("t"), term(vocab::hasGeometry), var("g")},
          BuiltinCall{"withinDistance",
                      {var("g"), term(Literal::of_wkt(*scope)),
                       term(Literal::of_double(q->magnitude))}},
      };
      rule.head = conflict_head("t", ci);
    } else if (!q && scope && std::holds_alternative<geo::Polygon>(*scope) &&
               mentions(text, prohibition_words())) {
      kind = "exclusion";
      rule.name = rule_name("exclusion", c.id);
      rule.body = {
          TriplePattern{var("t"), term(vocab::type),
                        term(vocab::Infrastructure)},
          TriplePattern{var("t"), term(vocab::hasGeometry), var("g")},
          BuiltinCall{"intersects", {var("g"), term(Literal::of_wkt(*scope))}},
      };
      rule.head = conflict_head("t", ci);
    } else if (q && q->dimension == Dimension::Speed && turbine &&
               mentions(text, wind_words())) {
      kind = "threshold";
      rule.name = rule_name("threshold", c.id);
      bool lower_bound = mentions(text, lower_bound_words());
      rule.body = {
          TriplePattern{var("t"), term(vocab::type), term(vocab::Turbine)},
          TriplePattern{var("t"), term(vocab::hasWindSpeed), var("w")},
          BuiltinCall{lower_bound ? "lessThan" : "greaterThan",
                      {var("w"), term(Literal::of_double(q->magnitude))}},
      };
      rule.head = conflict_head("t", ci);
    } else {
      kind = "annotation";
      std::string why;
      if (!q && !scope) {
        why = "no value and no resolvable geographic scope";
      } else if (!q && scope) {
        why = mentions(text, prohibition_words())
                  ? "scope is not an area"
                  : "containment requirement would need negation";
      } else if (q->dimension == Dimension::Speed) {
        why = "speed limit is not a turbine wind threshold";
      } else if (q->dimension == Dimension::Length && !scope) {
        why = "length without a resolvable geographic scope";
      } else {
        why = "no spatial layout template matches";
      }
      out.warnings.push_back(c.id + ": " + why + "; kept as annotation");
    }
    if (kind != "annotation") out.rules.add(std::move(rule));
    out.annotations.insert(
        {ci, vocab::hasRuleTemplate, Literal::of_string(kind)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompt

Prompt build_prompt(std::string_view document_text) {
  if (trim(document_text).empty()) {
    throw IngestError("cannot build a prompt for an empty document");
  }
  Prompt p;
  std::string doc(document_text);
  static const std::string kClose = "</documentation>";
  static const std::string kEscaped = "&lt;/documentation&gt;";
  std::size_t pos = 0;
  int escaped = 0;
  while ((pos = doc.find(kClose, pos)) != std::string::npos) {
    doc.replace(pos, kClose.size(), kEscaped);
    pos += kEscaped.size();
    ++escaped;
  }
  if (escaped) {
    p.warnings.push_back("escaped " + std::to_string(escaped) +
                         " literal </documentation> tag(s) in the document");
  }
  std::string_view tpl = prompt_template();
  static const std::string kSlot = "{{DOCUMENTATION}}";
  std::size_t slot = tpl.find(kSlot);
  p.text = std::string(tpl.substr(0, slot)) + doc +
           std::string(tpl.substr(slot + kSlot.size()));
  return p;
}

}  // namespace semtwin::ingest
