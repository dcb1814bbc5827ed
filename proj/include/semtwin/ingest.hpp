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

// Planning-document extractions: schema parsing, unit normalization,
// graph instantiation, rule compilation and extraction clients.

#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "semtwin/geo.hpp"
#include "semtwin/rules.hpp"
#include "semtwin/term_graph.hpp"

namespace semtwin::ingest {

struct DocumentMetadata {
  std::string title;
  std::string project_name;
  std::string project_location;
};

struct Component {
  std::string id;  // COMP-XX
  std::string name;
  std::optional<std::string> acronym;
  std::string description;
  std::string source_section;
};

enum class Category {
  DesignSpecification,
  EnvironmentalMitigation,
  OperationalParameter,
  SafetyStandard,
  RegulatoryRequirement,
};

std::string_view category_name(Category c);
std::optional<Category> category_from_name(std::string_view name);

struct ConstraintSnippet {
  std::string id;  // C-XXX
  std::string linked_component_id;
  Category category = Category::RegulatoryRequirement;
  std::string description;
  std::optional<double> value;
  std::optional<std::string> unit;
  std::string source_section;
  std::string geographic_scope;  // prose or WKT; may be empty
  std::string context_quote;
};

struct GoverningEntity {
  std::string id;  // E-XX
  std::string name;
  std::optional<std::string> acronym;
  std::string jurisdiction;
  std::string role;
  std::string source_section;
};

struct ExtractionDocument {
  DocumentMetadata metadata;
  std::vector<Component> components;
  std::vector<ConstraintSnippet> constraints;
  std::vector<GoverningEntity> entities;

  const Component* find_component(std::string_view id) const;
};

using Warnings = std::vector<std::string>;

struct ParsedExtraction {
  ExtractionDocument document;
  Warnings warnings;
};

// Accepts bare JSON or JSON wrapped in ``` fences. Throws IngestError.
ParsedExtraction parse_extraction(std::string_view raw);
// Schema-shaped JSON, omitting absent optional fields.
std::string to_json(const ExtractionDocument& doc);

enum class Dimension { Length, Speed, Count };

struct QuantityValue {
  double magnitude = 0.0;
  Dimension dimension = Dimension::Length;

  // "m", "m/s" or "count".
  std::string_view unit() const;
};

// Throws IngestError naming the original value and unit when the unit is
// not in the table.
QuantityValue normalize_quantity(double value, std::string_view unit);
// Inverse of normalize_quantity for a unit of the same dimension.
double convert_to(const QuantityValue& q, std::string_view unit);

struct AttributeSnippet {
  std::string source_id;   // snippet the attribute came from
  std::string subject_id;  // entity it describes
  Iri property;
  std::variant<QuantityValue, std::string> value;
};

struct Split {
  std::vector<AttributeSnippet> attributes;     // I_A
  std::vector<ConstraintSnippet> constraints;   // I_C
};

// Constraints carrying a value or a geographic scope go to I_C; everything
// else becomes attribute snippets.
Split split(const ExtractionDocument& doc);

Iri component_iri(std::string_view id);
Iri constraint_iri(std::string_view id);
Iri entity_iri(std::string_view id);
Iri document_iri(const DocumentMetadata& meta);

// Named geometries: one "name<TAB>WKT" per line, '#' comments.
class Gazetteer {
 public:
  static Gazetteer parse(std::string_view text);
  static Gazetteer load(const std::filesystem::path& path);

  void add(std::string name, geo::Geometry geometry);
  // Longest entry name occurring in `scope`, case-insensitively.
  std::optional<geo::Geometry> lookup(std::string_view scope) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::vector<std::pair<std::string, geo::Geometry>> entries_;
};

// WKT scope first, then the gazetteer.
std::optional<geo::Geometry> resolve_scope(std::string_view scope,
                                           const Gazetteer& gazetteer);

// Throws IngestError listing the offending snippets when the graph does not
// validate against `ontology`.
Graph instantiate(const ExtractionDocument& doc, const Ontology& ontology,
                  const Gazetteer& gazetteer = {});

struct CompiledRules {
  RuleSet rules;
  // (constraint hasRuleTemplate "<template>") for every constraint.
  Graph annotations;
  Warnings warnings;
};

CompiledRules compile_rules(const ExtractionDocument& doc,
                            const Gazetteer& gazetteer = {});

// The stored extraction prompt with its placeholder still in place.
std::string_view prompt_template();

struct Prompt {
  std::string text;
  Warnings warnings;
};

// Throws IngestError on an empty document.
Prompt build_prompt(std::string_view document_text);

class ExtractionClient {
 public:
  virtual ~ExtractionClient() = default;
  // Returns the raw model response for `prompt` built from `document_text`.
  virtual std::string extract(const std::string& prompt,
                              const std::string& document_text) = 0;
};

// Lowercase hex SHA-256 of the document bytes.
std::string document_key(std::string_view document_text);

// Serves stored responses from <dir>/<document_key>.json.
class ReplayClient : public ExtractionClient {
 public:
  explicit ReplayClient(std::filesystem::path dir);
  std::string extract(const std::string& prompt,
                      const std::string& document_text) override;
  // Stores `response` for `document_text`.
  void record(const std::string& document_text, const std::string& response);

 private:
  std::filesystem::path dir_;
};

struct HttpClientConfig {
  std::string base_url;  // e.g. http://localhost:8000
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_key;  // sent as a bearer token when non-empty
  int timeout_s = 120;
};

// Minimal chat-completion client: posts one user message and returns
// choices[0].message.content.
class HttpClient : public ExtractionClient {
 public:
  explicit HttpClient(HttpClientConfig config);
  std::string extract(const std::string& prompt,
                      const std::string& document_text) override;

 private:
  HttpClientConfig config_;
};

}  // namespace semtwin::ingest
