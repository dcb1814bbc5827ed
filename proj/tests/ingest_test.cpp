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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "semtwin/error.hpp"

namespace semtwin::ingest {
namespace {

const std::string kData = SEMTWIN_DATA_DIR;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExtractionDocument appendix() {
  return parse_extraction(read_file(kData + "/extractions/appendix_example.json"))
      .document;
}

Gazetteer gazetteer() { return Gazetteer::load(kData + "/gazetteer/maryland.tsv"); }

// Turbine `meters` due north of the wreck point; along a meridian the
// haversine distance is R * dlat.
Graph turbine_north_of_wreck(const std::string& id, double meters) {
  double dlat = meters / (geo::kEarthRadiusKm * 1000.0) * 180.0 / M_PI;
  Graph g;
  Iri t = vocab::term(id);
  g.insert({t, vocab::type, vocab::Turbine});
  g.insert({t, vocab::hasGeometry,
            Literal::of_wkt(geo::Point{{-74.7, 38.3 + dlat}})});
  return g;
}

TEST(ParseExtraction, AppendixExample) {
  auto parsed = parse_extraction(
      read_file(kData + "/extractions/appendix_example.json"));
  EXPECT_TRUE(parsed.warnings.empty());
  const auto& doc = parsed.document;
  ASSERT_EQ(doc.constraints.size(), 2u);
  EXPECT_EQ(doc.constraints[0].id, "C-021");
  EXPECT_EQ(*doc.constraints[0].value, 10.0);
  EXPECT_EQ(*doc.constraints[0].unit, "knots");
  EXPECT_EQ(doc.constraints[1].id, "C-022");
  EXPECT_EQ(*doc.constraints[1].value, 500.0);
  EXPECT_EQ(doc.constraints[1].category, Category::RegulatoryRequirement);
  EXPECT_EQ(doc.components.size(), 3u);
  EXPECT_EQ(doc.entities.size(), 1u);
  EXPECT_EQ(*doc.entities[0].acronym, "BOEM");
}

TEST(ParseExtraction, FencedEqualsUnfenced) {
  std::string raw = read_file(kData + "/extractions/appendix_example.json");
  auto a = parse_extraction(raw);
  auto b = parse_extraction("Here you go:\n```json\n" + raw + "```\n");
  EXPECT_EQ(to_json(a.document), to_json(b.document));
}

TEST(ParseExtraction, DanglingComponentNamesId) {
  std::string raw = R"({"project_components": [],
    "project_constraints": [{"constraint_id": "C-001",
      "linked_component_id": "COMP-09", "category": "Safety Standard",
      "description": "d", "context_quote": "q"}]})";
  try {
    parse_extraction(raw);
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    EXPECT_NE(std::string(e.what()).find("COMP-09"), std::string::npos);
  }
}

TEST(ParseExtraction, InvariantViolations) {
  auto doc_with = [](const std::string& constraint) {
    return R"({"project_components": [{"component_id": "COMP-01",
      "component_name": "Wind Turbine"}], "project_constraints": [)" +
           constraint + "]}";
  };
  EXPECT_THROW(parse_extraction(doc_with(
                   R"({"constraint_id": "C-1", "linked_component_id": "COMP-01",
      "category": "Safety Standard", "description": "d", "context_quote": "q"})")),
               IngestError);
  EXPECT_THROW(parse_extraction(doc_with(
                   R"({"constraint_id": "C-001", "linked_component_id": "COMP-01",
      "category": "Safety Standard", "description": "d", "value": 3,
      "context_quote": "q"})")),
               IngestError);
  EXPECT_THROW(parse_extraction(doc_with(
                   R"({"constraint_id": "C-001", "linked_component_id": "COMP-01",
      "category": "Safety Standard", "description": "d", "context_quote": ""})")),
               IngestError);
  EXPECT_THROW(parse_extraction(doc_with(
                   R"({"constraint_id": "C-001", "linked_component_id": "COMP-01",
      "category": "Vibes", "description": "d", "context_quote": "q"})")),
               IngestError);
  EXPECT_THROW(parse_extraction(doc_with(
                   R"({"constraint_id": "C-001", "linked_component_id": "COMP-01",
      "category": "Safety Standard", "description": "d", "value": 3,
      "unit": "furlongs", "context_quote": "q"})")),
               IngestError);
  EXPECT_THROW(parse_extraction("{not json"), IngestError);
  std::string dup = R"({"project_components": [
    {"component_id": "COMP-01", "component_name": "a"},
    {"component_id": "COMP-01", "component_name": "b"}]})";
  EXPECT_THROW(parse_extraction(dup), IngestError);
}

TEST(ParseExtraction, UnknownFieldsWarn) {
  auto parsed = parse_extraction(R"({"project_components": [
    {"component_id": "COMP-01", "component_name": "a", "colour": "red"}],
    "notes": 1})");
  EXPECT_EQ(parsed.warnings.size(), 2u);
}

TEST(ParseExtraction, NumericStringValue) {
  auto parsed = parse_extraction(R"({"project_components": [
    {"component_id": "COMP-01", "component_name": "Wind Turbine Generator"}],
    "project_constraints": [{"constraint_id": "C-001",
      "linked_component_id": "COMP-01", "category": "Design Specification",
      "description": "Minimum spacing between turbines", "value": "1,200",
      "unit": "m", "context_quote": "spaced at least 1,200 m apart"}]})");
  EXPECT_EQ(*parsed.document.constraints[0].value, 1200.0);
}

TEST(NormalizeQuantity, ConversionTable) {
  QuantityValue knots = normalize_quantity(10, "knots");
  EXPECT_EQ(knots.dimension, Dimension::Speed);
  EXPECT_NEAR(knots.magnitude, 5.14444, 1e-12);
  EXPECT_EQ(knots.unit(), "m/s");
  EXPECT_EQ(normalize_quantity(500, "meters").magnitude, 500.0);
  EXPECT_EQ(normalize_quantity(500, "meters").unit(), "m");
  EXPECT_EQ(normalize_quantity(25, "m/s").magnitude, 25.0);
  EXPECT_NEAR(normalize_quantity(100, "feet").magnitude, 30.48, 1e-12);
  EXPECT_EQ(normalize_quantity(2, "km").magnitude, 2000.0);
  EXPECT_EQ(normalize_quantity(1, "nm").magnitude, 1852.0);
  EXPECT_NEAR(normalize_quantity(10, "mph").magnitude, 4.4704, 1e-12);
  EXPECT_EQ(normalize_quantity(3, " Meters ").magnitude, 3.0);
}

TEST(NormalizeQuantity, UnknownUnitCarriesOriginal) {
  try {
    normalize_quantity(7, "cubits");
    FAIL() << "expected IngestError";
  } catch (const IngestError& e) {
    std::string msg = e.what();
    EXPECT_NE(msg.find("cubits"), std::string::npos);
    EXPECT_NE(msg.find("7"), std::string::npos);
  }
}

TEST(Split, AppendixPartition) {
  Split s = split(appendix());
  ASSERT_EQ(s.constraints.size(), 2u);
  EXPECT_EQ(s.constraints[0].id, "C-021");
  EXPECT_EQ(s.constraints[1].id, "C-022");
  for (const auto& a : s.attributes) EXPECT_EQ(a.source_id.rfind("COMP-", 0), 0u);
  EXPECT_FALSE(s.attributes.empty());
}

TEST(Split, ComponentsOnly) {
  ExtractionDocument doc = appendix();
  doc.constraints.clear();
  EXPECT_TRUE(split(doc).constraints.empty());
}

TEST(Instantiate, ConstraintTriples) {
  Graph g = instantiate(appendix(), Ontology::core(), gazetteer());
  Iri c22 = constraint_iri("C-022");
  EXPECT_EQ(c22.value, "https://semtwin.dev/ns#Constraint_C-022");
  EXPECT_TRUE(g.contains({c22, vocab::hasImpactValue,
                          Literal::make("500.0", Datatype::Double)}));
  EXPECT_TRUE(g.contains({c22, vocab::hasConflict, Literal::of_bool(false)}));
  EXPECT_TRUE(g.contains({c22, vocab::type, vocab::Regulation}));
  EXPECT_FALSE(g.objects(c22, vocab::hasRegulationDescription).empty());
  EXPECT_FALSE(g.objects(c22, vocab::hasImpactArea).empty());
  EXPECT_TRUE(g.contains({c22, vocab::hasGeometry,
                          Literal::make("POINT (-74.7 38.3)",
                                        Datatype::WktLiteral)}));
  std::size_t n = 0;
  for (const auto& t : g) n += t.subject == c22;
  EXPECT_GE(n, 5u);
  EXPECT_TRUE(g.contains({component_iri("COMP-01"), vocab::type,
                          vocab::Turbine}));
  EXPECT_TRUE(g.contains({component_iri("COMP-03"), vocab::type,
                          vocab::Cable}));
  EXPECT_TRUE(validate(g, Ontology::core()).empty());
}

TEST(Instantiate, EmptyDocumentHasOnlyMetadata) {
  ExtractionDocument doc;
  doc.metadata.title = "Empty";
  Graph g = instantiate(doc, Ontology::core());
  for (const auto& t : g) EXPECT_EQ(t.subject, document_iri(doc.metadata));
  EXPECT_EQ(g.size(), 2u);
}

TEST(Instantiate, Deterministic) {
  Graph a = instantiate(appendix(), Ontology::core(), gazetteer());
  Graph b = instantiate(appendix(), Ontology::core(), gazetteer());
  EXPECT_EQ(serialize(a), serialize(b));
}

TEST(CompileRules, AppendixExample) {
  CompiledRules c = compile_rules(appendix(), gazetteer());
  ASSERT_EQ(c.rules.size(), 1u);
  const Rule& r = c.rules.rules()[0];
  EXPECT_EQ(r.name, "buffer_C-022");
  bool within = false;
  for (const auto& item : r.body) {
    if (const auto* b = std::get_if<BuiltinCall>(&item)) {
      within = b->name == "withinDistance";
      EXPECT_EQ(std::get<Term>(b->args[2]), Term{Literal::of_double(500)});
    }
  }
  EXPECT_TRUE(within);
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("C-021"), std::string::npos);
  EXPECT_TRUE(c.annotations.contains({constraint_iri("C-021"),
                                      vocab::hasRuleTemplate,
                                      Literal::of_string("annotation")}));
}

TEST(CompileRules, BufferFlags400NotAt600) {
  CompiledRules c = compile_rules(appendix(), gazetteer());
  Ontology o = Ontology::core();
  Graph near = subsumption_closure(turbine_north_of_wreck("T400", 400), o);
  Graph far = subsumption_closure(turbine_north_of_wreck("T600", 600), o);
  Triple flagged{vocab::term("T400"), vocab::hasConflict, Literal::of_bool(true)};
  Graph out = reason(near, c.rules);
  EXPECT_TRUE(out.contains(flagged));
  EXPECT_TRUE(out.contains({vocab::term("T400"), vocab::violatesConstraint,
                            constraint_iri("C-022")}));
  EXPECT_FALSE(reason(far, c.rules)
                   .contains({vocab::term("T600"), vocab::hasConflict,
                              Literal::of_bool(true)}));
}

ExtractionDocument synthetic_doc() {
  return parse_extraction(R"JSON({
    "project_components": [
      {"component_id": "COMP-01", "component_name": "Wind Turbine Generator"}],
    "project_constraints": [
      {"constraint_id": "C-001", "linked_component_id": "COMP-01",
       "category": "Design Specification",
       "description": "Minimum spacing between turbines", "value": 1200,
       "unit": "m", "context_quote": "spaced at least 1,200 m apart"},
      {"constraint_id": "C-002", "linked_component_id": "COMP-01",
       "category": "Environmental Mitigation",
       "description": "No turbines are permitted in the closure box; turbine placement is prohibited there",
       "geographic_scope": "POLYGON ((-74.8 38.3, -74.79 38.3, -74.79 38.31, -74.8 38.31, -74.8 38.3))",
       "context_quote": "placement prohibited"},
      {"constraint_id": "C-003", "linked_component_id": "COMP-01",
       "category": "Operational Parameter",
       "description": "Turbines shut down when wind exceeds the cut-out speed",
       "value": 25, "unit": "m/s", "context_quote": "cut-out of 25 m/s"},
      {"constraint_id": "C-004", "linked_component_id": "COMP-01",
       "category": "Safety Standard",
       "description": "Marking and lighting per federal guidance",
       "context_quote": "lit per guidance"}
    ]})JSON")
      .document;
}

TEST(CompileRules, TemplateTable) {
  CompiledRules c = compile_rules(synthetic_doc());
  ASSERT_EQ(c.rules.size(), 3u);
  EXPECT_EQ(c.rules.rules()[0].name, "spacing_C-001");
  EXPECT_EQ(c.rules.rules()[1].name, "exclusion_C-002");
  EXPECT_EQ(c.rules.rules()[2].name, "threshold_C-003");
  ASSERT_EQ(c.warnings.size(), 1u);
  EXPECT_NE(c.warnings[0].find("C-004"), std::string::npos);
}

// Every compiled rule fires on a layout built to violate it and the head
// points back to its constraint.
TEST(CompileRules, EveryRuleFiresOnViolatingLayout) {
  CompiledRules c = compile_rules(synthetic_doc());
  Ontology o = Ontology::core();
  Graph g;
  Iri a = vocab::term("TA"), b = vocab::term("TB");
  g.insert({a, vocab::type, vocab::Turbine});
  g.insert({b, vocab::type, vocab::Turbine});
  g.insert({a, vocab::hasGeometry,
            Literal::of_wkt(geo::Point{{-74.795, 38.305}})});
  g.insert({b, vocab::hasGeometry,
            Literal::of_wkt(geo::Point{{-74.795, 38.309}})});
  g.insert({a, vocab::hasWindSpeed, Literal::of_double(30)});
  Inference inf = reason_traced(subsumption_closure(g, o), c.rules);
  for (const char* id : {"C-001", "C-002", "C-003"}) {
    Triple t{a, vocab::violatesConstraint, constraint_iri(id)};
    ASSERT_TRUE(inf.graph.contains(t)) << id;
    EXPECT_TRUE(explain(inf, c.rules, t).has_value());
  }
}

TEST(CompileRules, SerializedRulesRoundTrip) {
  CompiledRules c = compile_rules(appendix(), gazetteer());
  std::string text = serialize_rules(c.rules);
  EXPECT_EQ(serialize_rules(parse_rules(text)), text);
}

TEST(Gazetteer, LongestNameWins) {
  Gazetteer g = Gazetteer::parse(
      "# comment\nwreck\tPOINT (1 1)\nhistoric wreck\tPOINT (2 2)\n");
  auto hit = g.lookup("Area near the Historic Wreck site");
  ASSERT_TRUE(hit);
  EXPECT_EQ(std::get<geo::Point>(*hit).position.lon, 2.0);
  EXPECT_FALSE(g.lookup("nothing here"));
  EXPECT_THROW(Gazetteer::parse("no tab here\n"), ParseError);
}

TEST(Prompt, SubstitutesDocument) {
  Prompt p = build_prompt("Section 1. Turbines shall be spaced 1,200 m apart.");
  EXPECT_NE(p.text.find("<documentation>\nSection 1. Turbines"),
            std::string::npos);
  EXPECT_EQ(p.text.find("{{DOCUMENTATION}}"), std::string::npos);
  EXPECT_TRUE(p.warnings.empty());
  std::string_view tpl = prompt_template();
  EXPECT_EQ(p.text.size(), tpl.size() - 17 + 50);
}

TEST(Prompt, TemplateMatchesAsset) {
  EXPECT_EQ(std::string(prompt_template()),
            read_file(kData + "/prompts/extraction_prompt.txt"));
}

TEST(Prompt, EmptyDocumentRejected) {
  EXPECT_THROW(build_prompt(""), IngestError);
  EXPECT_THROW(build_prompt("  \n"), IngestError);
}

TEST(Prompt, ClosingTagEscaped) {
  Prompt p = build_prompt("before </documentation> after");
  EXPECT_EQ(p.warnings.size(), 1u);
  // Only the template's own closing tag remains.
  std::size_t first = p.text.find("</documentation>");
  EXPECT_NE(first, std::string::npos);
  EXPECT_EQ(p.text.find("</documentation>", first + 1), std::string::npos);
}

TEST(Clients, DocumentKeyIsSha256) {
  EXPECT_EQ(document_key("abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Clients, ReplayRecordAndServe) {
  auto dir = std::filesystem::temp_directory_path() / "semtwin_replay_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  ReplayClient client(dir);
  EXPECT_THROW(client.extract("p", "doc"), IngestError);
  client.record("doc", "{\"x\": 1}");
  EXPECT_EQ(client.extract("p", "doc"), "{\"x\": 1}");
  EXPECT_EQ(client.extract("other prompt", "doc"), "{\"x\": 1}");
  std::filesystem::remove_all(dir);
}

TEST(Clients, HttpChatCompletion) {
  httplib::Server server;
  std::string seen_prompt, seen_auth;
  server.Post("/v1/chat/completions",
              [&](const httplib::Request& req, httplib::Response& res) {
                auto j = nlohmann::json::parse(req.body);
                seen_prompt = j["messages"][0]["content"];
                seen_auth = req.get_header_value("Authorization");
                nlohmann::json reply = {
                    {"choices",
                     {{{"message",
                        {{"role", "assistant"}, {"content", "{\"ok\": true}"}}}}}}};
                res.set_content(reply.dump(), "application/json");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  HttpClient client({"http://127.0.0.1:" + std::to_string(port),
                     "/v1/chat/completions", "test-model", "secret", 5});
  std::string out = client.extract("the prompt", "doc");
  server.stop();
  thread.join();
  EXPECT_EQ(out, "{\"ok\": true}");
  EXPECT_EQ(seen_prompt, "the prompt");
  EXPECT_EQ(seen_auth, "Bearer secret");
}

TEST(Clients, HttpErrorStatus) {
  httplib::Server server;
  server.Post("/v1/chat/completions",
              [](const httplib::Request&, httplib::Response& res) {
                res.status = 500;
                res.set_content("boom", "text/plain");
              });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  HttpClient client({"http://127.0.0.1:" + std::to_string(port),
                     "/v1/chat/completions", "m", "", 5});
  EXPECT_THROW(client.extract("p", "d"), IngestError);
  server.stop();
  thread.join();
}

// Invariants.

TEST(IngestProperty, UnitRoundTrip) {
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> mag(-1e6, 1e6);
  const char* units[] = {"m", "meters", "feet", "km", "nm",
                         "knots", "mph", "m/s"};
  for (int i = 0; i < 2000; ++i) {
    double v = mag(rng);
    const char* u = units[i % 8];
    double back = convert_to(normalize_quantity(v, u), u);
    EXPECT_LE(std::abs(back - v), 1e-9 * std::abs(v));
  }
}

TEST(IngestProperty, JsonRoundTripAndDeterminism) {
  ExtractionDocument doc = appendix();
  std::string once = to_json(doc);
  EXPECT_EQ(to_json(parse_extraction(once).document), once);
  CompiledRules a = compile_rules(doc, gazetteer());
  CompiledRules b = compile_rules(parse_extraction(once).document, gazetteer());
  EXPECT_EQ(serialize_rules(a.rules), serialize_rules(b.rules));
  EXPECT_EQ(serialize(a.annotations), serialize(b.annotations));
}

TEST(IngestProperty, SplitIsAPartition) {
  std::mt19937 rng(37);
  for (int round = 0; round < 50; ++round) {
    ExtractionDocument doc = synthetic_doc();
    std::uniform_int_distribution<int> pick(0, 3);
    for (auto& c : doc.constraints) {
      if (pick(rng) == 0) {
        c.value.reset();
        c.unit.reset();
      }
      if (pick(rng) == 0) c.geographic_scope.clear();
    }
    Split s = split(doc);
    std::multiset<std::string> seen;
    for (const auto& c : s.constraints) seen.insert(c.id);
    for (const auto& a : s.attributes) {
      if (a.source_id.rfind("C-", 0) == 0) seen.insert(a.source_id);
    }
    ASSERT_EQ(seen.size(), doc.constraints.size());
    for (const auto& c : doc.constraints) EXPECT_EQ(seen.count(c.id), 1u);
  }
}

}  // namespace
}  // namespace semtwin::ingest
