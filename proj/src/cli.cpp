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

#include "semtwin/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "semtwin/error.hpp"
#include "semtwin/ingest.hpp"
#include "semtwin/metrics.hpp"
#include "semtwin/rules.hpp"

namespace semtwin::cli {

namespace fs = std::filesystem;

namespace {

// Section headers only group keys; every key is a global option.
class FlatIni : public CLI::ConfigINI {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    std::vector<CLI::ConfigItem> out;
    for (CLI::ConfigItem& item : CLI::ConfigINI::from_config(in)) {
      if (item.name == "++" || item.name == "--") continue;
      item.parents.clear();
      out.push_back(std::move(item));
    }
    return out;
  }
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + p.string());
}

// Files in `p` with extension `ext`, sorted; `p` itself if it is a file.
std::vector<fs::path> inputs(const fs::path& p, const std::string& ext) {
  if (fs::is_regular_file(p)) return {p};
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(p)) {
    if (e.is_regular_file() && e.path().extension() == ext) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  if (out.empty()) throw ConfigError("no " + ext + " files in " + p.string());
  return out;
}

Ontology load_ontology(const ScenarioConfig& c) {
  Ontology o = Ontology::core();
  if (!c.paths.ontology.empty()) {
    o = Ontology::extend(o, parse_graph(read_file(c.paths.ontology)));
  }
  o.check();
  return o;
}

ingest::Gazetteer load_gazetteer(const ScenarioConfig& c) {
  if (c.paths.gazetteer.empty()) return {};
  return ingest::Gazetteer::load(c.paths.gazetteer);
}

geo::Polygon load_boundary(const ScenarioConfig& c) {
  if (c.paths.boundary.empty()) throw ConfigError("a boundary file is required");
  geo::Geometry g = geo::parse_wkt(read_file(c.paths.boundary));
  auto* poly = std::get_if<geo::Polygon>(&g);
  if (!poly) throw ConfigError("boundary must be a POLYGON");
  return *poly;
}

fs::path out_path(const ScenarioConfig& c, const std::string& name) {
  return fs::path(c.out_dir) / name;
}

std::string graph_path(const ScenarioConfig& c) {
  return c.paths.graph.empty() ? out_path(c, "graph.nt").string()
                               : c.paths.graph;
}

std::string rules_path(const ScenarioConfig& c) {
  return c.paths.rules.empty() ? out_path(c, "rules.rules").string()
                               : c.paths.rules;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

int cmd_ingest(const ScenarioConfig& c, std::ostream& out, std::ostream& err) {
  std::vector<std::pair<std::string, ingest::ParsedExtraction>> docs;
  if (!c.paths.extraction.empty()) {
    for (const fs::path& p : inputs(c.paths.extraction, ".json")) {
      docs.emplace_back(p.filename().string(),
                        ingest::parse_extraction(read_file(p)));
    }
  } else if (!c.paths.documents.empty()) {
    if (c.paths.replay.empty()) {
      throw ConfigError("documents need a replay store");
    }
    ingest::ReplayClient client(c.paths.replay);
    for (const fs::path& p : inputs(c.paths.documents, ".txt")) {
      std::string text = read_file(p);
      ingest::Prompt prompt = ingest::build_prompt(text);
      ingest::ParsedExtraction parsed =
          ingest::parse_extraction(client.extract(prompt.text, text));
      parsed.warnings.insert(parsed.warnings.begin(), prompt.warnings.begin(),
                             prompt.warnings.end());
      docs.emplace_back(p.filename().string(), std::move(parsed));
    }
  } else {
    throw ConfigError("ingest needs --extraction or --documents");
  }

  Ontology onto = load_ontology(c);
  ingest::Gazetteer gaz = load_gazetteer(c);
  Graph graph;
  RuleSet rules;
  std::string warnings;
  std::string extractions;
  for (auto& [name, parsed] : docs) {
    graph.merge(ingest::instantiate(parsed.document, onto, gaz));
    ingest::CompiledRules compiled = ingest::compile_rules(parsed.document, gaz);
    graph.merge(compiled.annotations);
    for (const Rule& r : compiled.rules.rules()) rules.add(r);
    for (const auto* list : {&parsed.warnings, &compiled.warnings}) {
      for (const std::string& w : *list) warnings += name + ": " + w + "\n";
    }
    extractions += ingest::to_json(parsed.document) + "\n";
  }
  write_file(out_path(c, "graph.nt"), serialize(graph));
  write_file(out_path(c, "rules.rules"), serialize_rules(rules));
  write_file(out_path(c, "warnings.txt"), warnings);
  write_file(out_path(c, "extractions.jsonl"), extractions);
  err << warnings;
  out << docs.size() << " documents, " << graph.size() << " triples, "
      << rules.size() << " rules, "
      << std::count(warnings.begin(), warnings.end(), '\n') << " warnings\n";
  return kOk;
}

int cmd_reason(const ScenarioConfig& c, std::ostream& out, std::ostream&) {
  if (c.paths.layout.empty()) throw ConfigError("reason needs --layout");
  std::string gp = graph_path(c), rp = rules_path(c);
  if (!fs::exists(gp)) throw ConfigError("graph file not found: " + gp);
  if (!fs::exists(rp)) throw ConfigError("rules file not found: " + rp);
  Graph g = parse_graph(read_file(gp));
  RuleSet rules = parse_rules(read_file(rp));
  layout::Layout lay = layout::parse_layout_csv(read_file(c.paths.layout));
  g.merge(layout::layout_to_graph(lay));
  Ontology onto = load_ontology(c);
  Inference inf = reason_traced(subsumption_closure(g, onto), rules);

  const Term yes = Literal::of_bool(true);
  std::string report;
  std::size_t conflicts = 0;
  for (const Iri& entity : inf.graph.instances_of(vocab::Infrastructure)) {
    Triple flag{entity, vocab::hasConflict, yes};
    if (!inf.graph.contains(flag)) continue;
    ++conflicts;
    report += "conflict: " + format_term(entity) + "\n";
    for (const Term& cst : inf.graph.objects(entity, vocab::violatesConstraint)) {
      report += "  violates " + format_term(cst) + "\n";
    }
    report += format_derivation(explain(inf, rules, flag));
  }
  report = std::to_string(conflicts) + " conflicts\n" + report;
  write_file(out_path(c, "conflicts.txt"), report);
  out << report;
  return conflicts == 0 ? kOk : kConflicts;
}

int cmd_optimize(const ScenarioConfig& c, std::ostream& out,
                 std::ostream& err) {
  layout::OptConfig opt = c.opt;
  opt.boundary = load_boundary(c);
  layout::Layout start =
      c.paths.layout.empty()
          ? layout::generate_grid_layout(c.rows, c.turbines, opt.boundary,
                                         opt.spacing_min_m, c.inset_m)
          : layout::parse_layout_csv(read_file(c.paths.layout));
  if (c.verbose) {
    err << "optimizing " << start.size() << " turbines for " << opt.iterations
        << " iterations\n";
  }
  layout::WindRose rose = layout::WindRose::uniform();
  layout::OptResult r =
      layout::optimize(start, rose, layout::TurbineSpec{}, opt);
  write_file(out_path(c, "layout_initial.csv"), layout::write_layout_csv(start));
  write_file(out_path(c, "layout.csv"), layout::write_layout_csv(r.layout));
  write_file(out_path(c, "trace.csv"), layout::write_trace_csv(r.trace));
  if (!c.paths.reference_layout.empty()) {
    layout::Layout ref =
        layout::parse_layout_csv(read_file(c.paths.reference_layout));
    std::vector<int> rows =
        r.layout.rows.empty() ? std::vector<int>(r.layout.size(), 0)
                              : r.layout.rows;
    write_file(out_path(c, "deviation.csv"),
               layout::write_deviation_csv(
                   layout::row_deviation_stats(r.layout, ref, rows)));
  }
  out << "turbines: " << r.layout.size() << "\n"
      << "aep initial: " << fixed(r.aep_initial_gwh, 3) << " GWh\n"
      << "aep final: " << fixed(r.aep_final_gwh, 3) << " GWh\n"
      << "best iteration: " << r.best_iteration << "\n"
      << "feasible: " << (r.feasible ? "yes" : "no") << "\n";
  return r.feasible ? kOk : kDomain;
}

int cmd_simulate(const ScenarioConfig& c, std::ostream& out,
                 std::ostream& err) {
  if (c.paths.hurdat2.empty()) throw ConfigError("simulate needs --hurdat2");
  c.sim.check();
  auto tracks = storm::parse_hurdat2(read_file(c.paths.hurdat2));
  const storm::Track& track = storm::find_track(tracks, c.storm_id);
  if (track.records.empty()) throw SimulationError("track has no records");

  Graph g;
  if (!c.paths.graph.empty()) g = parse_graph(read_file(c.paths.graph));
  if (!c.paths.layout.empty()) {
    g.merge(layout::layout_to_graph(
        layout::parse_layout_csv(read_file(c.paths.layout))));
  }
  g = subsumption_closure(g, load_ontology(c));
  RuleSet rules;
  if (!c.paths.rules.empty()) rules = parse_rules(read_file(c.paths.rules));

  storm::TimePoint t0 = c.start.empty() ? track.records.front().time
                                        : storm::parse_time(c.start);
  storm::TimePoint t1 = c.end.empty() ? track.records.back().time
                                      : storm::parse_time(c.end);
  if (c.verbose) {
    err << "simulating " << storm::format_time(t0) << " to "
        << storm::format_time(t1) << "\n";
  }
  storm::Timeline tl = storm::run_simulation(g, track, c.sim, rules, t0, t1);
  storm::PhaseSummary summary = storm::summarize(tl);

  write_file(out_path(c, "timeline.csv"), tl.csv);
  write_file(out_path(c, "triples_log.nt"), tl.triples_log);
  write_file(out_path(c, "final_graph.nt"), serialize(tl.final_reasoned));
  write_file(out_path(c, "summary.txt"), storm::format_summary(summary));

  std::string track_csv = "time_utc,lat,lon,vmax_ms,status\n";
  for (const storm::TrackRecord& r : track.records) {
    track_csv += storm::format_time(r.time) + "," + fixed(r.position.lat, 1) +
                 "," + fixed(r.position.lon, 1) + "," + fixed(r.vmax_ms(), 3) +
                 "," + r.status + "\n";
  }
  write_file(out_path(c, "storm_track.csv"), track_csv);

  // Turbine states at the start, at closest approach and at the end.
  std::string phases = "phase,time_utc,turbine_id,lon,lat,status\n";
  if (!tl.snapshots.empty()) {
    const storm::Snapshot* picks[3] = {&tl.snapshots.front(), nullptr,
                                       &tl.snapshots.back()};
    for (const storm::Snapshot& s : tl.snapshots) {
      if (s.storm.time == summary.min_distance_time) picks[1] = &s;
    }
    if (!picks[1]) picks[1] = picks[0];
    for (int p = 0; p < 3; ++p) {
      for (const storm::TurbineState& st : picks[p]->states) {
        geo::GeoPoint pos{};
        for (const Term& t : tl.final_base.objects(st.turbine, vocab::hasGeometry)) {
          geo::Geometry geom = std::get<Literal>(t).as_geometry();
          if (auto* pt = std::get_if<geo::Point>(&geom)) pos = pt->position;
        }
        std::string id = st.turbine.value.substr(st.turbine.value.find('#') + 1);
        phases += std::to_string(p + 1) + "," +
                  storm::format_time(picks[p]->storm.time) + "," + id + "," +
                  geo::format_coordinate(pos.lon) + "," +
                  geo::format_coordinate(pos.lat) + "," +
                  std::string(storm::status_name(st.status)) + "\n";
      }
    }
  }
  write_file(out_path(c, "phases.csv"), phases);
  out << storm::format_summary(summary);
  return kOk;
}

int cmd_eval(const ScenarioConfig& c, std::ostream& out, std::ostream&) {
  bool any = false;
  if (!c.paths.annotations.empty()) {
    any = true;
    metrics::AnnotationSet a =
        metrics::parse_annotations_csv(read_file(c.paths.annotations));
    double alpha = metrics::krippendorff_alpha(a);
    write_file(out_path(c, "agreement.csv"),
               "items,alpha\n" + std::to_string(a.items.size()) + "," +
                   fixed(alpha, 6) + "\n");
    out << "krippendorff alpha: " << fixed(alpha, 4) << " over "
        << a.items.size() << " items\n";
  }
  if (!c.paths.extracted.empty() || !c.paths.ground_truth.empty()) {
    if (c.paths.extracted.empty() || c.paths.ground_truth.empty()) {
      throw ConfigError("accuracy needs both --extracted and --ground_truth");
    }
    any = true;
    auto ex = ingest::parse_extraction(read_file(c.paths.extracted));
    auto gt = ingest::parse_extraction(read_file(c.paths.ground_truth));
    metrics::MatcherConfig mc;
    mc.threshold = c.match_threshold;
    metrics::AccuracyRow row{
        c.document_label, c.model_label,
        metrics::extraction_accuracy(ex.document.constraints,
                                     gt.document.constraints, mc)};
    std::string table = metrics::write_accuracy_csv({row});
    write_file(out_path(c, "accuracy.csv"), table);
    write_file(out_path(c, "matches.csv"), metrics::write_match_csv(row.report));
    out << "accuracy (automatic matcher): " << fixed(row.report.accuracy, 3)
        << ", extracted " << row.report.extracted_count << "\n";
  }
  if (!any) {
    throw ConfigError("eval needs --annotations or --extracted/--ground_truth");
  }
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  ScenarioConfig c;
  std::optional<std::uint64_t> seed;
  CLI::App app{"Semantic digital twin scenario runner", "semtwin"};
  app.config_formatter(std::make_shared<FlatIni>());
  app.set_config("--config", "", "Scenario file ([section] key = value)");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", seed, "Optimizer seed");
  app.add_flag("--verbose", c.verbose, "Progress on stderr");

  const char* p = "paths";
  auto path = [&](const char* name, std::string& field, const char* help) {
    app.add_option(std::string("--") + name, field, help)
        ->check(CLI::ExistingPath)
        ->group(p);
  };
  path("ontology", c.paths.ontology, "Extra ontology (N-Triples)");
  path("extraction", c.paths.extraction, "Extraction JSON file or directory");
  path("documents", c.paths.documents, "Document text file or directory");
  path("replay", c.paths.replay, "Replay store directory");
  path("gazetteer", c.paths.gazetteer, "Gazetteer TSV");
  path("boundary", c.paths.boundary, "Lease boundary WKT");
  path("hurdat2", c.paths.hurdat2, "HURDAT2 track file");
  path("layout", c.paths.layout, "Layout CSV");
  path("graph", c.paths.graph, "Graph (N-Triples)");
  path("rules", c.paths.rules, "Rule file");
  path("reference_layout", c.paths.reference_layout, "Reference layout CSV");
  path("annotations", c.paths.annotations, "Annotation CSV");
  path("extracted", c.paths.extracted, "Extraction JSON to score");
  path("ground_truth", c.paths.ground_truth, "Ground-truth extraction JSON");

  const char* s = "sim";
  app.add_option("--storm_id", c.storm_id)->group(s)->capture_default_str();
  app.add_option("--start", c.start, "ISO time")->group(s);
  app.add_option("--end", c.end, "ISO time")->group(s);
  app.add_option("--hub_height", c.sim.hub_height_m)->group(s)->capture_default_str();
  app.add_option("--ref_height", c.sim.ref_height_m)->group(s)->capture_default_str();
  app.add_option("--cutout", c.sim.cutout_ms)->group(s)->capture_default_str();
  app.add_option("--holland_b", c.sim.holland_b)->group(s)->capture_default_str();
  app.add_option("--rmax", c.sim.rmax_km)->group(s)->capture_default_str();
  app.add_option("--shear_alpha", c.sim.shear_alpha)->group(s)->capture_default_str();
  app.add_option("--proximity_km", c.sim.proximity_km)->group(s)->capture_default_str();
  app.add_option("--timestep", c.sim.timestep_min, "Minutes")->group(s)->capture_default_str();
  app.add_flag("--cyclonic_offset", c.sim.cyclonic_offset)->group(s);
  app.add_flag("--hysteresis", c.sim.hysteresis)->group(s);

  const char* o = "opt";
  app.add_option("--rows", c.rows)->group(o)->capture_default_str();
  app.add_option("--turbines", c.turbines)->group(o)->capture_default_str();
  app.add_option("--inset", c.inset_m)->group(o)->capture_default_str();
  app.add_option("--iterations", c.opt.iterations)->group(o)->capture_default_str();
  app.add_option("--spacing_min", c.opt.spacing_min_m)->group(o)->capture_default_str();
  app.add_option("--lr_start", c.opt.learning_rate_start_m)->group(o)->capture_default_str();
  app.add_option("--lr_end", c.opt.learning_rate_end_m)->group(o)->capture_default_str();
  app.add_option("--spacing_weight", c.opt.spacing_weight)->group(o)->capture_default_str();
  app.add_option("--boundary_weight", c.opt.boundary_weight)->group(o)->capture_default_str();
  app.add_option("--sectors_per_iteration", c.opt.sectors_per_iteration)->group(o)->capture_default_str();
  app.add_option("--fd_step", c.opt.fd_step_m)->group(o)->capture_default_str();
  app.add_option("--margin", c.opt.projection_margin_m)->group(o)->capture_default_str();

  const char* e = "eval";
  app.add_option("--threshold", c.match_threshold)->group(e)->capture_default_str();
  app.add_option("--document", c.document_label)->group(e);
  app.add_option("--model", c.model_label)->group(e);

  using Handler = int (*)(const ScenarioConfig&, std::ostream&, std::ostream&);
  std::vector<std::pair<CLI::App*, Handler>> commands = {
      {app.add_subcommand("ingest", "Extractions to graph and rules"), cmd_ingest},
      {app.add_subcommand("reason", "Check a layout against the rules"), cmd_reason},
      {app.add_subcommand("optimize", "Optimize a turbine layout"), cmd_optimize},
      {app.add_subcommand("simulate", "Replay a storm over the farm"), cmd_simulate},
      {app.add_subcommand("eval", "Agreement and accuracy metrics"), cmd_eval},
  };
  for (auto& [sub, handler] : commands) sub->fallthrough();
  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int code = app.exit(ex, out, err);
    return code == 0 ? kOk : kUsage;
  }
  if (seed) c.opt.seed = *seed;

  try {
    for (auto& [sub, handler] : commands) {
      if (sub->parsed()) return handler(c, out, err);
    }
  } catch (const ConfigError& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  } catch (const Error& ex) {
    err << "error: " << ex.what() << "\n";
    return kDomain;
  } catch (const fs::filesystem_error& ex) {
    err << "error: " << ex.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace semtwin::cli
