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

#include "semtwin/storm.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "semtwin/error.hpp"

namespace semtwin::storm {
namespace {

const std::string kData = SEMTWIN_DATA_DIR;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Track& sandy() {
  static const std::vector<Track> tracks =
      parse_hurdat2(read_file(kData + "/hurdat2/al182012_sandy.txt"));
  return find_track(tracks, "AL182012");
}

Graph turbines(const std::vector<geo::GeoPoint>& points) {
  Graph g;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Iri t = vocab::term("Turbine" + std::to_string(i + 1));
    g.insert({t, vocab::type, vocab::Turbine});
    g.insert({t, vocab::hasGeometry, Literal::of_wkt(geo::Point{points[i]})});
  }
  return g;
}

// Small cluster around the lease centroid.
Graph site() {
  return turbines({{-74.80, 38.32}, {-74.75, 38.32}, {-74.80, 38.37},
                   {-74.75, 38.37}});
}

TEST(Hurdat2, FixtureHas45Records) {
  const Track& t = sandy();
  EXPECT_EQ(t.name, "SANDY");
  ASSERT_EQ(t.records.size(), 45u);
  EXPECT_EQ(format_time(t.records.front().time), "2012-10-21T18:00:00Z");
  for (const TrackRecord& r : t.records) EXPECT_EQ(r.radii.size(), 12u);
}

TEST(Hurdat2, HemisphereSigns) {
  auto tracks = parse_hurdat2(
      "AL012000, TEST, 2,\n"
      "20001001, 1200,  , HU, 38.8N,  70.5W,  85,  950,\n"
      "20001001, 1800, L, HU,  5.0S,  10.0E,  90, -999,\n");
  const auto& r = tracks[0].records;
  EXPECT_DOUBLE_EQ(r[0].position.lon, -70.5);
  EXPECT_DOUBLE_EQ(r[0].position.lat, 38.8);
  EXPECT_EQ(r[0].min_pressure_mb, 950);
  EXPECT_DOUBLE_EQ(r[1].position.lat, -5.0);
  EXPECT_DOUBLE_EQ(r[1].position.lon, 10.0);
  EXPECT_EQ(r[1].record_id, 'L');
  EXPECT_FALSE(r[1].min_pressure_mb.has_value());
}

TEST(Hurdat2, EmitIsByteIdentical) {
  std::string text = read_file(kData + "/hurdat2/al182012_sandy.txt");
  EXPECT_EQ(emit_hurdat2(parse_hurdat2(text)), text);
}

TEST(Hurdat2, Errors) {
  EXPECT_THROW(parse_hurdat2("AL012000, TEST, 3,\n"
                             "20001001, 1200,  , HU, 38.8N,  70.5W,  85,  950,\n"
                             "20001001, 1800,  , HU, 38.9N,  70.5W,  85,  950,\n"),
               ParseError);
  EXPECT_THROW(parse_hurdat2("AL012000, TEST, 1,\n"
                             "20001001, 1200,  , HU, 38.8X,  70.5W,  85,  950,\n"),
               ParseError);
  EXPECT_THROW(parse_hurdat2("AL012000, TEST, 2,\n"
                             "20001001, 1800,  , HU, 38.8N,  70.5W,  85,  950,\n"
                             "20001001, 1200,  , HU, 38.9N,  70.5W,  85,  950,\n"),
               ParseError);
  EXPECT_THROW(find_track(parse_hurdat2("AL012000, TEST, 0,\n"), "AL999999"),
               SimulationError);
}

TEST(Time, RoundTrip) {
  TimePoint t = parse_time("2012-10-29T21:30Z");
  EXPECT_EQ(format_time(t), "2012-10-29T21:30:00Z");
  EXPECT_EQ(parse_time(format_time(t)), t);
  EXPECT_THROW(parse_time("2012-13-01T00:00Z"), ConfigError);
  EXPECT_THROW(parse_time("yesterday"), ConfigError);
}

TEST(Holland, ReferenceValue) {
  EXPECT_NEAR(holland_speed(40, 50, 1.5, 100), 32.859548532602267, 1e-12);
  EXPECT_LT(holland_speed(40, 50, 1.5, 500), 20.0);
  EXPECT_THROW(holland_speed(40, 50, 1.5, 0), SimulationError);
  EXPECT_THROW(holland_speed(40, 0, 1.5, 10), SimulationError);
}

TEST(Holland, PeakAtRmaxAndDecaysBeyond) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> vm(10, 80), rm(10, 100), bd(1, 2.5);
  for (int i = 0; i < 1000; ++i) {
    double v = vm(rng), r = rm(rng), b = bd(rng);
    EXPECT_LT(std::fabs(holland_speed(v, r, b, r) - v) / v, 1e-12);
    double prev = holland_speed(v, r, b, r);
    for (int k = 1; k <= 50; ++k) {
      double rr = r * std::pow(100.0, k / 50.0);
      double cur = holland_speed(v, r, b, rr);
      ASSERT_LT(cur, prev);
      prev = cur;
    }
  }
}

TEST(HubAdjust, ReferenceAndIdentities) {
  EXPECT_NEAR(hub_adjust(30, 150, 10, 0.14), 43.830258395518960, 1e-12);
  EXPECT_DOUBLE_EQ(hub_adjust(12.5, 80, 80, 0.2), 12.5);
  EXPECT_DOUBLE_EQ(hub_adjust(12.5, 150, 10, 0.0), 12.5);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> h(1, 300), a(0.01, 0.99);
  for (int i = 0; i < 200; ++i) {
    double h1 = h(rng), h2 = h(rng), h3 = h(rng), al = a(rng);
    double lhs = hub_adjust(7.0, h2, h1, al) * hub_adjust(1.0, h3, h2, al);
    EXPECT_NEAR(lhs, hub_adjust(7.0, h3, h1, al), 1e-12 * lhs);
  }
}

TEST(Interpolate, RecordsMidpointsQuarters) {
  const Track& t = sandy();
  const TrackRecord& a = t.records[0];  // 21/1800 14.3N 77.4W 25 kt
  const TrackRecord& b = t.records[1];  // 22/0000 13.9N 77.8W 25 kt
  StormState s = interpolate(t, a.time);
  EXPECT_EQ(s.position, a.position);
  EXPECT_DOUBLE_EQ(s.vmax_ms, 25 * kKnotToMs);

  s = interpolate(t, a.time + std::chrono::hours(3));
  EXPECT_NEAR(s.position.lat, 14.1, 1e-12);
  EXPECT_NEAR(s.position.lon, -77.6, 1e-12);

  s = interpolate(t, a.time + std::chrono::minutes(90));
  EXPECT_NEAR(s.position.lat, 14.2, 1e-12);
  EXPECT_NEAR(s.position.lon, -77.5, 1e-12);

  // 28/1800 70 kt -> 29/0000 75 kt, quarter point 71.25 kt.
  TimePoint q = parse_time("2012-10-28T19:30Z");
  EXPECT_NEAR(interpolate(t, q).vmax_ms, 71.25 * kKnotToMs, 1e-12);

  EXPECT_THROW(interpolate(t, a.time - std::chrono::minutes(1)),
               SimulationError);
  EXPECT_THROW(interpolate(t, t.records.back().time + std::chrono::minutes(1)),
               SimulationError);
}

TEST(SimConfig, Checks) {
  SimConfig c;
  EXPECT_NO_THROW(c.check());
  c.shear_alpha = 1.0;
  EXPECT_THROW(c.check(), ConfigError);
  c = SimConfig{};
  c.rmax_km = 0;
  EXPECT_THROW(c.check(), ConfigError);
}

TEST(Step, ParksNearStrongStormAndKeepsOneStateTriple) {
  Graph g = turbines({{-74.7, 38.3}, {-60.0, 38.3}});
  // Storm 60 km due south-west of the first turbine, far from the second.
  StormState storm{parse_time("2012-10-29T21:00Z"), {-75.2, 37.9}, 40.0};
  SimConfig cfg;
  StepResult r = step(g, storm, cfg, RuleSet{});
  ASSERT_EQ(r.states.size(), 2u);
  const TurbineState& near = r.states[0];
  const TurbineState& far = r.states[1];
  EXPECT_EQ(near.status, Status::Parked);
  EXPECT_EQ(near.pitch_deg, 90.0);
  EXPECT_DOUBLE_EQ(near.yaw_deg, geo::bearing_deg(storm.position, {-74.7, 38.3}));
  EXPECT_EQ(far.status, Status::Operational);
  EXPECT_EQ(far.pitch_deg, 0.0);

  for (int i = 0; i < 3; ++i) r = step(r.base, storm, cfg, RuleSet{});
  for (const TurbineState& st : r.states) {
    EXPECT_EQ(r.base.objects(st.turbine, vocab::hasTurbineStatus).size(), 1u);
    EXPECT_EQ(r.base.objects(st.turbine, vocab::hasPitchAngle).size(), 1u);
    EXPECT_EQ(r.base.objects(st.turbine, vocab::hasYawAngle).size(), 1u);
    EXPECT_EQ(r.base.objects(st.turbine, vocab::hasWindSpeed).size(), 1u);
  }
  EXPECT_TRUE(r.base.contains(
      {vocab::term("Turbine1"), vocab::hasTurbineStatus, vocab::Parked}));
}

TEST(Step, WindMatchesIndependentFormula) {
  Graph g = turbines({{-74.7, 38.3}});
  StormState storm{parse_time("2012-10-29T21:00Z"), {-74.7, 37.4}, 35.0};
  StepResult r = step(g, storm, SimConfig{}, RuleSet{});
  // Due south: distance R*dlat, direction north.
  double d = geo::kEarthRadiusKm * 0.9 * M_PI / 180.0;
  double x = std::pow(50.0 / d, 1.5);
  double surface = std::sqrt(35.0 * 35.0 * x * std::exp(1 - x));
  EXPECT_NEAR(r.states[0].distance_km, d, 1e-9);
  EXPECT_NEAR(r.states[0].wind_hub_ms, surface * std::pow(15.0, 0.11), 1e-9);
  EXPECT_NEAR(r.states[0].wind_dir_deg, 0.0, 1e-9);
}

TEST(Step, CyclonicOffsetRotatesDirection) {
  Graph g = turbines({{-74.7, 38.3}});
  StormState storm{parse_time("2012-10-29T21:00Z"), {-74.7, 37.4}, 35.0};
  SimConfig cfg;
  cfg.cyclonic_offset = true;
  EXPECT_NEAR(step(g, storm, cfg, RuleSet{}).states[0].wind_dir_deg, 90.0,
              1e-9);
}

TEST(Step, HysteresisHoldsParkedNearCutout) {
  Graph g = turbines({{-74.7, 38.3}});
  SimConfig cfg;
  cfg.hysteresis = true;
  StormState strong{parse_time("2012-10-29T21:00Z"), {-74.7, 37.4}, 40.0};
  StepResult r = step(g, strong, cfg, RuleSet{});
  ASSERT_EQ(r.states[0].status, Status::Parked);
  // Pick an intensity giving a hub wind of cutout - 1.
  double ratio = r.states[0].wind_hub_ms / 40.0;
  StormState weaker = strong;
  weaker.vmax_ms = (cfg.cutout_ms - 1.0) / ratio;
  EXPECT_EQ(step(r.base, weaker, cfg, RuleSet{}).states[0].status,
            Status::Parked);
  cfg.hysteresis = false;
  EXPECT_EQ(step(r.base, weaker, cfg, RuleSet{}).states[0].status,
            Status::Operational);
  weaker.vmax_ms = (cfg.cutout_ms - 3.0) / ratio;
  cfg.hysteresis = true;
  EXPECT_EQ(step(r.base, weaker, cfg, RuleSet{}).states[0].status,
            Status::Operational);
}

TEST(Step, MissingGeometryNamesTurbine) {
  Graph g;
  g.insert({vocab::term("Turbine9"), vocab::type, vocab::Turbine});
  StormState storm{parse_time("2012-10-29T21:00Z"), {-74.7, 37.4}, 35.0};
  try {
    step(g, storm, SimConfig{}, RuleSet{});
    FAIL();
  } catch (const SimulationError& e) {
    EXPECT_NE(std::string(e.what()).find("Turbine9"), std::string::npos);
  }
}

TEST(Step, RulesSeeInjectedState) {
  RuleSet rules = parse_rules(
      "[parked: (?t :hasTurbineStatus :Parked) -> (?t :hasConflict true)]");
  Graph g = turbines({{-74.7, 38.3}});
  StormState storm{parse_time("2012-10-29T21:00Z"), {-74.7, 37.9}, 40.0};
  StepResult r = step(g, storm, SimConfig{}, rules);
  EXPECT_TRUE(r.reasoned.contains(
      {vocab::term("Turbine1"), vocab::hasConflict, Literal::of_bool(true)}));
  EXPECT_FALSE(r.base.contains(
      {vocab::term("Turbine1"), vocab::hasConflict, Literal::of_bool(true)}));
}

TEST(Simulation, ZeroLengthSpanAndEmptyGraph) {
  TimePoint t = parse_time("2012-10-27T00:00Z");
  Timeline tl = run_simulation(site(), sandy(), SimConfig{}, RuleSet{}, t, t);
  EXPECT_EQ(tl.snapshots.size(), 1u);
  Timeline empty =
      run_simulation(Graph{}, sandy(), SimConfig{}, RuleSet{}, t, t);
  EXPECT_EQ(empty.csv, std::string(kCsvHeader) + "\n");
  EXPECT_THROW(run_simulation(site(), sandy(), SimConfig{}, RuleSet{}, t,
                              t - std::chrono::hours(1)),
               SimulationError);
}

TEST(Simulation, SandyPhases) {
  TimePoint start = parse_time("2012-10-27T00:00Z");
  TimePoint end = parse_time("2012-10-31T00:00Z");
  SimConfig cfg;
  Timeline tl = run_simulation(site(), sandy(), cfg, RuleSet{}, start, end);
  ASSERT_EQ(tl.snapshots.size(), 4u * 48 + 1);

  const Snapshot& p1 = tl.snapshots.front();
  EXPECT_NEAR(p1.storm.vmax_ms * kMsToMph, 69.0, 1.5);
  EXPECT_NEAR(p1.site_distance_km, 1219.0, 80.0);
  for (const TurbineState& st : p1.states) {
    EXPECT_EQ(st.status, Status::Operational);
  }
  for (const TurbineState& st : tl.snapshots.back().states) {
    EXPECT_EQ(st.status, Status::Operational);
  }

  PhaseSummary s = summarize(tl);
  ASSERT_EQ(s.per_turbine.size(), 4u);
  for (const auto& [iri, tr] : s.per_turbine) {
    EXPECT_EQ(tr.shutdowns, 1u) << iri.value;
    EXPECT_EQ(tr.recoveries, 1u) << iri.value;
  }
  ASSERT_TRUE(s.first_shutdown && s.last_recovery);
  EXPECT_LT(*s.first_shutdown, s.min_distance_time);
  EXPECT_GT(*s.last_recovery, s.min_distance_time);

  // Brute-force recomputation of every turbine state at every step.
  for (const Snapshot& snap : tl.snapshots) {
    for (const TurbineState& st : snap.states) {
      geo::GeoPoint p = std::get<geo::Point>(
          std::get<Literal>(site().objects(st.turbine, vocab::hasGeometry)[0])
              .as_geometry()).position;
      double d = geo::haversine_km(snap.storm.position, p);
      double x = std::pow(cfg.rmax_km / d, cfg.holland_b);
      double hub = std::sqrt(snap.storm.vmax_ms * snap.storm.vmax_ms * x *
                             std::exp(1 - x)) *
                   std::pow(cfg.hub_height_m / cfg.ref_height_m,
                            cfg.shear_alpha);
      bool parked = d <= cfg.proximity_km && hub > cfg.cutout_ms;
      ASSERT_EQ(st.status == Status::Parked, parked);
      ASSERT_EQ(st.pitch_deg, parked ? 90.0 : 0.0);
    }
  }

  std::string parked_line = "<https://semtwin.dev/ns#Turbine1> "
                            "<https://semtwin.dev/ns#hasTurbineStatus> "
                            "<https://semtwin.dev/ns#Parked> .";
  EXPECT_NE(tl.triples_log.find(parked_line), std::string::npos);
  EXPECT_NE(tl.triples_log.find("# - " + parked_line), std::string::npos);
  EXPECT_EQ(tl.final_base.objects(vocab::term("Turbine1"),
                                  vocab::hasTurbineStatus),
            std::vector<Term>{vocab::Operational});

  std::size_t rows = std::count(tl.csv.begin(), tl.csv.end(), '\n');
  EXPECT_EQ(rows, 1 + tl.snapshots.size() * 4);
  EXPECT_EQ(tl.csv.substr(0, kCsvHeader.size()), kCsvHeader);
  EXPECT_NE(format_summary(s).find("shutdown transitions: 4"),
            std::string::npos);
}

}  // namespace
}  // namespace semtwin::storm
