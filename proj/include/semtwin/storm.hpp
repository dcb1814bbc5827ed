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

// Hurricane tracks, the parametric wind field and the turbine shutdown
// protocol that evolves the graph through a storm.

#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "semtwin/geo.hpp"
#include "semtwin/rules.hpp"
#include "semtwin/term_graph.hpp"

namespace semtwin::storm {

using TimePoint = std::chrono::sys_seconds;

inline constexpr double kKnotToMs = 0.514444;
inline constexpr double kMsToMph = 2.23694;

// "2012-10-29T21:00:00Z"
std::string format_time(TimePoint t);
// Accepts YYYY-MM-DDTHH:MM[:SS][Z]. Throws ConfigError.
TimePoint parse_time(std::string_view text);

struct TrackRecord {
  TimePoint time;
  char record_id = ' ';  // 'L' landfall, ' ' blank
  std::string status;    // HU, TS, EX, ...
  geo::GeoPoint position;
  int vmax_kt = 0;
  std::optional<int> min_pressure_mb;  // -999 in the file when missing
  std::vector<int> radii;              // wind radii columns, kept verbatim

  double vmax_ms() const { return vmax_kt * kKnotToMs; }
};

struct Track {
  std::string id;    // AL182012
  std::string name;  // SANDY
  std::vector<TrackRecord> records;
};

// HURDAT2 comma format. Throws ParseError on a record-count mismatch, an
// unparseable coordinate or non-increasing timestamps.
std::vector<Track> parse_hurdat2(std::string_view text);
// Fixed-width re-emission in the NOAA column layout.
std::string emit_hurdat2(const std::vector<Track>& tracks);
// Throws SimulationError when no track has `id`.
const Track& find_track(const std::vector<Track>& tracks, std::string_view id);

// Radial wind speed (m/s) at r km from the centre.
// Throws SimulationError unless r, rmax and B are positive.
double holland_speed(double vmax, double rmax_km, double b, double r_km);
// Power-law height adjustment.
double hub_adjust(double v_ref, double h_hub, double h_ref, double alpha);

struct StormState {
  TimePoint time;
  geo::GeoPoint position;
  double vmax_ms = 0.0;
};

// Linear in lat, lon and vmax between bracketing records.
// Throws SimulationError outside the track span.
StormState interpolate(const Track& track, TimePoint t);

struct SimConfig {
  double hub_height_m = 150.0;
  double ref_height_m = 10.0;
  double cutout_ms = 25.0;
  double holland_b = 1.5;
  double rmax_km = 50.0;
  double shear_alpha = 0.11;
  double proximity_km = 500.0;
  int timestep_min = 30;
  bool cyclonic_offset = false;  // rotate wind direction by +90 degrees
  bool hysteresis = false;       // recover only below cutout - 2 m/s

  // Throws ConfigError.
  void check() const;
};

enum class Status { Operational, Parked };

std::string_view status_name(Status s);
const Iri& status_iri(Status s);

struct TurbineState {
  Iri turbine;
  Status status = Status::Operational;
  double pitch_deg = 0.0;
  double yaw_deg = 0.0;
  double wind_hub_ms = 0.0;
  double wind_dir_deg = 0.0;
  double distance_km = 0.0;
};

struct StepResult {
  Graph base;      // input facts with this step's turbine state
  Graph reasoned;  // fixpoint of `base` under the rules
  std::vector<TurbineState> states;  // sorted by turbine IRI
};

// The storm is represented in the graph by this individual (type Event) with
// its centre as hasGeometry and its intensity as hasWindSpeed.
const Iri& storm_iri();

// Injects the storm state into `base_prev` and re-reasons. Derived facts of
// the previous step are not carried over. Throws SimulationError for a
// turbine without a point geometry.
StepResult step(const Graph& base_prev, const StormState& storm,
                const SimConfig& config, const RuleSet& rules);

struct Snapshot {
  StormState storm;
  std::vector<TurbineState> states;
  // Storm centre to the mean turbine position; 0 without turbines.
  double site_distance_km = 0.0;
};

struct Timeline {
  // Turbine statuses found in graph0 (missing ones read as Operational).
  std::map<Iri, Status> initial;
  std::vector<Snapshot> snapshots;
  Graph final_base;
  Graph final_reasoned;
  std::string csv;
  // N-Triples: additions as triples, removals as "# - " comment lines, one
  // "# step" header per timestep.
  std::string triples_log;
};

inline constexpr std::string_view kCsvHeader =
    "time_utc,storm_lat,storm_lon,storm_vmax_ms,turbine_id,distance_km,"
    "wind_hub_ms,wind_dir_deg,status,pitch_deg,yaw_deg";

Timeline run_simulation(const Graph& graph0, const Track& track,
                        const SimConfig& config, const RuleSet& rules,
                        TimePoint t_start, TimePoint t_end);

struct Transitions {
  std::size_t shutdowns = 0;   // Operational -> Parked
  std::size_t recoveries = 0;  // Parked -> Operational
};

struct PhaseSummary {
  std::optional<TimePoint> first_shutdown;
  std::optional<TimePoint> last_recovery;
  double min_distance_km = 0.0;
  TimePoint min_distance_time;
  double max_hub_wind_ms = 0.0;
  TimePoint max_hub_wind_time;
  std::map<Iri, Transitions> per_turbine;
};

PhaseSummary summarize(const Timeline& timeline);
std::string format_summary(const PhaseSummary& s);

}  // namespace semtwin::storm
