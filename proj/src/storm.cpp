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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "semtwin/error.hpp"

namespace semtwin::storm {

namespace {

using namespace std::chrono;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      std::string_view rest = trim(line.substr(start));
      if (!rest.empty()) out.push_back(rest);
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
    return c >= '0' && c <= '9';
  });
}

int parse_int(std::string_view s, std::size_t line, const char* what) {
  std::string buf(s);
  char* end = nullptr;
  long v = std::strtol(buf.c_str(), &end, 10);
  if (buf.empty() || *end != '\0') {
    throw ParseError(std::string("bad ") + what + " '" + buf + "'", line, 0);
  }
  return static_cast<int>(v);
}

TimePoint make_time(int y, unsigned mo, unsigned d, int h, int mi, int s,
                    std::size_t line) {
  year_month_day ymd{year{y}, month{mo}, day{d}};
  if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59 || s < 0 || s > 59) {
    if (line == 0) throw ConfigError("invalid date/time");
    throw ParseError("invalid date/time", line, 0);
  }
  return sys_days{ymd} + hours{h} + minutes{mi} + seconds{s};
}

// "38.8N" -> 38.8, "70.5W" -> -70.5
double parse_coord(std::string_view s, bool latitude, std::size_t line) {
  if (s.size() < 2) throw ParseError("bad coordinate '" + std::string(s) + "'", line, 0);
  char hemi = s.back();
  double sign;
  if (latitude && (hemi == 'N' || hemi == 'S')) {
    sign = hemi == 'N' ? 1.0 : -1.0;
  } else if (!latitude && (hemi == 'E' || hemi == 'W')) {
    sign = hemi == 'E' ? 1.0 : -1.0;
  } else {
    throw ParseError("bad coordinate '" + std::string(s) + "'", line, 0);
  }
  std::string num(s.substr(0, s.size() - 1));
  char* end = nullptr;
  double v = std::strtod(num.c_str(), &end);
  double limit = latitude ? 90.0 : 180.0;
  if (num.empty() || *end != '\0' || !std::isfinite(v) || v < 0 || v > limit) {
    throw ParseError("bad coordinate '" + std::string(s) + "'", line, 0);
  }
  return sign * v;
}

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string local_name(const Iri& iri) {
  auto pos = iri.value.find_last_of("#/");
  return pos == std::string::npos ? iri.value : iri.value.substr(pos + 1);
}

Status read_status(const Graph& g, const Iri& turbine) {
  for (const Term& t : g.objects(turbine, vocab::hasTurbineStatus)) {
    const Iri* iri = as_iri(t);
    if (iri && (*iri == vocab::Parked || *iri == vocab::Shutdown)) {
      return Status::Parked;
    }
  }
  return Status::Operational;
}

geo::GeoPoint turbine_position(const Graph& g, const Iri& turbine) {
  for (const Term& t : g.objects(turbine, vocab::hasGeometry)) {
    const Literal* lit = as_literal(t);
    if (!lit || lit->datatype != Datatype::WktLiteral) continue;
    geo::Geometry geom = lit->as_geometry();
    if (auto* p = std::get_if<geo::Point>(&geom)) return p->position;
  }
  throw SimulationError("turbine " + turbine.value +
                        " has no point geometry");
}

void append_delta(std::string& log, const Graph& before, const Graph& after) {
  auto a = before.begin();
  auto b = after.begin();
  std::string removed;
  while (a != before.end() || b != after.end()) {
    if (b == after.end() || (a != before.end() && *a < *b)) {
      removed += "# - ";
      removed += format_term(a->subject) + " " + format_term(a->predicate) +
                 " " + format_term(a->object) + " .\n";
      ++a;
    } else if (a == before.end() || *b < *a) {
      log += format_term(b->subject) + " " + format_term(b->predicate) + " " +
             format_term(b->object) + " .\n";
      ++b;
    } else {
      ++a;
      ++b;
    }
  }
  log += removed;
}

}  // namespace

std::string format_time(TimePoint t) {
  auto day_point = floor<days>(t);
  year_month_day ymd{day_point};
  hh_mm_ss<seconds> hms{t - day_point};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ",
                static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                static_cast<unsigned>(ymd.day()),
                static_cast<int>(hms.hours().count()),
                static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

TimePoint parse_time(std::string_view text) {
  std::string s(trim(text));
  if (!s.empty() && (s.back() == 'Z' || s.back() == 'z')) s.pop_back();
  int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0, n = 0;
  int fields = std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d%n", &y, &mo, &d, &h,
                           &mi, &n);
  if (fields != 5) throw ConfigError("bad timestamp '" + std::string(text) + "'");
  std::string rest = s.substr(static_cast<std::size_t>(n));
  if (!rest.empty()) {
    int m = 0;
    if (std::sscanf(rest.c_str(), ":%2d%n", &sec, &m) != 1 ||
        static_cast<std::size_t>(m) != rest.size()) {
      throw ConfigError("bad timestamp '" + std::string(text) + "'");
    }
  }
  if (mo < 1 || d < 1) throw ConfigError("bad timestamp '" + std::string(text) + "'");
  return make_time(y, static_cast<unsigned>(mo), static_cast<unsigned>(d), h,
                   mi, sec, 0);
}

std::vector<Track> parse_hurdat2(std::string_view text) {
  std::vector<Track> tracks;
  std::size_t expected = 0;
  std::size_t header_line = 0;
  auto finish = [&]() {
    if (tracks.empty()) return;
    if (tracks.back().records.size() != expected) {
      throw ParseError("track " + tracks.back().id + " declares " +
                           std::to_string(expected) + " records, found " +
                           std::to_string(tracks.back().records.size()),
                       header_line, 0);
    }
  };

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(
        pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (trim(line).empty()) continue;

    auto f = split_fields(line);
    if (!f.empty() && !all_digits(f[0])) {
      if (f.size() < 3) throw ParseError("bad header", line_no, 0);
      finish();
      Track t;
      t.id = std::string(f[0]);
      t.name = std::string(f[1]);
      int count = parse_int(f[2], line_no, "record count");
      if (count < 0) throw ParseError("negative record count", line_no, 0);
      expected = static_cast<std::size_t>(count);
      header_line = line_no;
      tracks.push_back(std::move(t));
      continue;
    }
    if (tracks.empty()) throw ParseError("record before header", line_no, 0);
    if (f.size() < 8 || f[0].size() != 8 || !all_digits(f[1]) ||
        f[1].size() != 4 || f[2].size() > 1) {
      throw ParseError("bad record", line_no, 0);
    }
    TrackRecord r;
    int date = parse_int(f[0], line_no, "date");
    int hhmm = parse_int(f[1], line_no, "time");
    r.time = make_time(date / 10000, static_cast<unsigned>(date / 100 % 100),
                       static_cast<unsigned>(date % 100), hhmm / 100,
                       hhmm % 100, 0, line_no);
    r.record_id = f[2].empty() ? ' ' : f[2][0];
    r.status = std::string(f[3]);
    r.position.lat = parse_coord(f[4], true, line_no);
    r.position.lon = parse_coord(f[5], false, line_no);
    r.vmax_kt = parse_int(f[6], line_no, "wind speed");
    if (r.vmax_kt < 0) throw ParseError("negative wind speed", line_no, 0);
    int pressure = parse_int(f[7], line_no, "pressure");
    if (pressure != -999) r.min_pressure_mb = pressure;
    for (std::size_t i = 8; i < f.size(); ++i) {
      r.radii.push_back(parse_int(f[i], line_no, "wind radius"));
    }
    auto& records = tracks.back().records;
    if (!records.empty() && r.time <= records.back().time) {
      throw ParseError("timestamps not increasing", line_no, 0);
    }
    records.push_back(std::move(r));
  }
  finish();
  return tracks;
}

std::string emit_hurdat2(const std::vector<Track>& tracks) {
  std::string out;
  char buf[128];
  for (const Track& t : tracks) {
    std::snprintf(buf, sizeof buf, "%s,%19s,%7zu,\n", t.id.c_str(),
                  t.name.c_str(), t.records.size());
    out += buf;
    for (const TrackRecord& r : t.records) {
      auto day_point = floor<days>(r.time);
      year_month_day ymd{day_point};
      hh_mm_ss<minutes> hm{floor<minutes>(r.time - day_point)};
      char lat[16], lon[16];
      std::snprintf(lat, sizeof lat, "%.1f%c", std::fabs(r.position.lat),
                    r.position.lat < 0 ? 'S' : 'N');
      std::snprintf(lon, sizeof lon, "%.1f%c", std::fabs(r.position.lon),
                    r.position.lon < 0 ? 'W' : 'E');
      std::snprintf(buf, sizeof buf,
                    "%04d%02u%02u, %02d%02d, %c, %2s, %5s, %6s, %3d, %4d,",
                    static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()),
                    static_cast<unsigned>(ymd.day()),
                    static_cast<int>(hm.hours().count()),
                    static_cast<int>(hm.minutes().count()), r.record_id,
                    r.status.c_str(), lat, lon, r.vmax_kt,
                    r.min_pressure_mb.value_or(-999));
      out += buf;
      for (int radius : r.radii) {
        std::snprintf(buf, sizeof buf, " %4d,", radius);
        out += buf;
      }
      out += '\n';
    }
  }
  return out;
}

const Track& find_track(const std::vector<Track>& tracks,
                        std::string_view id) {
  for (const Track& t : tracks) {
    if (t.id == id) return t;
  }
  throw SimulationError("no track with id " + std::string(id));
}

double holland_speed(double vmax, double rmax_km, double b, double r_km) {
  if (!(r_km > 0) || !(rmax_km > 0) || !(b > 0)) {
    throw SimulationError("holland_speed needs positive r, rmax and B");
  }
  if (r_km == rmax_km) return vmax;
  double x = std::pow(rmax_km / r_km, b);
  return std::sqrt(vmax * vmax * x * std::exp(1.0 - x));
}

double hub_adjust(double v_ref, double h_hub, double h_ref, double alpha) {
  return v_ref * std::pow(h_hub / h_ref, alpha);
}

StormState interpolate(const Track& track, TimePoint t) {
  const auto& recs = track.records;
  if (recs.empty() || t < recs.front().time || t > recs.back().time) {
    throw SimulationError(format_time(t) + " is outside the span of track " +
                          track.id);
  }
  auto it = std::lower_bound(
      recs.begin(), recs.end(), t,
      [](const TrackRecord& r, TimePoint v) { return r.time < v; });
  if (it->time == t) return {t, it->position, it->vmax_ms()};
  const TrackRecord& hi = *it;
  const TrackRecord& lo = *(it - 1);
  double w = duration<double>(t - lo.time).count() /
             duration<double>(hi.time - lo.time).count();
  auto lerp = [w](double a, double b) { return a + w * (b - a); };
  return {t,
          {lerp(lo.position.lon, hi.position.lon),
           lerp(lo.position.lat, hi.position.lat)},
          lerp(lo.vmax_ms(), hi.vmax_ms())};
}

void SimConfig::check() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be positive");
    }
  };
  positive(hub_height_m, "hub_height");
  positive(ref_height_m, "ref_height");
  positive(cutout_ms, "cutout");
  positive(holland_b, "holland_B");
  positive(rmax_km, "rmax");
  positive(proximity_km, "proximity_km");
  if (!(shear_alpha > 0 && shear_alpha < 1)) {
    throw ConfigError("shear_alpha must lie in (0, 1)");
  }
  if (timestep_min <= 0) throw ConfigError("timestep must be positive");
}

std::string_view status_name(Status s) {
  return s == Status::Parked ? "Parked" : "Operational";
}

const Iri& status_iri(Status s) {
  return s == Status::Parked ? vocab::Parked : vocab::Operational;
}

const Iri& storm_iri() {
  static const Iri iri = vocab::term("Storm");
  return iri;
}

StepResult step(const Graph& base_prev, const StormState& storm,
                const SimConfig& config, const RuleSet& rules) {
  StepResult out;
  out.base = base_prev;
  Graph& g = out.base;

  const Iri& s = storm_iri();
  g.erase_all(s, vocab::hasGeometry);
  g.erase_all(s, vocab::hasWindSpeed);
  g.insert({s, vocab::type, vocab::Event});
  g.insert({s, vocab::hasGeometry,
            Literal::of_wkt(geo::Point{storm.position})});
  g.insert({s, vocab::hasWindSpeed, Literal::of_double(storm.vmax_ms)});

  for (const Iri& turbine : base_prev.instances_of(vocab::Turbine)) {
    geo::GeoPoint pos = turbine_position(base_prev, turbine);
    TurbineState st;
    st.turbine = turbine;
    st.distance_km = geo::haversine_km(storm.position, pos);
    double surface = 0.0;
    if (st.distance_km > 1e-9) {
      st.wind_dir_deg = geo::bearing_deg(storm.position, pos);
      if (config.cyclonic_offset) {
        st.wind_dir_deg = std::fmod(st.wind_dir_deg + 90.0, 360.0);
      }
      surface = holland_speed(storm.vmax_ms, config.rmax_km, config.holland_b,
                              st.distance_km);
    }
    st.wind_hub_ms = hub_adjust(surface, config.hub_height_m,
                                config.ref_height_m, config.shear_alpha);

    bool near = st.distance_km <= config.proximity_km;
    bool park = near && st.wind_hub_ms > config.cutout_ms;
    if (!park && config.hysteresis &&
        read_status(base_prev, turbine) == Status::Parked) {
      park = near && st.wind_hub_ms >= config.cutout_ms - 2.0;
    }
    st.status = park ? Status::Parked : Status::Operational;
    st.pitch_deg = park ? 90.0 : 0.0;
    st.yaw_deg = st.wind_dir_deg;

    g.erase_all(turbine, vocab::hasTurbineStatus);
    g.erase_all(turbine, vocab::hasPitchAngle);
    g.erase_all(turbine, vocab::hasYawAngle);
    g.erase_all(turbine, vocab::hasWindSpeed);
    g.insert({turbine, vocab::hasTurbineStatus, status_iri(st.status)});
    g.insert({turbine, vocab::hasPitchAngle, Literal::of_double(st.pitch_deg)});
    g.insert({turbine, vocab::hasYawAngle, Literal::of_double(st.yaw_deg)});
    g.insert({turbine, vocab::hasWindSpeed, Literal::of_double(st.wind_hub_ms)});
    out.states.push_back(std::move(st));
  }
  std::sort(out.states.begin(), out.states.end(),
            [](const TurbineState& a, const TurbineState& b) {
              return a.turbine < b.turbine;
            });
  out.reasoned = reason(out.base, rules);
  return out;
}

Timeline run_simulation(const Graph& graph0, const Track& track,
                        const SimConfig& config, const RuleSet& rules,
                        TimePoint t_start, TimePoint t_end) {
  config.check();
  if (t_end < t_start) throw SimulationError("simulation end precedes start");
  Timeline tl;
  for (const Iri& turbine : graph0.instances_of(vocab::Turbine)) {
    tl.initial[turbine] = read_status(graph0, turbine);
  }

  std::string csv(kCsvHeader);
  csv += '\n';
  Graph base = graph0;
  Graph prev_reasoned = graph0;
  const minutes dt{config.timestep_min};
  for (TimePoint t = t_start; t <= t_end; t += dt) {
    StormState storm = interpolate(track, t);
    StepResult r = step(base, storm, config, rules);

    Snapshot snap;
    snap.storm = storm;
    if (!r.states.empty()) {
      double lon = 0, lat = 0;
      for (const TurbineState& st : r.states) {
        geo::GeoPoint p = turbine_position(r.base, st.turbine);
        lon += p.lon;
        lat += p.lat;
      }
      double n = static_cast<double>(r.states.size());
      snap.site_distance_km =
          geo::haversine_km(storm.position, {lon / n, lat / n});
    }

    std::string stamp = format_time(t);
    std::string storm_cols = stamp + "," + fixed(storm.position.lat, 4) + "," +
                             fixed(storm.position.lon, 4) + "," +
                             fixed(storm.vmax_ms, 3) + ",";
    for (const TurbineState& st : r.states) {
      csv += storm_cols + local_name(st.turbine) + "," +
             fixed(st.distance_km, 3) + "," + fixed(st.wind_hub_ms, 3) + "," +
             fixed(st.wind_dir_deg, 2) + "," +
             std::string(status_name(st.status)) + "," +
             fixed(st.pitch_deg, 1) + "," + fixed(st.yaw_deg, 2) + "\n";
    }

    tl.triples_log += "# step " + stamp + "\n";
    append_delta(tl.triples_log, prev_reasoned, r.reasoned);

    snap.states = std::move(r.states);
    tl.snapshots.push_back(std::move(snap));
    base = std::move(r.base);
    prev_reasoned = std::move(r.reasoned);
  }
  tl.final_base = std::move(base);
  tl.final_reasoned = std::move(prev_reasoned);
  tl.csv = std::move(csv);
  return tl;
}

PhaseSummary summarize(const Timeline& timeline) {
  PhaseSummary s;
  std::map<Iri, Status> last = timeline.initial;
  bool first = true;
  for (const Snapshot& snap : timeline.snapshots) {
    if (!snap.states.empty() &&
        (first || snap.site_distance_km < s.min_distance_km)) {
      s.min_distance_km = snap.site_distance_km;
      s.min_distance_time = snap.storm.time;
      first = false;
    }
    for (const TurbineState& st : snap.states) {
      if (st.wind_hub_ms > s.max_hub_wind_ms) {
        s.max_hub_wind_ms = st.wind_hub_ms;
        s.max_hub_wind_time = snap.storm.time;
      }
      auto it = last.find(st.turbine);
      Status before = it == last.end() ? Status::Operational : it->second;
      Transitions& tr = s.per_turbine[st.turbine];
      if (before == Status::Operational && st.status == Status::Parked) {
        ++tr.shutdowns;
        if (!s.first_shutdown) s.first_shutdown = snap.storm.time;
      } else if (before == Status::Parked &&
                 st.status == Status::Operational) {
        ++tr.recoveries;
        s.last_recovery = snap.storm.time;
      }
      last[st.turbine] = st.status;
    }
  }
  return s;
}

std::string format_summary(const PhaseSummary& s) {
  std::ostringstream out;
  std::size_t shut = 0, rec = 0;
  for (const auto& [iri, tr] : s.per_turbine) {
    shut += tr.shutdowns;
    rec += tr.recoveries;
  }
  out << "turbines: " << s.per_turbine.size() << "\n";
  out << "first shutdown: "
      << (s.first_shutdown ? format_time(*s.first_shutdown) : "none") << "\n";
  out << "last recovery: "
      << (s.last_recovery ? format_time(*s.last_recovery) : "none") << "\n";
  out << "min site distance: " << fixed(s.min_distance_km, 1) << " km at "
      << format_time(s.min_distance_time) << "\n";
  out << "max hub wind: " << fixed(s.max_hub_wind_ms, 2) << " m/s at "
      << format_time(s.max_hub_wind_time) << "\n";
  out << "shutdown transitions: " << shut << "\n";
  out << "recovery transitions: " << rec << "\n";
  return out.str();
}

}  // namespace semtwin::storm
