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

// Candidate layouts, the wake-aware energy objective, constraint penalties
// and the gradient optimizer.

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semtwin/geo.hpp"
#include "semtwin/term_graph.hpp"

namespace semtwin::layout {

using geo::Vec2;

struct TurbineSpec {
  double rotor_diameter_m = 240.0;
  double hub_height_m = 150.0;
  double rated_power_w = 15.0e6;
  double cut_in_ms = 3.0;
  double rated_speed_ms = 10.59;
  double cut_out_ms = 25.0;
  // Gaussian wake growth rate.
  double wake_k = 0.04;
  // (wind speed, CT) pairs sorted by speed, linearly interpolated and held
  // flat outside. Empty: 0.8 up to rated speed, then 0.8 * (rated / ws)^3.
  std::vector<std::pair<double, double>> ct_table;

  double ct(double ws) const;
  // Throws LayoutError.
  void check() const;
};

double power_w(double ws, const TurbineSpec& spec);

// Fractional speed deficit at `downstream` caused by `upstream` for wind
// blowing from `wind_dir_deg` (0 = from north). Zero unless downstream lies
// strictly downwind.
double wake_deficit(const Vec2& upstream, const Vec2& downstream,
                    double wind_dir_deg, double ws, const TurbineSpec& spec);

struct Sector {
  double direction_deg = 0.0;
  double probability = 0.0;
  double weibull_k = 2.5;
  double weibull_a = 8.0;
};

struct WindRose {
  std::vector<Sector> sectors;

  // Equal probabilities, centres at i * 360 / n.
  static WindRose uniform(int n = 24, double k = 2.5, double a = 8.0);
  // Throws LayoutError unless there are 24 sectors with probabilities summing
  // to 1 within 1e-9 and positive Weibull parameters.
  void check() const;
};

// Turbines are stored geographically; local() gives meters east/north of the
// anchor in its equirectangular frame.
struct Layout {
  geo::GeoPoint anchor;
  std::vector<std::string> ids;
  std::vector<geo::GeoPoint> points;
  std::vector<int> rows;  // empty, or one 0-based row per turbine

  std::size_t size() const { return ids.size(); }
  std::vector<Vec2> local() const;
  // Throws LayoutError on count mismatch or duplicate ids.
  void check() const;

  static Layout from_local(const geo::GeoPoint& anchor,
                           std::vector<std::string> ids,
                           const std::vector<Vec2>& positions,
                           std::vector<int> rows = {});

  // Anchor is a frame choice and is not compared.
  friend bool operator==(const Layout& a, const Layout& b) {
    return a.ids == b.ids && a.points == b.points && a.rows == b.rows;
  }
};

// Root-sum-square of all deficits on turbine i, clamped at zero speed.
double effective_speed(const std::vector<Vec2>& positions, std::size_t i,
                       double wind_dir_deg, double ws,
                       const TurbineSpec& spec);
double effective_speed(const Layout& layout, std::size_t i,
                       double wind_dir_deg, double ws,
                       const TurbineSpec& spec);

// 27-point Gauss-Legendre nodes on [cut_in, cut_out].
std::vector<std::pair<double, double>> speed_quadrature(
    const TurbineSpec& spec);

// Annual energy in GWh.
double aep_gwh(const std::vector<Vec2>& positions, const WindRose& rose,
               const TurbineSpec& spec);
double aep_gwh(const Layout& layout, const WindRose& rose,
               const TurbineSpec& spec);

struct Penalties {
  double spacing_m = 0.0;   // sum of max(0, spacing_min - d) over pairs
  double boundary_m = 0.0;  // sum of distances outside the boundary

  bool feasible() const { return spacing_m == 0.0 && boundary_m == 0.0; }
};

// `ring` is the closed boundary ring in the same local frame. With a frame,
// pair spacing is the haversine distance between the geographic positions,
// otherwise the planar one.
Penalties penalties(const std::vector<Vec2>& positions,
                    const std::vector<Vec2>& ring, double spacing_min,
                    const geo::LocalFrame* frame = nullptr);
// Spacing by haversine distance between the stored points.
Penalties penalties(const Layout& layout, const geo::Polygon& boundary,
                    double spacing_min);

struct OptConfig {
  int iterations = 400;
  double learning_rate_start_m = 10.0;
  double learning_rate_end_m = 1.0;
  double spacing_min_m = 1200.0;
  geo::Polygon boundary;
  // Quadratic penalty weights in GWh per m^2, grown linearly with iteration.
  double spacing_weight = 1e-3;
  double boundary_weight = 1e-3;
  std::uint64_t seed = 1;
  int sectors_per_iteration = 4;
  double fd_step_m = 1.0;
  // Clearance kept by the final projection beyond the hard limits.
  double projection_margin_m = 1.0;

  // Throws ConfigError.
  void check() const;
};

struct TraceRow {
  int iteration = 0;
  double aep_gwh = 0.0;
  double spacing_pen_m = 0.0;
  double boundary_pen_m = 0.0;
};

struct OptResult {
  Layout layout;
  std::vector<TraceRow> trace;  // row 0 is the initial layout
  bool feasible = false;
  int best_iteration = 0;  // iterations + 1 means the projected final iterate
  double aep_initial_gwh = 0.0;
  double aep_final_gwh = 0.0;
};

OptResult optimize(const Layout& layout0, const WindRose& rose,
                   const TurbineSpec& spec, const OptConfig& config);

// Central-difference gradient of the energy over the given sectors (their
// probabilities rescaled to sum to one), d/dx and d/dy interleaved per
// turbine. Uses single-turbine incremental updates.
std::vector<double> aep_gradient(const std::vector<Vec2>& positions,
                                 const WindRose& rose, const TurbineSpec& spec,
                                 const std::vector<std::size_t>& sectors,
                                 double step_m);

// Moves turbines apart and back inside until penalties vanish. Returns false
// if that does not happen within the pass limit.
bool project_feasible(std::vector<Vec2>& positions,
                      const std::vector<Vec2>& ring, double spacing_min,
                      double margin, const geo::LocalFrame* frame = nullptr,
                      int max_passes = 500);

// Rows parallel to the boundary's principal axis, row sizes differing by at
// most one, `inset_m` clearance from the boundary. Ids are <prefix>1..N
// numbered row by row. Throws LayoutError if the grid does not fit.
Layout generate_grid_layout(int rows, int count, const geo::Polygon& boundary,
                            double spacing_min_m, double inset_m = 600.0,
                            std::string_view id_prefix = "Turbine");

// (T type Turbine) and (T hasGeometry POINT) per turbine.
Graph layout_to_graph(const Layout& layout);

// turbine_id,lon,lat[,row]
std::string write_layout_csv(const Layout& layout);
// Anchor is the mean position. Throws ParseError.
Layout parse_layout_csv(std::string_view text);

std::string write_trace_csv(const std::vector<TraceRow>& trace);

struct DeviationRow {
  std::string label;  // row number, or "Overall"
  std::size_t count = 0;
  double mean_x = 0.0;  // mean |dx|, meters
  double std_x = 0.0;   // population std of |dx|
  double mean_y = 0.0;
  double std_y = 0.0;
};

// Pairs turbines row by row (greedy nearest neighbour within each row) and
// reports per-row and overall deviation in the frame of `a`. `rows` assigns
// both layouts' turbines by index. Throws LayoutError on count mismatch.
std::vector<DeviationRow> row_deviation_stats(const Layout& a, const Layout& b,
                                              const std::vector<int>& rows);
// Row,Mean X,Std Dev X,Mean Y,Std Dev Y
std::string write_deviation_csv(const std::vector<DeviationRow>& rows);

}  // namespace semtwin::layout
