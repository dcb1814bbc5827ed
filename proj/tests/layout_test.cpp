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

#include "semtwin/layout.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "semtwin/error.hpp"

namespace semtwin::layout {
namespace {

const std::string kData = SEMTWIN_DATA_DIR;

geo::Polygon maryland() {
  std::ifstream in(kData + "/boundary/maryland_lease.wkt");
  std::stringstream ss;
  ss << in.rdbuf();
  return std::get<geo::Polygon>(geo::parse_wkt(ss.str()));
}

// Axis-aligned square of half-width h meters around `anchor`.
geo::Polygon square(const geo::GeoPoint& anchor, double h) {
  geo::LocalFrame f(anchor);
  geo::Polygon p;
  for (Vec2 v : {Vec2{-h, -h}, Vec2{h, -h}, Vec2{h, h}, Vec2{-h, h},
                 Vec2{-h, -h}}) {
    p.outer.push_back(f.to_geo(v));
  }
  return p;
}

std::vector<Vec2> square_ring(double h) {
  return {{-h, -h}, {h, -h}, {h, h}, {-h, h}, {-h, -h}};
}

const geo::GeoPoint kAnchor{-74.78, 38.34};

TEST(Power, Curve) {
  TurbineSpec s;
  EXPECT_EQ(power_w(0.0, s), 0.0);
  EXPECT_EQ(power_w(2.99, s), 0.0);
  EXPECT_EQ(power_w(s.rated_speed_ms, s), 15e6);
  EXPECT_EQ(power_w(20.0, s), 15e6);
  EXPECT_EQ(power_w(25.0, s), 0.0);
  double mid = 0.5 * (s.cut_in_ms + s.rated_speed_ms);
  EXPECT_DOUBLE_EQ(power_w(mid, s), 15e6 / 8.0);
}

TEST(Spec, ThrustCurve) {
  TurbineSpec s;
  EXPECT_EQ(s.ct(5.0), 0.8);
  EXPECT_NEAR(s.ct(2 * s.rated_speed_ms), 0.1, 1e-15);
  s.ct_table = {{4.0, 0.8}, {12.0, 0.4}};
  EXPECT_DOUBLE_EQ(s.ct(8.0), 0.6);
  EXPECT_EQ(s.ct(1.0), 0.8);
  EXPECT_EQ(s.ct(30.0), 0.4);
  EXPECT_NO_THROW(s.check());
  s.ct_table = {{4.0, 1.2}};
  EXPECT_THROW(s.check(), LayoutError);
  s = TurbineSpec{};
  s.rated_speed_ms = 30;
  EXPECT_THROW(s.check(), LayoutError);
}

TEST(Wake, ReferenceDeficits) {
  TurbineSpec s;
  double d = s.rotor_diameter_m;
  // Wind from the west (270) blows towards +x.
  EXPECT_NEAR(wake_deficit({0, 0}, {5 * d, 0}, 270, 8.0, s),
              0.28187851424456411, 1e-12);
  EXPECT_NEAR(wake_deficit({0, 0}, {5 * d, d}, 270, 8.0, s),
              0.025027332285582623, 1e-12);
  EXPECT_EQ(wake_deficit({0, 0}, {-5 * d, 0}, 270, 8.0, s), 0.0);
  EXPECT_EQ(wake_deficit({0, 0}, {0, 5 * d}, 270, 8.0, s), 0.0);
  EXPECT_LT(wake_deficit({0, 0}, {5 * d, 50 * d}, 270, 8.0, s), 1e-100);
  // From the north the wake runs to -y.
  EXPECT_NEAR(wake_deficit({0, 0}, {0, -5 * d}, 0, 8.0, s),
              0.28187851424456411, 1e-12);
}

TEST(Wake, DecaysDownwindAndCrosswind) {
  TurbineSpec s;
  double d = s.rotor_diameter_m;
  for (double ws : {5.0, 9.0, 14.0, 22.0}) {
    double prev = 1.0;
    for (double x = 2 * d; x < 100 * d; x += 0.25 * d) {
      double v = wake_deficit({0, 0}, {x, 0}, 270, ws, s);
      ASSERT_LE(v, prev);
      ASSERT_GE(v, 0.0);
      prev = v;
    }
    prev = 1.0;
    for (double y = 0; y < 10 * d; y += 0.1 * d) {
      double v = wake_deficit({0, 0}, {6 * d, y}, 270, ws, s);
      ASSERT_LE(v, prev);
      prev = v;
    }
  }
}

TEST(EffectiveSpeed, CombinesRootSumSquare) {
  TurbineSpec s;
  double d = s.rotor_diameter_m;
  std::vector<Vec2> one{{0, 0}};
  EXPECT_EQ(effective_speed(one, 0, 270, 9.0, s), 9.0);

  std::vector<Vec2> line{{0, 0}, {5 * d, 0}, {10 * d, 0.3 * d}};
  EXPECT_LT(effective_speed(line, 1, 270, 9.0, s), 9.0);
  double d02 = wake_deficit(line[0], line[2], 270, 9.0, s);
  double d12 = wake_deficit(line[1], line[2], 270, 9.0, s);
  EXPECT_NEAR(effective_speed(line, 2, 270, 9.0, s),
              9.0 * (1 - std::sqrt(d02 * d02 + d12 * d12)), 1e-12);
  EXPECT_EQ(effective_speed(line, 0, 270, 9.0, s), 9.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5000, 5000), dir(0, 360);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec2> p(8);
    for (Vec2& v : p) v = {u(rng), u(rng)};
    for (std::size_t i = 0; i < p.size(); ++i) {
      double e = effective_speed(p, i, dir(rng), 11.0, s);
      ASSERT_LE(e, 11.0);
      ASSERT_GE(e, 0.0);
    }
  }
}

TEST(Aep, SingleTurbineMatchesQuadrature) {
  TurbineSpec s;
  WindRose rose = WindRose::uniform();
  ASSERT_NO_THROW(rose.check());
  auto q = speed_quadrature(s);
  ASSERT_EQ(q.size(), 27u);
  double wsum = 0;
  for (auto& [v, w] : q) wsum += w;
  EXPECT_NEAR(wsum, 22.0, 1e-12);

  std::vector<Vec2> one{{0, 0}};
  double a = aep_gwh(one, rose, s);
  // Same 27-point rule evaluated independently.
  EXPECT_NEAR(a, 40.45202372965917, 1e-9 * a);
  // Adaptive integral of the exact piecewise integrand.
  EXPECT_NEAR(a, 40.47548421392847, 1e-3 * a);
  EXPECT_EQ(aep_gwh(std::vector<Vec2>{}, rose, s), 0.0);
}

TEST(Aep, FarApartIsTwiceSingle) {
  TurbineSpec s;
  WindRose rose = WindRose::uniform();
  double one = aep_gwh(std::vector<Vec2>{{0, 0}}, rose, s);
  double two = aep_gwh(std::vector<Vec2>{{0, 0}, {60 * 240.0, 0}}, rose, s);
  EXPECT_NEAR(two, 2 * one, 1e-3 * 2 * one);
  double close = aep_gwh(std::vector<Vec2>{{0, 0}, {5 * 240.0, 0}}, rose, s);
  EXPECT_LT(close, two);
}

TEST(Aep, TranslationInvariant) {
  TurbineSpec s;
  WindRose rose = WindRose::uniform();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-4000, 4000);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<Vec2> p(6), q;
    for (Vec2& v : p) v = {u(rng), u(rng)};
    Vec2 t{u(rng), u(rng)};
    for (const Vec2& v : p) q.push_back({v.x + t.x, v.y + t.y});
    double a = aep_gwh(p, rose, s), b = aep_gwh(q, rose, s);
    EXPECT_NEAR(a, b, 1e-9 * a);
  }
}

TEST(WindRose, Checks) {
  WindRose r = WindRose::uniform(12);
  EXPECT_THROW(r.check(), LayoutError);
  r = WindRose::uniform();
  r.sectors[0].probability += 1e-6;
  EXPECT_THROW(r.check(), LayoutError);
}

TEST(Penalties, SpacingAndBoundary) {
  auto ring = square_ring(5000);
  Penalties p = penalties({{0, 0}, {1500, 0}}, ring, 1200);
  EXPECT_EQ(p.spacing_m, 0.0);
  EXPECT_EQ(p.boundary_m, 0.0);
  EXPECT_TRUE(p.feasible());
  p = penalties({{0, 0}, {900, 0}}, ring, 1200);
  EXPECT_DOUBLE_EQ(p.spacing_m, 300.0);
  p = penalties({{5050, 0}}, ring, 1200);
  EXPECT_DOUBLE_EQ(p.boundary_m, 50.0);
  EXPECT_FALSE(p.feasible());

  // Geographic variant through the layout frame.
  geo::Polygon sq = square(kAnchor, 5000);
  Layout l = Layout::from_local(kAnchor, {"A"}, {{5050, 0}});
  EXPECT_NEAR(penalties(l, sq, 1200).boundary_m, 50.0, 1e-6);
}

TEST(Penalties, GeographicSpacingUsesHaversine) {
  // East-west pair 20 km north of the frame origin: the frame scales
  // longitude by the origin's latitude, so the planar gap overstates the
  // great-circle one.
  geo::LocalFrame frame(kAnchor);
  std::vector<Vec2> pos{{0, 20000}, {1200, 20000}};
  auto ring = square_ring(50000);
  EXPECT_TRUE(penalties(pos, ring, 1200).feasible());
  double hav = geo::haversine_km(frame.to_geo(pos[0]), frame.to_geo(pos[1])) *
               1000.0;
  ASSERT_LT(hav, 1200.0);
  EXPECT_DOUBLE_EQ(penalties(pos, ring, 1200, &frame).spacing_m, 1200.0 - hav);
  Layout l = Layout::from_local(kAnchor, {"A", "B"}, pos);
  EXPECT_DOUBLE_EQ(penalties(l, square(kAnchor, 50000), 1200).spacing_m,
                   1200.0 - hav);

  ASSERT_TRUE(project_feasible(pos, ring, 1200, 1.0, &frame));
  EXPECT_GE(geo::haversine_km(frame.to_geo(pos[0]), frame.to_geo(pos[1])),
            1.2);
}

TEST(Gradient, MatchesIndependentSmallStepDifference) {
  TurbineSpec s;
  WindRose rose = WindRose::uniform();
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3000, 3000);
  int checked = 0;
  for (int trial = 0; trial < 4; ++trial) {
    std::vector<Vec2> p(7);
    for (Vec2& v : p) v = {u(rng), u(rng)};
    std::vector<std::size_t> sectors{1, 6, 13, 20};
    std::vector<double> g = aep_gradient(p, rose, s, sectors, 1.0);

    WindRose sub;
    for (std::size_t i : sectors) {
      Sector sec = rose.sectors[i];
      sec.probability = 1.0 / sectors.size();
      sub.sectors.push_back(sec);
    }
    const double h = 0.1;
    for (std::size_t i = 0; i < p.size(); ++i) {
      for (int c = 0; c < 2; ++c) {
        auto plus = p, minus = p;
        (c == 0 ? plus[i].x : plus[i].y) += h;
        (c == 0 ? minus[i].x : minus[i].y) -= h;
        double ref = (aep_gwh(plus, sub, s) - aep_gwh(minus, sub, s)) / (2 * h);
        if (std::fabs(ref) < 1e-5) continue;
        EXPECT_NEAR(g[2 * i + c], ref, 0.05 * std::fabs(ref));
        ++checked;
      }
    }
  }
  EXPECT_GT(checked, 10);
}

TEST(Optimize, IsolatedTurbineStaysPut) {
  OptConfig c;
  c.boundary = square(kAnchor, 5000);
  c.iterations = 30;
  Layout l0 = Layout::from_local(kAnchor, {"T1"}, {{0, 0}});
  OptResult r = optimize(l0, WindRose::uniform(), TurbineSpec{}, c);
  Vec2 moved = r.layout.local()[0];
  EXPECT_LT(std::hypot(moved.x, moved.y), 1.0);
  EXPECT_TRUE(r.feasible);
  EXPECT_EQ(r.trace.size(), 31u);
}

TEST(Optimize, PushesCloseTurbinesApart) {
  OptConfig c;
  c.boundary = square(kAnchor, 5000);
  c.iterations = 40;
  Layout l0 = Layout::from_local(kAnchor, {"T1", "T2"}, {{0, 0}, {1100, 0}});
  OptResult r = optimize(l0, WindRose::uniform(), TurbineSpec{}, c);
  ASSERT_TRUE(r.feasible);
  auto p = r.layout.local();
  EXPECT_GE(std::hypot(p[0].x - p[1].x, p[0].y - p[1].y), 1200.0);
  EXPECT_TRUE(penalties(r.layout, c.boundary, c.spacing_min_m).feasible());
  EXPECT_GE(r.aep_final_gwh, r.trace[0].aep_gwh);
}

TEST(Optimize, SeedDeterminismAndFeasibilityFlag) {
  OptConfig c;
  c.boundary = square(kAnchor, 3000);
  c.iterations = 15;
  c.seed = 99;
  Layout l0 = generate_grid_layout(2, 6, c.boundary, 1200, 300);
  auto a = optimize(l0, WindRose::uniform(), TurbineSpec{}, c);
  auto b = optimize(l0, WindRose::uniform(), TurbineSpec{}, c);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].aep_gwh, b.trace[i].aep_gwh);
    EXPECT_EQ(a.trace[i].spacing_pen_m, b.trace[i].spacing_pen_m);
  }
  EXPECT_EQ(a.layout, b.layout);
  EXPECT_EQ(a.feasible,
            penalties(a.layout, c.boundary, c.spacing_min_m).feasible());
  EXPECT_GE(a.aep_final_gwh, a.aep_initial_gwh);

  OptConfig bad = c;
  bad.iterations = 0;
  EXPECT_THROW(optimize(l0, WindRose::uniform(), TurbineSpec{}, bad),
               ConfigError);
}

TEST(Optimize, InfeasibleStartIsRepaired) {
  OptConfig c;
  c.boundary = square(kAnchor, 3000);
  c.iterations = 5;
  Layout l0 = Layout::from_local(kAnchor, {"T1", "T2", "T3"},
                                 {{0, 0}, {300, 0}, {3400, 0}});
  OptResult r = optimize(l0, WindRose::uniform(), TurbineSpec{}, c);
  EXPECT_TRUE(r.feasible);
  EXPECT_TRUE(penalties(r.layout, c.boundary, c.spacing_min_m).feasible());
  EXPECT_EQ(r.best_iteration, c.iterations + 1);
}

TEST(Grid, MarylandRows) {
  Layout l = generate_grid_layout(13, 121, maryland(), 1200);
  ASSERT_EQ(l.size(), 121u);
  std::vector<int> sizes(13, 0);
  for (int r : l.rows) ++sizes[r];
  for (int n : sizes) {
    EXPECT_GE(n, 9);
    EXPECT_LE(n, 10);
  }
  EXPECT_TRUE(penalties(l, maryland(), 1200).feasible());
  for (const geo::GeoPoint& p : l.points) {
    EXPECT_TRUE(geo::contains(maryland(), p));
  }
  EXPECT_EQ(l.ids.front(), "Turbine1");
  EXPECT_EQ(l.ids.back(), "Turbine121");
}

TEST(Grid, SmallCasesAndErrors) {
  geo::Polygon big = square(kAnchor, 10000);
  Layout l = generate_grid_layout(2, 4, big, 1200);
  EXPECT_EQ(l.rows, (std::vector<int>{0, 0, 1, 1}));
  auto p = l.local();
  EXPECT_NEAR(p[0].y, p[1].y, 1e-6);
  EXPECT_NEAR(p[2].y, p[3].y, 1e-6);
  EXPECT_NEAR(p[0].x, p[2].x, 1e-6);
  EXPECT_THROW(generate_grid_layout(13, 121, square(kAnchor, 2000), 1200),
               LayoutError);
  EXPECT_THROW(generate_grid_layout(5, 3, big, 1200), LayoutError);
}

TEST(Csv, RoundTripAndErrors) {
  Layout l = generate_grid_layout(3, 10, square(kAnchor, 5000), 1200);
  std::string text = write_layout_csv(l);
  Layout back = parse_layout_csv(text);
  EXPECT_EQ(back, l);
  EXPECT_EQ(write_layout_csv(back), text);
  l.rows.clear();
  EXPECT_EQ(parse_layout_csv(write_layout_csv(l)), l);

  EXPECT_THROW(parse_layout_csv("id,x,y\n"), ParseError);
  EXPECT_THROW(parse_layout_csv("turbine_id,lon,lat\nA,1,2\nA,1,3\n"),
               ParseError);
  EXPECT_THROW(parse_layout_csv("turbine_id,lon,lat\nA,abc,2\n"), ParseError);
  EXPECT_THROW(parse_layout_csv("turbine_id,lon,lat\nA,200,2\n"), ParseError);
  EXPECT_THROW(Layout::from_local(kAnchor, {"A", "A"}, {{0, 0}, {1, 1}}),
               LayoutError);
}

TEST(Graph, OneTurbineEntityPerPosition) {
  Layout l = Layout::from_local(kAnchor, {"Turbine7"}, {{0, 0}});
  Graph g = layout_to_graph(l);
  EXPECT_EQ(g.instances_of(vocab::Turbine),
            std::vector<Iri>{vocab::term("Turbine7")});
  EXPECT_EQ(g.size(), 2u);
}

TEST(Deviation, IdentityShiftAndErrors) {
  Layout a = generate_grid_layout(3, 9, square(kAnchor, 5000), 1200);
  auto same = row_deviation_stats(a, a, a.rows);
  ASSERT_EQ(same.size(), 4u);
  EXPECT_EQ(same.back().label, "Overall");
  for (const DeviationRow& r : same) {
    EXPECT_EQ(r.mean_x, 0.0);
    EXPECT_EQ(r.std_x, 0.0);
    EXPECT_EQ(r.mean_y, 0.0);
    EXPECT_EQ(r.std_y, 0.0);
  }

  std::vector<Vec2> shifted = a.local();
  for (Vec2& v : shifted) v.x += 10.0;
  // Reverse the order to exercise the nearest-neighbour pairing.
  std::reverse(shifted.begin(), shifted.end());
  std::vector<int> rows(a.rows.rbegin(), a.rows.rend());
  Layout b = Layout::from_local(a.anchor, a.ids, shifted, rows);
  std::reverse(b.points.begin(), b.points.end());
  auto dev = row_deviation_stats(a, b, a.rows);
  for (const DeviationRow& r : dev) {
    EXPECT_NEAR(r.mean_x, 10.0, 1e-6);
    EXPECT_NEAR(r.std_x, 0.0, 1e-6);
    EXPECT_NEAR(r.mean_y, 0.0, 1e-6);
  }
  EXPECT_EQ(dev.back().count, 9u);
  std::string csv = write_deviation_csv(dev);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "Row,Mean X,Std Dev X,Mean Y,Std Dev Y");

  Layout small = Layout::from_local(kAnchor, {"A"}, {{0, 0}});
  EXPECT_THROW(row_deviation_stats(a, small, a.rows), LayoutError);
}

}  // namespace
}  // namespace semtwin::layout
