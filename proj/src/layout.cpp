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

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include <boost/math/distributions/weibull.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/sin_pi.hpp>

#include "semtwin/error.hpp"

namespace semtwin::layout {

namespace {

constexpr double kHoursPerYear = 8760.0;

// Deficit terms that depend only on CT.
struct WakeCoeffs {
  double ct = 0.0;
  double sigma0 = 0.0;  // 0.2 * sqrt(beta)
  double k = 0.0;
  double d = 0.0;

  WakeCoeffs(double ct_value, const TurbineSpec& spec)
      : ct(ct_value), k(spec.wake_k), d(spec.rotor_diameter_m) {
    double s = std::sqrt(1.0 - ct);
    sigma0 = 0.2 * std::sqrt((1.0 + s) / (2.0 * s));
  }

  double operator()(const Vec2& a, const Vec2& b, double ux, double uy) const {
    double dx = b.x - a.x;
    double dy = b.y - a.y;
    double x = dx * ux + dy * uy;
    if (x <= 0.0) return 0.0;
    double y2 = std::max(0.0, dx * dx + dy * dy - x * x);
    double sd = k * x / d + sigma0;
    double root = std::sqrt(std::max(0.0, 1.0 - ct / (8.0 * sd * sd)));
    double sigma = sd * d;
    return (1.0 - root) * std::exp(-y2 / (2.0 * sigma * sigma));
  }
};

void downwind(double wind_dir_deg, double& ux, double& uy) {
  // sin_pi/cos_pi keep the cardinal directions exact.
  ux = -boost::math::sin_pi(wind_dir_deg / 180.0);
  uy = -boost::math::cos_pi(wind_dir_deg / 180.0);
}

void check_rose_values(const WindRose& rose) {
  double sum = 0.0;
  for (const Sector& s : rose.sectors) {
    if (!(s.probability >= 0) || !(s.weibull_k > 0) || !(s.weibull_a > 0)) {
      throw LayoutError("wind rose sector has invalid parameters");
    }
    sum += s.probability;
  }
  if (rose.sectors.empty() || std::fabs(sum - 1.0) > 1e-9) {
    throw LayoutError("wind rose probabilities must sum to 1");
  }
}

// Quadrature nodes sharing one CT value share their deficit matrix.
struct CtGroup {
  WakeCoeffs wake;
  std::vector<std::size_t> nodes;
};

std::vector<CtGroup> ct_groups(const TurbineSpec& spec,
                               const std::vector<std::pair<double, double>>& q) {
  std::vector<CtGroup> groups;
  for (std::size_t n = 0; n < q.size(); ++n) {
    double ct = spec.ct(q[n].first);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [ct](const CtGroup& g) { return g.wake.ct == ct; });
    if (it == groups.end()) {
      groups.push_back({WakeCoeffs(ct, spec), {n}});
    } else {
      it->nodes.push_back(n);
    }
  }
  return groups;
}

// Energy bookkeeping for a set of sectors. `dm` holds every pairwise deficit
// so that a single moved turbine can be re-evaluated in O(N).
class Evaluator {
 public:
  Evaluator(const std::vector<Vec2>& pos, const WindRose& rose,
            const TurbineSpec& spec, std::vector<std::size_t> sectors,
            bool renormalize)
      : pos_(pos), spec_(spec), quad_(speed_quadrature(spec)),
        groups_(ct_groups(spec, quad_)), sectors_(std::move(sectors)) {
    n_ = pos.size();
    double total = 0.0;
    for (std::size_t s : sectors_) total += rose.sectors[s].probability;
    for (std::size_t s : sectors_) {
      const Sector& sec = rose.sectors[s];
      SectorData sd;
      downwind(sec.direction_deg, sd.ux, sd.uy);
      double p = renormalize ? sec.probability / total : sec.probability;
      boost::math::weibull_distribution<double> w(sec.weibull_k,
                                                  sec.weibull_a);
      for (const auto& [v, wt] : quad_) {
        sd.node_weight.push_back(p * wt * boost::math::pdf(w, v));
      }
      for (const CtGroup& g : groups_) {
        std::vector<double> dm(n_ * n_, 0.0);
        std::vector<double> d2(n_, 0.0);
        for (std::size_t j = 0; j < n_; ++j) {
          for (std::size_t k = 0; k < n_; ++k) {
            if (j == k) continue;
            double v = g.wake(pos[j], pos[k], sd.ux, sd.uy);
            dm[j * n_ + k] = v;
            d2[k] += v * v;
          }
        }
        sd.dm.push_back(std::move(dm));
        sd.d2.push_back(std::move(d2));
      }
      data_.push_back(std::move(sd));
    }
  }

  // Wh per year (before the GWh conversion) over the configured sectors.
  double energy() const {
    double e = 0.0;
    for (const SectorData& sd : data_) {
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        for (std::size_t node : groups_[g].nodes) {
          double v = quad_[node].first;
          double p = 0.0;
          for (std::size_t k = 0; k < n_; ++k) {
            p += power_w(speed(v, sd.d2[g][k]), spec_);
          }
          e += sd.node_weight[node] * p;
        }
      }
    }
    return e * kHoursPerYear;
  }

  // Energy change when turbine i moves to `moved`.
  double delta(std::size_t i, const Vec2& moved) {
    double e = 0.0;
    for (const SectorData& sd : data_) {
      for (std::size_t g = 0; g < groups_.size(); ++g) {
        const WakeCoeffs& wake = groups_[g].wake;
        const std::vector<double>& dm = sd.dm[g];
        const std::vector<double>& d2 = sd.d2[g];
        scratch_.assign(d2.begin(), d2.end());
        double own = 0.0;
        for (std::size_t k = 0; k < n_; ++k) {
          if (k == i) continue;
          double old_ik = dm[i * n_ + k];
          double new_ik = wake(moved, pos_[k], sd.ux, sd.uy);
          scratch_[k] = std::max(0.0, d2[k] - old_ik * old_ik + new_ik * new_ik);
          double new_ki = wake(pos_[k], moved, sd.ux, sd.uy);
          own += new_ki * new_ki;
        }
        scratch_[i] = own;
        for (std::size_t node : groups_[g].nodes) {
          double v = quad_[node].first;
          double dp = 0.0;
          for (std::size_t k = 0; k < n_; ++k) {
            if (scratch_[k] == d2[k]) continue;
            dp += power_w(speed(v, scratch_[k]), spec_) -
                  power_w(speed(v, d2[k]), spec_);
          }
          e += sd.node_weight[node] * dp;
        }
      }
    }
    return e * kHoursPerYear;
  }

 private:
  struct SectorData {
    double ux = 0.0, uy = 0.0;
    std::vector<double> node_weight;
    std::vector<std::vector<double>> dm;  // per CT group, N x N
    std::vector<std::vector<double>> d2;  // per CT group, N
  };

  static double speed(double v, double d2) {
    return std::max(0.0, v * (1.0 - std::sqrt(d2)));
  }

  const std::vector<Vec2>& pos_;
  const TurbineSpec& spec_;
  std::vector<std::pair<double, double>> quad_;
  std::vector<CtGroup> groups_;
  std::vector<std::size_t> sectors_;
  std::size_t n_ = 0;
  std::vector<SectorData> data_;
  std::vector<double> scratch_;
};

std::vector<Vec2> local_ring(const geo::Polygon& boundary,
                             const geo::LocalFrame& frame) {
  std::vector<Vec2> ring;
  for (const geo::GeoPoint& p : boundary.outer) ring.push_back(frame.to_local(p));
  return ring;
}

double dist(const Vec2& a, const Vec2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

std::string fmt(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace

double TurbineSpec::ct(double ws) const {
  if (ct_table.empty()) {
    if (ws <= rated_speed_ms) return 0.8;
    double r = rated_speed_ms / ws;
    return 0.8 * r * r * r;
  }
  if (ws <= ct_table.front().first) return ct_table.front().second;
  if (ws >= ct_table.back().first) return ct_table.back().second;
  auto hi = std::lower_bound(
      ct_table.begin(), ct_table.end(), ws,
      [](const std::pair<double, double>& p, double v) { return p.first < v; });
  auto lo = hi - 1;
  double w = (ws - lo->first) / (hi->first - lo->first);
  return lo->second + w * (hi->second - lo->second);
}

void TurbineSpec::check() const {
  if (!(rotor_diameter_m > 0) || !(hub_height_m > 0) || !(rated_power_w > 0)) {
    throw LayoutError("turbine dimensions and rating must be positive");
  }
  if (!(cut_in_ms > 0 && cut_in_ms < rated_speed_ms &&
        rated_speed_ms < cut_out_ms)) {
    throw LayoutError("need 0 < cut_in < rated_speed < cut_out");
  }
  if (!(wake_k > 0)) throw LayoutError("wake growth rate must be positive");
  for (std::size_t i = 0; i < ct_table.size(); ++i) {
    double c = ct_table[i].second;
    if (!(c > 0 && c < 1)) throw LayoutError("CT must lie in (0, 1)");
    if (i > 0 && !(ct_table[i].first > ct_table[i - 1].first)) {
      throw LayoutError("CT table speeds must increase");
    }
  }
}

double power_w(double ws, const TurbineSpec& spec) {
  if (ws < spec.cut_in_ms || ws >= spec.cut_out_ms) return 0.0;
  if (ws >= spec.rated_speed_ms) return spec.rated_power_w;
  double r = (ws - spec.cut_in_ms) / (spec.rated_speed_ms - spec.cut_in_ms);
  return spec.rated_power_w * r * r * r;
}

double wake_deficit(const Vec2& upstream, const Vec2& downstream,
                    double wind_dir_deg, double ws, const TurbineSpec& spec) {
  double ux, uy;
  downwind(wind_dir_deg, ux, uy);
  return WakeCoeffs(spec.ct(ws), spec)(upstream, downstream, ux, uy);
}

WindRose WindRose::uniform(int n, double k, double a) {
  WindRose rose;
  for (int i = 0; i < n; ++i) {
    rose.sectors.push_back({360.0 * i / n, 1.0 / n, k, a});
  }
  return rose;
}

void WindRose::check() const {
  if (sectors.size() != 24) throw LayoutError("wind rose needs 24 sectors");
  check_rose_values(*this);
}

std::vector<Vec2> Layout::local() const {
  geo::LocalFrame frame(anchor);
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const geo::GeoPoint& p : points) out.push_back(frame.to_local(p));
  return out;
}

void Layout::check() const {
  if (ids.size() != points.size()) {
    throw LayoutError("layout has " + std::to_string(ids.size()) + " ids and " +
                      std::to_string(points.size()) + " positions");
  }
  if (!rows.empty() && rows.size() != ids.size()) {
    throw LayoutError("row assignment does not match the turbine count");
  }
  std::set<std::string> seen;
  for (const std::string& id : ids) {
    if (!seen.insert(id).second) throw LayoutError("duplicate turbine id " + id);
  }
}

Layout Layout::from_local(const geo::GeoPoint& anchor,
                          std::vector<std::string> ids,
                          const std::vector<Vec2>& positions,
                          std::vector<int> rows) {
  Layout l;
  l.anchor = anchor;
  l.ids = std::move(ids);
  l.rows = std::move(rows);
  geo::LocalFrame frame(anchor);
  for (const Vec2& v : positions) l.points.push_back(frame.to_geo(v));
  l.check();
  return l;
}

double effective_speed(const std::vector<Vec2>& positions, std::size_t i,
                       double wind_dir_deg, double ws,
                       const TurbineSpec& spec) {
  double ux, uy;
  downwind(wind_dir_deg, ux, uy);
  WakeCoeffs wake(spec.ct(ws), spec);
  double sum = 0.0;
  for (std::size_t j = 0; j < positions.size(); ++j) {
    if (j == i) continue;
    double d = wake(positions[j], positions[i], ux, uy);
    sum += d * d;
  }
  return std::max(0.0, ws * (1.0 - std::sqrt(sum)));
}

double effective_speed(const Layout& layout, std::size_t i,
                       double wind_dir_deg, double ws,
                       const TurbineSpec& spec) {
  return effective_speed(layout.local(), i, wind_dir_deg, ws, spec);
}

std::vector<std::pair<double, double>> speed_quadrature(
    const TurbineSpec& spec) {
  using Rule = boost::math::quadrature::gauss<double, 27>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  double half = 0.5 * (spec.cut_out_ms - spec.cut_in_ms);
  double mid = 0.5 * (spec.cut_out_ms + spec.cut_in_ms);
  std::vector<std::pair<double, double>> nodes;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      nodes.emplace_back(mid, half * w[i]);
    } else {
      nodes.emplace_back(mid - half * x[i], half * w[i]);
      nodes.emplace_back(mid + half * x[i], half * w[i]);
    }
  }
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

double aep_gwh(const std::vector<Vec2>& positions, const WindRose& rose,
               const TurbineSpec& spec) {
  spec.check();
  check_rose_values(rose);
  if (positions.empty()) return 0.0;
  std::vector<std::size_t> all(rose.sectors.size());
  std::iota(all.begin(), all.end(), 0);
  return Evaluator(positions, rose, spec, all, false).energy() / 1e9;
}

double aep_gwh(const Layout& layout, const WindRose& rose,
               const TurbineSpec& spec) {
  return aep_gwh(layout.local(), rose, spec);
}

namespace {

// Pair distances in meters: haversine between geographic points when they
// are given, planar otherwise.
class PairDistance {
 public:
  PairDistance(const std::vector<Vec2>& positions,
               const geo::LocalFrame* frame)
      : pos_(positions) {
    if (frame) {
      for (const Vec2& p : positions) geo_.push_back(frame->to_geo(p));
    }
  }
  explicit PairDistance(std::vector<geo::GeoPoint> points)
      : geo_(std::move(points)) {}

  std::size_t size() const { return geo_.empty() ? pos_.size() : geo_.size(); }
  double operator()(std::size_t i, std::size_t j) const {
    if (!geo_.empty()) return geo::haversine_km(geo_[i], geo_[j]) * 1000.0;
    return dist(pos_[i], pos_[j]);
  }

 private:
  std::vector<Vec2> pos_;
  std::vector<geo::GeoPoint> geo_;
};

double pair_distance(const geo::LocalFrame& frame, const Vec2& a,
                     const Vec2& b) {
  return geo::haversine_km(frame.to_geo(a), frame.to_geo(b)) * 1000.0;
}

double spacing_penalty(const PairDistance& d, double spacing_min) {
  double sum = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      double dij = d(i, j);
      if (dij < spacing_min) sum += spacing_min - dij;
    }
  }
  return sum;
}

double boundary_penalty(const std::vector<Vec2>& positions,
                        const std::vector<Vec2>& ring) {
  double sum = 0.0;
  for (const Vec2& p : positions) {
    if (!geo::planar::ring_contains(ring, p)) {
      sum += dist(p, geo::planar::closest_on_ring(ring, p));
    }
  }
  return sum;
}

}  // namespace

Penalties penalties(const std::vector<Vec2>& positions,
                    const std::vector<Vec2>& ring, double spacing_min,
                    const geo::LocalFrame* frame) {
  return {spacing_penalty(PairDistance(positions, frame), spacing_min),
          boundary_penalty(positions, ring)};
}

Penalties penalties(const Layout& layout, const geo::Polygon& boundary,
                    double spacing_min) {
  geo::LocalFrame frame(layout.anchor);
  return {spacing_penalty(PairDistance(layout.points), spacing_min),
          boundary_penalty(layout.local(), local_ring(boundary, frame))};
}

void OptConfig::check() const {
  if (iterations <= 0) throw ConfigError("iterations must be positive");
  if (!(spacing_min_m > 0)) throw ConfigError("spacing_min must be positive");
  if (!(learning_rate_start_m > 0) || !(learning_rate_end_m > 0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (!(spacing_weight >= 0) || !(boundary_weight >= 0)) {
    throw ConfigError("penalty weights must be non-negative");
  }
  if (sectors_per_iteration <= 0) {
    throw ConfigError("sectors_per_iteration must be positive");
  }
  if (!(fd_step_m > 0)) throw ConfigError("fd_step must be positive");
  if (!(projection_margin_m >= 0)) {
    throw ConfigError("projection_margin must be non-negative");
  }
  if (boundary.outer.empty()) throw ConfigError("optimizer needs a boundary");
  geo::check_geometry(boundary);
}

std::vector<double> aep_gradient(const std::vector<Vec2>& positions,
                                 const WindRose& rose, const TurbineSpec& spec,
                                 const std::vector<std::size_t>& sectors,
                                 double step_m) {
  Evaluator ev(positions, rose, spec, sectors, true);
  std::vector<double> grad(2 * positions.size(), 0.0);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int c = 0; c < 2; ++c) {
      Vec2 plus = positions[i], minus = positions[i];
      (c == 0 ? plus.x : plus.y) += step_m;
      (c == 0 ? minus.x : minus.y) -= step_m;
      grad[2 * i + c] =
          (ev.delta(i, plus) - ev.delta(i, minus)) / (2.0 * step_m) / 1e9;
    }
  }
  return grad;
}

bool project_feasible(std::vector<Vec2>& pos, const std::vector<Vec2>& ring,
                      double spacing_min, double margin,
                      const geo::LocalFrame* frame, int max_passes) {
  double target = spacing_min + margin;
  for (int pass = 0; pass < max_passes; ++pass) {
    if (penalties(pos, ring, spacing_min, frame).feasible()) return true;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (std::size_t j = i + 1; j < pos.size(); ++j) {
        double d = dist(pos[i], pos[j]);
        double dm = frame ? pair_distance(*frame, pos[i], pos[j]) : d;
        if (dm >= target) continue;
        double ex = 1.0, ey = 0.0;
        if (d > 0) {
          ex = (pos[j].x - pos[i].x) / d;
          ey = (pos[j].y - pos[i].y) / d;
        }
        double push = 0.5 * (target - dm) * (dm > 0 ? d / dm : 1.0);
        pos[i].x -= ex * push;
        pos[i].y -= ey * push;
        pos[j].x += ex * push;
        pos[j].y += ey * push;
      }
    }
    for (Vec2& p : pos) {
      if (geo::planar::ring_contains(ring, p)) continue;
      Vec2 c = geo::planar::closest_on_ring(ring, p);
      double d = dist(p, c);
      p = {c.x + (c.x - p.x) / d * margin, c.y + (c.y - p.y) / d * margin};
    }
  }
  return penalties(pos, ring, spacing_min, frame).feasible();
}

OptResult optimize(const Layout& layout0, const WindRose& rose,
                   const TurbineSpec& spec, const OptConfig& config) {
  config.check();
  spec.check();
  check_rose_values(rose);
  layout0.check();

  geo::LocalFrame frame(layout0.anchor);
  std::vector<Vec2> ring = local_ring(config.boundary, frame);
  std::vector<Vec2> pos = layout0.local();
  const std::size_t n = pos.size();
  const double smin = config.spacing_min_m;

  OptResult result;
  auto record = [&](int it, const std::vector<Vec2>& p) {
    Penalties pen = penalties(p, ring, smin, &frame);
    TraceRow row{it, aep_gwh(p, rose, spec), pen.spacing_m, pen.boundary_m};
    result.trace.push_back(row);
    return std::make_pair(row.aep_gwh, pen.feasible());
  };

  std::vector<Vec2> best;
  double best_aep = 0.0;
  bool have_best = false;
  auto consider = [&](int it, const std::vector<Vec2>& p, double aep,
                      bool feasible) {
    if (feasible && (!have_best || aep > best_aep)) {
      best = p;
      best_aep = aep;
      have_best = true;
      result.best_iteration = it;
    }
  };

  auto [aep0, feas0] = record(0, pos);
  result.aep_initial_gwh = aep0;
  consider(0, pos, aep0, feas0);

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(rose.sectors.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t k = std::min<std::size_t>(config.sectors_per_iteration,
                                        order.size());
  std::vector<double> m(2 * n, 0.0), v(2 * n, 0.0);
  const double b1 = 0.9, b2 = 0.999, eps = 1e-12;

  for (int t = 1; t <= config.iterations && n > 0; ++t) {
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> sel(order.begin(), order.begin() + k);
    std::sort(sel.begin(), sel.end());
    std::vector<double> g = aep_gradient(pos, rose, spec, sel, config.fd_step_m);

    double mu_s = config.spacing_weight * t;
    double mu_b = config.boundary_weight * t;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double d = dist(pos[i], pos[j]);
        if (d == 0.0) continue;
        double dm = pair_distance(frame, pos[i], pos[j]);
        if (dm >= smin) continue;
        double f = 2.0 * mu_s * (smin - dm) / d;
        double fx = f * (pos[i].x - pos[j].x), fy = f * (pos[i].y - pos[j].y);
        g[2 * i] += fx;
        g[2 * i + 1] += fy;
        g[2 * j] -= fx;
        g[2 * j + 1] -= fy;
      }
      if (!geo::planar::ring_contains(ring, pos[i])) {
        Vec2 c = geo::planar::closest_on_ring(ring, pos[i]);
        g[2 * i] += 2.0 * mu_b * (c.x - pos[i].x);
        g[2 * i + 1] += 2.0 * mu_b * (c.y - pos[i].y);
      }
    }

    double frac = config.iterations == 1
                      ? 0.0
                      : static_cast<double>(t - 1) / (config.iterations - 1);
    double lr = config.learning_rate_start_m +
                frac * (config.learning_rate_end_m - config.learning_rate_start_m);
    double c1 = 1.0 - std::pow(b1, t), c2 = 1.0 - std::pow(b2, t);
    for (std::size_t q = 0; q < 2 * n; ++q) {
      m[q] = b1 * m[q] + (1 - b1) * g[q];
      v[q] = b2 * v[q] + (1 - b2) * g[q] * g[q];
      double stepv = lr * (m[q] / c1) / (std::sqrt(v[q] / c2) + eps);
      (q % 2 == 0 ? pos[q / 2].x : pos[q / 2].y) += stepv;
    }

    auto [aep, feasible] = record(t, pos);
    consider(t, pos, aep, feasible);
  }

  std::vector<Vec2> projected = pos;
  if (project_feasible(projected, ring, smin, config.projection_margin_m,
                       &frame)) {
    consider(config.iterations + 1, projected,
             aep_gwh(projected, rose, spec), true);
  }

  result.feasible = have_best;
  const std::vector<Vec2>& chosen = have_best ? best : projected;
  result.layout =
      Layout::from_local(layout0.anchor, layout0.ids, chosen, layout0.rows);
  result.aep_final_gwh = have_best ? best_aep : aep_gwh(chosen, rose, spec);
  return result;
}

Layout generate_grid_layout(int rows, int count, const geo::Polygon& boundary,
                            double spacing_min_m, double inset_m,
                            std::string_view id_prefix) {
  if (rows <= 0 || count <= 0 || rows > count) {
    throw LayoutError("need 0 < rows <= count");
  }
  geo::check_geometry(boundary);
  geo::LocalFrame frame(geo::vertex_centroid(boundary));
  std::vector<Vec2> ring = local_ring(boundary, frame);

  // Principal axis of the distinct ring vertices.
  std::size_t nv = ring.size() - 1;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    mx += ring[i].x;
    my += ring[i].y;
  }
  mx /= nv;
  my /= nv;
  double cxx = 0, cyy = 0, cxy = 0;
  for (std::size_t i = 0; i < nv; ++i) {
    double dx = ring[i].x - mx, dy = ring[i].y - my;
    cxx += dx * dx;
    cyy += dy * dy;
    cxy += dx * dy;
  }
  double th = 0.5 * std::atan2(2 * cxy, cxx - cyy);
  Vec2 u{std::cos(th), std::sin(th)};
  Vec2 w{-std::sin(th), std::cos(th)};
  auto along = [&](const Vec2& p) { return p.x * u.x + p.y * u.y; };
  auto across = [&](const Vec2& p) { return p.x * w.x + p.y * w.y; };

  double wmin = across(ring[0]), wmax = wmin;
  for (const Vec2& p : ring) {
    wmin = std::min(wmin, across(p));
    wmax = std::max(wmax, across(p));
  }
  // Longest interior chord of the row line at offset o, shrunk by the inset.
  auto chord = [&](double o) {
    std::vector<double> hits;
    for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
      double a = across(ring[i]) - o, b = across(ring[i + 1]) - o;
      if ((a < 0) == (b < 0)) continue;
      double f = a / (a - b);
      hits.push_back(along(ring[i]) + f * (along(ring[i + 1]) - along(ring[i])));
    }
    std::sort(hits.begin(), hits.end());
    std::pair<double, double> best{0, -1};
    for (std::size_t i = 0; i + 1 < hits.size(); i += 2) {
      if (hits[i + 1] - hits[i] > best.second - best.first) {
        best = {hits[i], hits[i + 1]};
      }
    }
    return std::make_pair(best.first + inset_m, best.second - inset_m);
  };

  std::vector<Vec2> pos;
  std::vector<int> row_of;
  std::vector<std::string> ids;
  // Tapered ends can leave the outer rows too short; pull the rows inwards
  // until every row fits or the row gap would drop below the spacing.
  for (double edge = inset_m;; edge += 100.0) {
    std::vector<double> offsets;
    if (rows == 1) {
      offsets.push_back(0.5 * (wmin + wmax));
    } else {
      double gap = (wmax - wmin - 2 * edge) / (rows - 1);
      if (!(gap >= spacing_min_m)) {
        throw LayoutError("boundary too small for " + std::to_string(rows) +
                          " rows of " + std::to_string(count) +
                          " turbines at the minimum spacing");
      }
      for (int r = 0; r < rows; ++r) offsets.push_back(wmin + edge + r * gap);
    }
    std::vector<std::pair<double, double>> chords;
    for (double o : offsets) chords.push_back(chord(o));

    std::vector<int> sizes(rows, count / rows);
    std::vector<int> by_length(rows);
    std::iota(by_length.begin(), by_length.end(), 0);
    std::stable_sort(by_length.begin(), by_length.end(), [&](int a, int b) {
      return chords[a].second - chords[a].first >
             chords[b].second - chords[b].first;
    });
    for (int e = 0; e < count % rows; ++e) ++sizes[by_length[e]];

    bool fits = true;
    for (int r = 0; r < rows && fits; ++r) {
      auto [s0, s1] = chords[r];
      int n = sizes[r];
      fits = s1 >= s0 && (n == 1 || (s1 - s0) / (n - 1) >= spacing_min_m);
    }
    if (!fits) {
      if (rows == 1) throw LayoutError("boundary too small for one row");
      continue;
    }
    for (int r = 0; r < rows; ++r) {
      auto [s0, s1] = chords[r];
      int n = sizes[r];
      for (int i = 0; i < n; ++i) {
        double s = n == 1 ? 0.5 * (s0 + s1) : s0 + i * (s1 - s0) / (n - 1);
        pos.push_back({s * u.x + offsets[r] * w.x, s * u.y + offsets[r] * w.y});
        row_of.push_back(r);
        ids.push_back(std::string(id_prefix) + std::to_string(pos.size()));
      }
    }
    break;
  }
  if (!penalties(pos, ring, spacing_min_m, &frame).feasible()) {
    throw LayoutError("boundary too small for the requested grid");
  }
  return Layout::from_local(frame.origin(), std::move(ids), pos,
                            std::move(row_of));
}

Graph layout_to_graph(const Layout& layout) {
  layout.check();
  Graph g;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    Iri t = vocab::term(layout.ids[i]);
    g.insert({t, vocab::type, vocab::Turbine});
    g.insert({t, vocab::hasGeometry,
              Literal::of_wkt(geo::Point{layout.points[i]})});
  }
  return g;
}

std::string write_layout_csv(const Layout& layout) {
  layout.check();
  bool with_rows = !layout.rows.empty();
  std::string out = with_rows ? "turbine_id,lon,lat,row\n" : "turbine_id,lon,lat\n";
  for (std::size_t i = 0; i < layout.size(); ++i) {
    out += layout.ids[i] + "," + geo::format_coordinate(layout.points[i].lon) +
           "," + geo::format_coordinate(layout.points[i].lat);
    if (with_rows) out += "," + std::to_string(layout.rows[i] + 1);
    out += "\n";
  }
  return out;
}

Layout parse_layout_csv(std::string_view text) {
  std::vector<std::vector<std::string>> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string line(text.substr(pos, nl == std::string_view::npos
                                          ? std::string_view::npos
                                          : nl - pos));
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos
                                             ? std::string::npos
                                             : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    lines.push_back(std::move(cells));
  }
  if (lines.empty()) throw ParseError("empty layout file", 1, 1);
  const auto& header = lines[0];
  bool with_rows;
  if (header == std::vector<std::string>{"turbine_id", "lon", "lat"}) {
    with_rows = false;
  } else if (header ==
             std::vector<std::string>{"turbine_id", "lon", "lat", "row"}) {
    with_rows = true;
  } else {
    throw ParseError("expected header turbine_id,lon,lat[,row]", 1, 1);
  }

  auto number = [](const std::string& s, std::size_t line) {
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0' || !std::isfinite(v)) {
      throw ParseError("bad number '" + s + "'", line, 1);
    }
    return v;
  };

  Layout l;
  std::set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto& c = lines[i];
    if (c.size() == 1 && c[0].empty()) continue;
    if (c.size() != (with_rows ? 4u : 3u) || c[0].empty()) {
      throw ParseError("wrong number of fields", i + 1, 1);
    }
    if (!seen.insert(c[0]).second) {
      throw ParseError("duplicate turbine id " + c[0], i + 1, 1);
    }
    geo::GeoPoint p{number(c[1], i + 1), number(c[2], i + 1)};
    try {
      geo::check_point(p);
    } catch (const GeometryError& e) {
      throw ParseError(e.what(), i + 1, 1);
    }
    l.ids.push_back(c[0]);
    l.points.push_back(p);
    if (with_rows) {
      double r = number(c[3], i + 1);
      if (r < 1 || r != std::floor(r)) throw ParseError("bad row", i + 1, 1);
      l.rows.push_back(static_cast<int>(r) - 1);
    }
  }
  if (!l.points.empty()) {
    double lon = 0, lat = 0;
    for (const geo::GeoPoint& p : l.points) {
      lon += p.lon;
      lat += p.lat;
    }
    l.anchor = {lon / l.points.size(), lat / l.points.size()};
  }
  return l;
}

std::string write_trace_csv(const std::vector<TraceRow>& trace) {
  std::string out = "iteration,aep_gwh,spacing_pen_m,boundary_pen_m\n";
  for (const TraceRow& r : trace) {
    out += std::to_string(r.iteration) + "," + fmt(r.aep_gwh, 6) + "," +
           fmt(r.spacing_pen_m, 6) + "," + fmt(r.boundary_pen_m, 6) + "\n";
  }
  return out;
}

std::vector<DeviationRow> row_deviation_stats(const Layout& a, const Layout& b,
                                              const std::vector<int>& rows) {
  if (a.size() != b.size() || rows.size() != a.size()) {
    throw LayoutError("deviation needs equal turbine counts and one row each");
  }
  geo::LocalFrame frame(a.anchor);
  std::vector<Vec2> pa, pb;
  for (const auto& p : a.points) pa.push_back(frame.to_local(p));
  for (const auto& p : b.points) pb.push_back(frame.to_local(p));

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < rows.size(); ++i) members[rows[i]].push_back(i);

  auto stats = [](const std::string& label, const std::vector<Vec2>& diffs) {
    DeviationRow r;
    r.label = label;
    r.count = diffs.size();
    if (diffs.empty()) return r;
    for (const Vec2& d : diffs) {
      r.mean_x += d.x;
      r.mean_y += d.y;
    }
    r.mean_x /= diffs.size();
    r.mean_y /= diffs.size();
    for (const Vec2& d : diffs) {
      r.std_x += (d.x - r.mean_x) * (d.x - r.mean_x);
      r.std_y += (d.y - r.mean_y) * (d.y - r.mean_y);
    }
    r.std_x = std::sqrt(r.std_x / diffs.size());
    r.std_y = std::sqrt(r.std_y / diffs.size());
    return r;
  };

  std::vector<DeviationRow> out;
  std::vector<Vec2> all;
  for (const auto& [row, idx] : members) {
    struct Cand {
      double d;
      std::size_t i, j;
    };
    std::vector<Cand> cands;
    for (std::size_t i : idx) {
      for (std::size_t j : idx) cands.push_back({dist(pa[i], pb[j]), i, j});
    }
    std::stable_sort(cands.begin(), cands.end(),
                     [](const Cand& x, const Cand& y) { return x.d < y.d; });
    std::set<std::size_t> used_a, used_b;
    std::vector<Vec2> diffs;
    for (const Cand& c : cands) {
      if (used_a.count(c.i) || used_b.count(c.j)) continue;
      used_a.insert(c.i);
      used_b.insert(c.j);
      diffs.push_back({std::fabs(pb[c.j].x - pa[c.i].x),
                       std::fabs(pb[c.j].y - pa[c.i].y)});
    }
    all.insert(all.end(), diffs.begin(), diffs.end());
    out.push_back(stats(std::to_string(row + 1), diffs));
  }
  out.push_back(stats("Overall", all));
  return out;
}

std::string write_deviation_csv(const std::vector<DeviationRow>& rows) {
  std::string out = "Row,Mean X,Std Dev X,Mean Y,Std Dev Y\n";
  for (const DeviationRow& r : rows) {
    out += r.label + "," + fmt(r.mean_x, 2) + "," + fmt(r.std_x, 2) + "," +
           fmt(r.mean_y, 2) + "," + fmt(r.std_y, 2) + "\n";
  }
  return out;
}

}  // namespace semtwin::layout
