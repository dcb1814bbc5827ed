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

#include "semtwin/geo.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>

#include "semtwin/error.hpp"

namespace semtwin::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

class WktReader {
 public:
  explicit WktReader(std::string_view text) : text_(text) {}

  Geometry read() {
    skip_ws();
    std::string keyword = word();
    Geometry g;
    if (keyword == "POINT") {
      expect('(');
      GeoPoint p = vertex();
      expect(')');
      g = Point{p};
    } else if (keyword == "LINESTRING") {
      LineString ls{vertices()};
      if (ls.points.size() < 2) fail("LINESTRING needs at least 2 points");
      g = std::move(ls);
    } else if (keyword == "POLYGON") {
      Polygon poly;
      expect('(');
      poly.outer = vertices();
      while (match(',')) poly.holes.push_back(vertices());
      expect(')');
      g = std::move(poly);
    } else if (keyword.empty()) {
      fail("expected geometry keyword");
    } else {
      fail("unsupported geometry type '" + keyword + "'");
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after geometry");
    try {
      check_geometry(g);
    } catch (const GeometryError& e) {
      throw ParseError(e.what(), 1, pos_ + 1);
    }
    return g;
  }

 private:
  [[noreturn]] void fail(const std::string& message) const {
    throw ParseError("WKT: " + message, 1, pos_ + 1);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
  }

  std::string word() {
    std::string out;
    while (pos_ < text_.size() &&
           std::isalpha(static_cast<unsigned char>(text_[pos_]))) {
      out.push_back(static_cast<char>(
          std::toupper(static_cast<unsigned char>(text_[pos_]))));
      ++pos_;
    }
    return out;
  }

  bool match(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!match(c)) fail(std::string("expected '") + c + "'");
  }

  double number() {
    skip_ws();
    std::size_t start = pos_;
    if (pos_ < text_.size() && text_[pos_] == '+') ++pos_;
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(text_.data() + pos_, text_.data() + text_.size(), value);
    if (ec != std::errc() || ptr == text_.data() + pos_) {
      pos_ = start;
      fail("expected number");
    }
    pos_ = static_cast<std::size_t>(ptr - text_.data());
    return value;
  }

  GeoPoint vertex() {
    std::size_t start = pos_;
    GeoPoint p;
    p.lon = number();
    p.lat = number();
    try {
      check_point(p);
    } catch (const GeometryError& e) {
      throw ParseError(e.what(), 1, start + 1);
    }
    return p;
  }

  std::vector<GeoPoint> vertices() {
    expect('(');
    std::vector<GeoPoint> out;
    out.push_back(vertex());
    while (match(',')) out.push_back(vertex());
    expect(')');
    return out;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int orientation(const Vec2& o, const Vec2& a, const Vec2& b) {
  double c = cross(o, a, b);
  return (c > 0.0) - (c < 0.0);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

Vec2 as_vec(const GeoPoint& p) { return {p.lon, p.lat}; }

void check_ring(const std::vector<GeoPoint>& ring, const char* what) {
  if (ring.size() < 4) {
    throw GeometryError(std::string(what) + " ring needs at least 4 points");
  }
  if (!(ring.front() == ring.back())) {
    throw GeometryError(std::string("unclosed ") + what + " ring");
  }
  // Non-adjacent edges must not touch.
  const std::size_t edges = ring.size() - 1;
  for (std::size_t i = 0; i < edges; ++i) {
    for (std::size_t j = i + 2; j < edges; ++j) {
      if (i == 0 && j == edges - 1) continue;
      if (planar::segments_intersect(as_vec(ring[i]), as_vec(ring[i + 1]),
                                     as_vec(ring[j]), as_vec(ring[j + 1]))) {
        throw GeometryError(std::string(what) + " ring self-intersects at edges " +
                            std::to_string(i) + " and " + std::to_string(j));
      }
    }
  }
}

// Geometry flattened into a projected plane.
struct Projected {
  std::vector<Vec2> vertices;
  std::vector<std::pair<Vec2, Vec2>> segments;
  std::vector<std::vector<Vec2>> rings;  // [0] outer, rest holes
  bool is_polygon = false;
};

void collect_vertices(const Geometry& g, std::vector<GeoPoint>& out) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Point>) {
          out.push_back(v.position);
        } else if constexpr (std::is_same_v<T, LineString>) {
          out.insert(out.end(), v.points.begin(), v.points.end());
        } else {
          out.insert(out.end(), v.outer.begin(), v.outer.end());
          for (const auto& h : v.holes) out.insert(out.end(), h.begin(), h.end());
        }
      },
      g);
}

LocalFrame pair_frame(const Geometry& a, const Geometry& b) {
  std::vector<GeoPoint> all;
  collect_vertices(a, all);
  collect_vertices(b, all);
  double lon = 0.0;
  double lat = 0.0;
  for (const auto& p : all) {
    lon += p.lon;
    lat += p.lat;
  }
  const double n = static_cast<double>(all.size());
  return LocalFrame(GeoPoint{lon / n, lat / n});
}

Projected project(const Geometry& g, const LocalFrame& frame) {
  Projected out;
  auto line = [&](const std::vector<GeoPoint>& pts) {
    std::vector<Vec2> v;
    v.reserve(pts.size());
    for (const auto& p : pts) v.push_back(frame.to_local(p));
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
      out.segments.emplace_back(v[i], v[i + 1]);
    }
    out.vertices.insert(out.vertices.end(), v.begin(), v.end());
    return v;
  };
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Point>) {
          Vec2 p = frame.to_local(v.position);
          out.vertices.push_back(p);
          out.segments.emplace_back(p, p);
        } else if constexpr (std::is_same_v<T, LineString>) {
          line(v.points);
        } else {
          out.is_polygon = true;
          out.rings.push_back(line(v.outer));
          for (const auto& h : v.holes) out.rings.push_back(line(h));
        }
      },
      g);
  return out;
}

bool projected_contains(const Projected& poly, const Vec2& p) {
  if (!poly.is_polygon) return false;
  if (!planar::ring_contains(poly.rings[0], p)) return false;
  for (std::size_t i = 1; i < poly.rings.size(); ++i) {
    const auto& hole = poly.rings[i];
    if (planar::ring_contains(hole, p)) {
      // On the hole boundary still counts as inside the polygon.
      bool on_edge = false;
      for (std::size_t k = 0; k + 1 < hole.size(); ++k) {
        if (orientation(hole[k], hole[k + 1], p) == 0 &&
            on_segment(hole[k], hole[k + 1], p)) {
          on_edge = true;
          break;
        }
      }
      if (!on_edge) return false;
    }
  }
  return true;
}

bool projected_intersects(const Projected& a, const Projected& b) {
  for (const auto& [p, q] : a.segments) {
    for (const auto& [r, s] : b.segments) {
      if (planar::segments_intersect(p, q, r, s)) return true;
    }
  }
  if (a.is_polygon) {
    for (const auto& v : b.vertices) {
      if (projected_contains(a, v)) return true;
    }
  }
  if (b.is_polygon) {
    for (const auto& v : a.vertices) {
      if (projected_contains(b, v)) return true;
    }
  }
  return false;
}

}  // namespace

void check_point(const GeoPoint& p) {
  if (!std::isfinite(p.lon) || !std::isfinite(p.lat)) {
    throw GeometryError("coordinate is not finite");
  }
  if (p.lon < -180.0 || p.lon > 180.0) {
    throw GeometryError("longitude out of range: " + format_coordinate(p.lon));
  }
  if (p.lat < -90.0 || p.lat > 90.0) {
    throw GeometryError("latitude out of range: " + format_coordinate(p.lat));
  }
}

void check_geometry(const Geometry& g) {
  std::visit(
      [](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Point>) {
          check_point(v.position);
        } else if constexpr (std::is_same_v<T, LineString>) {
          if (v.points.size() < 2) {
            throw GeometryError("LINESTRING needs at least 2 points");
          }
          for (const auto& p : v.points) check_point(p);
        } else {
          for (const auto& p : v.outer) check_point(p);
          check_ring(v.outer, "outer");
          for (const auto& h : v.holes) {
            for (const auto& p : h) check_point(p);
            check_ring(h, "hole");
          }
        }
      },
      g);
}

Geometry parse_wkt(std::string_view text) { return WktReader(text).read(); }

std::string format_coordinate(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string serialize_wkt(const Geometry& g) {
  auto pt = [](const GeoPoint& p) {
    return format_coordinate(p.lon) + " " + format_coordinate(p.lat);
  };
  auto seq = [&](const std::vector<GeoPoint>& pts) {
    std::string out = "(";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out += ", ";
      out += pt(pts[i]);
    }
    return out + ")";
  };
  return std::visit(
      [&](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Point>) {
          return "POINT (" + pt(v.position) + ")";
        } else if constexpr (std::is_same_v<T, LineString>) {
          return "LINESTRING " + seq(v.points);
        } else {
          std::string out = "POLYGON (" + seq(v.outer);
          for (const auto& h : v.holes) out += ", " + seq(h);
          return out + ")";
        }
      },
      g);
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat * kDegToRad;
  const double phi2 = b.lat * kDegToRad;
  const double dphi = (b.lat - a.lat) * kDegToRad;
  const double dlambda = (b.lon - a.lon) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double bearing_deg(const GeoPoint& from, const GeoPoint& to) {
  if (from == to) throw GeometryError("bearing of coincident points");
  const double phi1 = from.lat * kDegToRad;
  const double phi2 = to.lat * kDegToRad;
  const double dlambda = (to.lon - from.lon) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) -
                   std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  double deg = std::atan2(y, x) / kDegToRad;
  deg = std::fmod(deg + 360.0, 360.0);
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

double min_distance_m(const Geometry& a, const Geometry& b) {
  const auto* pa = std::get_if<Point>(&a);
  const auto* pb = std::get_if<Point>(&b);
  if (pa && pb) return haversine_km(pa->position, pb->position) * 1000.0;

  LocalFrame frame = pair_frame(a, b);
  Projected ja = project(a, frame);
  Projected jb = project(b, frame);
  if (projected_intersects(ja, jb)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& [p, q] : ja.segments) {
    for (const auto& [r, s] : jb.segments) {
      best = std::min(best, planar::segment_distance(p, q, r, s));
    }
  }
  return best;
}

bool within_distance(const Geometry& a, const Geometry& b, double meters) {
  return min_distance_m(a, b) <= meters;
}

bool intersects(const Geometry& a, const Geometry& b) {
  const auto* pa = std::get_if<Point>(&a);
  const auto* pb = std::get_if<Point>(&b);
  if (pa && pb) return pa->position == pb->position;
  LocalFrame frame = pair_frame(a, b);
  return projected_intersects(project(a, frame), project(b, frame));
}

bool contains(const Polygon& polygon, const GeoPoint& point) {
  Geometry g = polygon;
  LocalFrame frame = pair_frame(g, Point{point});
  return projected_contains(project(g, frame), frame.to_local(point));
}

bool contains(const Geometry& outer, const Geometry& inner) {
  const auto* poly = std::get_if<Polygon>(&outer);
  if (!poly) return false;
  LocalFrame frame = pair_frame(outer, inner);
  Projected po = project(outer, frame);
  Projected pi = project(inner, frame);
  return std::all_of(pi.vertices.begin(), pi.vertices.end(),
                     [&](const Vec2& v) { return projected_contains(po, v); });
}

LocalFrame::LocalFrame(GeoPoint origin)
    : origin_(origin),
      meters_per_deg_lat_(kEarthRadiusKm * 1000.0 * kDegToRad),
      meters_per_deg_lon_(kEarthRadiusKm * 1000.0 * kDegToRad *
                          std::cos(origin.lat * kDegToRad)) {}

Vec2 LocalFrame::to_local(const GeoPoint& p) const {
  return {(p.lon - origin_.lon) * meters_per_deg_lon_,
          (p.lat - origin_.lat) * meters_per_deg_lat_};
}

GeoPoint LocalFrame::to_geo(const Vec2& v) const {
  return {origin_.lon + v.x / meters_per_deg_lon_,
          origin_.lat + v.y / meters_per_deg_lat_};
}

GeoPoint vertex_centroid(const Polygon& polygon) {
  double lon = 0.0;
  double lat = 0.0;
  const std::size_t n = polygon.outer.size() - 1;
  for (std::size_t i = 0; i < n; ++i) {
    lon += polygon.outer[i].lon;
    lat += polygon.outer[i].lat;
  }
  return {lon / static_cast<double>(n), lat / static_cast<double>(n)};
}

namespace planar {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
  }
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d) {
  if (segments_intersect(a, b, c, d)) return 0.0;
  return std::min({point_segment_distance(a, c, d),
                   point_segment_distance(b, c, d),
                   point_segment_distance(c, a, b),
                   point_segment_distance(d, a, b)});
}

bool ring_contains(const std::vector<Vec2>& ring, const Vec2& p) {
  bool inside = false;
  for (std::size_t i = 0, j = ring.size() - 1; i < ring.size(); j = i++) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[j];
    if (orientation(a, b, p) == 0 && on_segment(a, b, p)) return true;
    if ((a.y > p.y) != (b.y > p.y)) {
      const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x) inside = !inside;
    }
  }
  return inside;
}

Vec2 closest_on_ring(const std::vector<Vec2>& ring, const Vec2& p) {
  Vec2 best = ring.front();
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < ring.size(); ++i) {
    const Vec2& a = ring[i];
    const Vec2& b = ring[i + 1];
    const double dx = b.x - a.x;
    const double dy = b.y - a.y;
    const double len2 = dx * dx + dy * dy;
    double t = 0.0;
    if (len2 > 0.0) {
      t = std::clamp(((p.x - a.x) * dx + (p.y - a.y) * dy) / len2, 0.0, 1.0);
    }
    Vec2 q{a.x + t * dx, a.y + t * dy};
    const double d = std::hypot(p.x - q.x, p.y - q.y);
    if (d < best_d) {
      best_d = d;
      best = q;
    }
  }
  return best;
}

}  // namespace planar

}  // namespace semtwin::geo
