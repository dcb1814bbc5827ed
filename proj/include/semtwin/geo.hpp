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

// WKT geometry and the geodesic / planar predicates used by the rule engine,
// the layout optimizer and the storm simulator. Coordinates are always
// (lon, lat) in decimal degrees.

#pragma once

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace semtwin::geo {

// Mean Earth radius used by every distance in the library.
inline constexpr double kEarthRadiusKm = 6371.0;

struct GeoPoint {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

// Throws GeometryError when either coordinate is non-finite or out of range.
void check_point(const GeoPoint& p);

struct Point {
  GeoPoint position;
  friend bool operator==(const Point&, const Point&) = default;
};

struct LineString {
  std::vector<GeoPoint> points;  // at least 2
  friend bool operator==(const LineString&, const LineString&) = default;
};

// Rings are closed (first == last) with at least 4 positions and are not
// self-intersecting.
struct Polygon {
  std::vector<GeoPoint> outer;
  std::vector<std::vector<GeoPoint>> holes;
  friend bool operator==(const Polygon&, const Polygon&) = default;
};

using Geometry = std::variant<Point, LineString, Polygon>;

// Validates ring closure, ring size, self-intersection and coordinate range.
void check_geometry(const Geometry& g);

Geometry parse_wkt(std::string_view text);
std::string serialize_wkt(const Geometry& g);

// Shortest decimal string that round-trips to the same double.
std::string format_coordinate(double v);

double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Initial great-circle bearing, 0 = north, 90 = east, in [0, 360).
// Throws GeometryError for coincident points.
double bearing_deg(const GeoPoint& from, const GeoPoint& to);

// Point/point pairs use the haversine distance. Everything else is measured
// in an equirectangular projection centred on the centroid of both
// geometries' vertices.
double min_distance_m(const Geometry& a, const Geometry& b);
bool within_distance(const Geometry& a, const Geometry& b, double meters);

// Boundary contact counts as intersection.
bool intersects(const Geometry& a, const Geometry& b);

// Ray casting; points on the outer boundary or on a hole boundary count as
// inside, points strictly inside a hole do not.
bool contains(const Polygon& polygon, const GeoPoint& point);

// Generalised containment used by the `contains` rule built-in: every vertex
// of `inner` lies in `outer`, which must be a polygon.
bool contains(const Geometry& outer, const Geometry& inner);

struct Vec2 {
  double x = 0.0;  // meters east
  double y = 0.0;  // meters north
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

// Local equirectangular frame: meters east/north of an origin.
class LocalFrame {
 public:
  explicit LocalFrame(GeoPoint origin);

  const GeoPoint& origin() const { return origin_; }
  Vec2 to_local(const GeoPoint& p) const;
  GeoPoint to_geo(const Vec2& v) const;

 private:
  GeoPoint origin_;
  double meters_per_deg_lat_;
  double meters_per_deg_lon_;
};

// Mean of the distinct ring vertices (the closing vertex is not repeated).
GeoPoint vertex_centroid(const Polygon& polygon);

namespace planar {

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d);
double segment_distance(const Vec2& a, const Vec2& b, const Vec2& c,
                        const Vec2& d);
// Ray casting with boundary counted as inside.
bool ring_contains(const std::vector<Vec2>& ring, const Vec2& p);
// Closest point on the ring boundary to p.
Vec2 closest_on_ring(const std::vector<Vec2>& ring, const Vec2& p);

}  // namespace planar

}  // namespace semtwin::geo
