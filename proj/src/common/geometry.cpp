#include "common/geometry.hpp"

#include <algorithm>
#include <limits>

namespace sw {

Polygon make_rectangle(Vec2 center, double half_w, double half_h, double rotation) {
  const double c = std::cos(rotation), s = std::sin(rotation);
  const Vec2 corners[4] = {{-half_w, -half_h}, {half_w, -half_h}, {half_w, half_h}, {-half_w, half_h}};
  Polygon poly;
  for (const Vec2& k : corners) {
    poly.vertices.push_back({center.x + c * k.x - s * k.y, center.y + s * k.x + c * k.y});
  }
  return poly;
}

bool point_in_polygon(const Polygon& poly, Vec2 p) {
  const std::size_t n = poly.vertices.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = poly.vertices[i];
    const Vec2 b = poly.vertices[(i + 1) % n];
    if (cross(b - a, p - a) < 0.0) return false;
  }
  return true;
}

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
  const Vec2 ab = b - a;
  const double len2 = ab.squared_norm();
  if (len2 == 0.0) return distance(p, a);
  const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
  return distance(p, a + t * ab);
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double v = cross(b - a, c - a);
  if (v > 0.0) return 1;
  if (v < 0.0) return -1;
  return 0;
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

}  // namespace

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
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

bool segment_intersects_polygon(Vec2 a, Vec2 b, const Polygon& poly) {
  if (point_in_polygon(poly, a) || point_in_polygon(poly, b)) return true;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (segments_intersect(a, b, poly.vertices[i], poly.vertices[(i + 1) % n])) return true;
  }
  return false;
}

double segment_polygon_distance(Vec2 a, Vec2 b, const Polygon& poly) {
  if (segment_intersects_polygon(a, b, poly)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 c = poly.vertices[i];
    const Vec2 d = poly.vertices[(i + 1) % n];
    best = std::min({best, point_segment_distance(a, c, d), point_segment_distance(b, c, d),
                     point_segment_distance(c, a, b)});
  }
  return best;
}

std::optional<double> ray_polygon_hit(Vec2 origin, Vec2 dir, const Polygon& poly) {
  if (point_in_polygon(poly, origin)) return 0.0;
  std::optional<double> best;
  const std::size_t n = poly.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 c = poly.vertices[i];
    const Vec2 e = poly.vertices[(i + 1) % n] - c;
    const double denom = cross(dir, e);
    if (denom == 0.0) continue;
    const Vec2 w = c - origin;
    const double t = cross(w, e) / denom;
    const double u = cross(w, dir) / denom;
    if (t >= 0.0 && u >= 0.0 && u <= 1.0 && (!best || t < *best)) best = t;
  }
  return best;
}

std::optional<double> ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius) {
  const Vec2 oc = origin - center;
  const double b = dot(oc, dir);
  const double c = oc.squared_norm() - radius * radius;
  if (c <= 0.0) return 0.0;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t < 0.0) return std::nullopt;
  return t;
}

double min_distance_linear_motion(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1) {
  // Relative position r(t) = (a0 - b0) + t * ((a1 - a0) - (b1 - b0)), t in [0, 1].
  const Vec2 r0 = a0 - b0;
  const Vec2 dr = (a1 - a0) - (b1 - b0);
  const double len2 = dr.squared_norm();
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(-dot(r0, dr) / len2, 0.0, 1.0);
  return (r0 + t * dr).norm();
}

}  // namespace sw
