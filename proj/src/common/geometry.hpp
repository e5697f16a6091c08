#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

namespace sw {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2 a, Vec2 b) = default;

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

// Wraps to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::fmod(a + std::numbers::pi, kTwoPi);
  if (a <= 0.0) a += kTwoPi;
  return a - std::numbers::pi;
}

inline double deg_to_rad(double d) { return d * std::numbers::pi / 180.0; }
inline double rad_to_deg(double r) { return r * 180.0 / std::numbers::pi; }

struct Pose2 {
  Vec2 position;
  double heading = 0.0;  // radians, CCW from +x

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// World point -> ego frame of `pose` (pose at origin, heading along +x).
inline Vec2 to_ego(const Pose2& pose, Vec2 world) {
  const Vec2 d = world - pose.position;
  const double c = std::cos(pose.heading), s = std::sin(pose.heading);
  return {c * d.x + s * d.y, -s * d.x + c * d.y};
}

inline Vec2 from_ego(const Pose2& pose, Vec2 ego) {
  const double c = std::cos(pose.heading), s = std::sin(pose.heading);
  return {pose.position.x + c * ego.x - s * ego.y, pose.position.y + s * ego.x + c * ego.y};
}

// Convex polygon, counter-clockwise vertex order.
struct Polygon {
  std::vector<Vec2> vertices;

  friend bool operator==(const Polygon&, const Polygon&) = default;
};

Polygon make_rectangle(Vec2 center, double half_w, double half_h, double rotation);

bool point_in_polygon(const Polygon& poly, Vec2 p);
double point_segment_distance(Vec2 p, Vec2 a, Vec2 b);
bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d);
bool segment_intersects_polygon(Vec2 a, Vec2 b, const Polygon& poly);
double segment_polygon_distance(Vec2 a, Vec2 b, const Polygon& poly);

// Distance along the ray origin + t*dir (|dir| = 1) to the polygon boundary,
// or nullopt if it misses.
std::optional<double> ray_polygon_hit(Vec2 origin, Vec2 dir, const Polygon& poly);
std::optional<double> ray_circle_hit(Vec2 origin, Vec2 dir, Vec2 center, double radius);

// Minimum distance between two points moving linearly over the same interval:
// a0->a1 and b0->b1.
double min_distance_linear_motion(Vec2 a0, Vec2 a1, Vec2 b0, Vec2 b1);

}  // namespace sw
