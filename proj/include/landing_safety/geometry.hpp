#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace landing_safety {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

inline Vec3 operator+(const Vec3 & a, const Vec3 & b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Vec3 operator-(const Vec3 & a, const Vec3 & b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Vec3 operator*(double s, const Vec3 & v) { return {s * v.x, s * v.y, s * v.z}; }
inline double norm(const Vec3 & v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

// Vehicle body is modeled as a vertical cylinder. position.z is the lowest
// point of the body (landing gear plane); the sensor sits at the same point.
constexpr double kVehicleBodyHeight = 2.0;

struct VehicleState {
  Vec3 position;
  double vertical_velocity = 0.0;  // m/s, negative while descending
  double footprint_radius = 1.5;   // m
};

// Axis-aligned box obstacle. Static within one scenario.
struct ObstacleBox {
  std::string id;
  Vec3 center;
  Vec3 half_extents;
};

inline Vec3 box_min(const ObstacleBox & b) { return b.center - b.half_extents; }
inline Vec3 box_max(const ObstacleBox & b) { return b.center + b.half_extents; }

struct LandingTarget {
  Vec3 center;      // center.z is the target altitude
  double radius = 5.0;
};

struct Scene {
  std::vector<ObstacleBox> obstacles;
  LandingTarget target;
};

inline void validate(const Scene & scene) {
  for (std::size_t i = 0; i < scene.obstacles.size(); ++i) {
    const auto & o = scene.obstacles[i];
    if (o.half_extents.x <= 0.0 || o.half_extents.y <= 0.0 || o.half_extents.z <= 0.0) {
      throw std::invalid_argument("obstacle '" + o.id + "' has non-positive half extents");
    }
    for (std::size_t j = i + 1; j < scene.obstacles.size(); ++j) {
      if (scene.obstacles[j].id == o.id) {
        throw std::invalid_argument("duplicate obstacle id '" + o.id + "'");
      }
    }
  }
  if (scene.target.radius <= 0.0) {
    throw std::invalid_argument("landing target radius must be positive");
  }
}

// Distance in the horizontal plane from a vertical axis through (x, y) to the
// box footprint. Zero when the axis pierces the footprint.
inline double horizontal_distance_to_box(double x, double y, const ObstacleBox & box)
{
  const Vec3 lo = box_min(box);
  const Vec3 hi = box_max(box);
  const double dx = std::max({lo.x - x, 0.0, x - hi.x});
  const double dy = std::max({lo.y - y, 0.0, y - hi.y});
  return std::sqrt(dx * dx + dy * dy);
}

inline bool vertical_spans_overlap(double lo_a, double hi_a, double lo_b, double hi_b)
{
  return lo_a <= hi_b && lo_b <= hi_a;
}

// Body cylinder against one box. Touching counts as collision.
inline bool collision_check(const VehicleState & vehicle, const ObstacleBox & box)
{
  const double body_lo = vehicle.position.z;
  const double body_hi = vehicle.position.z + kVehicleBodyHeight;
  if (!vertical_spans_overlap(body_lo, body_hi, box_min(box).z, box_max(box).z)) {
    return false;
  }
  return horizontal_distance_to_box(vehicle.position.x, vehicle.position.y, box) <=
         vehicle.footprint_radius;
}

inline bool collision_check(const VehicleState & vehicle, const Scene & scene)
{
  for (const auto & box : scene.obstacles) {
    if (collision_check(vehicle, box)) {
      return true;
    }
  }
  return false;
}

// True when the box intersects the prism swept by the vehicle footprint during
// the remaining vertical descent, i.e. between target altitude and the current
// body. Touching counts.
inline bool in_landing_path(
  const ObstacleBox & box, const VehicleState & vehicle, const LandingTarget & target)
{
  const double path_lo = target.center.z;
  const double path_hi = vehicle.position.z + kVehicleBodyHeight;
  if (!vertical_spans_overlap(path_lo, path_hi, box_min(box).z, box_max(box).z)) {
    return false;
  }
  return horizontal_distance_to_box(vehicle.position.x, vehicle.position.y, box) <=
         vehicle.footprint_radius;
}

// Shortest distance between the body cylinder and the box surface; zero when
// they touch or overlap.
inline double clearance_to_box(const VehicleState & vehicle, const ObstacleBox & box)
{
  const double dh = std::max(
    0.0, horizontal_distance_to_box(vehicle.position.x, vehicle.position.y, box) -
           vehicle.footprint_radius);
  const double body_lo = vehicle.position.z;
  const double body_hi = vehicle.position.z + kVehicleBodyHeight;
  double dv = 0.0;
  if (body_lo > box_max(box).z) {
    dv = body_lo - box_max(box).z;
  } else if (body_hi < box_min(box).z) {
    dv = box_min(box).z - body_hi;
  }
  return std::sqrt(dh * dh + dv * dv);
}

}  // namespace landing_safety
