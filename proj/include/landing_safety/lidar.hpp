#pragma once

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "landing_safety/geometry.hpp"

namespace landing_safety {

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

// Cells with no return inside max_range hold kNoReturn (infinity).
constexpr double kNoReturn = std::numeric_limits<double>::infinity();
inline bool is_return(double range) { return std::isfinite(range); }

// Rotating multi-laser rangefinder mounted at the lowest point of the body.
// Inclinations are measured downward from horizontal; row 0 must point
// straight down (90 degrees) and rows are ordered nadir outward.
struct LidarSpec {
  std::vector<double> inclinations_deg;
  double rotation_step_deg = 1.0;
  double rotation_period_s = 0.1;
  double max_range_m = 120.0;

  int rows() const { return static_cast<int>(inclinations_deg.size()); }
  int columns() const { return static_cast<int>(std::lround(360.0 / rotation_step_deg)); }
};

inline LidarSpec default_lidar()
{
  LidarSpec spec;
  for (int i = 0; i < 32; ++i) {
    spec.inclinations_deg.push_back(90.0 - i);
  }
  return spec;
}

inline void validate(const LidarSpec & spec)
{
  if (spec.inclinations_deg.empty()) {
    throw std::invalid_argument("lidar needs at least one laser");
  }
  if (spec.inclinations_deg.front() != 90.0) {
    throw std::invalid_argument("laser row 0 must point straight down (90 deg)");
  }
  for (std::size_t r = 0; r < spec.inclinations_deg.size(); ++r) {
    const double xi = spec.inclinations_deg[r];
    if (xi <= 0.0 || xi > 90.0) {
      throw std::invalid_argument("laser inclinations must lie in (0, 90] deg");
    }
    if (r > 0 && xi >= spec.inclinations_deg[r - 1]) {
      throw std::invalid_argument("laser inclinations must strictly decrease from nadir");
    }
  }
  if (spec.rotation_step_deg <= 0.0 ||
      std::abs(360.0 / spec.rotation_step_deg - spec.columns()) > 1e-9) {
    throw std::invalid_argument("rotation step must evenly divide 360 deg");
  }
  if (spec.rotation_period_s <= 0.0 || spec.max_range_m <= 0.0) {
    throw std::invalid_argument("rotation period and max range must be positive");
  }
}

// Largest angular gap between adjacent beams, the quantity that bounds which
// surfaces can hide between consecutive returns.
inline double beam_gap_deg(const LidarSpec & spec)
{
  double max_dxi = 0.0;
  for (std::size_t r = 1; r < spec.inclinations_deg.size(); ++r) {
    max_dxi = std::max(max_dxi, spec.inclinations_deg[r - 1] - spec.inclinations_deg[r]);
  }
  return std::max(spec.rotation_step_deg, max_dxi);
}

struct RangeImage {
  int rows = 0;
  int cols = 0;
  double timestamp = 0.0;
  std::vector<double> ranges;  // row-major, rows x cols

  double & at(int r, int c) { return ranges[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return ranges[static_cast<std::size_t>(r) * cols + c]; }
};

// Slab test; returns the entry distance of the nearest intersection with t > 0.
inline std::optional<double> ray_box_intersect(
  const Vec3 & origin, const Vec3 & dir, const ObstacleBox & box)
{
  const Vec3 lo = box_min(box);
  const Vec3 hi = box_max(box);
  double t_near = 0.0;
  double t_far = std::numeric_limits<double>::infinity();
  const double o[3] = {origin.x, origin.y, origin.z};
  const double d[3] = {dir.x, dir.y, dir.z};
  const double l[3] = {lo.x, lo.y, lo.z};
  const double h[3] = {hi.x, hi.y, hi.z};
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d[i]) < 1e-15) {
      if (o[i] < l[i] || o[i] > h[i]) {
        return std::nullopt;
      }
      continue;
    }
    double t0 = (l[i] - o[i]) / d[i];
    double t1 = (h[i] - o[i]) / d[i];
    if (t0 > t1) {
      std::swap(t0, t1);
    }
    t_near = std::max(t_near, t0);
    t_far = std::min(t_far, t1);
    if (t_near > t_far) {
      return std::nullopt;
    }
  }
  if (t_far <= 0.0) {
    return std::nullopt;
  }
  return t_near > 0.0 ? t_near : t_far;
}

// Unit direction of the beam at (row, col): azimuth grows counterclockwise
// from +x, inclination is measured down from the horizon.
inline Vec3 ray_direction(const LidarSpec & spec, int row, int col)
{
  const double xi = deg2rad(spec.inclinations_deg[static_cast<std::size_t>(row)]);
  const double theta = deg2rad(col * spec.rotation_step_deg);
  return {std::cos(xi) * std::cos(theta), std::cos(xi) * std::sin(theta), -std::sin(xi)};
}

// Renders one full rotation from a static pose. The ground is the plane at the
// target altitude; boxes occlude it and each other by nearest-hit selection.
inline RangeImage render_range_image(
  const LidarSpec & spec, const VehicleState & vehicle, const Scene & scene,
  double timestamp = 0.0)
{
  validate(spec);
  const double ground_z = scene.target.center.z;
  if (vehicle.position.z <= ground_z) {
    throw std::invalid_argument("sensor is at or below the ground plane");
  }

  RangeImage image;
  image.rows = spec.rows();
  image.cols = spec.columns();
  image.timestamp = timestamp;
  image.ranges.assign(static_cast<std::size_t>(image.rows) * image.cols, kNoReturn);

  std::vector<double> sin_xi(image.rows), cos_xi(image.rows);
  for (int r = 0; r < image.rows; ++r) {
    sin_xi[r] = std::sin(deg2rad(spec.inclinations_deg[r]));
    cos_xi[r] = std::cos(deg2rad(spec.inclinations_deg[r]));
  }

  for (int c = 0; c < image.cols; ++c) {
    const double theta = deg2rad(c * spec.rotation_step_deg);
    const double cos_th = std::cos(theta);
    const double sin_th = std::sin(theta);
    for (int r = 0; r < image.rows; ++r) {
      const Vec3 dir{cos_xi[r] * cos_th, cos_xi[r] * sin_th, -sin_xi[r]};
      double best = (vehicle.position.z - ground_z) / sin_xi[r];  // ground hit
      for (const auto & box : scene.obstacles) {
        if (auto t = ray_box_intersect(vehicle.position, dir, box); t && *t < best) {
          best = *t;
        }
      }
      if (best <= spec.max_range_m) {
        image.at(r, c) = best;
      }
    }
  }
  return image;
}

namespace detail {
// 12 significant digits: enough for CSV round trips at 1e-9 relative error
// while keeping files readable. Formatting is locale-free and deterministic.
inline std::string format_double(double v)
{
  if (!std::isfinite(v)) {
    return "inf";
  }
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}
}  // namespace detail

inline void write_range_image_csv(const RangeImage & image, std::ostream & os)
{
  os << "# range-image v1 rows=" << image.rows << " cols=" << image.cols
     << " t=" << detail::format_double(image.timestamp) << "\n";
  os << "row,col,range_m\n";
  for (int r = 0; r < image.rows; ++r) {
    for (int c = 0; c < image.cols; ++c) {
      os << r << ',' << c << ',' << detail::format_double(image.at(r, c)) << "\n";
    }
  }
}

inline RangeImage read_range_image_csv(std::istream & is)
{
  RangeImage image;
  std::string line;
  if (!std::getline(is, line) || line.rfind("# range-image v1", 0) != 0) {
    throw std::invalid_argument("not a range image csv");
  }
  std::istringstream head(line.substr(16));
  std::string tok;
  while (head >> tok) {
    if (tok.rfind("rows=", 0) == 0) image.rows = std::stoi(tok.substr(5));
    if (tok.rfind("cols=", 0) == 0) image.cols = std::stoi(tok.substr(5));
    if (tok.rfind("t=", 0) == 0) image.timestamp = std::stod(tok.substr(2));
  }
  if (image.rows <= 0 || image.cols <= 0) {
    throw std::invalid_argument("range image csv header lacks dimensions");
  }
  std::getline(is, line);  // column header
  image.ranges.assign(static_cast<std::size_t>(image.rows) * image.cols, kNoReturn);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    int r = 0, c = 0;
    char value[32] = {0};
    if (std::sscanf(line.c_str(), "%d,%d,%31s", &r, &c, value) != 3) {
      throw std::invalid_argument("malformed range image row: " + line);
    }
    image.at(r, c) = std::string(value) == "inf" ? kNoReturn : std::stod(value);
  }
  return image;
}

}  // namespace landing_safety
