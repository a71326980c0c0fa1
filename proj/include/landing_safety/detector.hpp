#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "landing_safety/geometry.hpp"
#include "landing_safety/lidar.hpp"

namespace landing_safety {

struct DetectorConfig {
  double alpha_threshold_deg = 10.0;  // slope discontinuity bound between beam pairs
  double h_threshold_m = 1.0;         // protrusion bound for the return straight below
};

enum class CellLabel { Ground, Obstacle, Invalid };

struct LabelGrid {
  int rows = 0;
  int cols = 0;
  std::vector<CellLabel> labels;

  CellLabel & at(int r, int c) { return labels[static_cast<std::size_t>(r) * cols + c]; }
  CellLabel at(int r, int c) const { return labels[static_cast<std::size_t>(r) * cols + c]; }
};

// Angular footprint of a detection as seen from the sensor. Azimuth interval
// may pass through 360 (az_hi > 360 encodes wraparound); width az_hi - az_lo
// is 360 for a full ring. Inclinations are degrees below horizontal.
struct AngularRect {
  double az_lo_deg = 0.0;
  double az_hi_deg = 0.0;
  double incl_lo_deg = 0.0;
  double incl_hi_deg = 0.0;

  double az_width_deg() const { return az_hi_deg - az_lo_deg; }
};

inline bool rect_contains(const AngularRect & outer, const AngularRect & inner, double margin_deg)
{
  if (outer.incl_lo_deg - margin_deg > inner.incl_lo_deg ||
      inner.incl_hi_deg > outer.incl_hi_deg + margin_deg) {
    return false;
  }
  if (outer.az_width_deg() + 2.0 * margin_deg >= 360.0) {
    return true;
  }
  // Shift the inner arc so its start lies within one turn after the outer start.
  double lo = inner.az_lo_deg;
  const double base = outer.az_lo_deg - margin_deg;
  lo -= 360.0 * std::floor((lo - base) / 360.0);
  const double hi = lo + inner.az_width_deg();
  return hi <= outer.az_hi_deg + margin_deg;
}

inline bool rects_intersect(const AngularRect & a, const AngularRect & b)
{
  if (a.incl_hi_deg < b.incl_lo_deg || b.incl_hi_deg < a.incl_lo_deg) {
    return false;
  }
  for (double shift : {-360.0, 0.0, 360.0}) {
    if (a.az_lo_deg <= b.az_hi_deg + shift && b.az_lo_deg + shift <= a.az_hi_deg) {
      return true;
    }
  }
  return false;
}

struct DetectedObstacle {
  std::string id;
  std::vector<std::pair<int, int>> cells;  // (row, col)
  double closest_range = 0.0;
  AngularRect projection;
  // Axis-aligned bounds of the returned surface points, relative to the sensor.
  Vec3 extent_min;
  Vec3 extent_max;
};

// Angle of the segment joining the returns of beam pair (r-1, r), measured
// against the horizontal plane of the column. Zero on flat ground, 90 deg on a
// vertical face. NaN where either return is missing; row 0 is the chain anchor.
inline std::vector<double> compute_alpha(const RangeImage & image, const LidarSpec & spec)
{
  std::vector<double> alpha(image.ranges.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> sin_xi(image.rows), cos_xi(image.rows);
  for (int r = 0; r < image.rows; ++r) {
    sin_xi[r] = std::sin(deg2rad(spec.inclinations_deg[r]));
    cos_xi[r] = std::cos(deg2rad(spec.inclinations_deg[r]));
  }
  for (int c = 0; c < image.cols; ++c) {
    if (is_return(image.at(0, c))) {
      alpha[static_cast<std::size_t>(c)] = 0.0;
    }
    for (int r = 1; r < image.rows; ++r) {
      const double prev = image.at(r - 1, c);
      const double cur = image.at(r, c);
      if (!is_return(prev) || !is_return(cur)) {
        continue;
      }
      const double dz = std::abs(prev * sin_xi[r - 1] - cur * sin_xi[r]);
      const double dh = std::abs(prev * cos_xi[r - 1] - cur * cos_xi[r]);
      alpha[static_cast<std::size_t>(r) * image.cols + c] = rad2deg(std::atan2(dz, dh));
    }
  }
  return alpha;
}

// Per-column dispatch:
//  - no return straight below: every valid return in the column is an obstacle;
//  - return straight below is short of the expected ground by more than
//    h_threshold: the landing point itself is occupied, the label climbs the
//    elevated run, and the slope chain still applies above it;
//  - otherwise: slope-discontinuity chain alone.
inline LabelGrid classify_returns(
  const RangeImage & image, const LidarSpec & spec, const DetectorConfig & config,
  double sensor_altitude, double target_altitude)
{
  LabelGrid grid;
  grid.rows = image.rows;
  grid.cols = image.cols;
  grid.labels.assign(image.ranges.size(), CellLabel::Invalid);

  const std::vector<double> alpha = compute_alpha(image, spec);
  std::vector<double> sin_xi(image.rows);
  for (int r = 0; r < image.rows; ++r) {
    sin_xi[r] = std::sin(deg2rad(spec.inclinations_deg[r]));
  }

  for (int c = 0; c < image.cols; ++c) {
    if (!is_return(image.at(0, c))) {
      for (int r = 0; r < image.rows; ++r) {
        if (is_return(image.at(r, c))) {
          grid.at(r, c) = CellLabel::Obstacle;
        }
      }
      continue;
    }

    const bool target_occupied =
      sensor_altitude - target_altitude - image.at(0, c) > config.h_threshold_m;

    // Slope chain. A valid cell whose pair angle is defined gets Ground or
    // Obstacle; a gap in the chain leaves the cell Invalid (undecidable).
    double prev_alpha = 0.0;
    bool prev_alpha_valid = is_return(image.at(0, c));
    if (prev_alpha_valid) {
      grid.at(0, c) = CellLabel::Ground;
    }
    for (int r = 1; r < image.rows; ++r) {
      const double a = alpha[static_cast<std::size_t>(r) * image.cols + c];
      if (std::isnan(a)) {
        prev_alpha_valid = false;
        continue;
      }
      if (prev_alpha_valid) {
        const double delta = std::abs(a - prev_alpha);
        grid.at(r, c) =
          delta > config.alpha_threshold_deg ? CellLabel::Obstacle : CellLabel::Ground;
      }
      prev_alpha = a;
      prev_alpha_valid = true;
    }

    if (target_occupied) {
      // The elevated run: consecutive returns still well above the target.
      for (int r = 0; r < image.rows; ++r) {
        if (!is_return(image.at(r, c))) {
          break;
        }
        const double hit_z = sensor_altitude - image.at(r, c) * sin_xi[r];
        if (hit_z - target_altitude <= config.h_threshold_m) {
          break;
        }
        grid.at(r, c) = CellLabel::Obstacle;
      }
    }
  }
  return grid;
}

// Connected components of obstacle cells, 4-neighbourhood with column
// wraparound, ordered nearest first.
inline std::vector<DetectedObstacle> cluster_obstacles(
  const LabelGrid & labels, const RangeImage & image, const LidarSpec & spec)
{
  std::vector<DetectedObstacle> result;
  std::vector<char> visited(labels.labels.size(), 0);
  std::vector<double> sin_xi(image.rows), cos_xi(image.rows);
  for (int r = 0; r < image.rows; ++r) {
    sin_xi[r] = std::sin(deg2rad(spec.inclinations_deg[r]));
    cos_xi[r] = std::cos(deg2rad(spec.inclinations_deg[r]));
  }

  for (int c0 = 0; c0 < labels.cols; ++c0) {
    for (int r0 = 0; r0 < labels.rows; ++r0) {
      const std::size_t seed = static_cast<std::size_t>(r0) * labels.cols + c0;
      if (visited[seed] || labels.at(r0, c0) != CellLabel::Obstacle) {
        continue;
      }
      DetectedObstacle det;
      std::deque<std::pair<int, int>> queue{{r0, c0}};
      visited[seed] = 1;
      while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        det.cells.emplace_back(r, c);
        const std::pair<int, int> neighbours[4] = {
          {r - 1, c}, {r + 1, c},
          {r, (c + 1) % labels.cols}, {r, (c - 1 + labels.cols) % labels.cols}};
        for (auto [nr, nc] : neighbours) {
          if (nr < 0 || nr >= labels.rows) {
            continue;
          }
          const std::size_t idx = static_cast<std::size_t>(nr) * labels.cols + nc;
          if (!visited[idx] && labels.at(nr, nc) == CellLabel::Obstacle) {
            visited[idx] = 1;
            queue.emplace_back(nr, nc);
          }
        }
      }

      det.closest_range = kNoReturn;
      det.extent_min = {kNoReturn, kNoReturn, kNoReturn};
      det.extent_max = {-kNoReturn, -kNoReturn, -kNoReturn};
      double incl_lo = 90.0, incl_hi = 0.0;
      std::vector<char> col_occupied(labels.cols, 0);
      for (auto [r, c] : det.cells) {
        const double range = image.at(r, c);
        det.closest_range = std::min(det.closest_range, range);
        incl_lo = std::min(incl_lo, spec.inclinations_deg[r]);
        incl_hi = std::max(incl_hi, spec.inclinations_deg[r]);
        col_occupied[c] = 1;
        const double theta = deg2rad(c * spec.rotation_step_deg);
        const Vec3 p{range * cos_xi[r] * std::cos(theta), range * cos_xi[r] * std::sin(theta),
                     -range * sin_xi[r]};
        det.extent_min.x = std::min(det.extent_min.x, p.x);
        det.extent_min.y = std::min(det.extent_min.y, p.y);
        det.extent_min.z = std::min(det.extent_min.z, p.z);
        det.extent_max.x = std::max(det.extent_max.x, p.x);
        det.extent_max.y = std::max(det.extent_max.y, p.y);
        det.extent_max.z = std::max(det.extent_max.z, p.z);
      }
      det.projection.incl_lo_deg = incl_lo;
      det.projection.incl_hi_deg = incl_hi;

      // Covering azimuth arc: complement of the largest empty gap.
      std::vector<double> angles;
      for (int c = 0; c < labels.cols; ++c) {
        if (col_occupied[c]) {
          angles.push_back(c * spec.rotation_step_deg);
        }
      }
      double best_gap = 360.0;
      std::size_t gap_after = 0;
      for (std::size_t i = 0; i < angles.size(); ++i) {
        const double next = i + 1 < angles.size() ? angles[i + 1] : angles[0] + 360.0;
        const double gap = next - angles[i];
        if (gap > best_gap || i == 0) {
          best_gap = gap;
          gap_after = i;
        }
      }
      const double start = angles[(gap_after + 1) % angles.size()];
      det.projection.az_lo_deg = start;
      det.projection.az_hi_deg = start + (360.0 - best_gap);
      result.push_back(std::move(det));
    }
  }

  std::sort(result.begin(), result.end(), [](const DetectedObstacle & a, const DetectedObstacle & b) {
    return a.closest_range < b.closest_range;
  });
  for (std::size_t i = 0; i < result.size(); ++i) {
    result[i].id = "det-" + std::to_string(i);
  }
  return result;
}

inline const char * to_string(CellLabel label)
{
  switch (label) {
    case CellLabel::Ground: return "ground";
    case CellLabel::Obstacle: return "obstacle";
    default: return "invalid";
  }
}

inline void write_labels_csv(const LabelGrid & grid, std::ostream & os)
{
  os << "# labels v1 rows=" << grid.rows << " cols=" << grid.cols << "\n";
  os << "row,col,label\n";
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      os << r << ',' << c << ',' << to_string(grid.at(r, c)) << "\n";
    }
  }
}

inline void write_obstacles_csv(const std::vector<DetectedObstacle> & dets, std::ostream & os)
{
  os << "id,cells,closest_range_m,az_lo_deg,az_hi_deg,incl_lo_deg,incl_hi_deg\n";
  for (const auto & d : dets) {
    os << d.id << ',' << d.cells.size() << ',' << detail::format_double(d.closest_range) << ','
       << detail::format_double(d.projection.az_lo_deg) << ','
       << detail::format_double(d.projection.az_hi_deg) << ','
       << detail::format_double(d.projection.incl_lo_deg) << ','
       << detail::format_double(d.projection.incl_hi_deg) << "\n";
  }
}

}  // namespace landing_safety
