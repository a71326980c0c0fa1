#pragma once

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "landing_safety/lidar.hpp"

namespace landing_safety {

// What the sensor geometry can promise: two adjacent beams separated by
// beam_gap degrees straddle, at range R, a surface no smaller than
// 2 * gap * R * pi / 180. Inverting at the policy size gives the range inside
// which every policy-sized obstacle spans at least two beams.
struct DetectabilityModel {
  double beam_gap_deg = 1.0;
  double policy_size_m = 1.0;  // smallest obstacle dimension that must be caught
};

inline double min_detectable_dimension(double range_m, double beam_gap_deg)
{
  if (range_m < 0.0 || beam_gap_deg <= 0.0) {
    throw std::invalid_argument("range must be >= 0 and beam gap positive");
  }
  return 2.0 * beam_gap_deg * range_m * std::numbers::pi / 180.0;
}

inline double detection_range(const DetectabilityModel & model)
{
  if (model.policy_size_m <= 0.0 || model.beam_gap_deg <= 0.0) {
    throw std::invalid_argument("policy size and beam gap must be positive");
  }
  return 180.0 * model.policy_size_m / (2.0 * std::numbers::pi * model.beam_gap_deg);
}

// The protrusion threshold for the landing-point check equals the policy size:
// anything taller sitting on the target must be flagged.
inline double h_threshold(const DetectabilityModel & model) { return model.policy_size_m; }

// The guarantee cannot extend past the sensor itself.
inline double checked_detection_range(const DetectabilityModel & model, const LidarSpec & spec)
{
  const double d = detection_range(model);
  if (d > spec.max_range_m) {
    throw std::invalid_argument(
      "detection range exceeds sensor max range; reduce policy size or beam gap");
  }
  return d;
}

inline void write_detectability_curve_csv(
  const DetectabilityModel & model, double max_range_m, std::ostream & os, double step_m = 1.0)
{
  os << "range_m,min_detectable_dimension_m\n";
  for (double r = 0.0; r <= max_range_m + 1e-9; r += step_m) {
    os << detail::format_double(r) << ','
       << detail::format_double(min_detectable_dimension(r, model.beam_gap_deg)) << "\n";
  }
}

}  // namespace landing_safety
