#pragma once

#include <optional>
#include <string>
#include <vector>

#include "landing_safety/detector.hpp"
#include "landing_safety/envelope.hpp"
#include "landing_safety/geometry.hpp"

namespace landing_safety {

// Angular footprints the mission layer claims to have seen and be handling.
using MissionDetectionSet = std::vector<AngularRect>;

enum class OverrideKind { NoOverride, ControlOverride, Hover };

inline const char * to_string(OverrideKind kind)
{
  switch (kind) {
    case OverrideKind::NoOverride: return "no-override";
    case OverrideKind::ControlOverride: return "control-override";
    default: return "hover";
  }
}

struct OverrideCause {
  std::string obstacle_id;
  double closest_range_m = 0.0;
  double stopping_distance_m = 0.0;
};

struct OverrideDecision {
  OverrideKind kind = OverrideKind::NoOverride;
  std::optional<OverrideCause> cause;
};

struct RiskContext {
  VehicleState vehicle;
  LandingTarget target;
  EnvelopeParams envelope;
  double reaction_margin_m = 0.0;   // one sensor rotation of travel
  double v_obs_max = 0.0;           // assumed obstacle speed bound
  double horizon_s = 10.0;
  double match_margin_deg = 0.0;    // slack when comparing angular footprints
  double hazard_tolerance = 0.05;   // fraction above the speed bound that is a hazard
};

// The mission layer has this obstacle covered if one mission footprint fully
// contains the safety-layer footprint.
inline bool is_detected(
  const DetectedObstacle & obs, const MissionDetectionSet & mission, double margin_deg = 0.0)
{
  for (const auto & rect : mission) {
    if (rect_contains(rect, obs.projection, margin_deg)) {
      return true;
    }
  }
  return false;
}

// World-frame bounds of the returned surface points.
inline ObstacleBox recovered_extent(const DetectedObstacle & obs, const VehicleState & vehicle)
{
  ObstacleBox box;
  box.id = obs.id;
  box.center = vehicle.position + 0.5 * (obs.extent_min + obs.extent_max);
  box.half_extents = 0.5 * (obs.extent_max - obs.extent_min);
  // Degenerate axes (single row or column of returns) keep a sliver of width.
  box.half_extents.x = std::max(box.half_extents.x, 1e-3);
  box.half_extents.y = std::max(box.half_extents.y, 1e-3);
  box.half_extents.z = std::max(box.half_extents.z, 1e-3);
  return box;
}

inline double descent_speed(const VehicleState & vehicle)
{
  return std::max(0.0, -vehicle.vertical_velocity);
}

// In the descent path and close enough that the stop must begin, or able to
// reach the path within the horizon at the assumed obstacle speed.
inline bool is_collision_risk(const DetectedObstacle & obs, const RiskContext & ctx)
{
  const ObstacleBox box = recovered_extent(obs, ctx.vehicle);
  if (in_landing_path(box, ctx.vehicle, ctx.target)) {
    const double stop = stopping_distance(
      descent_speed(ctx.vehicle), ctx.envelope.a_max, ctx.envelope.latency_s);
    return obs.closest_range <= stop + ctx.reaction_margin_m;
  }
  const double growth = ctx.v_obs_max * ctx.horizon_s;
  if (growth <= 0.0) {
    return false;
  }
  ObstacleBox grown = box;
  grown.half_extents = grown.half_extents + Vec3{growth, growth, growth};
  return in_landing_path(grown, ctx.vehicle, ctx.target);
}

// Faster than the envelope's speed bound by more than the tolerance.
inline bool is_control_hazard(const RiskContext & ctx)
{
  const double bound =
    v_safe_max(ctx.envelope.a_max, ctx.envelope.latency_s, ctx.envelope.d_stop_max);
  return descent_speed(ctx.vehicle) > (1.0 + ctx.hazard_tolerance) * bound;
}

// Nearest-first scan over safety-layer detections the mission layer does not
// cover. A Hover, once issued, holds until its cause is covered or stops being
// a plausible path threat; without the hold the stop itself would clear the
// proximity test and release the override while the obstacle still blocks the
// descent. The latch tracks its object by projection overlap sweep to sweep
// (the footprint migrates as the vehicle closes), and remembers the recovered
// extent: a close obstacle exits the field of view from below, so a dropout
// while the remembered hazard still blocks the path keeps the hover.
class OverrideMonitor {
public:
  OverrideDecision decide(
    const MissionDetectionSet & mission, const std::vector<DetectedObstacle> & detections,
    const RiskContext & ctx)
  {
    if (latched_) {
      const DetectedObstacle * match = nullptr;
      for (const auto & det : detections) {
        if (rects_intersect(det.projection, latched_->projection)) {
          match = &det;
          break;
        }
      }
      if (match != nullptr) {
        if (is_detected(*match, mission, ctx.match_margin_deg) || !persistent_risk(*match, ctx)) {
          latched_.reset();
        } else {
          latched_->projection = match->projection;
          latched_->extent = recovered_extent(*match, ctx.vehicle);
          latched_->cause.closest_range_m = match->closest_range;
          return {OverrideKind::Hover, latched_->cause};
        }
      } else if (in_landing_path(latched_->extent, ctx.vehicle, ctx.target)) {
        return {OverrideKind::Hover, latched_->cause};
      } else {
        latched_.reset();
      }
    }

    for (const auto & det : detections) {
      if (is_detected(det, mission, ctx.match_margin_deg)) {
        continue;
      }
      if (is_collision_risk(det, ctx)) {
        OverrideCause cause;
        cause.obstacle_id = det.id;
        cause.closest_range_m = det.closest_range;
        cause.stopping_distance_m = stopping_distance(
          descent_speed(ctx.vehicle), ctx.envelope.a_max, ctx.envelope.latency_s);
        latched_ = Latch{det.projection, recovered_extent(det, ctx.vehicle), cause};
        return {OverrideKind::Hover, cause};
      }
    }

    if (is_control_hazard(ctx)) {
      return {OverrideKind::ControlOverride, std::nullopt};
    }
    return {OverrideKind::NoOverride, std::nullopt};
  }

  bool hover_latched() const { return latched_.has_value(); }
  void reset() { latched_.reset(); }

private:
  struct Latch {
    AngularRect projection;
    ObstacleBox extent;
    OverrideCause cause;
  };

  // The trigger's proximity term is deliberately dropped here; hovering keeps
  // the stop distance at zero, so proximity alone would always release.
  static bool persistent_risk(const DetectedObstacle & det, const RiskContext & ctx)
  {
    const ObstacleBox box = recovered_extent(det, ctx.vehicle);
    if (in_landing_path(box, ctx.vehicle, ctx.target)) {
      return true;
    }
    const double growth = ctx.v_obs_max * ctx.horizon_s;
    if (growth <= 0.0) {
      return false;
    }
    ObstacleBox grown = box;
    grown.half_extents = grown.half_extents + Vec3{growth, growth, growth};
    return in_landing_path(grown, ctx.vehicle, ctx.target);
  }

  std::optional<Latch> latched_;
};

}  // namespace landing_safety
