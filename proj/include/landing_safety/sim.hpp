#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "landing_safety/control.hpp"
#include "landing_safety/detectability.hpp"
#include "landing_safety/detector.hpp"
#include "landing_safety/envelope.hpp"
#include "landing_safety/geometry.hpp"
#include "landing_safety/lidar.hpp"
#include "landing_safety/override.hpp"
#include "landing_safety/scenario.hpp"

namespace landing_safety {

// Reference generator for the vertical descent. Tracks a commanded altitude
// and speed; the speed command ramps up at accel_limit, ramps down at the
// currently trusted deceleration, and near the ground follows a flare curve
// that reaches touchdown_speed at the target altitude.
class DescentPlanner {
public:
  DescentPlanner(const PlannerConfig & cfg, double start_altitude, double target_altitude)
  : cfg_(cfg), target_p_(start_altitude), target_alt_(target_altitude)
  {
  }

  // v_limit: speed bound from the safety envelope. a_max: trusted deceleration,
  // used both for the flare profile and as the ramp-down rate so a dropped
  // bound is honored as fast as the vehicle can brake.
  void step(double dt, double v_limit, double a_max)
  {
    const double remaining = std::max(0.0, target_p_ - target_alt_);
    const double a_flare = cfg_.flare_fraction * a_max;
    const double flare_speed =
      std::sqrt(cfg_.touchdown_speed * cfg_.touchdown_speed + 2.0 * a_flare * remaining);
    double v_des = std::min(v_limit, std::max(cfg_.touchdown_speed, flare_speed));
    const double v_prev = v_cmd_;
    if (v_des > v_cmd_) {
      v_cmd_ = std::min(v_des, v_cmd_ + cfg_.accel_limit * dt);
    } else {
      v_cmd_ = std::max(v_des, v_cmd_ - a_max * dt);
    }
    target_a_ = -(v_cmd_ - v_prev) / dt;
    target_p_ = std::max(target_alt_, target_p_ - v_cmd_ * dt);
  }

  // Re-anchor the altitude command, e.g. when resuming descent after a hover.
  void reset_position(double altitude) { target_p_ = std::max(target_alt_, altitude); }
  void reset_speed(double v)
  {
    v_cmd_ = std::max(0.0, v);
    target_a_ = 0.0;
  }

  double target_altitude() const { return target_p_; }
  double target_velocity() const { return -v_cmd_; }
  double target_accel() const { return target_a_; }

private:
  PlannerConfig cfg_;
  double target_p_;
  double target_alt_;
  double v_cmd_ = 0.0;
  double target_a_ = 0.0;
};

struct RunMetrics {
  std::string scenario;
  std::string mode;
  std::string terminal = "timeout";  // landed | hovered | collided | timeout
  bool landed = false;
  bool collided = false;
  bool hovered = false;
  double landing_time_s = -1.0;
  double hover_time_s = -1.0;
  double min_clearance_m = std::numeric_limits<double>::infinity();
  double final_clearance_m = std::numeric_limits<double>::infinity();
  double violation_time_s = 0.0;
  double first_violation_s = -1.0;
  double recovery_time_s = -1.0;
  double max_speed_over_limit = -std::numeric_limits<double>::infinity();
  double hover_trigger_range_m = -1.0;
  double hover_trigger_stop_m = -1.0;
  double hover_trigger_margin_m = -1.0;
  double hover_trigger_speed = -1.0;
  double final_altitude_m = 0.0;
  double final_speed = 0.0;
  double sigma_bar_final = 0.0;
  double a_max_active_final = 0.0;
  long steps = 0;
};

struct RunSinks {
  std::ostream * trace = nullptr;   // per-step CSV
  std::ostream * events = nullptr;  // decision / envelope transitions
};

namespace detail {

inline std::string fmt_or(double v, const char * when_unset)
{
  if (!std::isfinite(v)) {
    return when_unset;
  }
  return format_double(v);
}

}  // namespace detail

inline std::string metrics_json(const RunMetrics & m)
{
  std::ostringstream os;
  os << "{\"scenario\":\"" << m.scenario << "\",\"mode\":\"" << m.mode << "\",\"terminal\":\""
     << m.terminal << "\",\"landed\":" << (m.landed ? "true" : "false")
     << ",\"collided\":" << (m.collided ? "true" : "false")
     << ",\"hovered\":" << (m.hovered ? "true" : "false")
     << ",\"landing_time_s\":" << detail::format_double(m.landing_time_s)
     << ",\"hover_time_s\":" << detail::format_double(m.hover_time_s)
     << ",\"min_clearance_m\":" << detail::fmt_or(m.min_clearance_m, "null")
     << ",\"final_clearance_m\":" << detail::fmt_or(m.final_clearance_m, "null")
     << ",\"violation_time_s\":" << detail::format_double(m.violation_time_s)
     << ",\"first_violation_s\":" << detail::format_double(m.first_violation_s)
     << ",\"recovery_time_s\":" << detail::format_double(m.recovery_time_s)
     << ",\"max_speed_over_limit\":"
     << (m.max_speed_over_limit == -std::numeric_limits<double>::infinity()
           ? std::string("null")
           : detail::format_double(m.max_speed_over_limit))
     << ",\"hover_trigger_range_m\":" << detail::format_double(m.hover_trigger_range_m)
     << ",\"hover_trigger_stop_m\":" << detail::format_double(m.hover_trigger_stop_m)
     << ",\"hover_trigger_margin_m\":" << detail::format_double(m.hover_trigger_margin_m)
     << ",\"hover_trigger_speed\":" << detail::format_double(m.hover_trigger_speed)
     << ",\"final_altitude_m\":" << detail::format_double(m.final_altitude_m)
     << ",\"final_speed\":" << detail::format_double(m.final_speed)
     << ",\"sigma_bar_final\":" << detail::format_double(m.sigma_bar_final)
     << ",\"a_max_active_final\":" << detail::format_double(m.a_max_active_final)
     << ",\"steps\":" << m.steps << "}";
  return os.str();
}

// Mission-layer stand-in for the experiments: it reports exactly the safety
// detections whose laser returns come from obstacles listed in
// mission_covers, so matched obstacles defer to the mission planner while
// everything else stays the safety layer's responsibility.
inline MissionDetectionSet mission_report(
  const ScenarioConfig & cfg, const std::vector<DetectedObstacle> & detections,
  const RangeImage & image, const VehicleState & vehicle)
{
  MissionDetectionSet mission;
  if (cfg.mission_covers.empty()) {
    return mission;
  }
  const bool cover_all =
    std::any_of(cfg.mission_covers.begin(), cfg.mission_covers.end(),
                [](const std::string & id) { return id == "all"; });
  for (const auto & det : detections) {
    bool covered = cover_all;
    if (!covered) {
      // Attribute the cluster by re-intersecting one of its rays.
      for (const auto & [row, col] : det.cells) {
        const double range = image.at(row, col);
        if (!is_return(range)) {
          continue;
        }
        const Vec3 dir = ray_direction(cfg.lidar, row, col);
        const Vec3 hit = vehicle.position + range * dir;
        for (const auto & id : cfg.mission_covers) {
          for (const auto & box : cfg.obstacles) {
            if (box.id != id) {
              continue;
            }
            const Vec3 lo = box_min(box), hi = box_max(box);
            const double tol = 1e-6;
            if (hit.x >= lo.x - tol && hit.x <= hi.x + tol && hit.y >= lo.y - tol &&
                hit.y <= hi.y + tol && hit.z >= lo.z - tol && hit.z <= hi.z + tol) {
              covered = true;
            }
          }
        }
        if (covered) {
          break;
        }
      }
    }
    if (covered) {
      AngularRect rect = det.projection;
      rect.az_lo_deg -= 0.25;
      rect.az_hi_deg += 0.25;
      rect.incl_lo_deg = std::max(0.0, rect.incl_lo_deg - 0.25);
      rect.incl_hi_deg = std::min(90.0, rect.incl_hi_deg + 0.25);
      mission.push_back(rect);
    }
  }
  return mission;
}

inline void write_trace_header(std::ostream & os)
{
  os << "t,altitude,velocity,target_p,target_v,u_baseline,u_adaptive,u_total,sigma_true,"
        "sigma_hat,sigma_est,sigma_bar,v_hat,v_tilde,a_max_dc,a_max_active,v_limit,"
        "stopping_distance,d_obstacle,envelope,decision\n";
}

inline RunMetrics run_scenario(const ScenarioConfig & cfg, const RunSinks & sinks = {})
{
  validate(cfg);
  const Scene scene = scene_of(cfg);
  const double target_alt = cfg.target.center.z;
  const ControllerConfig ctrl_cfg = default_controller_config(cfg.plant);
  const double t_s = ctrl_cfg.t_s;

  DetectorConfig det_cfg = cfg.detector;
  det_cfg.h_threshold_m = cfg.policy_size_m;
  const DetectabilityModel det_model{beam_gap_deg(cfg.lidar), cfg.policy_size_m};
  const double d_det = checked_detection_range(det_model, cfg.lidar);
  const double a_wc =
    a_max_worst_case(cfg.plant.f_max_n, cfg.wc.d_max_n, cfg.wc.m_max_kg, cfg.plant.gravity);

  ControllerState ctrl = make_controller(ctrl_cfg);
  SlidingWindow window(cfg.window_capacity);
  OverrideMonitor monitor;
  DescentPlanner planner(cfg.planner, cfg.start.z, target_alt);

  PlantState plant{cfg.start.z, 0.0};
  const long rotation_steps =
    std::max<long>(1, static_cast<long>(std::llround(cfg.lidar.rotation_period_s / t_s)));
  const long total_steps = static_cast<long>(std::llround(cfg.duration_s / t_s));

  RunMetrics metrics;
  metrics.scenario = cfg.name;
  metrics.mode = to_string(cfg.mode);
  if (scene.obstacles.empty()) {
    metrics.min_clearance_m = std::numeric_limits<double>::infinity();
  }

  OverrideDecision decision;
  std::optional<double> d_obstacle;
  bool was_violation = false;
  bool recovered = false;
  double hover_settle = 0.0;
  bool hover_frozen = false;
  double hover_alt = 0.0;

  if (sinks.trace) {
    write_trace_header(*sinks.trace);
  }
  const auto event = [&](double t, const std::string & name, const std::string & detail_text) {
    if (sinks.events) {
      (*sinks.events) << detail::format_double(t) << ',' << name << ',' << detail_text << "\n";
    }
  };
  event(0.0, "start", cfg.name + std::string(" mode=") + to_string(cfg.mode));

  for (long step = 0; step < total_steps; ++step) {
    const double t = static_cast<double>(step) * t_s;
    VehicleState vehicle{{cfg.start.x, cfg.start.y, plant.altitude_m}, plant.velocity_mps,
                         cfg.footprint_radius};

    const double a_max_active =
      cfg.mode == AMaxMode::StaticWC ? a_wc : window.worst().value_or(a_wc);
    EnvelopeParams env{a_max_active, cfg.latency_s, cfg.d_stop_max_m, d_det};

    if (step % rotation_steps == 0) {
      const RangeImage image = render_range_image(cfg.lidar, vehicle, scene, t);
      const LabelGrid labels =
        classify_returns(image, cfg.lidar, det_cfg, vehicle.position.z, target_alt);
      const auto detections = cluster_obstacles(labels, image, cfg.lidar);
      const MissionDetectionSet mission = mission_report(cfg, detections, image, vehicle);

      // Decide against the worst state reachable before the next sweep: the
      // profile may still be accelerating, so the stopping distance one
      // rotation from now is the binding one, not today's.
      VehicleState lookahead = vehicle;
      if (descent_speed(vehicle) > 0.0) {
        lookahead.vertical_velocity =
          -(descent_speed(vehicle) +
            cfg.planner.accel_limit * cfg.lidar.rotation_period_s);
      }
      RiskContext ctx{lookahead,        cfg.target,           env,
                      descent_speed(lookahead) * cfg.lidar.rotation_period_s,
                      cfg.v_obs_max,    cfg.horizon_s,        cfg.match_margin_deg,
                      cfg.hazard_tolerance};
      const OverrideKind before = decision.kind;
      decision = monitor.decide(mission, detections, ctx);
      if (decision.kind != before) {
        std::string detail_text = to_string(decision.kind);
        if (decision.cause) {
          detail_text += " range=" + detail::format_double(decision.cause->closest_range_m) +
                         " stop=" + detail::format_double(decision.cause->stopping_distance_m);
        }
        event(t, "decision", detail_text);
        if (decision.kind == OverrideKind::Hover && decision.cause &&
            metrics.hover_trigger_range_m < 0.0) {
          metrics.hover_trigger_range_m = decision.cause->closest_range_m;
          metrics.hover_trigger_stop_m = decision.cause->stopping_distance_m;
          metrics.hover_trigger_margin_m = ctx.reaction_margin_m;
          metrics.hover_trigger_speed = descent_speed(vehicle);
        }
      }

      d_obstacle.reset();
      for (const auto & det : detections) {
        const ObstacleBox ext = recovered_extent(det, vehicle);
        if (in_landing_path(ext, vehicle, cfg.target)) {
          d_obstacle =
            d_obstacle ? std::min(*d_obstacle, det.closest_range) : det.closest_range;
        }
      }
    }

    // The stopping budget shrinks to the nearest in-path obstacle once one is
    // known; the planner then sheds speed while the obstacle is still far
    // instead of discovering the deficit at override time.
    const double stop_budget =
      d_obstacle ? std::min(env.d_stop_max, *d_obstacle) : env.d_stop_max;
    const double v_limit = v_safe_max(env.a_max, env.latency_s, stop_budget);
    double target_p = 0.0;
    double target_v = 0.0;
    double target_a = 0.0;
    if (decision.kind == OverrideKind::Hover) {
      if (!hover_frozen && std::abs(plant.velocity_mps) <= 0.3) {
        hover_frozen = true;
        hover_alt = plant.altitude_m;
      }
      target_p = hover_frozen ? hover_alt : plant.altitude_m;
      target_v = 0.0;
      planner.reset_position(plant.altitude_m);
      planner.reset_speed(0.0);
    } else {
      hover_frozen = false;
      planner.step(t_s, v_limit, a_max_active);
      target_p = planner.target_altitude();
      target_v = planner.target_velocity();
      target_a = planner.target_accel();
    }

    const ControlStepResult res =
      control_step(ctrl, plant, target_p, target_v, cfg.plant, target_a);
    if (cfg.mode == AMaxMode::DynamicConfirmation) {
      // Floor keeps the envelope defined if authority collapses entirely; the
      // resulting speed bound then decays toward zero, a crawl, not a fall.
      window.insert(std::max(res.a_max_dc, 1e-3));
    }

    const double speed_down = descent_speed(vehicle);
    const EnvelopeState env_state = envelope_check(speed_down, d_obstacle, env);
    if (env_state == EnvelopeState::Violation) {
      metrics.violation_time_s += t_s;
      if (metrics.first_violation_s < 0.0) {
        metrics.first_violation_s = t;
        event(t, "envelope", "violation");
      }
      was_violation = true;
    } else if (was_violation && !recovered && speed_down <= v_limit) {
      recovered = true;
      metrics.recovery_time_s = t - metrics.first_violation_s;
      event(t, "envelope", "recovered");
    }
    metrics.max_speed_over_limit = std::max(metrics.max_speed_over_limit, speed_down - v_limit);

    for (const auto & box : scene.obstacles) {
      metrics.min_clearance_m = std::min(metrics.min_clearance_m, clearance_to_box(vehicle, box));
    }

    if (sinks.trace) {
      std::ostream & os = *sinks.trace;
      const auto f = [](double v) { return detail::format_double(v); };
      os << f(t) << ',' << f(plant.altitude_m) << ',' << f(plant.velocity_mps) << ','
         << f(target_p) << ',' << f(target_v) << ',' << f(res.u_b) << ',' << f(res.u_ad) << ','
         << f(res.u_total) << ',' << f(cfg.disturbance.value(t)) << ',' << f(res.sigma_hat)
         << ',' << f(res.sigma_est) << ',' << f(res.sigma_bar) << ',' << f(res.v_hat) << ','
         << f(res.v_tilde) << ',' << f(res.a_max_dc) << ',' << f(a_max_active) << ','
         << f(v_limit) << ',' << f(stopping_distance(speed_down, env.a_max, env.latency_s))
         << ',' << (d_obstacle ? f(*d_obstacle) : std::string("inf")) << ','
         << (env_state == EnvelopeState::Inside ? "inside" : "violation") << ','
         << to_string(decision.kind) << "\n";
    }

    plant = plant_step(plant, cfg.plant, res.u_total, cfg.disturbance.value(t), t_s);
    metrics.steps = step + 1;
    metrics.sigma_bar_final = res.sigma_bar;
    metrics.a_max_active_final = a_max_active;
    const double t_next = t + t_s;

    VehicleState after{{cfg.start.x, cfg.start.y, plant.altitude_m}, plant.velocity_mps,
                       cfg.footprint_radius};
    for (const auto & box : scene.obstacles) {
      metrics.min_clearance_m = std::min(metrics.min_clearance_m, clearance_to_box(after, box));
    }
    if (collision_check(after, scene)) {
      metrics.collided = true;
      metrics.terminal = "collided";
      event(t_next, "terminal", "collided");
      break;
    }
    if (plant.altitude_m <= target_alt) {
      if (std::abs(plant.velocity_mps) <= 0.6) {
        metrics.landed = true;
        metrics.terminal = "landed";
        metrics.landing_time_s = t_next;
        event(t_next, "terminal", "landed");
      } else {
        metrics.collided = true;
        metrics.terminal = "collided";
        event(t_next, "terminal", "ground-impact");
      }
      break;
    }
    if (decision.kind == OverrideKind::Hover && std::abs(plant.velocity_mps) <= 0.1) {
      hover_settle += t_s;
      if (hover_settle >= 1.0) {
        metrics.hovered = true;
        metrics.terminal = "hovered";
        metrics.hover_time_s = t_next;
        event(t_next, "terminal", "hovered");
        break;
      }
    } else {
      hover_settle = 0.0;
    }
  }

  metrics.final_altitude_m = plant.altitude_m;
  metrics.final_speed = plant.velocity_mps;
  VehicleState final_vehicle{{cfg.start.x, cfg.start.y, plant.altitude_m}, plant.velocity_mps,
                             cfg.footprint_radius};
  metrics.final_clearance_m = std::numeric_limits<double>::infinity();
  for (const auto & box : scene.obstacles) {
    metrics.final_clearance_m =
      std::min(metrics.final_clearance_m, clearance_to_box(final_vehicle, box));
  }
  return metrics;
}

}  // namespace landing_safety
