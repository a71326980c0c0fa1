#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "landing_safety/control.hpp"
#include "landing_safety/detectability.hpp"
#include "landing_safety/detector.hpp"
#include "landing_safety/geometry.hpp"
#include "landing_safety/lidar.hpp"

namespace landing_safety {

// Which deceleration bound the safety layer trusts: the static worst-case
// budget, or the capability the controller keeps confirming in flight.
enum class AMaxMode { StaticWC, DynamicConfirmation };

inline const char * to_string(AMaxMode mode)
{
  return mode == AMaxMode::StaticWC ? "wc" : "dc";
}

struct PlannerConfig {
  double accel_limit = 2.0;      // commanded speed-up rate, m/s^2
  double flare_fraction = 0.8;   // flare deceleration as a fraction of a_max
  double touchdown_speed = 0.5;  // m/s commanded at ground contact
};

struct ScenarioConfig {
  std::string name = "unnamed";
  Vec3 start{0.0, 0.0, 100.0};
  LandingTarget target{{0.0, 0.0, 0.0}, 5.0};
  double footprint_radius = 1.5;
  std::vector<ObstacleBox> obstacles;
  AMaxMode mode = AMaxMode::StaticWC;
  double duration_s = 60.0;
  double policy_size_m = 1.0;
  double d_stop_max_m = 25.0;
  double latency_s = 0.15;
  std::size_t window_capacity = 400;
  double v_obs_max = 0.0;
  double horizon_s = 10.0;
  double match_margin_deg = 0.0;
  double hazard_tolerance = 0.05;
  PlantParams plant;
  WorstCaseBudget wc;
  DisturbanceProfile disturbance;
  PlannerConfig planner;
  LidarSpec lidar = default_lidar();
  DetectorConfig detector;  // h_threshold_m is overwritten from policy_size_m
  std::vector<std::string> mission_covers;  // obstacle ids the mission layer reports
  unsigned seed = 0;                        // reserved; keeps runs reproducible
};

inline Scene scene_of(const ScenarioConfig & cfg)
{
  Scene scene;
  scene.obstacles = cfg.obstacles;
  scene.target = cfg.target;
  return scene;
}

inline void validate(const ScenarioConfig & cfg)
{
  validate(scene_of(cfg));
  validate(cfg.plant);
  validate(cfg.lidar);
  if (cfg.start.z <= cfg.target.center.z) {
    throw std::invalid_argument("start altitude must be above the target");
  }
  if (cfg.duration_s <= 0.0 || cfg.footprint_radius <= 0.0) {
    throw std::invalid_argument("duration and footprint radius must be positive");
  }
  if (cfg.window_capacity == 0) {
    throw std::invalid_argument("window capacity must be positive");
  }
  DetectabilityModel model{beam_gap_deg(cfg.lidar), cfg.policy_size_m};
  const double d_det = checked_detection_range(model, cfg.lidar);
  if (cfg.d_stop_max_m <= 0.0 || cfg.d_stop_max_m > d_det) {
    throw std::invalid_argument(
      "stop-distance cap must be positive and inside the guaranteed detection range");
  }
  // The static budget must exist, or no descent is safe at all.
  a_max_worst_case(cfg.plant.f_max_n, cfg.wc.d_max_n, cfg.wc.m_max_kg, cfg.plant.gravity);
  for (const auto & id : cfg.mission_covers) {
    if (id == "all") {
      continue;
    }
    const bool known = std::any_of(
      cfg.obstacles.begin(), cfg.obstacles.end(),
      [&](const ObstacleBox & o) { return o.id == id; });
    if (!known) {
      throw std::invalid_argument("mission_covers references unknown obstacle '" + id + "'");
    }
  }
}

namespace detail {

inline std::vector<std::string> tokenize(const std::string & line)
{
  std::vector<std::string> tokens;
  std::istringstream is(line);
  std::string tok;
  while (is >> tok) {
    if (tok[0] == '#') {
      break;
    }
    if (tok == "=") {
      continue;
    }
    tokens.push_back(tok);
  }
  return tokens;
}

inline double num(const std::string & s, const std::string & key)
{
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception &) {
    throw std::invalid_argument("bad number '" + s + "' for key '" + key + "'");
  }
}

}  // namespace detail

// Line-oriented key/value text. One key with its arguments per line, '#'
// starts a comment, '=' between key and values is optional. 'disturbance' and
// 'obstacle' lines accumulate.
inline ScenarioConfig parse_scenario(std::istream & is)
{
  ScenarioConfig cfg;
  cfg.disturbance.components.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto tok = detail::tokenize(line);
    if (tok.empty()) {
      continue;
    }
    const std::string & key = tok[0];
    const auto want = [&](std::size_t n) {
      if (tok.size() != n + 1) {
        throw std::invalid_argument(
          "line " + std::to_string(line_no) + ": key '" + key + "' expects " +
          std::to_string(n) + " values");
      }
    };
    if (key == "name") {
      want(1);
      cfg.name = tok[1];
    } else if (key == "start") {
      want(3);
      cfg.start = {detail::num(tok[1], key), detail::num(tok[2], key), detail::num(tok[3], key)};
    } else if (key == "target") {
      want(3);
      cfg.target.center = {
        detail::num(tok[1], key), detail::num(tok[2], key), detail::num(tok[3], key)};
    } else if (key == "target_radius") {
      want(1);
      cfg.target.radius = detail::num(tok[1], key);
    } else if (key == "footprint_radius") {
      want(1);
      cfg.footprint_radius = detail::num(tok[1], key);
    } else if (key == "mode") {
      want(1);
      if (tok[1] == "wc") {
        cfg.mode = AMaxMode::StaticWC;
      } else if (tok[1] == "dc") {
        cfg.mode = AMaxMode::DynamicConfirmation;
      } else {
        throw std::invalid_argument("mode must be 'wc' or 'dc'");
      }
    } else if (key == "duration_s") {
      want(1);
      cfg.duration_s = detail::num(tok[1], key);
    } else if (key == "policy_size_m") {
      want(1);
      cfg.policy_size_m = detail::num(tok[1], key);
    } else if (key == "d_stop_max_m") {
      want(1);
      cfg.d_stop_max_m = detail::num(tok[1], key);
    } else if (key == "latency_s") {
      want(1);
      cfg.latency_s = detail::num(tok[1], key);
    } else if (key == "window_capacity") {
      want(1);
      cfg.window_capacity = static_cast<std::size_t>(detail::num(tok[1], key));
    } else if (key == "v_obs_max") {
      want(1);
      cfg.v_obs_max = detail::num(tok[1], key);
    } else if (key == "horizon_s") {
      want(1);
      cfg.horizon_s = detail::num(tok[1], key);
    } else if (key == "match_margin_deg") {
      want(1);
      cfg.match_margin_deg = detail::num(tok[1], key);
    } else if (key == "hazard_tolerance") {
      want(1);
      cfg.hazard_tolerance = detail::num(tok[1], key);
    } else if (key == "mass_kg") {
      want(1);
      cfg.plant.mass_kg = detail::num(tok[1], key);
    } else if (key == "f_max_n") {
      want(1);
      cfg.plant.f_max_n = detail::num(tok[1], key);
    } else if (key == "wc_d_max_n") {
      want(1);
      cfg.wc.d_max_n = detail::num(tok[1], key);
    } else if (key == "wc_m_max_kg") {
      want(1);
      cfg.wc.m_max_kg = detail::num(tok[1], key);
    } else if (key == "accel_limit") {
      want(1);
      cfg.planner.accel_limit = detail::num(tok[1], key);
    } else if (key == "flare_fraction") {
      want(1);
      cfg.planner.flare_fraction = detail::num(tok[1], key);
    } else if (key == "touchdown_speed") {
      want(1);
      cfg.planner.touchdown_speed = detail::num(tok[1], key);
    } else if (key == "seed") {
      want(1);
      cfg.seed = static_cast<unsigned>(detail::num(tok[1], key));
    } else if (key == "disturbance") {
      DisturbanceComponent comp;
      if (tok.size() >= 2 && tok[1] == "constant") {
        want(2);
        comp.kind = DisturbanceComponent::Kind::Constant;
        comp.amplitude_n = detail::num(tok[2], key);
      } else if (tok.size() >= 2 && tok[1] == "step") {
        want(3);
        comp.kind = DisturbanceComponent::Kind::Step;
        comp.amplitude_n = detail::num(tok[2], key);
        comp.onset_s = detail::num(tok[3], key);
      } else if (tok.size() >= 2 && tok[1] == "sinusoid") {
        want(4);
        comp.kind = DisturbanceComponent::Kind::Sinusoid;
        comp.amplitude_n = detail::num(tok[2], key);
        comp.freq_hz = detail::num(tok[3], key);
        comp.onset_s = detail::num(tok[4], key);
      } else {
        throw std::invalid_argument("disturbance kind must be constant, step, or sinusoid");
      }
      cfg.disturbance.components.push_back(comp);
    } else if (key == "obstacle") {
      want(7);
      ObstacleBox box;
      box.id = tok[1];
      box.center = {detail::num(tok[2], key), detail::num(tok[3], key), detail::num(tok[4], key)};
      box.half_extents = {
        detail::num(tok[5], key), detail::num(tok[6], key), detail::num(tok[7], key)};
      cfg.obstacles.push_back(box);
    } else if (key == "mission_covers") {
      want(1);
      cfg.mission_covers.push_back(tok[1]);
    } else {
      throw std::invalid_argument(
        "line " + std::to_string(line_no) + ": unknown scenario key '" + key + "'");
    }
  }
  cfg.detector.h_threshold_m = cfg.policy_size_m;
  validate(cfg);
  return cfg;
}

inline ScenarioConfig parse_scenario(const std::string & text)
{
  std::istringstream is(text);
  return parse_scenario(is);
}

inline ScenarioConfig load_scenario_file(const std::string & path)
{
  std::ifstream is(path);
  if (!is) {
    throw std::invalid_argument("cannot open scenario file '" + path + "'");
  }
  return parse_scenario(is);
}

inline std::string serialize_scenario(const ScenarioConfig & cfg)
{
  std::ostringstream os;
  os << "name " << cfg.name << "\n";
  os << "start " << detail::format_double(cfg.start.x) << ' ' << detail::format_double(cfg.start.y)
     << ' ' << detail::format_double(cfg.start.z) << "\n";
  os << "target " << detail::format_double(cfg.target.center.x) << ' '
     << detail::format_double(cfg.target.center.y) << ' '
     << detail::format_double(cfg.target.center.z) << "\n";
  os << "target_radius " << detail::format_double(cfg.target.radius) << "\n";
  os << "footprint_radius " << detail::format_double(cfg.footprint_radius) << "\n";
  os << "mode " << to_string(cfg.mode) << "\n";
  os << "duration_s " << detail::format_double(cfg.duration_s) << "\n";
  os << "policy_size_m " << detail::format_double(cfg.policy_size_m) << "\n";
  os << "d_stop_max_m " << detail::format_double(cfg.d_stop_max_m) << "\n";
  os << "latency_s " << detail::format_double(cfg.latency_s) << "\n";
  os << "window_capacity " << cfg.window_capacity << "\n";
  os << "v_obs_max " << detail::format_double(cfg.v_obs_max) << "\n";
  os << "horizon_s " << detail::format_double(cfg.horizon_s) << "\n";
  os << "match_margin_deg " << detail::format_double(cfg.match_margin_deg) << "\n";
  os << "hazard_tolerance " << detail::format_double(cfg.hazard_tolerance) << "\n";
  os << "mass_kg " << detail::format_double(cfg.plant.mass_kg) << "\n";
  os << "f_max_n " << detail::format_double(cfg.plant.f_max_n) << "\n";
  os << "wc_d_max_n " << detail::format_double(cfg.wc.d_max_n) << "\n";
  os << "wc_m_max_kg " << detail::format_double(cfg.wc.m_max_kg) << "\n";
  os << "accel_limit " << detail::format_double(cfg.planner.accel_limit) << "\n";
  os << "flare_fraction " << detail::format_double(cfg.planner.flare_fraction) << "\n";
  os << "touchdown_speed " << detail::format_double(cfg.planner.touchdown_speed) << "\n";
  for (const auto & comp : cfg.disturbance.components) {
    switch (comp.kind) {
      case DisturbanceComponent::Kind::Constant:
        os << "disturbance constant " << detail::format_double(comp.amplitude_n) << "\n";
        break;
      case DisturbanceComponent::Kind::Step:
        os << "disturbance step " << detail::format_double(comp.amplitude_n) << ' '
           << detail::format_double(comp.onset_s) << "\n";
        break;
      case DisturbanceComponent::Kind::Sinusoid:
        os << "disturbance sinusoid " << detail::format_double(comp.amplitude_n) << ' '
           << detail::format_double(comp.freq_hz) << ' ' << detail::format_double(comp.onset_s)
           << "\n";
        break;
    }
  }
  for (const auto & box : cfg.obstacles) {
    os << "obstacle " << box.id << ' ' << detail::format_double(box.center.x) << ' '
       << detail::format_double(box.center.y) << ' ' << detail::format_double(box.center.z) << ' '
       << detail::format_double(box.half_extents.x) << ' '
       << detail::format_double(box.half_extents.y) << ' '
       << detail::format_double(box.half_extents.z) << "\n";
  }
  for (const auto & id : cfg.mission_covers) {
    os << "mission_covers " << id << "\n";
  }
  return os.str();
}

// The four landing experiments plus the capability-drop run used to exercise
// envelope violation and recovery.
inline std::vector<std::string> builtin_scenario_names()
{
  return {"no-obstacle", "obstacle-below", "obstacle-in-path", "obstacle-off-path",
          "transient-drop"};
}

inline ScenarioConfig builtin_scenario(const std::string & name)
{
  ScenarioConfig cfg;
  cfg.name = name;
  cfg.disturbance.components.push_back(
    {DisturbanceComponent::Kind::Constant, -440.0, 0.0, 0.0});
  if (name == "no-obstacle") {
    // nothing else
  } else if (name == "obstacle-below") {
    cfg.obstacles.push_back({"block", {0.0, 0.0, 50.0}, {1.0, 1.0, 1.0}});
  } else if (name == "obstacle-in-path") {
    cfg.obstacles.push_back({"block", {2.0, 0.0, 50.0}, {1.0, 1.0, 1.0}});
  } else if (name == "obstacle-off-path") {
    cfg.obstacles.push_back({"block", {3.0, 0.0, 50.0}, {1.0, 1.0, 1.0}});
  } else if (name == "transient-drop") {
    cfg.start.z = 250.0;
    cfg.disturbance.components.push_back(
      {DisturbanceComponent::Kind::Step, -3250.0, 12.0, 0.0});
  } else {
    throw std::invalid_argument("unknown built-in scenario '" + name + "'");
  }
  cfg.detector.h_threshold_m = cfg.policy_size_m;
  validate(cfg);
  return cfg;
}

}  // namespace landing_safety
