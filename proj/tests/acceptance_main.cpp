// Acceptance gate: one line per criterion, exit code = number of failures.
//
// Each check runs against the public library surface only, with fresh state,
// so a failure localizes to the feature named on its line.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numbers>
#include <random>
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
#include "landing_safety/sim.hpp"

using namespace landing_safety;

namespace {

int g_failures = 0;

void report(int number, bool ok, const std::string & detail)
{
  std::printf("AC-%d %s: %s\n", number, ok ? "PASS" : "FAIL", detail.c_str());
  if (!ok) {
    ++g_failures;
  }
}

template <typename Fn>
void criterion(int number, Fn && fn)
{
  try {
    fn();
  } catch (const std::exception & e) {
    report(number, false, std::string("unexpected error: ") + e.what());
  }
}

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

RunMetrics run(const std::string & name, AMaxMode mode)
{
  ScenarioConfig cfg = builtin_scenario(name);
  cfg.mode = mode;
  return run_scenario(cfg);
}

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

int main()
{
  RunMetrics clear_wc;
  RunMetrics clear_dc;

  // Landing on a clear pad completes in both modes, and the confirmed
  // deceleration bound buys a 1.3x to 1.8x faster descent.
  criterion(1, [&] {
    clear_wc = run("no-obstacle", AMaxMode::StaticWC);
    clear_dc = run("no-obstacle", AMaxMode::DynamicConfirmation);
    const double ratio = clear_wc.landing_time_s / clear_dc.landing_time_s;
    const bool ok = clear_wc.landed && clear_dc.landed && ratio >= 1.3 && ratio <= 1.8;
    report(1, ok, "landing " + fmt(clear_wc.landing_time_s) + " s static vs " +
                    fmt(clear_dc.landing_time_s) + " s confirmed, ratio " + fmt(ratio) +
                    " (want 1.3..1.8)");
  });

  // Obstacles under or intruding into the corridor end in a hover with
  // positive clearance, never a collision, in both modes.
  criterion(2, [&] {
    int passed = 0;
    std::string worst;
    for (const char * name : {"obstacle-below", "obstacle-in-path"}) {
      for (const auto mode : {AMaxMode::StaticWC, AMaxMode::DynamicConfirmation}) {
        const RunMetrics m = run(name, mode);
        const bool ok = m.hovered && !m.collided && m.final_clearance_m > 0.0 &&
                        m.min_clearance_m > 0.0;
        if (ok) {
          ++passed;
        } else {
          worst = std::string(name) + "/" + to_string(mode) + " terminal=" + m.terminal;
        }
      }
    }
    report(2, passed == 4,
           passed == 4 ? "4/4 obstacle runs hover clear of the obstacle"
                       : "only " + std::to_string(passed) + "/4 runs hover (" + worst + ")");
  });

  // An obstacle beside the corridor does not perturb the landing.
  criterion(3, [&] {
    const RunMetrics off_wc = run("obstacle-off-path", AMaxMode::StaticWC);
    const RunMetrics off_dc = run("obstacle-off-path", AMaxMode::DynamicConfirmation);
    const double dev_wc =
      std::abs(off_wc.landing_time_s - clear_wc.landing_time_s) / clear_wc.landing_time_s;
    const double dev_dc =
      std::abs(off_dc.landing_time_s - clear_dc.landing_time_s) / clear_dc.landing_time_s;
    const bool ok = off_wc.landed && off_dc.landed && dev_wc <= 0.05 && dev_dc <= 0.05;
    report(3, ok, "off-path landing times deviate " + fmt(100.0 * dev_wc) + "% / " +
                    fmt(100.0 * dev_dc) + "% from the clear pad (want <= 5%)");
  });

  // Every ground-resting cube at least as large as the guaranteed-detectable
  // size for its distance is flagged on a rendered sweep; flat ground alone
  // never is.
  criterion(4, [&] {
    const LidarSpec lidar = default_lidar();
    const DetectorConfig det_cfg;
    const double gap = beam_gap_deg(lidar);

    int combos = 0;
    int flagged = 0;
    for (const double xi_s : {75.0, 82.0}) {
      for (const double range : {4.5, 6.0, 8.0, 10.0, 13.0, 16.0, 20.0, 24.0, 28.5}) {
        for (const double factor : {1.15, 1.5, 2.0, 3.0, 5.0, 8.0}) {
          for (const double az : {0.0, 33.0}) {
            const double size = factor * min_detectable_dimension(range, gap);
            const double altitude = range * std::sin(rad(xi_s)) + size;
            const double near_x = range * std::cos(rad(xi_s));
            const double off = near_x + 0.5 * size;

            Scene scene;
            scene.target = {{0.0, 0.0, 0.0}, 5.0};
            scene.obstacles.push_back({"cube",
                                       {off * std::cos(rad(az)), off * std::sin(rad(az)),
                                        0.5 * size},
                                       {0.5 * size, 0.5 * size, 0.5 * size}});
            const VehicleState vehicle{{0.0, 0.0, altitude}, 0.0, 1.5};
            const RangeImage image = render_range_image(lidar, vehicle, scene);
            const LabelGrid labels =
              classify_returns(image, lidar, det_cfg, altitude, 0.0);
            bool hit = false;
            for (const CellLabel label : labels.labels) {
              if (label == CellLabel::Obstacle) {
                hit = true;
                break;
              }
            }
            ++combos;
            if (hit) {
              ++flagged;
            }
          }
        }
      }
    }

    int false_positives = 0;
    int clean_scenes = 0;
    for (double altitude = 10.0; altitude <= 120.0; altitude += 5.0) {
      Scene scene;
      scene.target = {{0.0, 0.0, 0.0}, 5.0};
      const VehicleState vehicle{{0.0, 0.0, altitude}, 0.0, 1.5};
      const RangeImage image = render_range_image(lidar, vehicle, scene);
      const LabelGrid labels = classify_returns(image, lidar, det_cfg, altitude, 0.0);
      ++clean_scenes;
      for (const CellLabel label : labels.labels) {
        if (label == CellLabel::Obstacle) {
          ++false_positives;
        }
      }
    }

    const bool ok = combos >= 200 && flagged == combos && false_positives == 0;
    report(4, ok, std::to_string(flagged) + "/" + std::to_string(combos) +
                    " qualifying cubes flagged, " + std::to_string(false_positives) +
                    " false positives over " + std::to_string(clean_scenes) +
                    " flat-ground sweeps");
  });

  // The adaptation loop: the cancellation value exactly annihilates the
  // propagated prediction error, and a 20%-of-authority step disturbance is
  // estimated to 2% within half a second.
  criterion(5, [&] {
    double worst_identity = 0.0;
    for (const double mass : {1.0, 250.0, 1000.0, 1100.0}) {
      PlantParams params;
      params.mass_kg = mass;
      params.f_max_n = std::max(50.0, 14.5 * mass);
      ControllerState ctrl = make_controller(default_controller_config(params));
      const double decay = std::exp(ctrl.config.a_s * ctrl.config.t_s);
      const double phi = adaptation_phi(ctrl.config);
      for (const double v_tilde : {-3.0, -0.7, 0.0, 0.4, 2.5}) {
        const double sigma_hat = adaptation_update(ctrl, v_tilde, params);
        worst_identity =
          std::max(worst_identity, std::abs(decay * v_tilde + phi * sigma_hat / mass));
      }
    }

    PlantParams params;
    ControllerState ctrl = make_controller(default_controller_config(params));
    PlantState plant{100.0, 0.0};
    const double sigma_step = 0.2 * params.f_max_n;
    double worst_rel = 0.0;
    for (int i = 0; i < 800; ++i) {
      const double t = static_cast<double>(i) * ctrl.config.t_s;
      const double sigma = t >= 1.0 ? sigma_step : 0.0;
      const ControlStepResult res = control_step(ctrl, plant, 100.0, 0.0, params);
      plant = plant_step(plant, params, res.u_total, sigma, ctrl.config.t_s);
      if (t >= 1.5) {
        worst_rel = std::max(worst_rel, std::abs(res.sigma_bar - sigma_step) / sigma_step);
      }
    }

    const bool ok = worst_identity <= 1e-10 && worst_rel <= 0.02;
    report(5, ok, "cancellation residual " + fmt(worst_identity) +
                    " (want <= 1e-10), step estimate error " + fmt(100.0 * worst_rel) +
                    "% after settling (want <= 2%)");
  });

  // Envelope algebra: the speed bound inverts back to the distance it was
  // derived from, orders correctly in every argument, and reproduces the
  // frozen worst-case figure.
  criterion(6, [&] {
    double worst_rel = 0.0;
    for (const double a : {0.5, 1.0, 1.34, 2.0, 4.25, 6.0}) {
      for (const double latency : {0.0, 0.05, 0.1, 0.15, 0.3}) {
        for (const double d : {1.0, 5.0, 10.0, 25.0, 28.6479, 50.0, 100.0}) {
          const double v = v_safe_max(a, latency, d);
          const double back = stopping_distance(v, a, latency);
          worst_rel = std::max(worst_rel, std::abs(back - d) / d);
        }
      }
    }

    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> a_dist(0.3, 6.0);
    std::uniform_real_distribution<double> l_dist(0.0, 0.4);
    std::uniform_real_distribution<double> d_dist(0.5, 100.0);
    std::uniform_real_distribution<double> v_dist(0.0, 20.0);
    int order_errors = 0;
    for (int i = 0; i < 1000; ++i) {
      const double a = a_dist(rng);
      const double latency = l_dist(rng);
      const double d = d_dist(rng);
      const double v = v_dist(rng);
      if (v_safe_max(1.05 * a, latency, d) < v_safe_max(a, latency, d)) ++order_errors;
      if (v_safe_max(a, latency, 1.05 * d) < v_safe_max(a, latency, d)) ++order_errors;
      if (v_safe_max(a, latency + 0.05, d) > v_safe_max(a, latency, d)) ++order_errors;
      if (stopping_distance(1.05 * v, a, latency) < stopping_distance(v, a, latency))
        ++order_errors;
      if (stopping_distance(v, 1.05 * a, latency) > stopping_distance(v, a, latency))
        ++order_errors;
      if (stopping_distance(v, a, latency + 0.05) < stopping_distance(v, a, latency))
        ++order_errors;
    }

    const double frozen = v_safe_max(1.34, 0.0, 50.0);
    const bool frozen_ok = std::abs(frozen - 11.5758) <= 1e-3;
    const bool ok = worst_rel <= 1e-9 && order_errors == 0 && frozen_ok;
    report(6, ok, "round-trip error " + fmt(worst_rel) + " (want <= 1e-9), " +
                    std::to_string(order_errors) + " ordering violations, bound(1.34, 0, 50) = " +
                    fmt(frozen) + " (want 11.5758 +/- 1e-3)");
  });

  // The sliding window minimum agrees with a brute-force model over a long
  // random schedule of inserts and resizes.
  criterion(7, [&] {
    SlidingWindow window(300);
    std::deque<double> model;
    std::size_t cap = 300;
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> value(0.1, 9.0);
    std::uniform_int_distribution<int> choice(0, 99);
    std::uniform_int_distribution<int> new_cap(1, 500);

    int mismatches = 0;
    int ops = 0;
    for (int i = 0; i < 10000; ++i) {
      if (choice(rng) < 5) {
        cap = static_cast<std::size_t>(new_cap(rng));
        window.resize(cap);
        while (model.size() > cap) model.pop_front();
      } else {
        const double v = value(rng);
        window.insert(v);
        model.push_back(v);
        while (model.size() > cap) model.pop_front();
      }
      ++ops;
      const auto got = window.worst();
      if (model.empty()) {
        if (got.has_value()) ++mismatches;
      } else {
        const double want = *std::min_element(model.begin(), model.end());
        if (!got.has_value() || *got != want) ++mismatches;
      }
      if (window.size() != model.size()) ++mismatches;
    }
    report(7, mismatches == 0, std::to_string(mismatches) + " disagreements with the reference model over " +
                                 std::to_string(ops) + " operations");
  });

  // The override monitor's decision matrix: mission coverage, obstacle risk,
  // and the speed check compose the way the monitor documents.
  criterion(8, [&] {
    const LandingTarget target{{0.0, 0.0, 0.0}, 5.0};
    const EnvelopeParams envelope{4.0, 0.1, 25.0, 28.6479};

    // High enough that a 40 m gap stays beyond even the overspeed stopping
    // distance (about 36 m), so "distant" is distant for both speed rows.
    const auto vehicle_at = [&](double speed) {
      return VehicleState{{0.0, 0.0, 60.0}, -speed, 1.5};
    };
    const auto ctx_for = [&](const VehicleState & v) {
      return RiskContext{v, target, envelope, 0.8, 0.0, 10.0, 0.0, 0.05};
    };
    const auto below = [&](double gap, const std::string & id, const AngularRect & proj) {
      DetectedObstacle det;
      det.id = id;
      det.cells = {{1, 0}};
      det.closest_range = gap;
      det.projection = proj;
      det.extent_min = {-1.0, -1.0, -gap - 2.0};
      det.extent_max = {1.0, 1.0, -gap};
      return det;
    };
    const AngularRect proj_a{170.0, 190.0, 80.0, 90.0};
    const AngularRect proj_b{200.0, 220.0, 70.0, 78.0};

    const double bound = v_safe_max(4.0, 0.1, 25.0);
    const VehicleState slow = vehicle_at(8.0);
    const VehicleState fast = vehicle_at(1.2 * bound);

    OverrideMonitor monitor;
    const auto decide = [&](const VehicleState & v, const std::vector<DetectedObstacle> & dets,
                            const MissionDetectionSet & mission) {
      monitor.reset();
      return monitor.decide(mission, dets, ctx_for(v)).kind;
    };

    int wrong = 0;
    const auto expect = [&](OverrideKind got, OverrideKind want) {
      if (got != want) ++wrong;
    };

    // Rows: no obstacle / covered risky / uncovered risky; columns: speed ok,
    // overspeed, risky-and-overspeed together.
    expect(decide(slow, {}, {}), OverrideKind::NoOverride);
    expect(decide(fast, {}, {}), OverrideKind::ControlOverride);
    expect(decide(slow, {below(5.0, "a", proj_a)}, {proj_a}), OverrideKind::NoOverride);
    expect(decide(fast, {below(5.0, "a", proj_a)}, {proj_a}),
           OverrideKind::ControlOverride);
    expect(decide(slow, {below(5.0, "a", proj_a)}, {}), OverrideKind::Hover);
    expect(decide(fast, {below(5.0, "a", proj_a)}, {}), OverrideKind::Hover);
    expect(decide(slow, {below(40.0, "a", proj_a)}, {}), OverrideKind::NoOverride);
    expect(decide(fast, {below(40.0, "a", proj_a)}, {}), OverrideKind::ControlOverride);
    // Covered near risk plus uncovered far risk: the uncovered one rules.
    {
      monitor.reset();
      const auto d = monitor.decide(
        {proj_a}, {below(4.0, "near", proj_a), below(6.0, "far", proj_b)},
        ctx_for(slow));
      if (d.kind != OverrideKind::Hover || !d.cause || d.cause->obstacle_id != "far") ++wrong;
    }

    report(8, wrong == 0, std::to_string(9 - wrong) + "/9 decision cases correct");
  });

  // A mid-descent capability drop produces a logged violation interval, a
  // recovery within ten seconds, and a safe landing.
  criterion(9, [&] {
    const RunMetrics m = run("transient-drop", AMaxMode::DynamicConfirmation);
    const bool ok = m.first_violation_s > 0.0 && m.violation_time_s > 0.0 &&
                    m.recovery_time_s > 0.0 && m.recovery_time_s <= 10.0 && !m.collided &&
                    m.landed;
    report(9, ok, "violation began " + fmt(m.first_violation_s) + " s in, lasted " +
                    fmt(m.violation_time_s) + " s, recovered in " + fmt(m.recovery_time_s) +
                    " s (want <= 10), terminal " + m.terminal);
  });

  // Every built-in scenario replays bit-identically in both modes.
  criterion(10, [&] {
    int identical = 0;
    int total = 0;
    std::string first_diff;
    for (const auto & name : builtin_scenario_names()) {
      for (const auto mode : {AMaxMode::StaticWC, AMaxMode::DynamicConfirmation}) {
        ScenarioConfig cfg = builtin_scenario(name);
        cfg.mode = mode;
        std::ostringstream trace_a;
        std::ostringstream trace_b;
        RunSinks sinks_a;
        sinks_a.trace = &trace_a;
        RunSinks sinks_b;
        sinks_b.trace = &trace_b;
        const RunMetrics a = run_scenario(cfg, sinks_a);
        const RunMetrics b = run_scenario(cfg, sinks_b);
        ++total;
        if (trace_a.str() == trace_b.str() && metrics_json(a) == metrics_json(b)) {
          ++identical;
        } else if (first_diff.empty()) {
          first_diff = name + "/" + to_string(mode);
        }
      }
    }
    report(10, identical == total,
           std::to_string(identical) + "/" + std::to_string(total) +
             " scenario replays bit-identical" +
             (first_diff.empty() ? "" : " (first diff: " + first_diff + ")"));
  });

  if (g_failures == 0) {
    std::printf("all %d criteria passed\n", 10);
  } else {
    std::printf("%d criteria failed\n", g_failures);
  }
  return g_failures;
}
