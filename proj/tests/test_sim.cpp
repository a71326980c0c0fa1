#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "landing_safety/scenario.hpp"
#include "landing_safety/sim.hpp"

using namespace landing_safety;

namespace
{

RunMetrics run(const std::string & name, AMaxMode mode)
{
  ScenarioConfig cfg = builtin_scenario(name);
  cfg.mode = mode;
  return run_scenario(cfg);
}

}  // namespace

TEST_CASE("descent planner ramps, flares, and settles at touchdown speed")
{
  PlannerConfig cfg;
  DescentPlanner planner(cfg, 100.0, 0.0);
  const double dt = 0.005;
  double prev_v = 0.0;
  double max_ramp = 0.0;
  while (planner.target_altitude() > 1e-9) {
    planner.step(dt, 12.0, 4.0);
    const double v = -planner.target_velocity();
    max_ramp = std::max(max_ramp, v - prev_v);
    prev_v = v;
    CHECK(v <= 12.0 + 1e-9);
  }
  // Acceleration of the commanded profile never exceeds the ramp limit.
  CHECK(max_ramp <= cfg.accel_limit * dt + 1e-9);
  // At the bottom of the flare the command has decayed to touchdown speed.
  CHECK(-planner.target_velocity() == Catch::Approx(cfg.touchdown_speed).margin(0.3));
}

TEST_CASE("clear pad lands in both modes and the cautious mode is slower")
{
  const RunMetrics wc = run("no-obstacle", AMaxMode::StaticWC);
  const RunMetrics dc = run("no-obstacle", AMaxMode::DynamicConfirmation);

  REQUIRE(wc.landed);
  REQUIRE(dc.landed);
  CHECK(wc.terminal == "landed");
  CHECK(dc.terminal == "landed");

  CHECK(wc.landing_time_s > 15.0);
  CHECK(wc.landing_time_s < 21.0);
  CHECK(dc.landing_time_s > 10.5);
  CHECK(dc.landing_time_s < 14.5);
  CHECK(wc.landing_time_s > dc.landing_time_s);

  // The tracker keeps the vehicle inside the speed limit the whole way down.
  CHECK(wc.violation_time_s == 0.0);
  CHECK(dc.violation_time_s == 0.0);
  CHECK(wc.max_speed_over_limit <= 0.2);
  CHECK(dc.max_speed_over_limit <= 0.2);
}

TEST_CASE("an obstacle under the pad forces a hover instead of a landing")
{
  for (const auto mode : {AMaxMode::StaticWC, AMaxMode::DynamicConfirmation}) {
    const RunMetrics m = run("obstacle-below", mode);
    INFO("mode " << to_string(mode));
    REQUIRE(m.hovered);
    CHECK(m.terminal == "hovered");
    CHECK_FALSE(m.collided);
    CHECK(m.min_clearance_m > 0.0);
    // The box top sits at 51 m; the vehicle must stop above it.
    CHECK(m.final_altitude_m > 51.0);
    // The stop was ordered while still outside the stopping distance.
    CHECK(m.hover_trigger_range_m >= m.hover_trigger_stop_m);
  }
}

TEST_CASE("the static budget stops much earlier than the confirmed one")
{
  const RunMetrics wc = run("obstacle-below", AMaxMode::StaticWC);
  const RunMetrics dc = run("obstacle-below", AMaxMode::DynamicConfirmation);
  REQUIRE(wc.hovered);
  REQUIRE(dc.hovered);
  CHECK(wc.final_clearance_m > dc.final_clearance_m);
  CHECK(dc.final_clearance_m > 0.5);
  CHECK(wc.final_clearance_m > 10.0);
}

TEST_CASE("an obstacle intruding into the corridor is caught mid-descent")
{
  const RunMetrics m = run("obstacle-in-path", AMaxMode::StaticWC);
  REQUIRE(m.hovered);
  CHECK_FALSE(m.collided);
  CHECK(m.min_clearance_m > 0.0);
}

TEST_CASE("an obstacle beside the corridor does not delay the landing")
{
  const RunMetrics clear_dc = run("no-obstacle", AMaxMode::DynamicConfirmation);
  const RunMetrics off_dc = run("obstacle-off-path", AMaxMode::DynamicConfirmation);
  REQUIRE(off_dc.landed);
  CHECK_FALSE(off_dc.hovered);
  CHECK(off_dc.landing_time_s == Catch::Approx(clear_dc.landing_time_s).margin(1e-9));

  const RunMetrics off_wc = run("obstacle-off-path", AMaxMode::StaticWC);
  REQUIRE(off_wc.landed);
  CHECK_FALSE(off_wc.collided);
}

TEST_CASE("a thrust drop mid-descent is absorbed and the landing completes")
{
  const RunMetrics m = run("transient-drop", AMaxMode::DynamicConfirmation);
  REQUIRE(m.landed);
  CHECK_FALSE(m.collided);
  // The drop pushes the vehicle over the shrinking speed limit for a while.
  CHECK(m.first_violation_s > 0.0);
  CHECK(m.violation_time_s > 0.0);
  CHECK(m.recovery_time_s > 0.0);
  CHECK(m.recovery_time_s <= 10.0);
  // After the drop the confirmed ceiling settles at the degraded capability.
  CHECK(m.a_max_active_final == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("a mission-covered obstacle is left to the mission planner")
{
  ScenarioConfig cfg = builtin_scenario("obstacle-below");
  cfg.mode = AMaxMode::DynamicConfirmation;
  cfg.mission_covers.push_back("block");
  const RunMetrics m = run_scenario(cfg);
  // The safety layer defers entirely: no hover is ever ordered, and the
  // descent proceeds into the box the mission claimed responsibility for.
  CHECK(m.hover_trigger_range_m < 0.0);
  CHECK_FALSE(m.hovered);
  CHECK(m.collided);
}

TEST_CASE("runs are deterministic byte for byte")
{
  ScenarioConfig cfg = builtin_scenario("transient-drop");
  cfg.mode = AMaxMode::DynamicConfirmation;

  std::ostringstream trace_a;
  std::ostringstream trace_b;
  RunSinks sinks_a;
  sinks_a.trace = &trace_a;
  RunSinks sinks_b;
  sinks_b.trace = &trace_b;

  const RunMetrics a = run_scenario(cfg, sinks_a);
  const RunMetrics b = run_scenario(cfg, sinks_b);

  CHECK(trace_a.str() == trace_b.str());
  CHECK(metrics_json(a) == metrics_json(b));
  CHECK(a.steps == b.steps);
}

TEST_CASE("event and trace sinks receive well formed rows")
{
  ScenarioConfig cfg = builtin_scenario("obstacle-below");
  cfg.mode = AMaxMode::StaticWC;

  std::ostringstream trace;
  std::ostringstream events;
  RunSinks sinks;
  sinks.trace = &trace;
  sinks.events = &events;
  const RunMetrics m = run_scenario(cfg, sinks);
  REQUIRE(m.hovered);

  const std::string t = trace.str();
  CHECK(t.rfind("t,altitude,velocity,target_p,target_v,", 0) == 0);
  CHECK(t.find("hover") != std::string::npos);

  const std::string e = events.str();
  CHECK(e.find("start") != std::string::npos);
  CHECK(e.find("hover") != std::string::npos);
  CHECK(e.find("terminal") != std::string::npos);
}
