// Command-line front end for the landing safety layer: run the built-in or
// file-defined descent scenarios, compare the two deceleration-bound modes,
// and dump the envelope and detectability reference curves.

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "landing_safety/sim.hpp"

namespace {

using namespace landing_safety;

ScenarioConfig resolve_scenario(const std::string & ref)
{
  if (std::filesystem::exists(ref)) {
    return load_scenario_file(ref);
  }
  return builtin_scenario(ref);
}

struct RunOutputs {
  std::unique_ptr<std::ofstream> trace;
  std::unique_ptr<std::ofstream> events;
  RunSinks sinks;
};

RunOutputs open_outputs(const std::string & out_dir, const ScenarioConfig & cfg)
{
  RunOutputs out;
  if (out_dir.empty()) {
    return out;
  }
  std::filesystem::create_directories(out_dir);
  const std::string base = out_dir + "/" + cfg.name + "-" + to_string(cfg.mode);
  out.trace = std::make_unique<std::ofstream>(base + "-trace.csv");
  out.events = std::make_unique<std::ofstream>(base + "-events.csv");
  if (!*out.trace || !*out.events) {
    throw std::invalid_argument("cannot write into output directory '" + out_dir + "'");
  }
  *out.events << "t,event,detail\n";
  out.sinks.trace = out.trace.get();
  out.sinks.events = out.events.get();
  return out;
}

int exit_code_for(const RunMetrics & m) { return m.collided ? 2 : 0; }

int run_one(const std::string & ref, const std::string & mode, const std::string & out_dir)
{
  ScenarioConfig cfg = resolve_scenario(ref);
  if (mode == "wc") {
    cfg.mode = AMaxMode::StaticWC;
  } else if (mode == "dc") {
    cfg.mode = AMaxMode::DynamicConfirmation;
  } else if (!mode.empty()) {
    throw std::invalid_argument("mode must be 'wc' or 'dc'");
  }
  RunOutputs out = open_outputs(out_dir, cfg);
  const RunMetrics metrics = run_scenario(cfg, out.sinks);
  const std::string line = metrics_json(metrics);
  std::cout << line << "\n";
  if (!out_dir.empty()) {
    std::ofstream mf(out_dir + "/" + cfg.name + "-" + to_string(cfg.mode) + "-metrics.json");
    mf << line << "\n";
  }
  return exit_code_for(metrics);
}

int run_compare(const std::string & ref, const std::string & out_dir)
{
  ScenarioConfig cfg = resolve_scenario(ref);
  int worst = 0;
  double times[2] = {-1.0, -1.0};
  const AMaxMode modes[2] = {AMaxMode::StaticWC, AMaxMode::DynamicConfirmation};
  for (int i = 0; i < 2; ++i) {
    cfg.mode = modes[i];
    RunOutputs out = open_outputs(out_dir, cfg);
    const RunMetrics metrics = run_scenario(cfg, out.sinks);
    const std::string line = metrics_json(metrics);
    std::cout << line << "\n";
    if (!out_dir.empty()) {
      std::ofstream mf(out_dir + "/" + cfg.name + "-" + to_string(cfg.mode) + "-metrics.json");
      mf << line << "\n";
    }
    times[i] = metrics.landing_time_s;
    worst = std::max(worst, exit_code_for(metrics));
  }
  if (times[0] > 0.0 && times[1] > 0.0) {
    std::cout << "{\"wc_landing_s\":" << detail::format_double(times[0])
              << ",\"dc_landing_s\":" << detail::format_double(times[1])
              << ",\"speedup\":" << detail::format_double(times[0] / times[1]) << "}\n";
  }
  return worst;
}

void write_curve(const std::string & out, const std::function<void(std::ostream &)> & fn)
{
  if (out.empty()) {
    fn(std::cout);
    return;
  }
  std::ofstream os(out);
  if (!os) {
    throw std::invalid_argument("cannot open '" + out + "' for writing");
  }
  fn(os);
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Vertical landing safety layer simulator"};
  app.require_subcommand(1);

  std::string scenario_ref;
  std::string mode;
  std::string out_dir;
  std::string out_file;

  auto * run = app.add_subcommand("run", "Run one scenario and print its metrics");
  run->add_option("scenario", scenario_ref, "Built-in scenario name or path to a scenario file")
    ->required();
  run->add_option("--mode", mode, "Override the deceleration-bound mode: wc or dc");
  run->add_option("--out-dir", out_dir, "Directory for trace/events/metrics files");

  auto * compare = app.add_subcommand("compare", "Run a scenario in both modes");
  compare
    ->add_option("scenario", scenario_ref, "Built-in scenario name or path to a scenario file")
    ->required();
  compare->add_option("--out-dir", out_dir, "Directory for trace/events/metrics files");

  double a_dc = 4.25;
  auto * envelope = app.add_subcommand("envelope", "Dump safe-speed curves as CSV");
  envelope->add_option("--out", out_file, "Output file (default: stdout)");
  envelope->add_option("--a-dc", a_dc, "Confirmed deceleration for the second curve family");

  auto * detect = app.add_subcommand(
    "detectability-curve", "Dump the minimum detectable obstacle dimension vs range");
  detect->add_option("--out", out_file, "Output file (default: stdout)");

  auto * list = app.add_subcommand("list", "List built-in scenarios");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      return run_one(scenario_ref, mode, out_dir);
    }
    if (compare->parsed()) {
      return run_compare(scenario_ref, out_dir);
    }
    if (envelope->parsed()) {
      const landing_safety::ScenarioConfig cfg;  // defaults
      const double a_wc = landing_safety::a_max_worst_case(
        cfg.plant.f_max_n, cfg.wc.d_max_n, cfg.wc.m_max_kg, cfg.plant.gravity);
      const landing_safety::DetectabilityModel model{
        landing_safety::beam_gap_deg(cfg.lidar), cfg.policy_size_m};
      const double d_det = landing_safety::checked_detection_range(model, cfg.lidar);
      write_curve(out_file, [&](std::ostream & os) {
        landing_safety::write_envelope_curves_csv(a_wc, a_dc, cfg.latency_s, d_det, os);
      });
      return 0;
    }
    if (detect->parsed()) {
      const landing_safety::ScenarioConfig cfg;
      const landing_safety::DetectabilityModel model{
        landing_safety::beam_gap_deg(cfg.lidar), cfg.policy_size_m};
      write_curve(out_file, [&](std::ostream & os) {
        landing_safety::write_detectability_curve_csv(model, cfg.lidar.max_range_m, os);
      });
      return 0;
    }
    if (list->parsed()) {
      for (const auto & name : landing_safety::builtin_scenario_names()) {
        std::cout << name << "\n";
      }
      return 0;
    }
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
