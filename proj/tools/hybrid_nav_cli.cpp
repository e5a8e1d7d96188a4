// Command-line front end: plan on a map or scenario file, emit JSON and SVG,
// run benchmark suites and the step weight calibration.

#include "hybrid_nav/calibration.hpp"
#include "hybrid_nav/io.hpp"
#include "hybrid_nav/motiongen.hpp"
#include "hybrid_nav/planner.hpp"
#include "hybrid_nav/scenarios.hpp"

#include "CLI11.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace hybrid_nav;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNoPath = 2;
constexpr int kExitExpansion = 3;

struct Options
{
  std::string map;
  std::string scenario;
  std::string start;
  std::string goal;
  std::optional<double> budget_s;
  std::optional<double> initial_weight;
  std::optional<int> neighborhood;
  std::string emit_json;
  std::string emit_svg;
  bool calibrate = false;
  std::string bench;
  int reps = 1;
  std::string bench_out;
};

void setup_logging()
{
  auto logger = spdlog::stderr_color_mt("planner");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* level = std::getenv("PLANNER_LOG");
  spdlog::set_level(level ? spdlog::level::from_str(level) : spdlog::level::warn);
}

/// Map plus default poses, from a builtin generator or a map file.
struct LoadedMap
{
  std::string name;
  HeightMap map;
  std::optional<PoseSpec> start;
  std::optional<PoseSpec> goal;
};

LoadedMap load_map(const std::string& spec)
{
  const std::string prefix = "builtin:";
  if (spec.rfind(prefix, 0) == 0)
  {
    BuiltinScenario b = builtin_scenario(spec.substr(prefix.size()));
    return {spec, std::move(b.map), b.start, b.goal};
  }
  return {spec, load_height_map(spec), std::nullopt, std::nullopt};
}

void write_text(const std::string& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw Error("io", "cannot write '" + path + "'");
  out << text;
}

void require_on_map(const HeightMap& map, const PoseSpec& p, const std::string& what)
{
  const double res = map.resolution();
  const Cell c{int(std::lround(p.x / res)), int(std::lround(p.y / res))};
  if (!map.contains(c))
    throw Error("validation", what + " pose lies outside the map");
}

//------------------------------------------------------------------------------
int run_plan(const Options& opt)
{
  PlannerConfig config;
  std::optional<ScenarioFile> scenario;
  if (!opt.scenario.empty())
  {
    scenario = load_scenario(opt.scenario);
    scenario->apply_overrides(config);
  }
  if (opt.initial_weight)
    config.planner.initial_weight = *opt.initial_weight;
  if (opt.neighborhood)
    config.planner.neighborhood = *opt.neighborhood;
  config.validate();

  std::string map_spec = opt.map;
  if (map_spec.empty() && scenario)
  {
    if (scenario->builtin)
      map_spec = "builtin:" + *scenario->builtin;
    else if (scenario->map_path)
      map_spec = *scenario->map_path;
  }
  if (map_spec.empty())
    throw Error("usage", "no map given (use --map or a scenario file)");
  LoadedMap loaded = load_map(map_spec);

  auto pick_pose = [&](const std::string& flag, const std::optional<PoseSpec>& from_file,
                     const std::optional<PoseSpec>& from_map, const std::string& what) {
    if (!flag.empty())
      return parse_pose_spec(flag, what);
    if (from_file)
      return *from_file;
    if (from_map)
      return *from_map;
    throw Error("usage", "no " + what + " pose given");
  };
  PlanReport report;
  report.params = config;
  report.map = loaded.name;
  report.resolution = loaded.map.resolution();
  report.start = pick_pose(opt.start, scenario ? scenario->start : std::nullopt, loaded.start,
    "start");
  report.goal = pick_pose(opt.goal, scenario ? scenario->goal : std::nullopt, loaded.goal, "goal");
  require_on_map(loaded.map, report.start, "start");
  require_on_map(loaded.map, report.goal, "goal");

  double budget = 10.0;
  if (scenario && scenario->budget_s)
    budget = *scenario->budget_s;
  if (opt.budget_s)
    budget = *opt.budget_s;
  std::string json_path = opt.emit_json, svg_path = opt.emit_svg;
  if (json_path.empty() && scenario && scenario->emit_json)
    json_path = *scenario->emit_json;
  if (svg_path.empty() && scenario && scenario->emit_svg)
    svg_path = *scenario->emit_svg;

  const CostModel model(loaded.map, config.cost, config.geometry);
  const AraStarPlanner planner(model, config.planner);
  const RobotPose start = make_neutral_pose(model.footprint(), report.start);
  const RobotPose goal = make_neutral_pose(model.footprint(), report.goal);
  spdlog::info("planning on {} ({}x{} cells), budget {} s", loaded.name, loaded.map.width(),
    loaded.map.height(), budget);

  int status = kExitOk;
  try
  {
    report.iterations = planner.plan(start, goal, budget, [](const AbstractPath& p) {
      spdlog::info("w={} cost={:.6f} expansions={} ms={:.1f} manoeuvres={}", p.weight, p.cost,
        p.stats.expansions, p.stats.wall_ms, p.manoeuvres.size());
    });
  }
  catch (const Error& e)
  {
    report.error = e.kind();
    report.message = e.what();
    status = kExitNoPath;
    spdlog::error("{}: {}", e.kind(), e.what());
  }

  if (status == kExitOk)
  {
    try
    {
      report.executable = expand_path(report.iterations.back(), model, config.motion);
      spdlog::info("{} keyframes", report.executable.keyframes.size());
    }
    catch (const Error& e)
    {
      report.error = e.kind();
      report.message = e.what();
      status = kExitExpansion;
      spdlog::error("{}: {}", e.kind(), e.what());
    }
  }

  const std::string json = dump_report(report);
  if (json_path.empty())
    std::cout << json;
  else
    write_text(json_path, json);
  if (!svg_path.empty() && !report.iterations.empty())
  {
    std::ostringstream svg;
    write_svg(svg, model, report.iterations.back());
    write_text(svg_path, svg.str());
  }
  return status;
}

//------------------------------------------------------------------------------
struct BenchCase
{
  std::string label;
  std::string scenario;
  PlannerConfig config;
};

std::vector<BenchCase> bench_suite(const std::string& suite, const PlannerConfig& base)
{
  std::vector<BenchCase> cases;
  auto add = [&](const std::string& name) { cases.push_back({name, name, base}); };
  if (suite == "platform" || suite == "ramp" || suite == "staircase")
    add(suite);
  else if (suite == "all")
  {
    add("platform");
    add("ramp");
    add("staircase");
  }
  else if (suite == "k12")
  {
    for (double k12 : {1.0, 2.0, 3.0})
    {
      BenchCase c{"platform:k12=" + std::to_string(int(k12)), "platform", base};
      c.config.planner.k12 = k12;
      cases.push_back(c);
    }
  }
  else if (suite.rfind("random-", 0) == 0)
    add(suite);
  else
    throw Error("usage", "unknown bench suite '" + suite +
      "' (platform, ramp, staircase, all, k12, random-<seed>)");
  return cases;
}

int run_bench(const Options& opt)
{
  PlannerConfig base;
  if (!opt.scenario.empty())
    load_scenario(opt.scenario).apply_overrides(base);
  if (opt.initial_weight)
    base.planner.initial_weight = *opt.initial_weight;
  if (opt.neighborhood)
    base.planner.neighborhood = *opt.neighborhood;
  base.validate();
  if (opt.reps < 1)
    throw Error("usage", "--reps must be at least 1");
  const double budget = opt.budget_s.value_or(120.0);

  std::ostringstream csv;
  csv << "scenario,rep,weight,wall_ms,expansions,cost\n";
  char line[256];
  for (const BenchCase& c : bench_suite(opt.bench, base))
  {
    const BuiltinScenario s = builtin_scenario(c.scenario);
    const CostModel model(s.map, c.config.cost, c.config.geometry);
    const AraStarPlanner planner(model, c.config.planner);
    const RobotPose start = make_neutral_pose(model.footprint(), s.start);
    const RobotPose goal = make_neutral_pose(model.footprint(), s.goal);
    for (int rep = 0; rep < opt.reps; ++rep)
    {
      std::vector<AbstractPath> paths;
      try
      {
        paths = planner.plan(start, goal, budget);
      }
      catch (const Error& e)
      {
        spdlog::error("{} rep {}: {}: {}", c.label, rep, e.kind(), e.what());
        continue;
      }
      for (const AbstractPath& p : paths)
      {
        std::snprintf(line, sizeof(line), "%s,%d,%.6g,%.3f,%zu,%.9f\n", c.label.c_str(), rep,
          p.weight, p.stats.wall_ms, p.stats.expansions, p.cost);
        csv << line;
      }
      spdlog::info("{} rep {}: {} iterations, final cost {:.6f}, drive misalignment {:.4f} rad",
        c.label, rep, paths.size(), paths.back().cost,
        mean_drive_misalignment(paths.back(), model.resolution()));
    }
  }
  if (opt.bench_out.empty())
    std::cout << csv.str();
  else
    write_text(opt.bench_out, csv.str());
  return kExitOk;
}

//------------------------------------------------------------------------------
int run_calibration(const Options& opt)
{
  PlannerConfig config;
  if (!opt.scenario.empty())
    load_scenario(opt.scenario).apply_overrides(config);
  if (opt.neighborhood)
    config.planner.neighborhood = *opt.neighborhood;
  config.validate();
  const CalibrationResult result = calibrate_step_weight(config.geometry, config.cost,
    config.planner, 1e-2, opt.budget_s.value_or(600.0), [](double w, bool steps) {
      spdlog::info("step_weight {:.6f}: {}", w, steps ? "steps" : "ramp");
    });
  for (const auto& [w, steps] : result.probes)
    std::cout << "probe " << w << ' ' << (steps ? "steps" : "ramp") << '\n';
  std::cout.precision(10);
  std::cout << "step_weight " << result.step_weight << '\n';
  return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
  setup_logging();
  Options opt;
  CLI::App app{"Hybrid driving-stepping navigation planner"};
  app.add_option("--map", opt.map, "Height map file, or builtin:<name>");
  app.add_option("--scenario", opt.scenario, "Scenario file (key = value)");
  app.add_option("--start", opt.start, "Start pose x,y,theta (m, m, rad)");
  app.add_option("--goal", opt.goal, "Goal pose x,y,theta (m, m, rad)");
  app.add_option("--budget-s", opt.budget_s, "Planning time budget in seconds");
  app.add_option("--initial-weight", opt.initial_weight, "Initial heuristic weight (default 3)");
  app.add_option("--neighborhood", opt.neighborhood, "Driving neighborhood")
    ->check(CLI::IsMember({16, 20}));
  app.add_option("--emit-json", opt.emit_json, "Write the path document here (default stdout)");
  app.add_option("--emit-svg", opt.emit_svg, "Write an SVG overlay here");
  app.add_flag("--calibrate-step-weight", opt.calibrate,
    "Bisect the step weight on the ramp calibration map");
  app.add_option("--bench", opt.bench, "Benchmark suite: platform, ramp, staircase, all, k12");
  app.add_option("--reps", opt.reps, "Benchmark repetitions");
  app.add_option("--out", opt.bench_out, "Benchmark CSV output (default stdout)");
  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e)
  {
    // --help exits 0; every other parse failure is a usage error.
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try
  {
    if (opt.calibrate)
      return run_calibration(opt);
    if (!opt.bench.empty())
      return run_bench(opt);
    return run_plan(opt);
  }
  catch (const Error& e)
  {
    std::cerr << "error: " << e.kind() << ": " << e.what() << '\n';
    return kExitUsage;
  }
}
