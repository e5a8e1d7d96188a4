#pragma once

#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/planner.hpp"
#include "hybrid_nav/scenarios.hpp"

#include <functional>
#include <string>

namespace hybrid_nav {

struct CalibrationResult
{
  double step_weight = 1.0;
  /// Every probed weight and whether the optimal path contained a step.
  std::vector<std::pair<double, bool>> probes;
};

/// True when the optimal (w = 1) path on the ramp calibration map steps onto
/// the platform instead of taking the ramp.
inline bool calibration_path_steps(const BuiltinScenario& scenario, const CostModel& model,
  PlannerParams params, double step_weight, double budget_s)
{
  params.step_weight = step_weight;
  params.initial_weight = 1.0;
  params.enable_stepping = true;
  AraStarPlanner planner(model, params);
  const auto paths = planner.plan(make_neutral_pose(model.footprint(), scenario.start),
    make_neutral_pose(model.footprint(), scenario.goal), budget_s);
  return paths.back().count(ManoeuvreKind::kAbstractStep) > 0;
}

/// Smallest step weight (bisection to `tolerance`) at which the optimal path
/// on the ramp calibration map takes the ramp detour instead of stepping up.
inline CalibrationResult calibrate_step_weight(const RobotGeometry& geometry = {},
  const CostModelParams& cost_params = {}, const PlannerParams& params = {},
  double tolerance = 1e-2, double budget_per_run_s = 600.0,
  const std::function<void(double, bool)>& on_probe = {})
{
  const BuiltinScenario scenario = ramp_calibration_scenario();
  const CostModel model(scenario.map, cost_params, geometry);
  CalibrationResult result;
  auto steps = [&](double w) {
    const bool s = calibration_path_steps(scenario, model, params, w, budget_per_run_s);
    result.probes.emplace_back(w, s);
    if (on_probe)
      on_probe(w, s);
    return s;
  };

  if (!steps(1.0))
    throw Error("calibration", "calibration map does not produce a stepping path at weight 1");
  double lo = 1.0, hi = 2.0;
  while (steps(hi))
  {
    lo = hi;
    hi *= 2.0;
    if (hi > 1024.0)
      throw Error("calibration", "calibration map does not produce a ramp path");
  }
  while (hi - lo > tolerance)
  {
    const double mid = 0.5 * (lo + hi);
    if (steps(mid))
      lo = mid;
    else
      hi = mid;
  }
  result.step_weight = hi;
  return result;
}

} // namespace hybrid_nav
