#pragma once

#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/pose.hpp"
#include "hybrid_nav/terrain.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace hybrid_nav {

/// Pose in map coordinates: meters and radians.
struct PoseSpec
{
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

inline RobotPose make_neutral_pose(const Footprint& footprint, const PoseSpec& spec)
{
  const double res = footprint.resolution();
  return footprint.neutral_pose(
    {int(std::lround(spec.x / res)), int(std::lround(spec.y / res))},
    orientation_index(spec.theta));
}

struct BuiltinScenario
{
  std::string name;
  HeightMap map;
  PoseSpec start;
  PoseSpec goal;
};

namespace detail {

/// Sets every cell whose center lies in [x0, x1) x [y0, y1) (meters).
template<typename F>
void fill_box(HeightMap& map, double x0, double y0, double x1, double y1, F&& height)
{
  const double res = map.resolution();
  for (int y = 0; y < map.height(); ++y)
    for (int x = 0; x < map.width(); ++x)
    {
      const double wx = x * res, wy = y * res;
      if (wx >= x0 - 1e-9 && wx < x1 - 1e-9 && wy >= y0 - 1e-9 && wy < y1 - 1e-9)
        map.set({x, y}, height(wx, wy));
    }
}

inline void raise_box(HeightMap& map, double x0, double y0, double x1, double y1, double h)
{
  fill_box(map, x0, y0, x1, y1, [h](double, double) { return h; });
}

inline HeightMap blank(double size_x, double size_y, double resolution)
{
  return HeightMap(int(std::lround(size_x / resolution)),
    int(std::lround(size_y / resolution)), resolution);
}

} // namespace detail

//==============================================================================
/// 0.2 m platform across the far end of a room with two tall boxes on the
/// lower floor. The goal is offset laterally from the start.
inline BuiltinScenario platform_scenario(double resolution = 0.025)
{
  BuiltinScenario s;
  s.name = "platform";
  s.map = detail::blank(4.5, 2.5, resolution);
  detail::raise_box(s.map, 3.0, 0.0, 4.5, 2.5, 0.2);
  detail::raise_box(s.map, 1.6, 1.75, 1.9, 2.05, 0.4);
  detail::raise_box(s.map, 2.0, 0.2, 2.3, 0.45, 0.4);
  s.start = {0.8, 1.8, 0.0};
  s.goal = {3.8, 0.7, 0.0};
  return s;
}

/// 0.2 m platform with a ramp along one side; reaching the platform over the
/// ramp is a detour of roughly 1.5 m compared to stepping up directly.
inline BuiltinScenario ramp_calibration_scenario(double resolution = 0.025)
{
  BuiltinScenario s;
  s.name = "ramp";
  s.map = detail::blank(4.0, 2.9, resolution);
  detail::raise_box(s.map, 2.5, 0.0, 4.0, 2.9, 0.2);
  detail::fill_box(s.map, 1.5, 1.8, 2.5, 2.9,
    [](double x, double) { return 0.2 * (x - 1.5) / 1.0; });
  s.start = {1.0, 0.9, 0.0};
  s.goal = {3.3, 0.9, 0.0};
  return s;
}

/// Two 0.15 m risers up to a landing. A thin wall on the landing fits
/// between the front and rear legs; the goal straddles it, so the robot drives
/// sideways with the wall under its body.
inline BuiltinScenario staircase_scenario(double resolution = 0.025)
{
  BuiltinScenario s;
  s.name = "staircase";
  s.map = detail::blank(4.6, 3.0, resolution);
  detail::raise_box(s.map, 1.6, 0.0, 2.2, 3.0, 0.15);
  detail::raise_box(s.map, 2.2, 0.0, 4.6, 3.0, 0.30);
  detail::raise_box(s.map, 3.8, 0.0, 3.85, 1.6, 0.55);
  s.start = {0.8, 0.9, 0.0};
  s.goal = {3.825, 0.8, 0.0};
  return s;
}

/// 5 x 5 m map with sparse random boxes and a start/goal pair 0.5-1.2 m apart
/// on traversable terrain. Deterministic in `seed`.
inline BuiltinScenario random_scenario(std::uint32_t seed, const CostModelParams& params = {},
  const RobotGeometry& geometry = {}, double resolution = 0.025)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> pos(0.3, 4.7);
  std::uniform_real_distribution<double> side(0.08, 0.35);
  std::uniform_real_distribution<double> height(0.03, 0.3);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  std::uniform_real_distribution<double> dist(0.5, 1.2);

  BuiltinScenario s;
  s.name = "random-" + std::to_string(seed);
  s.map = detail::blank(5.0, 5.0, resolution);
  for (int i = 0; i < 8; ++i)
  {
    const double x = pos(rng), y = pos(rng), w = side(rng), d = side(rng);
    detail::raise_box(s.map, x, y, x + w, y + d, height(rng));
  }

  const CostModel model(s.map, params, geometry);
  for (int attempt = 0; attempt < 10000; ++attempt)
  {
    PoseSpec a{pos(rng), pos(rng), angle(rng)};
    const double r = dist(rng), phi = angle(rng);
    PoseSpec b{a.x + r * std::cos(phi), a.y + r * std::sin(phi), angle(rng)};
    const RobotPose pa = make_neutral_pose(model.footprint(), a);
    const RobotPose pb = make_neutral_pose(model.footprint(), b);
    if (!s.map.contains(pb.base))
      continue;
    if (std::isfinite(model.pose_cost(pa)) && std::isfinite(model.pose_cost(pb)))
    {
      s.start = a;
      s.goal = b;
      return s;
    }
  }
  throw Error("generator", "no traversable start/goal pair for seed " + std::to_string(seed));
}

inline BuiltinScenario builtin_scenario(const std::string& name, double resolution = 0.025)
{
  if (name == "platform")
    return platform_scenario(resolution);
  if (name == "ramp")
    return ramp_calibration_scenario(resolution);
  if (name == "staircase")
    return staircase_scenario(resolution);
  if (name.rfind("random-", 0) == 0)
    return random_scenario(std::uint32_t(std::stoul(name.substr(7))), {}, {}, resolution);
  throw Error("scenario", "unknown builtin scenario '" + name + "'");
}

} // namespace hybrid_nav
