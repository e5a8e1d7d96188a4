#pragma once

#include "hybrid_nav/terrain.hpp"

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace hybrid_nav {

constexpr int kOrientationCount = 64;
constexpr double kOrientationStep = 2.0 * std::numbers::pi / kOrientationCount;

inline int wrap_orientation(int index)
{
  return ((index % kOrientationCount) + kOrientationCount) % kOrientationCount;
}

inline double orientation_angle(int index) { return wrap_orientation(index) * kOrientationStep; }

inline int orientation_index(double angle)
{
  return wrap_orientation(int(std::lround(angle / kOrientationStep)));
}

/// Absolute angular difference folded into [0, pi].
inline double angle_difference(double a, double b)
{
  double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
  return d > std::numbers::pi ? 2.0 * std::numbers::pi - d : d;
}

//==============================================================================
/// Feet in body-frame order. x points forward, y to the left.
enum Foot : int
{
  kFrontLeft = 0,
  kFrontRight = 1,
  kRearLeft = 2,
  kRearRight = 3,
};

inline bool is_front(int foot) { return foot < 2; }
inline bool is_left(int foot) { return foot % 2 == 0; }

/// The other foot on the same robot side (front-left <-> rear-left).
inline int same_side_partner(int foot) { return foot ^ 2; }

inline const char* foot_name(int foot)
{
  static constexpr const char* names[] = {"front_left", "front_right", "rear_left", "rear_right"};
  return names[foot];
}

//==============================================================================
struct RobotGeometry
{
  double foot_longitudinal = 0.4;
  double foot_lateral = 0.3;
  double footprint_width = 0.6;
  /// Bound on the sagittal displacement of a foot from its neutral position.
  double max_reach = 0.6;
  Eigen::Vector2d com_offset = Eigen::Vector2d::Zero();
  double driving_leg_height = 0.27;
  double stepping_leg_height = 0.45;
  double max_leg_height = 0.8;

  void validate() const
  {
    if (!(foot_longitudinal > 0 && foot_lateral > 0 && max_reach > 0 && footprint_width > 0))
      throw Error("validation", "robot geometry lengths must be positive");
    if (!(driving_leg_height > 0 && stepping_leg_height >= driving_leg_height &&
          max_leg_height >= stepping_leg_height))
      throw Error("validation", "leg heights must satisfy 0 < driving <= stepping <= max");
  }

  /// Neutral foot position in the body frame.
  Eigen::Vector2d neutral_foot(int foot) const
  {
    return {is_front(foot) ? foot_longitudinal : -foot_longitudinal,
            is_left(foot) ? foot_lateral : -foot_lateral};
  }
};

//==============================================================================
/// Search state: base cell, orientation index and the four foot cells in
/// map coordinates.
struct RobotPose
{
  Cell base;
  int orientation = 0;
  std::array<Cell, 4> feet{};

  bool operator==(const RobotPose&) const = default;
};

struct RobotPoseHash
{
  std::size_t operator()(const RobotPose& p) const noexcept
  {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    auto mix = [&h](std::uint64_t v) {
      h ^= v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2);
    };
    mix((std::uint64_t(std::uint32_t(p.base.x)) << 32) | std::uint32_t(p.base.y));
    mix(std::uint64_t(p.orientation));
    for (const auto& f : p.feet)
    {
      const Cell d = f - p.base;
      mix((std::uint64_t(std::uint16_t(d.x)) << 16) | std::uint16_t(d.y));
    }
    return std::size_t(h);
  }
};

//==============================================================================
/// Grid-level view of the robot geometry: neutral foot cell offsets per
/// orientation and body-frame conversions.
class Footprint
{
public:
  Footprint() = default;

  Footprint(const RobotGeometry& geometry, double resolution)
  : geometry_(geometry), resolution_(resolution)
  {
    geometry_.validate();
    for (int t = 0; t < kOrientationCount; ++t)
    {
      for (int j = 0; j < 4; ++j)
      {
        const Eigen::Vector2d w = rotate(geometry_.neutral_foot(j), orientation_angle(t));
        neutral_offsets_[t][j] = {int(std::lround(w.x() / resolution_)),
                                  int(std::lround(w.y() / resolution_))};
      }
    }
  }

  const RobotGeometry& geometry() const { return geometry_; }
  double resolution() const { return resolution_; }

  static Eigen::Vector2d rotate(const Eigen::Vector2d& v, double angle)
  {
    const double c = std::cos(angle), s = std::sin(angle);
    return {c * v.x() - s * v.y(), s * v.x() + c * v.y()};
  }

  static Eigen::Vector2d heading(int orientation)
  {
    static const std::array<Eigen::Vector2d, kOrientationCount> table = [] {
      std::array<Eigen::Vector2d, kOrientationCount> t;
      for (int i = 0; i < kOrientationCount; ++i)
        t[i] = {std::cos(orientation_angle(i)), std::sin(orientation_angle(i))};
      return t;
    }();
    return table[wrap_orientation(orientation)];
  }

  Cell neutral_offset(int orientation, int foot) const
  {
    return neutral_offsets_[wrap_orientation(orientation)][foot];
  }

  Cell neutral_foot_cell(const Cell& base, int orientation, int foot) const
  {
    return base + neutral_offset(orientation, foot);
  }

  RobotPose neutral_pose(const Cell& base, int orientation) const
  {
    RobotPose pose{base, wrap_orientation(orientation), {}};
    for (int j = 0; j < 4; ++j)
      pose.feet[j] = neutral_foot_cell(base, pose.orientation, j);
    return pose;
  }

  bool foot_neutral(const RobotPose& pose, int foot) const
  {
    return pose.feet[foot] == neutral_foot_cell(pose.base, pose.orientation, foot);
  }

  bool is_neutral(const RobotPose& pose) const
  {
    for (int j = 0; j < 4; ++j)
      if (!foot_neutral(pose, j))
        return false;
    return true;
  }

  Eigen::Vector2d world(const Cell& c) const
  {
    return {c.x * resolution_, c.y * resolution_};
  }

  /// Foot position in the body frame (meters), origin at the base center.
  Eigen::Vector2d body_position(const RobotPose& pose, int foot) const
  {
    const Eigen::Vector2d d = world(pose.feet[foot]) - world(pose.base);
    const Eigen::Vector2d h = heading(pose.orientation);
    return {h.x() * d.x() + h.y() * d.y(), h.x() * d.y() - h.y() * d.x()};
  }

  /// Signed sagittal displacement of a foot from its neutral position
  /// (positive = ahead).
  double deviation(const RobotPose& pose, int foot) const
  {
    return body_position(pose, foot).x() - geometry_.neutral_foot(foot).x();
  }

private:
  RobotGeometry geometry_;
  double resolution_ = 0.025;
  std::array<std::array<Cell, 4>, kOrientationCount> neutral_offsets_{};
};

} // namespace hybrid_nav
