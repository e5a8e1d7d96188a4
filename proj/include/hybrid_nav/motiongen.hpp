#pragma once

#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/planner.hpp"
#include "hybrid_nav/pose.hpp"
#include "hybrid_nav/terrain.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hybrid_nav {

//==============================================================================
struct MotionParams
{
  /// Minimum signed distance of the CoM projection inside the support
  /// triangle while a foot is lifted.
  double min_margin = 0.05;
  /// Swing height above the highest terrain along the step line.
  double swing_clearance = 0.05;
  /// Base pitch as a fraction of the ground slope along the heading.
  double pitch_ratio = 0.7;
  /// Radius of the ground plane fit used for the slope.
  double slope_radius = 0.5;
  /// Decrement of the soft stepping leg height when the leg length limit is hit.
  double leg_height_decrement = 0.01;

  void validate() const
  {
    if (!(min_margin >= 0 && swing_clearance >= 0 && slope_radius > 0 &&
          leg_height_decrement > 0))
      throw Error("validation", "motion parameters out of range");
    if (!(pitch_ratio >= 0 && pitch_ratio <= 1))
      throw Error("validation", "pitch ratio must be in [0, 1]");
  }
};

enum class Primitive : std::uint8_t
{
  kDriveLow,
  kStandUp,
  kRoll,
  kWheelShift,
  kBaseShift,
  kLiftFoot,
  kPlaceFoot,
  kUnroll,
  kLowerBase,
};

inline const char* to_string(Primitive p)
{
  switch (p)
  {
    case Primitive::kDriveLow: return "drive_low";
    case Primitive::kStandUp: return "stand_up";
    case Primitive::kRoll: return "roll";
    case Primitive::kWheelShift: return "wheel_shift";
    case Primitive::kBaseShift: return "base_shift";
    case Primitive::kLiftFoot: return "lift_foot";
    case Primitive::kPlaceFoot: return "place_foot";
    case Primitive::kUnroll: return "unroll";
    case Primitive::kLowerBase: return "lower_base";
  }
  return "unknown";
}

inline Primitive primitive_from_string(const std::string& s)
{
  for (int i = 0; i <= int(Primitive::kLowerBase); ++i)
    if (s == to_string(Primitive(i)))
      return Primitive(i);
  throw Error("parse", "unknown primitive '" + s + "'");
}

//==============================================================================
/// Lateral roll model in the body y-z plane. Heights are measured from any
/// common reference; `rotation_center` and `com` hold (y, z).
struct RollGeometry
{
  Eigen::Vector2d rotation_center = Eigen::Vector2d::Zero();
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  double com_target_y = 0.0;
  double footprint_width = 0.6;
};

/// Leg height difference that rolls the base so the CoM, rotating rigidly
/// about the rotation center, reaches the target lateral position.
inline double roll_leg_height_delta(const RollGeometry& g)
{
  const double y_rot = g.rotation_center.x(), z_rot = g.rotation_center.y();
  const double y_com = g.com.x(), z_com = g.com.y();
  if (!(z_com > z_rot))
    throw Error("unreachable-com", "center of mass must lie above the rotation center");
  const double alpha = std::atan((y_rot - y_com) / (z_com - z_rot));
  const double radius = (g.com - g.rotation_center).norm();
  const double s = (y_rot - g.com_target_y) / radius;
  if (!(std::abs(s) <= 1.0))
    throw Error("unreachable-com", "target lateral CoM position is out of reach of the roll");
  const double alpha_des = std::asin(s);
  return g.footprint_width * std::tan(alpha - alpha_des);
}

/// Roll angle magnitude produced by a leg height difference.
inline double roll_angle(double leg_delta, double footprint_width)
{
  return std::atan(leg_delta / footprint_width);
}

/// CoM (y, z) after rolling by the angle a leg height difference induces.
inline Eigen::Vector2d rolled_com(const RollGeometry& g, double leg_delta)
{
  const double phi = roll_angle(leg_delta, g.footprint_width);
  const Eigen::Vector2d d = g.com - g.rotation_center;
  const double c = std::cos(-phi), s = std::sin(-phi);
  return g.rotation_center + Eigen::Vector2d(c * d.x() - s * d.y(), s * d.x() + c * d.y());
}

//==============================================================================
struct StabilityState
{
  std::array<Eigen::Vector2d, 3> triangle;
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  /// Signed distance of the CoM to the nearest triangle edge, positive inside.
  double margin = 0.0;
};

inline StabilityState support_triangle(
  const std::array<Eigen::Vector2d, 4>& feet, int lifted, const Eigen::Vector2d& com)
{
  if (lifted < 0 || lifted > 3)
    throw Error("validation", "lifted foot index out of range");
  StabilityState s;
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (i != lifted)
      s.triangle[std::size_t(k++)] = feet[std::size_t(i)];
  const auto& t = s.triangle;
  auto cross = [](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return a.x() * b.y() - a.y() * b.x();
  };
  const double area2 = cross(t[1] - t[0], t[2] - t[0]);
  const double scale = std::max({(t[1] - t[0]).squaredNorm(), (t[2] - t[0]).squaredNorm(),
    (t[2] - t[1]).squaredNorm(), 1e-12});
  if (std::abs(area2) <= 1e-9 * scale)
    throw Error("degenerate-support", "support feet are collinear");
  const double orientation = area2 > 0 ? 1.0 : -1.0;
  s.centroid = (t[0] + t[1] + t[2]) / 3.0;
  s.com = com;
  s.margin = kInfinity;
  for (int e = 0; e < 3; ++e)
  {
    const Eigen::Vector2d& a = t[std::size_t(e)];
    const Eigen::Vector2d& b = t[std::size_t((e + 1) % 3)];
    s.margin = std::min(s.margin, orientation * cross(b - a, com - a) / (b - a).norm());
  }
  return s;
}

//==============================================================================
struct Keyframe
{
  Primitive primitive = Primitive::kDriveLow;
  /// Index of the abstract manoeuvre this keyframe belongs to; -1 for the
  /// start and for the final lowering.
  int manoeuvre = -1;
  /// Grid projection of the keyframe configuration.
  RobotPose pose;
  Eigen::Vector2d base = Eigen::Vector2d::Zero();
  double theta = 0.0;
  double z = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  std::array<Eigen::Vector3d, 4> feet{};
  std::array<bool, 4> contact{true, true, true, true};
  std::array<double, 4> leg_heights{};
  /// Horizontal CoM projection in map coordinates.
  Eigen::Vector2d com = Eigen::Vector2d::Zero();
  /// Leg height difference added to the legs of one side.
  double leg_delta = 0.0;
  /// Roll model of Roll keyframes, in a frame where the CoM moves to +y.
  std::optional<RollGeometry> roll_geometry;

  int contacts() const { return int(std::count(contact.begin(), contact.end(), true)); }

  int lifted_foot() const
  {
    for (int j = 0; j < 4; ++j)
      if (!contact[std::size_t(j)])
        return j;
    return -1;
  }
};

struct ExecutablePath
{
  std::vector<Keyframe> keyframes;
};

//==============================================================================
enum class LegMode
{
  kDriving,
  kStepping,
};

struct LegState
{
  std::array<double, 4> heights{};
  double base_z = 0.0;
  double pitch = 0.0;
};

/// Base pitch from the ground slope along the heading. Terrain too sparse for
/// a plane fit gives zero pitch.
inline double base_pitch(const HeightMap& map, const Cell& base, double heading,
  const MotionParams& mp)
{
  try
  {
    return mp.pitch_ratio * fit_ground_plane(map, base, mp.slope_radius).inclination_along(heading);
  }
  catch (const Error&)
  {
    return 0.0;
  }
}

namespace detail {

/// Base height at which the shortest grounded leg equals `target`, with the
/// attachment of a leg at body x lying x * tan(pitch) above the base center.
inline double raised_base_z(const std::array<double, 4>& body_x,
  const std::array<double, 4>& ground, double pitch, double target)
{
  double z = -kInfinity;
  for (std::size_t j = 0; j < 4; ++j)
    z = std::max(z, ground[j] + target - body_x[j] * std::tan(pitch));
  return z;
}

inline std::array<double, 4> leg_lengths(const std::array<double, 4>& body_x,
  const std::array<double, 4>& foot_z, double base_z, double pitch)
{
  std::array<double, 4> out{};
  for (std::size_t j = 0; j < 4; ++j)
    out[j] = base_z + body_x[j] * std::tan(pitch) - foot_z[j];
  return out;
}

} // namespace detail

/// Leg heights, base height and pitch of a pose. Driving with the neutral
/// footprint uses the low driving height on every leg; otherwise the highest
/// foot sets the base height with the stepping height as a soft minimum that
/// is lowered until no leg exceeds its maximum length.
inline LegState leg_heights_and_pitch(const RobotPose& pose, const CostModel& model,
  LegMode mode, const MotionParams& mp = {})
{
  const auto& map = model.map();
  const auto& fp = model.footprint();
  const auto& geometry = model.geometry();
  std::array<double, 4> body_x{}, ground{};
  for (int j = 0; j < 4; ++j)
  {
    if (!map.known(pose.feet[std::size_t(j)]))
      throw Error("expansion", "foot on unknown terrain");
    ground[std::size_t(j)] = map.at(pose.feet[std::size_t(j)]);
    body_x[std::size_t(j)] = fp.body_position(pose, j).x();
  }
  LegState s;
  s.pitch = base_pitch(map, pose.base, orientation_angle(pose.orientation), mp);

  if (mode == LegMode::kDriving && fp.is_neutral(pose))
  {
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j)
      sum += ground[j] - body_x[j] * std::tan(s.pitch);
    s.base_z = sum / 4.0 + geometry.driving_leg_height;
    s.heights.fill(geometry.driving_leg_height);
    return s;
  }

  for (double target = geometry.stepping_leg_height;
       target >= geometry.driving_leg_height - 1e-9; target -= mp.leg_height_decrement)
  {
    s.base_z = detail::raised_base_z(body_x, ground, s.pitch, target);
    s.heights = detail::leg_lengths(body_x, ground, s.base_z, s.pitch);
    if (*std::max_element(s.heights.begin(), s.heights.end()) <= geometry.max_leg_height + 1e-9)
      return s;
  }
  throw Error("expansion", "no base height keeps every leg within its maximum length");
}

//==============================================================================
namespace detail {

/// Continuous robot configuration during a step sequence.
struct StanceState
{
  Eigen::Vector2d base = Eigen::Vector2d::Zero();
  std::array<Eigen::Vector2d, 4> feet{};
  std::array<double, 4> foot_z{};
  std::array<bool, 4> contact{true, true, true, true};
  bool rolled = false;
  Primitive primitive = Primitive::kStandUp;
};

inline Cell round_cell(const Eigen::Vector2d& p, double res)
{
  return {int(std::lround(p.x() / res)), int(std::lround(p.y() / res))};
}

/// Signed wheel travel of `foot` along the heading toward `need`, stopping
/// before untraversable cells and at the leg reach.
inline double limited_wheel_shift(const RobotPose& pose, int foot, double need,
  const CostModel& model)
{
  if (std::abs(need) < 1e-12)
    return 0.0;
  const auto& fp = model.footprint();
  const double res = model.resolution();
  const double dir = need > 0 ? 1.0 : -1.0;
  const double deviation = fp.deviation(pose, foot);
  const Eigen::Vector2d origin = fp.world(pose.feet[std::size_t(foot)]);
  const Eigen::Vector2d u = Footprint::heading(pose.orientation);
  double achieved = 0.0;
  for (int k = 1;; ++k)
  {
    const double t = std::min(k * 0.5 * res, std::abs(need));
    if (std::abs(deviation + dir * t) > fp.geometry().max_reach + 1e-9)
      break;
    if (!model.foot_costs().finite(round_cell(origin + dir * t * u, res)))
      break;
    achieved = t;
    if (t >= std::abs(need))
      break;
  }
  return dir * achieved;
}

} // namespace detail

/// Expands an abstract step into a statically stable keyframe sequence:
/// optional stand up, roll toward the support triangle centroid, wheel shift
/// of the same-side partner foot, base shift for the remaining longitudinal
/// offset, lift and place, then the reverse of the alignment motions.
inline std::vector<Keyframe> generate_step_sequence(const Manoeuvre& step, const CostModel& model,
  const MotionParams& mp = {}, bool stand_up = true, int manoeuvre_index = -1)
{
  if (step.kind != ManoeuvreKind::kAbstractStep || step.foot < 0 || step.foot > 3)
    throw Error("expansion", "not an abstract step");
  mp.validate();
  const auto& map = model.map();
  const auto& fp = model.footprint();
  const auto& geometry = model.geometry();
  const double res = model.resolution();
  const RobotPose& pre = step.from;
  const int lifted = step.foot;
  const int partner = same_side_partner(lifted);
  const double theta = orientation_angle(pre.orientation);
  const Eigen::Vector2d u = Footprint::heading(pre.orientation);

  for (const Cell& c : pre.feet)
    if (!map.known(c))
      throw Error("expansion", "foot on unknown terrain");
  if (!map.known(step.foothold))
    throw Error("expansion", "foothold on unknown terrain");

  auto to_body = [&](const Eigen::Vector2d& p, const Eigen::Vector2d& base) {
    return Footprint::rotate(p - base, -theta);
  };

  // Longitudinal alignment of the CoM with the support triangle centroid.
  const Eigen::Vector2d com_body = geometry.com_offset;
  double stc_x = 0.0, stc_y = 0.0;
  for (int i = 0; i < 4; ++i)
  {
    if (i == lifted)
      continue;
    const Eigen::Vector2d b = fp.body_position(pre, i);
    stc_x += b.x() / 3.0;
    stc_y += b.y() / 3.0;
  }
  const double need = 3.0 * (com_body.x() - stc_x);
  const double wheel = detail::limited_wheel_shift(pre, partner, need, model);
  double shift = -(need - wheel) / 3.0;
  for (int i = 0; i < 4; ++i)
  {
    const double dev = fp.deviation(pre, i) + (i == partner ? wheel : 0.0);
    const double reach = geometry.max_reach;
    shift = std::clamp(shift, dev - reach, dev + reach);
  }
  if (std::abs(shift) < 1e-12)
    shift = 0.0;

  // Configurations of the sequence; heights are filled in below.
  detail::StanceState base_state;
  base_state.base = fp.world(pre.base);
  for (int i = 0; i < 4; ++i)
  {
    base_state.feet[std::size_t(i)] = fp.world(pre.feet[std::size_t(i)]);
    base_state.foot_z[std::size_t(i)] = map.at(pre.feet[std::size_t(i)]);
  }
  double swing_z = -kInfinity;
  for (const Cell& c : supercover_line(pre.feet[std::size_t(lifted)], step.foothold))
    if (map.known(c))
      swing_z = std::max(swing_z, map.at(c));
  swing_z += mp.swing_clearance;

  std::vector<detail::StanceState> states;
  auto push = [&](detail::StanceState s, Primitive p) {
    s.primitive = p;
    states.push_back(s);
    return s;
  };
  detail::StanceState s = base_state;
  if (stand_up)
    push(s, Primitive::kStandUp);
  s.rolled = true;
  s = push(s, Primitive::kRoll);
  const Eigen::Vector2d partner_home = s.feet[std::size_t(partner)];
  if (wheel != 0.0)
  {
    s.feet[std::size_t(partner)] = partner_home + wheel * u;
    s.foot_z[std::size_t(partner)] =
      map.at(detail::round_cell(s.feet[std::size_t(partner)], res));
    s = push(s, Primitive::kWheelShift);
  }
  if (shift != 0.0)
  {
    s.base = base_state.base + shift * u;
    s = push(s, Primitive::kBaseShift);
  }
  s.contact[std::size_t(lifted)] = false;
  s.foot_z[std::size_t(lifted)] = swing_z;
  s = push(s, Primitive::kLiftFoot);
  s.contact[std::size_t(lifted)] = true;
  s.feet[std::size_t(lifted)] = fp.world(step.foothold);
  s.foot_z[std::size_t(lifted)] = map.at(step.foothold);
  s = push(s, Primitive::kPlaceFoot);
  if (shift != 0.0)
  {
    s.base = base_state.base;
    s = push(s, Primitive::kBaseShift);
  }
  if (wheel != 0.0)
  {
    s.feet[std::size_t(partner)] = partner_home;
    s.foot_z[std::size_t(partner)] = base_state.foot_z[std::size_t(partner)];
    s = push(s, Primitive::kWheelShift);
  }
  s.rolled = false;
  push(s, Primitive::kUnroll);

  // Lateral alignment by rolling toward the side of the centroid, rotating
  // about the wheel contacts of that side.
  const double pitch = base_pitch(map, pre.base, theta, mp);
  const double side = stc_y >= com_body.y() ? 1.0 : -1.0;
  auto on_roll_side = [&](int i) { return is_left(i) == (side > 0); };
  double rot_y = 0.0, rot_z = 0.0;
  for (int i = 0; i < 4; ++i)
  {
    if (!on_roll_side(i))
      continue;
    rot_y += fp.body_position(pre, i).y() / 2.0;
    rot_z += base_state.foot_z[std::size_t(i)] / 2.0;
  }

  auto body_xs = [&](const detail::StanceState& st) {
    std::array<double, 4> xs{};
    for (std::size_t i = 0; i < 4; ++i)
      xs[i] = to_body(st.feet[i], st.base).x();
    return xs;
  };

  std::optional<double> chosen_z;
  double leg_delta = 0.0;
  RollGeometry roll_geometry;
  for (double target = geometry.stepping_leg_height;
       target >= geometry.driving_leg_height - 1e-9; target -= mp.leg_height_decrement)
  {
    double base_z = -kInfinity;
    for (const auto& st : states)
    {
      std::array<double, 4> ground = st.foot_z;
      if (!st.contact[std::size_t(lifted)])
        ground[std::size_t(lifted)] = base_state.foot_z[std::size_t(lifted)];
      base_z = std::max(base_z, detail::raised_base_z(body_xs(st), ground, pitch, target));
    }
    RollGeometry g;
    g.rotation_center = {side * rot_y, rot_z};
    g.com = {side * com_body.y(), base_z};
    g.com_target_y = side * stc_y;
    g.footprint_width = geometry.footprint_width;
    const double delta = roll_leg_height_delta(g);

    double longest = 0.0;
    for (const auto& st : states)
    {
      const auto legs = detail::leg_lengths(body_xs(st), st.foot_z, base_z, pitch);
      for (int i = 0; i < 4; ++i)
      {
        const double extra = st.rolled && !on_roll_side(i) ? delta : 0.0;
        longest = std::max(longest, legs[std::size_t(i)] + extra);
      }
    }
    if (longest <= geometry.max_leg_height + 1e-9)
    {
      chosen_z = base_z;
      leg_delta = delta;
      roll_geometry = g;
      break;
    }
  }
  if (!chosen_z)
    throw Error("expansion", "no base height keeps every leg within its maximum length");

  const Eigen::Vector2d rolled = rolled_com(roll_geometry, leg_delta);
  const Eigen::Vector2d com_rolled_body{com_body.x(), side * rolled.x()};
  const double roll = -side * roll_angle(leg_delta, geometry.footprint_width);

  std::vector<Keyframe> out;
  for (const auto& st : states)
  {
    Keyframe k;
    k.primitive = st.primitive;
    k.manoeuvre = manoeuvre_index;
    k.theta = theta;
    k.base = st.base;
    k.pitch = pitch;
    k.roll = st.rolled ? roll : 0.0;
    k.leg_delta = st.rolled ? leg_delta : 0.0;
    k.z = *chosen_z + 0.5 * k.leg_delta;
    k.contact = st.contact;
    const auto legs = detail::leg_lengths(body_xs(st), st.foot_z, *chosen_z, pitch);
    for (std::size_t i = 0; i < 4; ++i)
    {
      k.feet[i] = {st.feet[i].x(), st.feet[i].y(), st.foot_z[i]};
      k.leg_heights[i] = legs[i] + (st.rolled && !on_roll_side(int(i)) ? leg_delta : 0.0);
    }
    k.com = st.base + Footprint::rotate(st.rolled ? com_rolled_body : com_body, theta);
    if (st.primitive == Primitive::kRoll)
      k.roll_geometry = roll_geometry;

    k.pose.base = detail::round_cell(st.base, res);
    k.pose.orientation = pre.orientation;
    for (std::size_t i = 0; i < 4; ++i)
      k.pose.feet[i] = detail::round_cell(st.feet[i], res);

    if (!st.contact[std::size_t(lifted)])
    {
      std::array<Eigen::Vector2d, 4> xy{};
      for (std::size_t i = 0; i < 4; ++i)
        xy[i] = st.feet[i];
      const auto stability = support_triangle(xy, lifted, k.com);
      if (stability.margin < mp.min_margin)
        throw Error("expansion", "no stable stepping configuration (margin " +
          std::to_string(stability.margin) + " m)");
    }
    out.push_back(k);
  }
  // The sequence ends exactly in the planner's post-step pose.
  out.back().pose = step.to;
  return out;
}

//==============================================================================
namespace detail {

inline Keyframe pose_keyframe(const RobotPose& pose, const CostModel& model, Primitive primitive,
  LegMode mode, int manoeuvre, const MotionParams& mp)
{
  const auto& fp = model.footprint();
  const LegState legs = leg_heights_and_pitch(pose, model, mode, mp);
  Keyframe k;
  k.primitive = primitive;
  k.manoeuvre = manoeuvre;
  k.pose = pose;
  k.base = fp.world(pose.base);
  k.theta = orientation_angle(pose.orientation);
  k.z = legs.base_z;
  k.pitch = legs.pitch;
  k.leg_heights = legs.heights;
  for (std::size_t i = 0; i < 4; ++i)
  {
    const Eigen::Vector2d w = fp.world(pose.feet[i]);
    k.feet[i] = {w.x(), w.y(), model.map().at(pose.feet[i])};
  }
  k.com = k.base + Footprint::rotate(model.geometry().com_offset, k.theta);
  return k;
}

} // namespace detail

/// Turns an abstract path into keyframes: driving poses at the low driving
/// height, stepping-related manoeuvres at stepping height, and every abstract
/// step replaced by its stabilized sequence.
inline ExecutablePath expand_path(const AbstractPath& path, const CostModel& model,
  const MotionParams& mp = {})
{
  mp.validate();
  ExecutablePath out;
  if (path.poses.empty())
    return out;
  const auto& fp = model.footprint();
  bool raised = !fp.is_neutral(path.poses.front());
  out.keyframes.push_back(detail::pose_keyframe(path.poses.front(), model,
    raised ? Primitive::kStandUp : Primitive::kDriveLow,
    raised ? LegMode::kStepping : LegMode::kDriving, -1, mp));

  for (std::size_t i = 0; i < path.manoeuvres.size(); ++i)
  {
    const Manoeuvre& m = path.manoeuvres[i];
    const int index = int(i);
    switch (m.kind)
    {
      case ManoeuvreKind::kDrive:
      case ManoeuvreKind::kRotate:
        if (raised)
        {
          out.keyframes.push_back(detail::pose_keyframe(
            m.from, model, Primitive::kLowerBase, LegMode::kDriving, index, mp));
          raised = false;
        }
        out.keyframes.push_back(detail::pose_keyframe(
          m.to, model, Primitive::kDriveLow, LegMode::kDriving, index, mp));
        break;
      case ManoeuvreKind::kAbstractStep:
      {
        std::vector<Keyframe> seq;
        try
        {
          seq = generate_step_sequence(m, model, mp, !raised, index);
        }
        catch (const Error& e)
        {
          throw Error("expansion", "step at manoeuvre " + std::to_string(i) + ": " + e.what());
        }
        out.keyframes.insert(out.keyframes.end(), seq.begin(), seq.end());
        raised = true;
        break;
      }
      case ManoeuvreKind::kBaseShift:
      case ManoeuvreKind::kWheelMove:
        if (!raised)
        {
          out.keyframes.push_back(detail::pose_keyframe(
            m.from, model, Primitive::kStandUp, LegMode::kStepping, index, mp));
          raised = true;
        }
        out.keyframes.push_back(detail::pose_keyframe(m.to, model,
          m.kind == ManoeuvreKind::kBaseShift ? Primitive::kBaseShift : Primitive::kWheelShift,
          LegMode::kStepping, index, mp));
        break;
    }
  }
  if (raised && fp.is_neutral(path.poses.back()))
    out.keyframes.push_back(detail::pose_keyframe(
      path.poses.back(), model, Primitive::kLowerBase, LegMode::kDriving, -1, mp));
  return out;
}

} // namespace hybrid_nav
