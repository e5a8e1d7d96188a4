#pragma once

#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/pose.hpp"

#include <absl/container/flat_hash_map.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <queue>
#include <string>
#include <vector>

namespace hybrid_nav {

/// Step weight produced by calibrate_step_weight() with default parameters.
inline constexpr double kDefaultStepWeight = 11.7734375;

//==============================================================================
enum class ManoeuvreKind : std::uint8_t
{
  kDrive,
  kRotate,
  kAbstractStep,
  kBaseShift,
  kWheelMove,
};

inline const char* to_string(ManoeuvreKind kind)
{
  switch (kind)
  {
    case ManoeuvreKind::kDrive: return "drive";
    case ManoeuvreKind::kRotate: return "rotate";
    case ManoeuvreKind::kAbstractStep: return "abstract_step";
    case ManoeuvreKind::kBaseShift: return "base_shift";
    case ManoeuvreKind::kWheelMove: return "wheel_move";
  }
  return "unknown";
}

inline ManoeuvreKind manoeuvre_kind_from_string(const std::string& s)
{
  for (auto k : {ManoeuvreKind::kDrive, ManoeuvreKind::kRotate, ManoeuvreKind::kAbstractStep,
                 ManoeuvreKind::kBaseShift, ManoeuvreKind::kWheelMove})
    if (s == to_string(k))
      return k;
  throw Error("parse", "unknown manoeuvre kind '" + s + "'");
}

inline bool is_stepping_related(ManoeuvreKind kind)
{
  return kind == ManoeuvreKind::kAbstractStep || kind == ManoeuvreKind::kBaseShift ||
    kind == ManoeuvreKind::kWheelMove;
}

/// Transition between two poses. `foot`, `foothold` and `length` are filled
/// according to the kind: stepping foot and target cell for steps, moved foot
/// for wheel moves, and the step / shift / wheel travel length in meters.
struct Manoeuvre
{
  ManoeuvreKind kind = ManoeuvreKind::kDrive;
  RobotPose from;
  RobotPose to;
  double cost = 0.0;
  int foot = -1;
  Cell foothold;
  double length = 0.0;
  double height_change = 0.0;
};

//==============================================================================
struct PlannerParams
{
  double k7 = 0.5;
  double k8 = 0.1;
  double k9 = 2.3;
  double k10 = 0.5;
  double k11 = 0.125;
  double k12 = 2.0;
  /// Orientation factor for straight backward driving; midway between 1 and
  /// k12 when unset.
  std::optional<double> k_back;
  double k_rot = 0.5;
  double step_weight = kDefaultStepWeight;
  double initial_weight = 3.0;
  double weight_decay = 0.5;
  /// Weights closer than this to 1 are replaced by 1.
  double weight_snap = 0.05;
  int neighborhood = 20;
  double max_step_height = 0.3;
  double obstacle_proximity = 0.1;
  double safe_stand_distance = 0.5;
  bool enable_stepping = true;
  /// Memory guard: searches stop like an exhausted time budget once this many
  /// states exist.
  std::size_t max_states = 8'000'000;

  double backward_factor() const { return k_back.value_or(0.5 * (1.0 + k12)); }

  void validate() const
  {
    if (neighborhood != 16 && neighborhood != 20)
      throw Error("validation", "neighborhood must be 16 or 20");
    if (!(step_weight >= 1.0))
      throw Error("validation", "step weight must be >= 1");
    if (!(initial_weight >= 1.0))
      throw Error("validation", "initial heuristic weight must be >= 1");
    if (!(weight_decay > 0.0 && weight_decay < 1.0))
      throw Error("validation", "weight decay must be in (0, 1)");
    if (k7 < 0 || k8 < 0 || k9 < 0 || k10 < 0 || k11 < 0 || k_rot < 0)
      throw Error("validation", "manoeuvre weights must be non-negative");
    if (!(k12 >= 1.0) || !(backward_factor() >= 1.0))
      throw Error("validation", "orientation factors must be >= 1");
    if (max_states < 2)
      throw Error("validation", "state limit must be at least 2");
  }

  /// Heuristic weights, strictly decreasing and ending at 1.
  std::vector<double> weight_schedule() const
  {
    std::vector<double> schedule;
    double w = initial_weight;
    while (w - 1.0 >= weight_snap)
    {
      schedule.push_back(w);
      w = 1.0 + weight_decay * (w - 1.0);
    }
    schedule.push_back(1.0);
    return schedule;
  }
};

//==============================================================================
/// Multiplier on driving costs for a difference `delta` in [0, pi] between
/// robot orientation and driving direction: 1 on a plateau of 2*pi/60, rising
/// linearly to k12 at pi/2 and falling back to the backward factor at pi.
inline double orientation_cost_factor(double delta, const PlannerParams& params)
{
  constexpr double plateau = 2.0 * std::numbers::pi / 60.0;
  constexpr double quarter = std::numbers::pi / 2.0;
  delta = std::clamp(delta, 0.0, std::numbers::pi);
  if (delta <= plateau)
    return 1.0;
  if (delta <= quarter)
    return 1.0 + (params.k12 - 1.0) * (delta - plateau) / (quarter - plateau);
  return params.k12 + (params.backward_factor() - params.k12) * (delta - quarter) / quarter;
}

inline double step_cost(double step_length, double foothold_cost, double height_change,
  const PlannerParams& params)
{
  return params.k7 * step_length + params.k8 * (foothold_cost - 1.0) +
    params.k9 * height_change;
}

//==============================================================================
/// Memo of pose costs for neutral poses, indexed densely by base cell and
/// orientation. Owned by a single search; other poses are evaluated directly.
class PoseCostCache
{
public:
  explicit PoseCostCache(const CostModel& model)
  : model_(&model),
    values_(model.map().size() * std::size_t(kOrientationCount),
      std::numeric_limits<double>::quiet_NaN())
  {
  }

  double operator()(const RobotPose& pose)
  {
    if (!model_->map().contains(pose.base) || !model_->footprint().is_neutral(pose))
      return model_->pose_cost(pose);
    double& v = values_[model_->map().index(pose.base) * kOrientationCount +
      std::size_t(pose.orientation)];
    if (std::isnan(v))
      v = model_->pose_cost(pose);
    return v;
  }

private:
  const CostModel* model_;
  std::vector<double> values_;
};

//==============================================================================
/// Generates every manoeuvre available from a pose. Holds only read-only
/// state, so one generator can serve concurrent searches.
class NeighborGenerator
{
public:
  NeighborGenerator(const CostModel& model, PlannerParams params)
  : model_(&model), params_(params)
  {
    params_.validate();
    build_drive_table();
    build_obstacle_proximity();
    build_ray_table();

    const double unit = model.params().unit_pose_cost();
    const double factor_floor = std::min({1.0, params_.k12, params_.backward_factor()});
    distance_scale_ = unit * factor_floor;
    if (params_.enable_stepping)
      distance_scale_ = std::min(distance_scale_, params_.k10 * params_.step_weight);
    rotation_scale_ = params_.k_rot * unit;
  }

  const CostModel& model() const { return *model_; }
  const PlannerParams& params() const { return params_; }

  /// True when a cell with infinite foot cost lies closer than the obstacle
  /// proximity distance.
  bool near_obstacle(const Cell& c) const
  {
    if (!model_->foot_costs().contains(c))
      return true;
    return near_obstacle_[model_->map().index(c)] != 0;
  }

  double heuristic(const RobotPose& pose, const RobotPose& goal) const
  {
    const double d = cell_distance(pose.base, goal.base) * model_->resolution();
    const double a = angle_difference(orientation_angle(pose.orientation),
      orientation_angle(goal.orientation));
    return distance_scale_ * d + rotation_scale_ * a;
  }

  void successors(const RobotPose& pose, std::vector<Manoeuvre>& out,
    PoseCostCache* cache = nullptr) const
  {
    out.clear();
    driving_neighbors(pose, out, cache);
    if (!params_.enable_stepping)
      return;
    step_neighbors(pose, out);
    if (auto shift = base_shift_neighbor(pose))
      out.push_back(*shift);
    wheel_move_neighbors(pose, out);
  }

  //----------------------------------------------------------------------------
  void driving_neighbors(const RobotPose& pose, std::vector<Manoeuvre>& out,
    PoseCostCache* cache = nullptr) const
  {
    // Only the neutral footprint drives; other footprints are first restored
    // by base shifts and wheel moves.
    if (!model_->footprint().is_neutral(pose))
      return;
    auto cost_of = [&](const RobotPose& p) {
      return cache ? (*cache)(p) : model_->pose_cost(p);
    };
    const double from_cost = cost_of(pose);
    if (!std::isfinite(from_cost))
      return;
    const auto& fc = model_->foot_costs();

    std::uint32_t blocked = 0;
    for (int j = 0; j < 4; ++j)
      blocked |= fc.contains(pose.feet[j]) ? blocked_moves_[model_->map().index(pose.feet[j])]
                                           : ~std::uint32_t(0);
    for (std::size_t i = 0; i < drives_.size(); ++i)
    {
      if (blocked & (std::uint32_t(1) << i))
        continue;
      const auto& move = drives_[i];
      RobotPose to = pose;
      to.base = pose.base + move.offset;
      for (int j = 0; j < 4; ++j)
        to.feet[j] = pose.feet[j] + move.offset;
      const double to_cost = cost_of(to);
      if (!std::isfinite(to_cost))
        continue;
      const double factor = drive_factors_[std::size_t(pose.orientation) * drives_.size() + i];
      Manoeuvre m;
      m.kind = ManoeuvreKind::kDrive;
      m.from = pose;
      m.to = to;
      m.length = move.length * model_->resolution();
      m.cost = m.length * 0.5 * (from_cost + to_cost) * factor;
      out.push_back(m);
    }

    for (int dir : {1, -1})
    {
      const RobotPose to = model_->footprint().neutral_pose(pose.base, pose.orientation + dir);
      if (!std::isfinite(cost_of(to)))
        continue;
      Manoeuvre m;
      m.kind = ManoeuvreKind::kRotate;
      m.from = pose;
      m.to = to;
      m.cost = params_.k_rot * kOrientationStep * from_cost;
      out.push_back(m);
    }
  }

  //----------------------------------------------------------------------------
  void step_neighbors(const RobotPose& pose, std::vector<Manoeuvre>& out) const
  {
    const auto& map = model_->map();
    const auto& fp = model_->footprint();
    const double res = model_->resolution();

    for (int j = 0; j < 4; ++j)
    {
      const Cell foot = pose.feet[j];
      if (!near_obstacle(foot) || !map.known(foot))
        continue;
      const int a = is_left(j) ? kFrontRight : kFrontLeft;
      const int b = is_left(j) ? kRearRight : kRearLeft;
      if (!(cell_distance(pose.feet[a], pose.feet[b]) * res > params_.safe_stand_distance))
        continue;

      const double foot_h = map.at(foot);
      const double deviation = fp.deviation(pose, j);
      std::optional<Manoeuvre> best;
      // Footholds short of the first untraversable cell are reachable by
      // driving the wheel pair and are left to wheel moves.
      bool crossed = false;
      for (const RayCell& ray : rays_[std::size_t(pose.orientation)])
      {
        if (deviation + ray.along > fp.geometry().max_reach + 1e-9)
          break;
        const Cell c = foot + ray.offset;
        RobotPose to = pose;
        to.feet[j] = c;
        if (!map.contains(c))
          break;
        const double c_cost = model_->foot_cost(c);
        if (!std::isfinite(c_cost) || !map.known(c))
        {
          crossed = true;
          continue;
        }
        if (!crossed)
          continue;
        if (std::abs(map.at(c) - foot_h) > params_.max_step_height)
          continue;
        const double length = cell_distance(foot, c) * res;
        // The foothold itself bounds the height change from below.
        if (best && step_cost(length, c_cost, std::abs(map.at(c) - foot_h), params_) >= best->cost)
          continue;
        double height_change = 0.0;
        const bool known_line = visit_supercover_line(foot, c, [&](const Cell& l) {
          if (!map.known(l))
            return false;
          height_change = std::max(height_change, std::abs(map.at(l) - foot_h));
          return true;
        });
        if (!known_line)
          continue;
        const double cs = step_cost(length, c_cost, height_change, params_);
        if (best && cs >= best->cost)
          continue;
        if (!std::isfinite(model_->pose_cost(to)))
          continue;
        Manoeuvre m;
        m.kind = ManoeuvreKind::kAbstractStep;
        m.from = pose;
        m.to = to;
        m.foot = j;
        m.foothold = c;
        m.length = length;
        m.height_change = height_change;
        m.cost = cs;
        best = m;
      }
      if (best)
      {
        best->cost *= params_.step_weight;
        out.push_back(*best);
      }
    }
  }

  //----------------------------------------------------------------------------
  std::optional<Manoeuvre> base_shift_neighbor(const RobotPose& pose) const
  {
    const auto& fp = model_->footprint();
    const double res = model_->resolution();
    const double reach = fp.geometry().max_reach;
    const double front_left = fp.deviation(pose, kFrontLeft);
    const double front_right = fp.deviation(pose, kFrontRight);
    if (!(front_left > 0.5 * res && front_right > 0.5 * res))
      return std::nullopt;

    const double front_limit = std::min(front_left, front_right);
    const double rear_limit = std::min(reach + fp.deviation(pose, kRearLeft),
      reach + fp.deviation(pose, kRearRight));
    const double length = std::min(front_limit, rear_limit);
    if (!(length > 0.5 * res))
      return std::nullopt;

    RobotPose to = pose;
    if (front_limit <= rear_limit)
    {
      const int limiting = front_left <= front_right ? kFrontLeft : kFrontRight;
      to.base = pose.feet[limiting] - fp.neutral_offset(pose.orientation, limiting);
    }
    else
    {
      const Eigen::Vector2d d = Footprint::heading(pose.orientation) * (length / res);
      to.base = pose.base + Cell{int(std::lround(d.x())), int(std::lround(d.y()))};
    }
    if (to.base == pose.base)
      return std::nullopt;
    for (int j = 0; j < 4; ++j)
      if (std::abs(fp.deviation(to, j)) > reach + 0.5 * res)
        return std::nullopt;
    if (!std::isfinite(model_->pose_cost(to)))
      return std::nullopt;

    double avg;
    try
    {
      avg = model_->segment_avg_base_cost(pose, to);
    }
    catch (const Error&)
    {
      return std::nullopt;
    }
    Manoeuvre m;
    m.kind = ManoeuvreKind::kBaseShift;
    m.from = pose;
    m.to = to;
    m.length = cell_distance(pose.base, to.base) * res;
    m.cost = params_.step_weight * params_.k10 * m.length * avg;
    return m;
  }

  //----------------------------------------------------------------------------
  void wheel_move_neighbors(const RobotPose& pose, std::vector<Manoeuvre>& out) const
  {
    const auto& fp = model_->footprint();

    // Front wheels forward as preparation for a rear step.
    if (obstacle_ahead(pose, kRearLeft) || obstacle_ahead(pose, kRearRight))
    {
      for (int j : {kFrontLeft, kFrontRight})
      {
        if (!fp.foot_neutral(pose, j))
          continue;
        const Cell target = farthest_forward_cell(pose, j);
        if (target != pose.feet[j])
          emit_wheel_move(pose, j, target, out);
      }
    }

    // Single wheel pair back to its neutral position, or as close to it as
    // finite foot costs allow.
    for (int j = 0; j < 4; ++j)
    {
      if (fp.foot_neutral(pose, j))
        continue;
      const Cell neutral = fp.neutral_foot_cell(pose.base, pose.orientation, j);
      Cell target = pose.feet[j];
      visit_supercover_line(pose.feet[j], neutral, [&](const Cell& c) {
        if (!model_->foot_costs().finite(c))
          return false;
        target = c;
        return true;
      });
      if (target != pose.feet[j])
        emit_wheel_move(pose, j, target, out);
    }
  }

  std::vector<Cell> drive_offsets() const
  {
    std::vector<Cell> out;
    for (const auto& m : drives_)
      out.push_back(m.offset);
    return out;
  }

  /// True when the foot is near an obstacle that lies ahead of it on its
  /// sagittal ray within leg reach.
  bool obstacle_ahead(const RobotPose& pose, int foot) const
  {
    if (!near_obstacle(pose.feet[foot]))
      return false;
    const auto& fp = model_->footprint();
    const double deviation = fp.deviation(pose, foot);
    for (const RayCell& r : rays_[std::size_t(pose.orientation)])
    {
      if (deviation + r.along > fp.geometry().max_reach + 1e-9)
        return false;
      const Cell c = pose.feet[foot] + r.offset;
      if (!model_->foot_costs().finite(c))
        return model_->map().contains(c);
    }
    return false;
  }

private:
  struct DriveMove
  {
    Cell offset;
    double length;    // cells
    double direction; // radians
    std::vector<Cell> sweep;
  };

  /// Cell offset along the sagittal ray of a foot and its sagittal length.
  struct RayCell
  {
    Cell offset;
    double along; // meters
  };

  /// Distinct cells hit by sampling the heading ray every cell length, up to
  /// twice the leg reach, per orientation.
  void build_ray_table()
  {
    const double res = model_->resolution();
    const int samples = int(std::ceil(2.0 * model_->geometry().max_reach / res)) + 2;
    for (int t = 0; t < kOrientationCount; ++t)
    {
      const Eigen::Vector2d u = Footprint::heading(t);
      Cell previous{0, 0};
      for (int k = 1; k <= samples; ++k)
      {
        const Eigen::Vector2d p = double(k) * u;
        const Cell c{int(std::lround(p.x())), int(std::lround(p.y()))};
        if (c == previous)
          continue;
        previous = c;
        rays_[std::size_t(t)].push_back({c, (c.x * u.x() + c.y * u.y()) * res});
      }
    }
  }

  void build_drive_table()
  {
    std::vector<Cell> offsets;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx || dy)
          offsets.push_back({dx, dy});
    for (int sx : {-1, 1})
      for (int sy : {-1, 1})
      {
        offsets.push_back({sx, 2 * sy});
        offsets.push_back({2 * sx, sy});
      }
    if (params_.neighborhood == 20)
      for (int sx : {-1, 1})
        for (int sy : {-1, 1})
          offsets.push_back({2 * sx, 2 * sy});

    for (const Cell& o : offsets)
    {
      DriveMove m;
      m.offset = o;
      m.length = std::hypot(double(o.x), double(o.y));
      m.direction = std::atan2(double(o.y), double(o.x));
      m.sweep = supercover_line({0, 0}, o);
      m.sweep.erase(m.sweep.begin()); // start cell is the (finite) foot itself
      drives_.push_back(std::move(m));
    }

    for (int t = 0; t < kOrientationCount; ++t)
      for (const auto& m : drives_)
        drive_factors_.push_back(orientation_cost_factor(
          angle_difference(orientation_angle(t), m.direction), params_));

    // Per foot cell: bit i set when drive i sweeps over an untraversable cell.
    const auto& map = model_->map();
    const auto& fc = model_->foot_costs();
    blocked_moves_.assign(map.size(), 0);
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x)
        for (std::size_t i = 0; i < drives_.size(); ++i)
          for (const auto& rel : drives_[i].sweep)
            if (!fc.finite(Cell{x, y} + rel))
            {
              blocked_moves_[map.index({x, y})] |= std::uint32_t(1) << i;
              break;
            }
  }

  void build_obstacle_proximity()
  {
    const auto& map = model_->map();
    const auto& fc = model_->foot_costs();
    const auto kernel = disc_kernel(params_.obstacle_proximity, map.resolution(), true);
    near_obstacle_.assign(map.size(), 0);
    for (int y = 0; y < map.height(); ++y)
      for (int x = 0; x < map.width(); ++x)
        for (const auto& k : kernel)
          if (!fc.finite({x + k.dx, y + k.dy}))
          {
            near_obstacle_[map.index({x, y})] = 1;
            break;
          }
  }

  /// Farthest cell along the sagittal ray of a foot whose straight sweep stays
  /// on finite foot costs and within leg reach.
  Cell farthest_forward_cell(const RobotPose& pose, int foot) const
  {
    const auto& fp = model_->footprint();
    const double deviation = fp.deviation(pose, foot);
    std::vector<Cell> ray;
    for (const RayCell& r : rays_[std::size_t(pose.orientation)])
    {
      const Cell c = pose.feet[foot] + r.offset;
      if (deviation + r.along > fp.geometry().max_reach + 1e-9)
        break;
      if (!model_->foot_costs().finite(c))
        break;
      ray.push_back(c);
    }
    while (!ray.empty())
    {
      const bool clear = visit_supercover_line(pose.feet[foot], ray.back(),
        [&](const Cell& l) { return model_->foot_costs().finite(l); });
      if (clear)
        return ray.back();
      ray.pop_back();
    }
    return pose.feet[foot];
  }

  void emit_wheel_move(const RobotPose& pose, int foot, const Cell& target,
    std::vector<Manoeuvre>& out) const
  {
    RobotPose to = pose;
    to.feet[foot] = target;
    double avg;
    try
    {
      avg = model_->segment_avg_foot_cost(pose.feet[foot], target);
    }
    catch (const Error&)
    {
      return;
    }
    if (std::abs(model_->footprint().deviation(to, foot)) >
        model_->geometry().max_reach + 0.5 * model_->resolution())
      return;
    if (!std::isfinite(model_->pose_cost(to)))
      return;
    Manoeuvre m;
    m.kind = ManoeuvreKind::kWheelMove;
    m.from = pose;
    m.to = to;
    m.foot = foot;
    m.foothold = target;
    m.length = cell_distance(pose.feet[foot], target) * model_->resolution();
    m.cost = params_.step_weight * params_.k11 * m.length * avg;
    out.push_back(m);
  }

  const CostModel* model_;
  PlannerParams params_;
  std::vector<DriveMove> drives_;
  std::array<std::vector<RayCell>, kOrientationCount> rays_;
  std::vector<double> drive_factors_;
  std::vector<std::uint32_t> blocked_moves_;
  std::vector<std::uint8_t> near_obstacle_;
  double distance_scale_ = 1.0;
  double rotation_scale_ = 0.5;
};

//==============================================================================
/// Goal distance lower bound built from independent relaxations of the base
/// and of each foot. Every manoeuvre cost is split into shares owned by the
/// parts it moves: a drive gives a fraction `foot_fraction` of the per-foot
/// part of the pose cost to each foot and the rest to the base, base shifts
/// belong to the base, wheel moves and steps to the moved foot. The base bound
/// is a straight-line rate; a backward Dijkstra per foot over map cells gives
/// the foot bounds. Their sum never exceeds the remaining path cost.
///
/// Steps are relaxed into a flight layer per takeoff height bin: take off from
/// a cell that admits a step, fly over any cells and land on a finite cell.
/// The foot searches are resumed on demand, so only the region the planner
/// queries is settled.
class FootHeuristic
{
public:
  FootHeuristic(const NeighborGenerator& gen, const RobotPose& goal)
  : model_(&gen.model()), params_(gen.params())
  {
    const CostModel& model = gen.model();
    const auto& map = model.map();
    const auto& fc = model.foot_costs();
    const auto& cp = model.params();
    const PlannerParams& pp = params_;
    const Footprint& fp = model.footprint();
    const double res = model.resolution();
    width_ = map.width();
    cells_ = map.size();

    foot_share_ = 0.25 * cp.k4 + cp.k5;
    base_share_ = 0.25 * cp.k6;
    rotation_scale_ = pp.k_rot * kOrientationStep;
    // Octile paths overestimate straight segments by at most this factor.
    const double octile_stretch = std::sqrt(4.0 - 2.0 * std::sqrt(2.0));
    stepping_ = pp.enable_stepping;
    // A wheel move of length L over a supercover line of n cells costs
    // L / n * sum(C_F). Charging each 8-connected move along the Bresenham
    // subset min(C_F) * wheel_scale stays below that whenever wheel_scale is
    // at most L / n over every reachable line.
    double min_length_per_cell = kInfinity;
    {
      const int reach_cells = int(std::ceil(2.0 * fp.geometry().max_reach / res)) + 2;
      for (int dy = 0; dy <= reach_cells; ++dy)
        for (int dx = dy == 0 ? 1 : 0; dx <= reach_cells; ++dx)
          min_length_per_cell = std::min(min_length_per_cell,
            std::hypot(double(dx), double(dy)) * res / double(supercover_line({0, 0}, {dx, dy}).size()));
    }
    wheel_scale_ = pp.step_weight * pp.k11 * min_length_per_cell;

    // Feet take as much of a drive as they could otherwise save by wheel
    // moves on flat terrain; the remainder bounds the base motion.
    const double flat_share = foot_share_ + base_share_;
    foot_fraction_ = 1.0;
    if (stepping_)
      foot_fraction_ = std::clamp(wheel_scale_ / res / flat_share, 0.0, 1.0);
    base_rate_ = (1.0 - foot_fraction_) * 4.0 * flat_share;
    if (stepping_)
      base_rate_ = std::min(base_rate_, pp.step_weight * pp.k10);
    base_rate_ *= res;
    goal_base_ = goal.base;
    flight_rate_ = pp.step_weight * pp.k7 / octile_stretch;

    for (const Cell& o : gen.drive_offsets())
      drive_.push_back({o, std::hypot(double(o.x), double(o.y)) * res});
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
        if (dx || dy)
          octile_.push_back({{dx, dy}, std::hypot(double(dx), double(dy)) * res});
    for (int t = 0; t < kOrientationCount; ++t)
      for (int j = 0; j < 4; ++j)
        for (int dir : {1, -1})
        {
          const Cell d = fp.neutral_offset(t + dir, j) - fp.neutral_offset(t, j);
          if (std::find(rotation_.begin(), rotation_.end(), d) == rotation_.end())
            rotation_.push_back(d);
        }

    // Takeoff cells: near an obstacle, with some orientation whose ray
    // crosses an untraversable cell before reaching a foothold within reach.
    const double span = 2.0 * fp.geometry().max_reach + 2.0 * res;
    auto can_step = [&](const Cell& a) {
      const Eigen::Vector2d origin = fp.world(a);
      for (int t = 0; t < kOrientationCount; ++t)
      {
        const Eigen::Vector2d u = Footprint::heading(t);
        bool crossed = false;
        for (int k = 1; k * res <= span + 1e-9; ++k)
        {
          const Eigen::Vector2d q = origin + (k * res) * u;
          const Cell c{int(std::lround(q.x() / res)), int(std::lround(q.y() / res))};
          if (!map.contains(c))
            break;
          if (!fc.finite(c) || !map.known(c))
            crossed = true;
          else if (crossed && std::abs(map.at(c) - map.at(a)) <= pp.max_step_height)
            return true;
        }
      }
      return false;
    };

    constexpr double bin_size = 0.01;
    takeoff_bin_.assign(cells_, -1);
    if (stepping_)
    {
      std::vector<long> keys;
      for (int y = 0; y < map.height(); ++y)
        for (int x = 0; x < map.width(); ++x)
        {
          const Cell c{x, y};
          if (!map.known(c) || !gen.near_obstacle(c) || !can_step(c))
            continue;
          const long key = std::lround(std::floor(map.at(c) / bin_size));
          auto it = std::find(keys.begin(), keys.end(), key);
          if (it == keys.end())
          {
            keys.push_back(key);
            it = keys.end() - 1;
          }
          takeoff_bin_[map.index(c)] = int(it - keys.begin());
        }
      for (long key : keys)
        bins_.push_back({double(key) * bin_size, double(key + 1) * bin_size});
    }

    // Node ids: ground cell i -> i, flight cell i in bin k -> (k + 1) * cells + i.
    const std::size_t nodes = cells_ * (bins_.size() + 1);
    for (int j = 0; j < 4; ++j)
    {
      FootSearch& s = searches_[std::size_t(j)];
      s.dist.assign(nodes, kInfinity);
      s.closed.assign(nodes, 0);
      const Cell target = goal.feet[std::size_t(j)];
      if (fc.finite(target))
      {
        s.dist[map.index(target)] = 0.0;
        s.queue.push({0.0, std::uint32_t(map.index(target))});
      }
    }
  }

  double operator()(const RobotPose& pose)
  {
    double h = base_rate_ * cell_distance(pose.base, goal_base_);
    for (int j = 0; j < 4; ++j)
    {
      const Cell& f = pose.feet[std::size_t(j)];
      if (!model_->map().contains(f))
        return kInfinity;
      h += foot_distance(j, model_->map().index(f));
    }
    return h;
  }

private:
  struct Edge
  {
    Cell offset;
    double length;
  };

  struct FootSearch
  {
    using Entry = std::pair<double, std::uint32_t>;
    std::vector<double> dist;
    std::vector<std::uint8_t> closed;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  };

  /// Settles the foot search up to `cell` and returns its distance.
  double foot_distance(int foot, std::size_t cell)
  {
    FootSearch& s = searches_[std::size_t(foot)];
    while (!s.closed[cell] && !s.queue.empty())
    {
      const auto [d, id] = s.queue.top();
      s.queue.pop();
      if (s.closed[id])
        continue;
      s.closed[id] = 1;
      expand(s, id, d);
    }
    return s.dist[cell];
  }

  void expand(FootSearch& s, std::size_t id, double d)
  {
    const auto& map = model_->map();
    const auto& fc = model_->foot_costs();
    const PlannerParams& pp = params_;
    auto relax = [&](std::size_t to, double cost) {
      if (cost < s.dist[to])
      {
        s.dist[to] = cost;
        s.queue.push({cost, std::uint32_t(to)});
      }
    };
    const std::size_t layer = id / cells_;
    const std::size_t ib = id % cells_;
    const Cell b{int(ib % std::size_t(width_)), int(ib / std::size_t(width_))};

    if (layer > 0)
    {
      // Flight: any cell, straight-line rate; takeoff returns to ground.
      for (const Edge& e : octile_)
      {
        const Cell a = b - e.offset;
        if (map.contains(a))
          relax(layer * cells_ + map.index(a), d + flight_rate_ * e.length);
      }
      if (takeoff_bin_[ib] == int(layer) - 1)
        relax(ib, d);
      return;
    }

    const double fb = fc.at(b);
    for (const Edge& e : drive_)
    {
      const Cell a = b - e.offset;
      if (fc.finite(a))
        relax(map.index(a), d + foot_fraction_ * e.length *
          (foot_share_ * 0.5 * (fc.at(a) + fb) + base_share_));
    }
    for (const Cell& o : rotation_)
    {
      const Cell a = b - o;
      if (fc.finite(a))
        relax(map.index(a), d + foot_fraction_ * rotation_scale_ *
          (foot_share_ * fc.at(a) + base_share_));
    }
    if (!stepping_)
      return;
    for (const Edge& e : octile_)
    {
      const Cell a = b - e.offset;
      if (fc.finite(a))
        relax(map.index(a), d + wheel_scale_ * std::min(fb, fc.at(a)));
    }
    if (!map.known(b))
      return;
    // Landing from flight in each bin.
    const double hb = map.at(b);
    for (std::size_t k = 0; k < bins_.size(); ++k)
    {
      const auto [lo, hi] = bins_[k];
      const double dh = hb < lo ? lo - hb : (hb > hi ? hb - hi : 0.0);
      if (dh > pp.max_step_height)
        continue;
      relax((k + 1) * cells_ + ib, d + pp.step_weight * (pp.k8 * (fb - 1.0) + pp.k9 * dh));
    }
  }

  const CostModel* model_;
  PlannerParams params_;
  int width_ = 0;
  std::size_t cells_ = 0;
  double foot_share_ = 0.0;
  double base_share_ = 0.0;
  double rotation_scale_ = 0.0;
  double wheel_scale_ = 0.0;
  double foot_fraction_ = 1.0;
  double flight_rate_ = 0.0;
  bool stepping_ = true;
  double base_rate_ = 0.0; // per cell
  Cell goal_base_;
  std::vector<Edge> drive_;
  std::vector<Edge> octile_;
  std::vector<Cell> rotation_;
  std::vector<int> takeoff_bin_;
  std::vector<std::pair<double, double>> bins_;
  std::array<FootSearch, 4> searches_;
};

//==============================================================================
struct IterationStats
{
  double weight = 1.0;
  std::size_t expansions = 0;
  double wall_ms = 0.0;
  double cost = 0.0;
};

/// Path produced by one search iteration: poses[i + 1] = manoeuvres[i].to.
struct AbstractPath
{
  std::vector<RobotPose> poses;
  std::vector<Manoeuvre> manoeuvres;
  double cost = 0.0;
  double weight = 1.0;
  IterationStats stats;

  std::size_t count(ManoeuvreKind kind) const
  {
    return std::size_t(std::count_if(manoeuvres.begin(), manoeuvres.end(),
      [kind](const Manoeuvre& m) { return m.kind == kind; }));
  }
};

//==============================================================================
/// Anytime Repairing A* over the hybrid driving-stepping lattice.
class AraStarPlanner
{
public:
  using Callback = std::function<void(const AbstractPath&)>;

  AraStarPlanner(const CostModel& model, PlannerParams params)
  : neighbors_(model, params)
  {
  }

  const NeighborGenerator& neighbors() const { return neighbors_; }
  const PlannerParams& params() const { return neighbors_.params(); }

  /// Runs the weight schedule until weight 1 completes or the budget runs out.
  /// Every completed iteration is passed to `on_solution` and returned.
  std::vector<AbstractPath> plan(
    const RobotPose& start,
    const RobotPose& goal,
    double time_budget_s,
    const Callback& on_solution = {}) const
  {
    Search search(neighbors_, start, goal, time_budget_s);
    return search.run(on_solution);
  }

private:
  class Search
  {
  public:
    Search(const NeighborGenerator& gen, const RobotPose& start, const RobotPose& goal,
      double budget_s)
    : gen_(gen), goal_pose_(goal), feet_h_(gen, goal), costs_(gen.model()),
      neutral_index_(gen.model().map().size() * std::size_t(kOrientationCount), kNone),
      deadline_(std::chrono::steady_clock::now() +
        std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(std::max(0.0, budget_s))))
    {
      const auto& model = gen.model();
      if (!model.map().contains(start.base) || !std::isfinite(model.pose_cost(start)))
        throw Error("invalid-start", "start pose is not traversable");
      if (!model.map().contains(goal.base) || !std::isfinite(model.pose_cost(goal)))
        throw Error("no-path", "goal pose is not traversable");
      start_ = node_for(start);
      nodes_[start_].g = 0.0;
      goal_ = node_for(goal);
    }

    std::vector<AbstractPath> run(const Callback& on_solution)
    {
      std::vector<AbstractPath> results;
      const auto schedule = gen_.params().weight_schedule();
      for (std::size_t i = 0; i < schedule.size(); ++i)
      {
        const auto ti = std::chrono::steady_clock::now();
        weight_ = schedule[i];
        ++iteration_;
        if (i == 0)
          push_open(start_);
        else
          reopen();
        std::size_t expansions = 0;
        const bool finished = improve_path(expansions);
        if (!finished)
        {
          if (results.empty())
            throw Error("budget-exhausted", "search budget exhausted before a first solution");
          break;
        }
        if (!std::isfinite(nodes_[goal_].g))
          throw Error("no-path", "goal unreachable");

        AbstractPath path = extract_path();
        // Keep the previous path when the new chain is not cheaper; both obey
        // the current bound.
        if (!results.empty() && results.back().cost < path.cost)
        {
          path.poses = results.back().poses;
          path.manoeuvres = results.back().manoeuvres;
          path.cost = results.back().cost;
        }
        path.weight = weight_;
        path.stats.weight = weight_;
        path.stats.expansions = expansions;
        path.stats.wall_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - ti).count();
        path.stats.cost = path.cost;
        if (on_solution)
          on_solution(path);
        results.push_back(std::move(path));
      }
      return results;
    }

  private:
    static constexpr std::uint32_t kNone = 0xFFFFFFFFu;

    struct Via
    {
      ManoeuvreKind kind = ManoeuvreKind::kDrive;
      std::int8_t foot = -1;
      Cell foothold;
      double cost = 0.0;
      double length = 0.0;
      double height_change = 0.0;
    };

    struct Node
    {
      RobotPose pose;
      double g = kInfinity;
      double h = 0.0;
      std::uint32_t parent = kNone;
      Via via;
      std::uint32_t closed_in = 0;
      std::uint64_t open_seq = 0;
      bool in_open = false;
      bool in_incons = false;
    };

    struct HeapEntry
    {
      double key;
      std::uint64_t seq;
      std::uint32_t node;
    };

    // Min key first; among equal keys the most recent insertion wins.
    static bool heap_less(const HeapEntry& a, const HeapEntry& b)
    {
      if (a.key != b.key)
        return a.key > b.key;
      return a.seq < b.seq;
    }

    std::uint32_t node_for(const RobotPose& pose)
    {
      const auto& model = gen_.model();
      std::uint32_t* slot;
      if (model.map().contains(pose.base) && model.footprint().is_neutral(pose))
      {
        slot = &neutral_index_[model.map().index(pose.base) * kOrientationCount +
          std::size_t(pose.orientation)];
      }
      else
      {
        slot = &index_.try_emplace(pose, kNone).first->second;
      }
      if (*slot == kNone)
      {
        *slot = std::uint32_t(nodes_.size());
        Node n;
        n.pose = pose;
        n.h = std::max(gen_.heuristic(pose, goal_pose_), feet_h_(pose));
        nodes_.push_back(n);
      }
      return *slot;
    }

    double key(const Node& n) const { return n.g + weight_ * n.h; }

    void push_open(std::uint32_t id)
    {
      Node& n = nodes_[id];
      n.in_open = true;
      n.open_seq = ++seq_;
      heap_.push_back({key(n), n.open_seq, id});
      std::push_heap(heap_.begin(), heap_.end(), heap_less);
    }

    void drop_stale()
    {
      while (!heap_.empty())
      {
        const auto& top = heap_.front();
        const Node& n = nodes_[top.node];
        if (n.in_open && n.open_seq == top.seq)
          return;
        std::pop_heap(heap_.begin(), heap_.end(), heap_less);
        heap_.pop_back();
      }
    }

    /// Moves INCONS into OPEN and re-keys OPEN for the current weight.
    void reopen()
    {
      for (std::uint32_t id : incons_)
      {
        nodes_[id].in_incons = false;
        if (!nodes_[id].in_open)
        {
          nodes_[id].in_open = true;
          nodes_[id].open_seq = ++seq_;
        }
      }
      incons_.clear();
      heap_.clear();
      for (std::uint32_t id = 0; id < nodes_.size(); ++id)
      {
        const Node& n = nodes_[id];
        if (n.in_open)
          heap_.push_back({key(n), n.open_seq, id});
      }
      std::make_heap(heap_.begin(), heap_.end(), heap_less);
    }

    bool improve_path(std::size_t& expansions)
    {
      std::vector<Manoeuvre> succ;
      while (true)
      {
        drop_stale();
        if (heap_.empty())
          return true;
        if (nodes_[goal_].g <= heap_.front().key)
          return true;
        if ((expansions & 127) == 0 && std::chrono::steady_clock::now() > deadline_)
          return false;
        if (nodes_.size() >= gen_.params().max_states)
          return false;

        const std::uint32_t id = heap_.front().node;
        std::pop_heap(heap_.begin(), heap_.end(), heap_less);
        heap_.pop_back();
        nodes_[id].in_open = false;
        nodes_[id].closed_in = iteration_;
        ++expansions;

        const RobotPose pose = nodes_[id].pose;
        const double g = nodes_[id].g;
        gen_.successors(pose, succ, &costs_);
        for (const Manoeuvre& m : succ)
        {
          const std::uint32_t child = node_for(m.to);
          Node& c = nodes_[child];
          const double candidate = g + m.cost;
          if (!(candidate < c.g) || !std::isfinite(c.h))
            continue;
          c.g = candidate;
          c.parent = id;
          c.via = {m.kind, std::int8_t(m.foot), m.foothold, m.cost, m.length, m.height_change};
          if (c.closed_in == iteration_)
          {
            if (!c.in_incons)
            {
              c.in_incons = true;
              incons_.push_back(child);
            }
          }
          else
          {
            push_open(child);
          }
        }
      }
    }

    AbstractPath extract_path() const
    {
      AbstractPath path;
      std::vector<std::uint32_t> chain;
      for (std::uint32_t id = goal_; id != kNone; id = nodes_[id].parent)
      {
        chain.push_back(id);
        if (id == start_)
          break;
      }
      std::reverse(chain.begin(), chain.end());
      for (std::size_t i = 0; i < chain.size(); ++i)
      {
        const Node& n = nodes_[chain[i]];
        path.poses.push_back(n.pose);
        if (i == 0)
          continue;
        Manoeuvre m;
        m.kind = n.via.kind;
        m.from = nodes_[chain[i - 1]].pose;
        m.to = n.pose;
        m.cost = n.via.cost;
        m.foot = n.via.foot;
        m.foothold = n.via.foothold;
        m.length = n.via.length;
        m.height_change = n.via.height_change;
        path.manoeuvres.push_back(m);
        // Ancestors may have improved after their descendants were reached,
        // so the chain can be cheaper than g(goal).
        path.cost += m.cost;
      }
      return path;
    }

    const NeighborGenerator& gen_;
    RobotPose goal_pose_;
    FootHeuristic feet_h_;
    PoseCostCache costs_;
    std::vector<std::uint32_t> neutral_index_;
    std::chrono::steady_clock::time_point deadline_;
    std::vector<Node> nodes_;
    absl::flat_hash_map<RobotPose, std::uint32_t, RobotPoseHash> index_;
    std::vector<HeapEntry> heap_;
    std::vector<std::uint32_t> incons_;
    std::uint32_t start_ = 0;
    std::uint32_t goal_ = 0;
    std::uint32_t iteration_ = 0;
    std::uint64_t seq_ = 0;
    double weight_ = 1.0;
  };

  NeighborGenerator neighbors_;
};

/// Total cost of a manoeuvre sequence, summed in path order.
inline double path_cost(const std::vector<Manoeuvre>& manoeuvres)
{
  double c = 0.0;
  for (const auto& m : manoeuvres)
    c += m.cost;
  return c;
}

/// Mean |orientation - driving direction| over the drive manoeuvres of a path.
inline double mean_drive_misalignment(const AbstractPath& path, double resolution)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& m : path.manoeuvres)
  {
    if (m.kind != ManoeuvreKind::kDrive)
      continue;
    const Cell d = m.to.base - m.from.base;
    const double dir = std::atan2(d.y * resolution, d.x * resolution);
    sum += angle_difference(orientation_angle(m.from.orientation), dir);
    ++n;
  }
  return n ? sum / double(n) : 0.0;
}

} // namespace hybrid_nav
