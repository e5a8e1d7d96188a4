#pragma once

#include "hybrid_nav/pose.hpp"
#include "hybrid_nav/terrain.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

namespace hybrid_nav {

//==============================================================================
struct CostModelParams
{
  double k1 = 100.0;
  double k2 = 1.0;
  double k3 = 0.5;
  double k4 = 0.1;
  double k5 = 0.1;
  double k6 = 0.5;
  double foot_radius = 0.12;
  double neighborhood_radius = 0.3;
  double untraversable_height = 0.05;
  double body_circle_radius = 0.25;
  std::array<double, 2> body_circle_offsets{0.20, -0.20};

  void validate() const
  {
    if (!(foot_radius > 0 && neighborhood_radius > 0 && body_circle_radius > 0))
      throw Error("validation", "cost model radii must be positive");
    if (!(neighborhood_radius > foot_radius))
      throw Error("validation", "neighborhood radius must exceed foot radius");
    if (k1 < 0 || k2 < 0 || k3 < 0 || k4 < 0 || k5 < 0 || k6 < 0)
      throw Error("validation", "cost weights must be non-negative");
  }

  /// Pose cost of a pose with unit foot and base costs.
  double unit_pose_cost() const { return k4 + 4.0 * k5 + k6; }
};

//==============================================================================
/// Visits every cell touched by the straight segment between two cell
/// centers, including both neighbors where the segment passes exactly through
/// a corner. Stops early when `visit` returns false; returns false in that case.
template<typename F>
bool visit_supercover_line(const Cell& from, const Cell& to, F&& visit)
{
  const int dx = to.x - from.x, dy = to.y - from.y;
  const int nx = std::abs(dx), ny = std::abs(dy);
  const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
  Cell p = from;
  if (!visit(p))
    return false;
  for (int ix = 0, iy = 0; ix < nx || iy < ny;)
  {
    const long decision = long(1 + 2 * ix) * ny - long(1 + 2 * iy) * nx;
    if (decision == 0)
    {
      if (!visit(Cell{p.x + sx, p.y}) || !visit(Cell{p.x, p.y + sy}))
        return false;
      p.x += sx;
      p.y += sy;
      ++ix;
      ++iy;
    }
    else if (decision < 0)
    {
      p.x += sx;
      ++ix;
    }
    else
    {
      p.y += sy;
      ++iy;
    }
    if (!visit(p))
      return false;
  }
  return true;
}

/// Every cell touched by the straight segment between two cell centers.
inline std::vector<Cell> supercover_line(const Cell& from, const Cell& to)
{
  std::vector<Cell> cells;
  cells.reserve(std::size_t(std::abs(to.x - from.x) + std::abs(to.y - from.y) + 2));
  visit_supercover_line(from, to, [&](const Cell& c) {
    cells.push_back(c);
    return true;
  });
  return cells;
}

//==============================================================================
/// Cell offsets within a radius, sorted by distance.
struct KernelEntry
{
  int dx;
  int dy;
  double distance; // meters
};

inline std::vector<KernelEntry> disc_kernel(double radius, double resolution, bool strict)
{
  std::vector<KernelEntry> kernel;
  const int r = int(std::ceil(radius / resolution));
  for (int dy = -r; dy <= r; ++dy)
  {
    for (int dx = -r; dx <= r; ++dx)
    {
      const double d = std::hypot(double(dx), double(dy)) * resolution;
      if (strict ? d < radius : d <= radius + 1e-12)
        kernel.push_back({dx, dy, d});
    }
  }
  std::stable_sort(kernel.begin(), kernel.end(),
    [](const KernelEntry& a, const KernelEntry& b) { return a.distance < b.distance; });
  return kernel;
}

//==============================================================================
/// Per-cell foot cost. Unknown and untraversable cells hold infinity; cells
/// outside the map read as infinity too.
class FootCostField
{
public:
  FootCostField() = default;
  FootCostField(int width, int height)
  : width_(width), height_(height), values_(std::size_t(width) * std::size_t(height), kInfinity)
  {
  }

  int width() const { return width_; }
  int height() const { return height_; }

  bool contains(const Cell& c) const
  {
    return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_;
  }

  double at(const Cell& c) const
  {
    return contains(c) ? values_[std::size_t(c.y) * std::size_t(width_) + std::size_t(c.x)]
                       : kInfinity;
  }

  bool finite(const Cell& c) const { return std::isfinite(at(c)); }

  void set(const Cell& c, double v)
  {
    values_[std::size_t(c.y) * std::size_t(width_) + std::size_t(c.x)] = v;
  }

private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

namespace detail {

inline double foot_cost_with_kernel(
  const HeightDiffField& diff,
  const Cell& cell,
  const CostModelParams& params,
  const std::vector<KernelEntry>& kernel)
{
  double sum = 0.0;
  for (const auto& k : kernel)
  {
    const Cell c{cell.x + k.dx, cell.y + k.dy};
    const bool near = k.distance < params.foot_radius;
    if (!diff.known(c))
    {
      if (near)
        return kInfinity;
      continue;
    }
    const double dh = diff.at(c);
    if (near && dh > params.untraversable_height)
      return kInfinity;
    sum += dh * (1.0 - k.distance / params.neighborhood_radius);
  }
  return 1.0 + params.k1 * sum;
}

} // namespace detail

/// Foot cost of a single cell: 1 plus the distance-weighted sum of height
/// differences within the neighborhood radius, or infinity when a large
/// height difference or unknown terrain lies within the foot radius.
inline double foot_cost(const HeightDiffField& diff, const Cell& cell, const CostModelParams& params)
{
  if (!diff.contains(cell))
    throw Error("bounds", "foot cell outside map");
  const auto kernel = disc_kernel(params.neighborhood_radius, diff.resolution(), true);
  return detail::foot_cost_with_kernel(diff, cell, params, kernel);
}

inline FootCostField foot_cost_field(const HeightDiffField& diff, const CostModelParams& params)
{
  params.validate();
  const auto kernel = disc_kernel(params.neighborhood_radius, diff.resolution(), true);
  FootCostField field(diff.width(), diff.height());
  for (int y = 0; y < diff.height(); ++y)
    for (int x = 0; x < diff.width(); ++x)
      field.set({x, y}, detail::foot_cost_with_kernel(diff, {x, y}, params, kernel));
  return field;
}

/// Combination of four foot costs and a base cost into a pose cost.
inline double combine_pose_cost(
  const std::array<double, 4>& foot_costs, double base_cost, const CostModelParams& params)
{
  double max_cost = 0.0, sum = 0.0;
  for (double c : foot_costs)
  {
    if (!std::isfinite(c))
      return kInfinity;
    max_cost = std::max(max_cost, c);
    sum += c;
  }
  if (!std::isfinite(base_cost))
    return kInfinity;
  return params.k4 * max_cost + params.k5 * sum + params.k6 * base_cost;
}

/// Center cell of body disc `k` for a base cell and orientation.
inline Cell body_disc_center(
  const Cell& base, int orientation, double offset, double resolution)
{
  const Eigen::Vector2d h = Footprint::heading(orientation) * offset;
  return {base.x + int(std::lround(h.x() / resolution)),
          base.y + int(std::lround(h.y() / resolution))};
}

/// Base cost by direct evaluation: body clearance over the two body discs plus
/// the spread of foot terrain heights. `leg_height` is added to the highest
/// foot terrain to obtain the body-bottom height.
inline double base_cost(
  const HeightMap& map,
  const RobotPose& pose,
  double leg_height,
  const CostModelParams& params)
{
  double max_under_body = -kInfinity;
  const auto disc = disc_kernel(params.body_circle_radius, map.resolution(), false);
  for (double offset : params.body_circle_offsets)
  {
    const Cell center = body_disc_center(pose.base, pose.orientation, offset, map.resolution());
    for (const auto& k : disc)
    {
      const Cell c{center.x + k.dx, center.y + k.dy};
      if (map.known(c))
        max_under_body = std::max(max_under_body, map.at(c));
    }
  }
  if (!std::isfinite(max_under_body))
    throw Error("unknown-terrain", "no known terrain under the robot body");

  double foot_min = kInfinity, foot_max = -kInfinity;
  for (const auto& f : pose.feet)
  {
    if (!map.known(f))
      throw Error("unknown-terrain", "foot on unknown terrain");
    foot_min = std::min(foot_min, map.at(f));
    foot_max = std::max(foot_max, map.at(f));
  }
  const double body_height = foot_max + leg_height;
  return 1.0 + params.k2 * std::max(max_under_body - body_height, 0.0) +
    params.k3 * (foot_max - foot_min);
}

//==============================================================================
/// Precomputed cost fields for one map. Immutable after construction and safe
/// to share between concurrent planner runs.
class CostModel
{
public:
  explicit CostModel(HeightMap map, CostModelParams params = {}, RobotGeometry geometry = {})
  : map_(std::move(map)), params_(params), footprint_(geometry, map_.resolution())
  {
    map_.validate();
    params_.validate();
    diff_ = height_diff_field(map_);
    foot_costs_ = foot_cost_field(diff_, params_);
    build_body_max_field();
  }

  const HeightMap& map() const { return map_; }
  const HeightDiffField& diff() const { return diff_; }
  const FootCostField& foot_costs() const { return foot_costs_; }
  const CostModelParams& params() const { return params_; }
  const Footprint& footprint() const { return footprint_; }
  const RobotGeometry& geometry() const { return footprint_.geometry(); }
  double resolution() const { return map_.resolution(); }

  double foot_cost(const Cell& c) const { return foot_costs_.at(c); }

  /// Leg height assumed by the cost model: low while the footprint is
  /// neutral, raised otherwise.
  double leg_height(const RobotPose& pose) const
  {
    return footprint_.is_neutral(pose) ? geometry().driving_leg_height
                                       : geometry().stepping_leg_height;
  }

  /// Max known terrain height within a body disc centered at `c`, NaN if the
  /// disc holds no known cell.
  double body_disc_max(const Cell& c) const
  {
    if (!map_.contains(c))
      return disc_max_direct(c);
    return body_max_[map_.index(c)];
  }

  /// Base cost with feet taken from `feet_pose` and body at `body_base`.
  double base_cost(const RobotPose& pose) const
  {
    return base_cost_at(pose, pose.base, leg_height(pose));
  }

  double base_cost_at(const RobotPose& feet_pose, const Cell& body_base, double leg_height) const
  {
    double max_under_body = -kInfinity;
    for (double offset : params_.body_circle_offsets)
    {
      const double m = body_disc_max(
        body_disc_center(body_base, feet_pose.orientation, offset, map_.resolution()));
      if (!std::isnan(m))
        max_under_body = std::max(max_under_body, m);
    }
    if (!std::isfinite(max_under_body))
      throw Error("unknown-terrain", "no known terrain under the robot body");

    double foot_min = kInfinity, foot_max = -kInfinity;
    for (const auto& f : feet_pose.feet)
    {
      if (!map_.known(f))
        throw Error("unknown-terrain", "foot on unknown terrain");
      const double h = map_.at(f);
      foot_min = std::min(foot_min, h);
      foot_max = std::max(foot_max, h);
    }
    return 1.0 + params_.k2 * std::max(max_under_body - (foot_max + leg_height), 0.0) +
      params_.k3 * (foot_max - foot_min);
  }

  /// Pose cost; infinity for any untraversable, unknown or off-map pose.
  double pose_cost(const RobotPose& pose) const
  {
    std::array<double, 4> fc;
    for (int j = 0; j < 4; ++j)
    {
      fc[j] = foot_costs_.at(pose.feet[j]);
      if (!std::isfinite(fc[j]))
        return kInfinity;
    }
    double cb;
    try
    {
      cb = base_cost(pose);
    }
    catch (const Error&)
    {
      return kInfinity;
    }
    return combine_pose_cost(fc, cb, params_);
  }

  /// Mean foot cost over the supercover line between two cells.
  double segment_avg_foot_cost(const Cell& from, const Cell& to) const
  {
    double sum = 0.0;
    std::size_t count = 0;
    const bool finite = visit_supercover_line(from, to, [&](const Cell& c) {
      const double v = foot_costs_.at(c);
      sum += v;
      ++count;
      return std::isfinite(v);
    });
    if (!finite)
      throw Error("untraversable-segment", "segment crosses untraversable terrain");
    return sum / double(count);
  }

  /// Mean base cost over base positions sampled every cell length between the
  /// bases of two poses, with the feet of `from` held fixed.
  double segment_avg_base_cost(const RobotPose& from, const RobotPose& to) const
  {
    const double length = cell_distance(from.base, to.base);
    const int samples = std::max(1, int(std::ceil(length - 1e-9)));
    const double leg = leg_height(from);
    if (length == 0.0)
      return base_cost_at(from, from.base, leg);
    double sum = 0.0;
    for (int k = 0; k <= samples; ++k)
    {
      const double t = double(k) / samples;
      const Cell b{int(std::lround(from.base.x + t * (to.base.x - from.base.x))),
                   int(std::lround(from.base.y + t * (to.base.y - from.base.y)))};
      sum += base_cost_at(from, b, leg);
    }
    return sum / double(samples + 1);
  }

private:
  double disc_max_direct(const Cell& center) const
  {
    double m = std::numeric_limits<double>::quiet_NaN();
    for (const auto& k : body_kernel_)
    {
      const Cell c{center.x + k.dx, center.y + k.dy};
      if (map_.known(c))
        m = std::isnan(m) ? map_.at(c) : std::max(m, map_.at(c));
    }
    return m;
  }

  void build_body_max_field()
  {
    body_kernel_ = disc_kernel(params_.body_circle_radius, map_.resolution(), false);
    body_max_.assign(map_.size(), std::numeric_limits<double>::quiet_NaN());
    // Row-wise running maxima over each kernel row keep this O(cells * rows).
    const int r = int(std::ceil(params_.body_circle_radius / map_.resolution()));
    std::vector<int> half_width(2 * r + 1, -1);
    for (const auto& k : body_kernel_)
      half_width[k.dy + r] = std::max(half_width[k.dy + r], std::abs(k.dx));

    const int w = map_.width(), h = map_.height();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // row_max[dy][y * w + x]: max over x' in [x - hw, x + hw] of row y.
    std::vector<std::vector<double>> row_max(2 * r + 1);
    for (int i = 0; i <= 2 * r; ++i)
    {
      const int hw = half_width[i];
      if (hw < 0)
        continue;
      bool seen = false;
      for (int j = 0; j < i; ++j)
        if (half_width[j] == hw)
        {
          row_max[i] = row_max[j];
          seen = true;
          break;
        }
      if (seen)
        continue;
      auto& out = row_max[i];
      out.assign(map_.size(), nan);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
        {
          double m = nan;
          for (int xx = std::max(0, x - hw); xx <= std::min(w - 1, x + hw); ++xx)
          {
            const Cell c{xx, y};
            if (map_.known(c))
              m = std::isnan(m) ? map_.at(c) : std::max(m, map_.at(c));
          }
          out[map_.index({x, y})] = m;
        }
    }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
      {
        double m = nan;
        for (int i = 0; i <= 2 * r; ++i)
        {
          const int yy = y + i - r;
          if (half_width[i] < 0 || yy < 0 || yy >= h)
            continue;
          const double v = row_max[i][map_.index({x, yy})];
          if (!std::isnan(v))
            m = std::isnan(m) ? v : std::max(m, v);
        }
        body_max_[map_.index({x, y})] = m;
      }
  }

  HeightMap map_;
  CostModelParams params_;
  Footprint footprint_;
  HeightDiffField diff_;
  FootCostField foot_costs_;
  std::vector<KernelEntry> body_kernel_;
  std::vector<double> body_max_;
};

} // namespace hybrid_nav
