#include "hybrid_nav/costmap.hpp"
#include "hybrid_nav/scenarios.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace hybrid_nav {
namespace {

constexpr double kRes = 0.025;

/// Foot cost straight from the definition: max-abs 8-neighbor
/// differences, then a distance-weighted sum over the neighborhood disc.
double foot_cost_oracle(const HeightMap& map, const Cell& foot, const CostModelParams& p)
{
  auto diff = [&](const Cell& c, double& v) {
    if (c.x < 1 || c.y < 1 || c.x + 1 >= map.width() || c.y + 1 >= map.height())
      return false;
    if (!map.known(c))
      return false;
    v = 0.0;
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx)
      {
        const Cell n{c.x + dx, c.y + dy};
        if (!map.known(n))
          return false;
        v = std::max(v, std::abs(map.at(c) - map.at(n)));
      }
    return true;
  };
  double sum = 0.0;
  const int r = int(p.neighborhood_radius / map.resolution()) + 1;
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx)
    {
      const double d = std::sqrt(double(dx * dx + dy * dy)) * map.resolution();
      if (!(d < p.neighborhood_radius))
        continue;
      double v = 0.0;
      const bool known = diff({foot.x + dx, foot.y + dy}, v);
      if (d < p.foot_radius && (!known || v > p.untraversable_height))
        return kInfinity;
      if (known)
        sum += v * (1.0 - d / p.neighborhood_radius);
    }
  return 1.0 + p.k1 * sum;
}

HeightMap flat(int w, int h, double z = 0.0) { return HeightMap(w, h, kRes, z); }

RobotPose neutral(const CostModel& model, double x, double y, int orientation = 0)
{
  return model.footprint().neutral_pose(
    {int(std::lround(x / kRes)), int(std::lround(y / kRes))}, orientation);
}

TEST(CostParams, DefaultsAndValidation)
{
  const CostModelParams p;
  EXPECT_EQ(p.k1, 100.0);
  EXPECT_EQ(p.k2, 1.0);
  EXPECT_EQ(p.k3, 0.5);
  EXPECT_EQ(p.k4, 0.1);
  EXPECT_EQ(p.k5, 0.1);
  EXPECT_EQ(p.k6, 0.5);
  EXPECT_EQ(p.foot_radius, 0.12);
  EXPECT_EQ(p.neighborhood_radius, 0.3);
  EXPECT_EQ(p.untraversable_height, 0.05);
  EXPECT_EQ(p.body_circle_radius, 0.25);
  EXPECT_NEAR(p.unit_pose_cost(), 1.0, 1e-15);
  CostModelParams bad = p;
  bad.neighborhood_radius = 0.1;
  EXPECT_THROW(bad.validate(), Error);
  bad = p;
  bad.k3 = -1;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(FootCost, FlatIsOne)
{
  const CostModel model(flat(60, 60), {}, {});
  for (int y = 15; y < 45; y += 3)
    for (int x = 15; x < 45; x += 3)
      EXPECT_NEAR(model.foot_cost({x, y}), 1.0, 1e-12);
}

TEST(FootCost, StepEdgeWithinFootRadiusIsInfinite)
{
  HeightMap map = flat(60, 40);
  detail::raise_box(map, 0.5 * 60 * kRes, 0.0, 60 * kRes, 40 * kRes, 0.06);
  const CostModel model(map, {}, {});
  // Step at x = 30; the foot 0.05 m (2 cells) in front of it.
  EXPECT_TRUE(std::isinf(model.foot_cost({28, 20})));
  EXPECT_TRUE(std::isinf(foot_cost_oracle(map, {28, 20}, {})));
}

TEST(FootCost, SingleSmallBumpMatchesHandEvaluation)
{
  HeightMap map = flat(60, 60);
  map.set({36, 30}, 0.03); // 0.15 m from the foot at (30, 30)
  const CostModelParams p;
  const CostModel model(map, p, {});
  // dH = 0.03 on the raised cell and its eight neighbors.
  double sum = 0.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx)
    {
      const double d = std::hypot(6.0 + dx, double(dy)) * kRes;
      sum += 0.03 * (1.0 - d / 0.3);
    }
  EXPECT_NEAR(model.foot_cost({30, 30}), 1.0 + 100.0 * sum, 1e-9);
  EXPECT_GT(model.foot_cost({30, 30}), 1.0);
}

TEST(FootCost, UnknownWithinFootRadiusIsInfiniteOutsideIgnored)
{
  HeightMap map = flat(60, 60);
  map.set_unknown({33, 30}); // dH unknown within 0.1 m of (30, 30)
  map.set_unknown({30, 42}); // dH unknown 0.275 m and beyond from (30, 18)
  const CostModel model(map, {}, {});
  EXPECT_TRUE(std::isinf(model.foot_cost({30, 30})));
  EXPECT_NEAR(model.foot_cost({30, 18}), 1.0, 1e-12);
}

TEST(FootCost, FieldMatchesOracleOnRandomMaps)
{
  std::mt19937 rng(5);
  for (int trial = 0; trial < 3; ++trial)
  {
    HeightMap map = flat(50, 40);
    std::uniform_real_distribution<double> pos(0.0, 1.2), size(0.02, 0.2), h(0.005, 0.08);
    for (int i = 0; i < 6; ++i)
    {
      const double x = pos(rng), y = pos(rng) * 0.8;
      detail::raise_box(map, x, y, x + size(rng), y + size(rng), h(rng));
    }
    std::bernoulli_distribution unknown(0.002);
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 50; ++x)
        if (unknown(rng))
          map.set_unknown({x, y});
    const CostModelParams p;
    const CostModel model(map, p, {});
    for (int y = 0; y < 40; ++y)
      for (int x = 0; x < 50; ++x)
      {
        const double expected = foot_cost_oracle(map, {x, y}, p);
        const double got = model.foot_cost({x, y});
        if (std::isinf(expected))
          ASSERT_TRUE(std::isinf(got)) << x << "," << y;
        else
          ASSERT_NEAR(got, expected, 1e-9) << x << "," << y;
        ASSERT_EQ(got, foot_cost(model.diff(), {x, y}, p));
      }
  }
}

TEST(FootCost, PolesHaveInfiniteRing)
{
  HeightMap map = flat(80, 80);
  detail::raise_box(map, 1.0, 1.0, 1.05, 1.05, 0.5);
  const CostModel model(map, {}, {});
  // The pole covers cells 40-41, its dH halo 39-42; r_F is 4.8 cells.
  for (int x = 35; x <= 46; ++x)
    EXPECT_TRUE(std::isinf(model.foot_cost({x, 40}))) << x;
  EXPECT_TRUE(std::isfinite(model.foot_cost({34, 40})));
  EXPECT_TRUE(std::isfinite(model.foot_cost({47, 40})));
}

TEST(FootCost, OutOfBoundsThrows)
{
  const HeightDiffField diff = height_diff_field(flat(10, 10));
  EXPECT_THROW(foot_cost(diff, {10, 3}, {}), Error);
  const CostModel model(flat(10, 10), {}, {});
  EXPECT_TRUE(std::isinf(model.foot_cost({-1, 3})));
}

TEST(FootCost, MonotoneAndLocal)
{
  HeightMap map = flat(80, 80);
  detail::raise_box(map, 0.9, 1.0, 1.0, 1.1, 0.02);
  const CostModel before(map, {}, {});
  HeightMap raised = map;
  raised.set({44, 38}, 0.04);
  raised.set({10, 10}, 0.3);
  const CostModel after(raised, {}, {});
  for (int y = 20; y < 60; ++y)
    for (int x = 20; x < 60; ++x)
    {
      const double a = before.foot_cost({x, y}), b = after.foot_cost({x, y});
      if (std::isfinite(a) && std::isfinite(b))
      {
        EXPECT_GE(b, a - 1e-12);
      }
    }
  // (30, 50) sees the box but lies beyond r_N of both edits and their halos.
  EXPECT_GT(before.foot_cost({30, 50}), 1.0);
  EXPECT_EQ(before.foot_cost({30, 50}), after.foot_cost({30, 50}));
}

TEST(BaseCost, FlatIsOne)
{
  const CostModel model(flat(80, 80), {}, {});
  const RobotPose pose = neutral(model, 1.0, 1.0, 5);
  EXPECT_NEAR(model.base_cost(pose), 1.0, 1e-12);
  EXPECT_NEAR(base_cost(model.map(), pose, 0.27, model.params()), 1.0, 1e-12);
}

TEST(BaseCost, TallPoleUnderBody)
{
  HeightMap map = flat(80, 80);
  map.set({40, 40}, 0.8);
  const CostModel model(map, {}, {});
  const RobotPose pose = neutral(model, 1.0, 1.0);
  // Body bottom at 0.55 m over flat feet leaves 0.25 m of pole above it.
  EXPECT_NEAR(base_cost(model.map(), pose, 0.55, model.params()), 1.25, 1e-12);
  EXPECT_NEAR(model.base_cost_at(pose, pose.base, 0.55), 1.25, 1e-12);
  // At the driving leg height the overlap is 0.8 - 0.27.
  EXPECT_NEAR(model.base_cost(pose), 1.0 + 0.53, 1e-12);
}

TEST(BaseCost, FootHeightSpread)
{
  HeightMap map = flat(80, 80);
  const CostModel probe(map, {}, {});
  const RobotPose pose = neutral(probe, 1.0, 1.0);
  map.set(pose.feet[kRearLeft], 0.2);
  map.set(pose.feet[kRearRight], 0.2);
  const CostModel model(map, {}, {});
  // Body discs see 0.2 at most, below 0.2 + 0.27.
  EXPECT_NEAR(model.base_cost(pose), 1.0 + 0.5 * 0.2, 1e-12);
}

TEST(BaseCost, CachedMatchesDirectOnRandomPoses)
{
  const BuiltinScenario s = random_scenario(4);
  const CostModel model(s.map, {}, {});
  std::mt19937 rng(9);
  std::uniform_int_distribution<int> cell(25, 175), orient(0, 63);
  int checked = 0;
  for (int i = 0; i < 400; ++i)
  {
    const RobotPose pose = model.footprint().neutral_pose({cell(rng), cell(rng)}, orient(rng));
    const double leg = i % 2 ? 0.27 : 0.45;
    EXPECT_NEAR(model.base_cost_at(pose, pose.base, leg),
      base_cost(model.map(), pose, leg, model.params()), 1e-12);
    ++checked;
  }
  EXPECT_EQ(checked, 400);
}

TEST(BaseCost, AllUnknownUnderBodyThrows)
{
  HeightMap map(4, 4, 0.025);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x)
      map.set_unknown({x, y});
  RobotPose pose;
  pose.base = {200, 200};
  for (auto& f : pose.feet)
    f = {200, 200};
  try
  {
    base_cost(map, pose, 0.27, {});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), "unknown-terrain");
  }
}

TEST(PoseCost, FlatIsOneAndHalfFromEach)
{
  const CostModel model(flat(80, 80), {}, {});
  const RobotPose pose = neutral(model, 1.0, 1.0, 17);
  EXPECT_NEAR(model.pose_cost(pose), 1.0, 1e-12);
  const auto& p = model.params();
  EXPECT_NEAR(p.k4 * 1.0 + p.k5 * 4.0, p.k6 * 1.0, 1e-15);
}

TEST(PoseCost, CombinationRule)
{
  EXPECT_NEAR(combine_pose_cost({1.0, 1.0, 1.0, 3.0}, 1.0, {}), 1.4, 1e-12);
  EXPECT_TRUE(std::isinf(combine_pose_cost({1.0, kInfinity, 1.0, 1.0}, 1.0, {})));
}

TEST(PoseCost, FootOnInfiniteCellIsInfinite)
{
  HeightMap map = flat(80, 80);
  const CostModel probe(map, {}, {});
  const RobotPose pose = neutral(probe, 1.0, 1.0);
  map.set(pose.feet[kFrontLeft] + Cell{1, 0}, 0.3);
  const CostModel model(map, {}, {});
  EXPECT_TRUE(std::isinf(model.pose_cost(pose)));
}

TEST(PoseCost, MatchesFormulaOnRoughTerrain)
{
  const BuiltinScenario s = random_scenario(2);
  const CostModel model(s.map, {}, {});
  std::mt19937 rng(1);
  std::uniform_int_distribution<int> cell(25, 175), orient(0, 63);
  int finite = 0;
  for (int i = 0; i < 300; ++i)
  {
    const RobotPose pose = model.footprint().neutral_pose({cell(rng), cell(rng)}, orient(rng));
    const double got = model.pose_cost(pose);
    double max_f = 0.0, sum_f = 0.0;
    bool inf = false;
    for (const auto& f : pose.feet)
    {
      const double c = foot_cost_oracle(model.map(), f, model.params());
      inf |= std::isinf(c);
      max_f = std::max(max_f, c);
      sum_f += c;
    }
    if (inf)
    {
      EXPECT_TRUE(std::isinf(got));
      continue;
    }
    ++finite;
    const double cb = base_cost(model.map(), pose, 0.27, model.params());
    EXPECT_NEAR(got, 0.1 * max_f + 0.1 * sum_f + 0.5 * cb, 1e-9);
  }
  EXPECT_GT(finite, 100);
}

TEST(PoseCost, InvariantUnderWholeCellTranslation)
{
  HeightMap a = flat(100, 100), b = flat(100, 100);
  detail::raise_box(a, 1.0, 1.0, 1.2, 1.1, 0.04);
  detail::raise_box(b, 1.25, 0.9, 1.45, 1.0, 0.04);
  const CostModel ma(a, {}, {}), mb(b, {}, {});
  for (int o : {0, 9, 33})
  {
    const RobotPose pa = ma.footprint().neutral_pose({44, 42}, o);
    const RobotPose pb = mb.footprint().neutral_pose({54, 38}, o);
    EXPECT_EQ(ma.pose_cost(pa), mb.pose_cost(pb));
  }
}

TEST(Supercover, EndpointsAndCorners)
{
  const auto line = supercover_line({0, 0}, {2, 2});
  ASSERT_EQ(line.front(), (Cell{0, 0}));
  ASSERT_EQ(line.back(), (Cell{2, 2}));
  // Exact corner crossings include both side cells.
  EXPECT_NE(std::find(line.begin(), line.end(), Cell{1, 0}), line.end());
  EXPECT_NE(std::find(line.begin(), line.end(), Cell{0, 1}), line.end());
  EXPECT_EQ(line.size(), 7u);
  EXPECT_EQ(supercover_line({3, 4}, {3, 4}).size(), 1u);
}

TEST(Supercover, ConnectedAndCoversDenseSamples)
{
  std::mt19937 rng(2);
  std::uniform_int_distribution<int> c(-20, 20);
  for (int i = 0; i < 200; ++i)
  {
    const Cell a{c(rng), c(rng)}, b{c(rng), c(rng)};
    const auto line = supercover_line(a, b);
    for (std::size_t k = 1; k < line.size(); ++k)
      EXPECT_LE(std::abs(line[k].x - line[k - 1].x) + std::abs(line[k].y - line[k - 1].y), 2);
    // Every dense sample off cell boundaries lands in a listed cell.
    for (int s = 0; s <= 997; ++s)
    {
      const double t = s / 997.0;
      const double x = a.x + t * (b.x - a.x), y = a.y + t * (b.y - a.y);
      if (std::abs(x - std::floor(x) - 0.5) < 1e-9 || std::abs(y - std::floor(y) - 0.5) < 1e-9)
        continue;
      const Cell p{int(std::lround(x)), int(std::lround(y))};
      ASSERT_NE(std::find(line.begin(), line.end(), p), line.end());
    }
  }
}

TEST(SegmentCost, FlatIsOne)
{
  const CostModel model(flat(80, 80), {}, {});
  EXPECT_NEAR(model.segment_avg_foot_cost({20, 20}, {50, 37}), 1.0, 1e-12);
  const RobotPose a = neutral(model, 0.9, 1.0), b = neutral(model, 1.1, 1.05);
  EXPECT_NEAR(model.segment_avg_base_cost(a, b), 1.0, 1e-12);
}

TEST(SegmentCost, HalfAndHalfAveragesTwo)
{
  // A synthetic field: cost 1 for x < 30, cost 3 from x = 30 on.
  HeightMap map = flat(80, 20);
  const CostModel model(map, {}, {});
  FootCostField field(80, 20);
  for (int y = 0; y < 20; ++y)
    for (int x = 0; x < 80; ++x)
      field.set({x, y}, x < 30 ? 1.0 : 3.0);
  double sum = 0.0;
  const auto cells = supercover_line({10, 10}, {49, 10});
  for (const auto& c : cells)
    sum += field.at(c);
  const double mean = sum / double(cells.size());
  // Dense sub-cell sampling oracle.
  double dense = 0.0;
  const int n = 100000;
  for (int s = 0; s < n; ++s)
  {
    const double x = 9.5 + (s + 0.5) / n * 40.0;
    dense += x < 29.5 ? 1.0 : 3.0;
  }
  dense /= n;
  EXPECT_NEAR(dense, 2.0, 1e-9);
  EXPECT_NEAR(mean, dense, 2.0 / double(cells.size()));
}

TEST(SegmentCost, CrossingObstacleThrows)
{
  HeightMap map = flat(80, 80);
  detail::raise_box(map, 1.0, 0.0, 1.05, 2.0, 0.3);
  const CostModel model(map, {}, {});
  try
  {
    model.segment_avg_foot_cost({20, 40}, {60, 40});
    FAIL();
  }
  catch (const Error& e)
  {
    EXPECT_EQ(e.kind(), "untraversable-segment");
  }
}

TEST(SegmentCost, BaseShiftUnderPoleCostsMore)
{
  HeightMap map = flat(100, 100);
  map.set({50, 50}, 0.6);
  const CostModel model(map, {}, {});
  const RobotPose a = model.footprint().neutral_pose({40, 50}, 0);
  RobotPose b = a;
  b.base = {56, 50};
  const double avg = model.segment_avg_base_cost(a, b);
  EXPECT_GT(avg, 1.0);
  // Dense oracle over every cell on the way.
  double sum = 0.0;
  for (int x = 40; x <= 56; ++x)
    sum += base_cost(model.map(), RobotPose{{x, 50}, 0, a.feet}, 0.27, model.params());
  EXPECT_NEAR(avg, sum / 17.0, 1e-12);
  EXPECT_NEAR(model.segment_avg_base_cost(a, a), model.base_cost(a), 1e-12);
}

} // namespace
} // namespace hybrid_nav
