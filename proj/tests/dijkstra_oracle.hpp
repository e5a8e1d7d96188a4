#pragma once

#include "hybrid_nav/planner.hpp"

#include <absl/container/flat_hash_map.h>

#include <queue>
#include <vector>

namespace hybrid_nav::testing {

/// Uniform-cost search over the same neighbor generator as the planner,
/// sharing none of its bookkeeping. Returns the optimal goal cost, or
/// infinity when the goal is unreachable.
inline double dijkstra_cost(const NeighborGenerator& gen, const RobotPose& start,
  const RobotPose& goal, std::size_t* expanded = nullptr)
{
  absl::flat_hash_map<RobotPose, double, RobotPoseHash> best;
  using Entry = std::pair<double, RobotPose>;
  auto greater = [](const Entry& a, const Entry& b) { return a.first > b.first; };
  std::priority_queue<Entry, std::vector<Entry>, decltype(greater)> open(greater);
  best[start] = 0.0;
  open.push({0.0, start});
  std::vector<Manoeuvre> succ;
  PoseCostCache costs(gen.model());
  std::size_t count = 0;
  while (!open.empty())
  {
    const auto [g, pose] = open.top();
    open.pop();
    if (g > best.find(pose)->second)
      continue;
    if (pose == goal)
    {
      if (expanded)
        *expanded = count;
      return g;
    }
    ++count;
    gen.successors(pose, succ, &costs);
    for (const Manoeuvre& m : succ)
    {
      const double c = g + m.cost;
      const auto [it, inserted] = best.try_emplace(m.to, c);
      if (inserted || c < it->second)
      {
        it->second = c;
        open.push({c, m.to});
      }
    }
  }
  if (expanded)
    *expanded = count;
  return kInfinity;
}

} // namespace hybrid_nav::testing
