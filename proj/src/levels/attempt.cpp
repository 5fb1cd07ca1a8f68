#include "vtools/levels/attempt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "vtools/physics/overlap.hpp"

namespace vtools::levels {
namespace {

using physics::Body;
using physics::World;

struct GoalTracker {
  explicit GoalTracker(const LevelSpec& level, const World& world)
      : region(level.goal_region),
        dwell_steps(static_cast<std::int64_t>(std::llround(level.dwell / world.dt))) {
    for (const auto& id : level.goal_object_ids) indices.push_back(world.index_of(id));
  }

  // Returns false once the outcome can no longer change.
  bool observe(const World& world) {
    bool inside = false;
    bool any_active = false;
    for (int idx : indices) {
      const Body& b = world.bodies[idx];
      any_active = any_active || b.active;
      min_distance = std::min(min_distance, region.distance(b));
      inside = inside || region.contains(b.position);
    }
    last_inside = inside;
    contained_steps = inside ? contained_steps + 1 : 0;
    // The first observation is the initial world; dwell counts elapsed steps.
    if (inside && contained_steps - 1 >= dwell_steps) solved = true;
    return !solved && any_active;
  }

  physics::RegionProbe region;
  std::vector<int> indices;
  std::int64_t dwell_steps;
  std::int64_t contained_steps = 0;
  double min_distance = std::numeric_limits<double>::infinity();
  bool last_inside = false;
  bool solved = false;
};

}  // namespace

std::string_view to_string(Rejection r) {
  switch (r) {
    case Rejection::kProhibitedZone:
      return "prohibited-zone";
    case Rejection::kBodyOverlap:
      return "body-overlap";
    case Rejection::kOutOfBounds:
      return "out-of-bounds";
  }
  return "unknown";
}

physics::Body make_tool_body(const LevelSpec& level, const Action& action) {
  const ToolShape& tool = level.tools.at(static_cast<std::size_t>(action.tool));
  return physics::make_body(std::string(kToolBodyId), tool.shape, physics::BodyKind::kDynamic,
                            physics::BodyRole::kTool, tool.material, {action.position, 0.0});
}

std::optional<Rejection> validate_action(const LevelSpec& level, const Action& action) {
  if (action.tool < 0 || action.tool > 2 || !action.position.allFinite()) {
    return Rejection::kOutOfBounds;
  }
  const physics::Shape& shape = level.tools[static_cast<std::size_t>(action.tool)].shape;
  const physics::Pose pose{action.position, 0.0};
  if (!level.world.bounds.contains(physics::placed_bounds(shape, pose))) {
    return Rejection::kOutOfBounds;
  }
  for (const auto& region : level.prohibited) {
    const physics::TaggedRegion tagged{"prohibited", region};
    if (!physics::overlap_test(shape, pose, World{}, {&tagged, 1}).empty()) {
      return Rejection::kProhibitedZone;
    }
  }
  if (!physics::overlap_test(shape, pose, level.world).empty()) return Rejection::kBodyOverlap;
  return std::nullopt;
}

World build_world(const LevelSpec& level, const std::optional<Action>& action) {
  World world = level.world;
  if (action) world.add(make_tool_body(level, *action));
  return world;
}

double goal_distance(const LevelSpec& level, const World& world) {
  const physics::RegionProbe region(level.goal_region);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& id : level.goal_object_ids) {
    const Body* b = world.find(id);
    if (b != nullptr) best = std::min(best, region.distance(*b));
  }
  return best;
}

double reward_for(double min_goal_distance, double baseline) {
  return 1.0 - std::min(min_goal_distance / baseline, 1.0);
}

double compute_baseline_distance(const LevelSpec& level) {
  World world = level.world;
  GoalTracker tracker(level, world);
  physics::SimulateOptions options;
  options.record_frames = false;
  options.record_collisions = false;
  options.observer = [&](const World& w) { return tracker.observe(w); };
  physics::simulate(world, level.time_horizon, {}, 0, options);
  return tracker.min_distance;
}

double baseline_distance(const LevelSpec& level) {
  if (level.baseline > 0.0) return level.baseline;
  return compute_baseline_distance(level);
}

AttemptOutcome attempt(const LevelSpec& level, const std::optional<Action>& action,
                       const physics::NoiseConfig& noise, std::uint64_t seed,
                       const AttemptOptions& options) {
  if (action) {
    if (const auto rejection = validate_action(level, *action)) throw InvalidAction(*rejection);
  }
  const World world = build_world(level, action);
  GoalTracker tracker(level, world);
  physics::SimulateOptions sim;
  sim.frame_stride = options.frame_stride;
  sim.record_frames = options.record_trajectory;
  sim.record_collisions = options.record_trajectory;
  sim.observer = [&](const World& w) { return tracker.observe(w); };

  AttemptOutcome out;
  out.trajectory = physics::simulate(world, level.time_horizon, noise, seed, sim);
  // A run that came to rest with a goal object inside stays solved.
  const auto horizon_steps =
      static_cast<std::int64_t>(std::ceil(level.time_horizon / world.dt - 1e-9));
  if (tracker.last_inside && out.trajectory.terminal_world.step_count < horizon_steps) {
    tracker.solved = true;
  }
  out.solved = tracker.solved;
  out.min_goal_distance = tracker.solved ? 0.0 : tracker.min_distance;
  const double baseline = baseline_distance(level);
  out.normalized_distance = out.min_goal_distance / baseline;
  out.reward = reward_for(out.min_goal_distance, baseline);
  return out;
}

}  // namespace vtools::levels
