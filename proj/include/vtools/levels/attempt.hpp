#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "vtools/levels/level.hpp"
#include "vtools/physics/step.hpp"

namespace vtools::levels {

// Place tool `tool` (0..2) with its centroid at `position`, unrotated.
struct Action {
  int tool = 0;
  Vec2 position = Vec2::Zero();

  bool operator==(const Action& o) const { return tool == o.tool && position == o.position; }
};

enum class Rejection { kProhibitedZone, kBodyOverlap, kOutOfBounds };

std::string_view to_string(Rejection r);

class InvalidAction : public std::runtime_error {
 public:
  explicit InvalidAction(Rejection reason)
      : std::runtime_error("invalid action: " + std::string(to_string(reason))), reason_(reason) {}
  Rejection reason() const { return reason_; }

 private:
  Rejection reason_;
};

// nullopt when the tool lies fully inside the bounds and overlaps neither a
// prohibited region nor any body. Checked in that order.
std::optional<Rejection> validate_action(const LevelSpec& level, const Action& action);

struct AttemptOutcome {
  physics::Trajectory trajectory;
  bool solved = false;
  double min_goal_distance = 0.0;
  double normalized_distance = 0.0;
  double reward = 0.0;
};

struct AttemptOptions {
  bool record_trajectory = true;
  int frame_stride = 3;
};

// Inserts the tool (if any) as a dynamic body and runs the level for up to
// its time horizon. Throws InvalidAction for an action validate_action
// rejects, and propagates physics::SimulationDiverged.
AttemptOutcome attempt(const LevelSpec& level, const std::optional<Action>& action,
                       const physics::NoiseConfig& noise, std::uint64_t seed,
                       const AttemptOptions& options = {});

// Cached minimum goal distance of the noiseless no-tool rollout.
double baseline_distance(const LevelSpec& level);

// Re-runs the no-tool rollout.
double compute_baseline_distance(const LevelSpec& level);

physics::World build_world(const LevelSpec& level, const std::optional<Action>& action);

physics::Body make_tool_body(const LevelSpec& level, const Action& action);

// Distance from the nearest goal object to the goal region (0 on contact).
double goal_distance(const LevelSpec& level, const physics::World& world);

// 1 - min(distance / baseline, 1).
double reward_for(double min_goal_distance, double baseline);

}  // namespace vtools::levels
