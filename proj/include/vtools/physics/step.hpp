#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "vtools/common/random.hpp"
#include "vtools/physics/world.hpp"

namespace vtools::physics {

// Perturbation of contact impulses at the moment two bodies start touching:
// the impulse direction is rotated by N(0, impulse_direction_sd) radians and
// its magnitude scaled by max(0, 1 + N(0, impulse_magnitude_sd)).
struct NoiseConfig {
  double impulse_direction_sd = 0.0;
  double impulse_magnitude_sd = 0.0;

  bool enabled() const { return impulse_direction_sd > 0.0 || impulse_magnitude_sd > 0.0; }
  bool operator==(const NoiseConfig&) const = default;
};

class SimulationDiverged : public std::runtime_error {
 public:
  SimulationDiverged(std::string body_id, std::int64_t step)
      : std::runtime_error("simulation diverged: body '" + body_id + "' became non-finite at step " +
                           std::to_string(step)),
        body_id_(std::move(body_id)) {}
  const std::string& body_id() const { return body_id_; }

 private:
  std::string body_id_;
};

struct CollisionEvent {
  double time = 0.0;
  std::string body_a;
  std::string body_b;

  bool operator==(const CollisionEvent&) const = default;
};

// Advances worlds one fixed step at a time, reusing scratch memory between
// calls. Not thread-safe; use one Stepper per thread.
class Stepper {
 public:
  Stepper();
  ~Stepper();
  Stepper(Stepper&&) noexcept;
  Stepper& operator=(Stepper&&) noexcept;

  // Advances `world` by world.dt. Pairs that begin touching during the step
  // are appended to `events` when it is non-null.
  void advance(World& world, const NoiseConfig& noise, Rng& rng,
               std::vector<CollisionEvent>* events = nullptr);

 private:
  struct Workspace;
  std::unique_ptr<Workspace> ws_;
};

World step(const World& world, const NoiseConfig& noise, Rng& rng);

struct Frame {
  double time = 0.0;
  std::vector<Pose> poses;  // one per entry of Trajectory::body_ids

  bool operator==(const Frame&) const = default;
};

struct Trajectory {
  double dt = kDefaultDt;
  int frame_stride = 1;
  std::vector<std::string> body_ids;  // dynamic bodies in world order
  std::vector<Frame> frames;
  std::vector<CollisionEvent> collisions;
  World terminal_world;
};

// Settling: every active dynamic body slower than these for the window.
struct SettleCriteria {
  double linear_speed = 0.5;
  double angular_speed = 0.05;
  double window = 0.5;
};

struct SimulateOptions {
  int frame_stride = 1;
  bool record_frames = true;
  bool record_collisions = true;
  bool stop_when_settled = true;
  SettleCriteria settle;
  // Called after every step (and once for the initial world); returning false
  // ends the simulation.
  std::function<bool(const World&)> observer;
};

// Runs ceil(duration / dt) steps from `world`, stopping early when settled or
// when the observer asks to. The initial world is frame 0.
Trajectory simulate(const World& world, double duration, const NoiseConfig& noise,
                    std::uint64_t seed, const SimulateOptions& options = {});

Frame capture_frame(const World& world);

// Sum of kinetic and gravitational potential energy of the dynamic bodies.
double total_energy(const World& world);

}  // namespace vtools::physics
