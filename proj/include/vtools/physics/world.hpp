#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vtools/physics/shape.hpp"

namespace vtools::physics {

enum class BodyKind { kStatic, kDynamic };
enum class BodyRole { kPlain, kGoalObject, kTool };

struct Material {
  double density = 1.0;
  double friction = 0.5;
  double elasticity = 0.2;
};

struct Pose {
  Vec2 position = Vec2::Zero();
  double angle = 0.0;

  bool operator==(const Pose& o) const { return position == o.position && angle == o.angle; }
};

// Immutable per-body data shared between copies of a World.
struct BodyGeometry {
  Shape shape;
  std::vector<Part> parts;  // relative to the center of mass
  Vec2 local_center = Vec2::Zero();
  MassData mass;
  double inv_mass = 0.0;
  double inv_inertia = 0.0;
  double bounding_radius = 0.0;  // about the center of mass
};

struct Body {
  std::string id;
  BodyKind kind = BodyKind::kStatic;
  BodyRole role = BodyRole::kPlain;
  Material material;
  std::shared_ptr<const BodyGeometry> geometry;

  // State of the center of mass.
  Vec2 position = Vec2::Zero();
  double angle = 0.0;
  Vec2 velocity = Vec2::Zero();
  double angular_velocity = 0.0;
  // Cleared once a dynamic body leaves the world through the sides or bottom;
  // it is then frozen and ignored by collision.
  bool active = true;

  bool is_dynamic() const { return kind == BodyKind::kDynamic; }
  const Shape& shape() const { return geometry->shape; }
  // Pose of the shape's local origin (the frame the shape was authored in).
  Pose pose() const;
  Aabb world_bounds() const;
};

// Builds a body at rest whose shape-local origin sits at `pose`. Throws
// ShapeError on an invalid shape and std::invalid_argument on a bad material.
Body make_body(std::string id, Shape shape, BodyKind kind, BodyRole role, Material material,
               const Pose& pose);

struct CachedImpulse {
  std::uint64_t pair = 0;
  std::uint64_t feature = 0;
  double normal = 0.0;
  double tangent = 0.0;
};

// Solver memory carried from one step to the next: warm-start impulses and the
// body pairs that exchanged impulse. Both sorted.
struct ContactCache {
  std::vector<CachedImpulse> impulses;
  std::vector<std::uint64_t> touching;
};

constexpr double kDefaultDt = 0.01;

struct World {
  std::vector<Body> bodies;
  Vec2 gravity{0.0, -200.0};
  Aabb bounds{Vec2(0.0, 0.0), Vec2(600.0, 600.0)};
  double dt = kDefaultDt;
  std::int64_t step_count = 0;
  ContactCache contacts;

  double time() const { return static_cast<double>(step_count) * dt; }
  const Body* find(std::string_view id) const;
  Body* find(std::string_view id);
  int index_of(std::string_view id) const;
  // Throws std::invalid_argument on a duplicate id.
  void add(Body body);
};

// Throws std::invalid_argument describing the first violated world invariant.
void check_invariants(const World& world);

}  // namespace vtools::physics
