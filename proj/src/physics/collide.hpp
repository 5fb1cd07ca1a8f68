#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "vtools/physics/world.hpp"

namespace vtools::physics::detail {

// A collision part transformed into world coordinates.
struct WorldPart {
  Part::Type type = Part::Type::kCircle;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  std::vector<Vec2> vertices;
  std::vector<Vec2> normals;
  Aabb box;
};

void transform_parts(const Body& body, std::vector<WorldPart>& out);

struct ManifoldPoint {
  Vec2 point = Vec2::Zero();  // midway between the two surfaces
  double separation = 0.0;    // negative when penetrating
  std::uint32_t feature = 0;
};

// Normal points from the first shape to the second.
struct Manifold {
  Vec2 normal = Vec2::Zero();
  std::array<ManifoldPoint, 2> points{};
  int count = 0;
};

// Reports contact features whose separation does not exceed `margin`
// (speculative contacts).
Manifold collide(const WorldPart& a, const WorldPart& b, double margin);

// Strict interior overlap (tangency is not overlap).
bool parts_overlap(const WorldPart& a, const WorldPart& b);

// Euclidean distance between parts, 0 when they touch or overlap.
double part_distance(const WorldPart& a, const WorldPart& b);

}  // namespace vtools::physics::detail
