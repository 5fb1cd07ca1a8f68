#pragma once

#include <stdexcept>
#include <variant>
#include <vector>

#include "vtools/physics/geometry.hpp"

namespace vtools::physics {

struct Circle {
  double radius = 0.0;
};

// Vertices in counter-clockwise order, local coordinates.
struct ConvexPolygon {
  std::vector<Vec2> vertices;
};

struct CompoundPart {
  ConvexPolygon polygon;
  Vec2 offset = Vec2::Zero();
};

struct Compound {
  std::vector<CompoundPart> parts;
};

using Shape = std::variant<Circle, ConvexPolygon, Compound>;

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Throws ShapeError when radius <= 0, a polygon is not strictly convex and
// counter-clockwise, or a compound is empty.
void validate(const Shape& shape);

// Collision primitive in body-local coordinates.
struct Part {
  enum class Type { kCircle, kPolygon };
  Type type = Type::kCircle;
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  std::vector<Vec2> vertices;
  std::vector<Vec2> normals;
};

std::vector<Part> make_parts(const Shape& shape);

struct MassData {
  double area = 0.0;
  double mass = 0.0;
  // About the center of mass.
  double inertia = 0.0;
  Vec2 center = Vec2::Zero();
};

// Parts of a compound are assumed not to overlap.
MassData compute_mass(const Shape& shape, double density);

// Local-frame bounding box of the shape.
Aabb local_bounds(const Shape& shape);

// Shifts every local coordinate by -origin, so `origin` becomes the new local
// origin.
Shape recenter(const Shape& shape, const Vec2& origin);

}  // namespace vtools::physics
