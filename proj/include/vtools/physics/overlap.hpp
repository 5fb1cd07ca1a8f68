#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vtools/physics/world.hpp"

namespace vtools::physics {

namespace detail {
struct WorldPart;
}

// A named polygonal area that is not a body (goal, prohibited zone).
struct TaggedRegion {
  std::string tag;
  ConvexPolygon polygon;  // world coordinates
};

struct OverlapHit {
  enum class Kind { kBody, kRegion };
  Kind kind = Kind::kBody;
  std::string name;  // body id or region tag

  bool operator==(const OverlapHit&) const = default;
};

// Bodies (active ones, in world order) and then regions whose interior
// intersects the interior of `shape` placed at `pose`. Touching boundaries do
// not count.
std::vector<OverlapHit> overlap_test(const Shape& shape, const Pose& pose, const World& world,
                                     std::span<const TaggedRegion> regions = {});

// Strict interior overlap between two placed shapes.
bool shapes_overlap(const Shape& a, const Pose& pose_a, const Shape& b, const Pose& pose_b);

// Euclidean distance between a placed shape and a convex polygon in world
// coordinates; 0 when they touch or intersect.
double shape_polygon_distance(const Shape& shape, const Pose& pose, const ConvexPolygon& polygon);

// A convex world-frame region prepared for repeated queries.
class RegionProbe {
 public:
  explicit RegionProbe(const ConvexPolygon& polygon);

  // Distance from the body's shape to the region, 0 on contact.
  double distance(const Body& body) const;
  // Inclusive point containment.
  bool contains(const Vec2& point) const;

 private:
  std::shared_ptr<const detail::WorldPart> part_;
};

// World-frame bounding box of a placed shape.
Aabb placed_bounds(const Shape& shape, const Pose& pose);

}  // namespace vtools::physics
