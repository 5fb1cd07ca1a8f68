#include "vtools/physics/overlap.hpp"

#include <algorithm>
#include <limits>

#include "collide.hpp"

namespace vtools::physics {
namespace {

std::vector<detail::WorldPart> place(const Shape& shape, const Pose& pose) {
  Body probe = make_body("", shape, BodyKind::kStatic, BodyRole::kPlain, Material{}, pose);
  std::vector<detail::WorldPart> parts;
  detail::transform_parts(probe, parts);
  return parts;
}

detail::WorldPart region_part(const ConvexPolygon& polygon) {
  detail::WorldPart part;
  part.type = Part::Type::kPolygon;
  part.vertices = polygon.vertices;
  const std::size_t n = part.vertices.size();
  for (std::size_t i = 0; i < n; ++i) {
    part.normals.push_back(cross(Vec2(part.vertices[(i + 1) % n] - part.vertices[i]), 1.0).normalized());
  }
  part.box = bounding_box(std::span<const Vec2>(part.vertices));
  return part;
}

bool any_overlap(const std::vector<detail::WorldPart>& a, const std::vector<detail::WorldPart>& b) {
  for (const auto& pa : a) {
    for (const auto& pb : b) {
      if (pa.box.overlaps(pb.box) && detail::parts_overlap(pa, pb)) return true;
    }
  }
  return false;
}

}  // namespace

std::vector<OverlapHit> overlap_test(const Shape& shape, const Pose& pose, const World& world,
                                     std::span<const TaggedRegion> regions) {
  const auto parts = place(shape, pose);
  std::vector<OverlapHit> hits;
  std::vector<detail::WorldPart> other;
  for (const auto& body : world.bodies) {
    if (!body.active) continue;
    detail::transform_parts(body, other);
    if (any_overlap(parts, other)) hits.push_back({OverlapHit::Kind::kBody, body.id});
  }
  for (const auto& region : regions) {
    if (any_overlap(parts, {region_part(region.polygon)})) {
      hits.push_back({OverlapHit::Kind::kRegion, region.tag});
    }
  }
  return hits;
}

bool shapes_overlap(const Shape& a, const Pose& pose_a, const Shape& b, const Pose& pose_b) {
  return any_overlap(place(a, pose_a), place(b, pose_b));
}

double shape_polygon_distance(const Shape& shape, const Pose& pose, const ConvexPolygon& polygon) {
  const auto region = region_part(polygon);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& part : place(shape, pose)) best = std::min(best, detail::part_distance(part, region));
  return best;
}

RegionProbe::RegionProbe(const ConvexPolygon& polygon)
    : part_(std::make_shared<const detail::WorldPart>(region_part(polygon))) {}

double RegionProbe::distance(const Body& body) const {
  thread_local std::vector<detail::WorldPart> parts;
  detail::transform_parts(body, parts);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& part : parts) best = std::min(best, detail::part_distance(part, *part_));
  return best;
}

bool RegionProbe::contains(const Vec2& point) const {
  return point_in_convex_polygon(point, std::span<const Vec2>(part_->vertices));
}

Aabb placed_bounds(const Shape& shape, const Pose& pose) {
  return make_body("", shape, BodyKind::kStatic, BodyRole::kPlain, Material{}, pose).world_bounds();
}

}  // namespace vtools::physics
