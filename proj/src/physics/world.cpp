#include "vtools/physics/world.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace vtools::physics {

Pose Body::pose() const {
  return {position - rotation(angle) * geometry->local_center, angle};
}

Aabb Body::world_bounds() const {
  const Mat2 r = rotation(angle);
  Aabb box{position, position};
  bool first = true;
  for (const auto& part : geometry->parts) {
    Aabb pb;
    if (part.type == Part::Type::kCircle) {
      const Vec2 c = position + r * part.center;
      pb = {c.array() - part.radius, c.array() + part.radius};
    } else {
      pb = {position + r * part.vertices[0], position + r * part.vertices[0]};
      for (const auto& v : part.vertices) {
        const Vec2 w = position + r * v;
        pb.min = pb.min.cwiseMin(w);
        pb.max = pb.max.cwiseMax(w);
      }
    }
    if (first) {
      box = pb;
      first = false;
    } else {
      box.min = box.min.cwiseMin(pb.min);
      box.max = box.max.cwiseMax(pb.max);
    }
  }
  return box;
}

Body make_body(std::string id, Shape shape, BodyKind kind, BodyRole role, Material material,
               const Pose& pose) {
  validate(shape);
  if (!(material.friction >= 0) || !(material.elasticity >= 0 && material.elasticity <= 1)) {
    throw std::invalid_argument("body '" + id + "': friction must be >= 0, elasticity in [0,1]");
  }
  if (kind == BodyKind::kDynamic && !(material.density > 0)) {
    throw std::invalid_argument("body '" + id + "': dynamic bodies need density > 0");
  }
  if (!pose.position.allFinite() || !std::isfinite(pose.angle)) {
    throw std::invalid_argument("body '" + id + "': non-finite pose");
  }

  auto geometry = std::make_shared<BodyGeometry>();
  const double density = material.density > 0 ? material.density : 1.0;
  geometry->mass = compute_mass(shape, density);
  geometry->local_center = geometry->mass.center;
  geometry->parts = make_parts(shape);
  for (auto& part : geometry->parts) {
    part.center -= geometry->local_center;
    for (auto& v : part.vertices) v -= geometry->local_center;
    const double reach = part.type == Part::Type::kCircle
                             ? part.center.norm() + part.radius
                             : [&] {
                                 double r = 0.0;
                                 for (const auto& v : part.vertices) r = std::max(r, v.norm());
                                 return r;
                               }();
    geometry->bounding_radius = std::max(geometry->bounding_radius, reach);
  }
  if (kind == BodyKind::kDynamic) {
    geometry->inv_mass = 1.0 / geometry->mass.mass;
    geometry->inv_inertia = 1.0 / geometry->mass.inertia;
  }
  geometry->shape = std::move(shape);

  Body body;
  body.id = std::move(id);
  body.kind = kind;
  body.role = role;
  body.material = material;
  body.angle = pose.angle;
  body.position = pose.position + rotation(pose.angle) * geometry->local_center;
  body.geometry = std::move(geometry);
  return body;
}

const Body* World::find(std::string_view id) const {
  for (const auto& b : bodies) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

Body* World::find(std::string_view id) {
  for (auto& b : bodies) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

int World::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < bodies.size(); ++i) {
    if (bodies[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

void World::add(Body body) {
  if (find(body.id) != nullptr) {
    throw std::invalid_argument("duplicate body id '" + body.id + "'");
  }
  bodies.push_back(std::move(body));
}

void check_invariants(const World& world) {
  if (!(world.dt > 0) || !std::isfinite(world.dt)) throw std::invalid_argument("dt must be > 0");
  if (!world.gravity.allFinite()) throw std::invalid_argument("gravity must be finite");
  std::set<std::string_view> ids;
  for (const auto& b : world.bodies) {
    if (!ids.insert(b.id).second) throw std::invalid_argument("duplicate body id '" + b.id + "'");
    if (!b.geometry) throw std::invalid_argument("body '" + b.id + "' has no geometry");
    if (!b.position.allFinite() || !b.velocity.allFinite() || !std::isfinite(b.angle) ||
        !std::isfinite(b.angular_velocity)) {
      throw std::invalid_argument("body '" + b.id + "' has non-finite state");
    }
    if (!b.is_dynamic() && (!b.velocity.isZero(0.0) || b.angular_velocity != 0.0)) {
      throw std::invalid_argument("static body '" + b.id + "' has non-zero velocity");
    }
  }
}

}  // namespace vtools::physics
