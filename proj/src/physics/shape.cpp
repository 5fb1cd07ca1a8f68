#include "vtools/physics/shape.hpp"

#include <numbers>
#include <string>

namespace vtools::physics {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void validate_polygon(const ConvexPolygon& p, const char* what) {
  if (p.vertices.size() < 3) {
    throw ShapeError(std::string(what) + ": polygon needs at least 3 vertices");
  }
  for (const auto& v : p.vertices) {
    if (!v.allFinite()) throw ShapeError(std::string(what) + ": non-finite vertex");
  }
  if (!is_convex_ccw(std::span<const Vec2>(p.vertices))) {
    throw ShapeError(std::string(what) + ": polygon must be convex, counter-clockwise, area > 0");
  }
}

Part polygon_part(const std::vector<Vec2>& vertices, const Vec2& offset) {
  Part part;
  part.type = Part::Type::kPolygon;
  part.vertices.reserve(vertices.size());
  for (const auto& v : vertices) part.vertices.push_back(v + offset);
  const std::size_t n = part.vertices.size();
  part.normals.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 edge = part.vertices[(i + 1) % n] - part.vertices[i];
    part.normals.push_back(cross(edge, 1.0).normalized());
  }
  Vec2 c = Vec2::Zero();
  for (const auto& v : part.vertices) c += v;
  part.center = c / static_cast<double>(n);
  for (const auto& v : part.vertices) part.radius = std::max(part.radius, (v - part.center).norm());
  return part;
}

}  // namespace

void validate(const Shape& shape) {
  std::visit(Overloaded{
                 [](const Circle& c) {
                   if (!(c.radius > 0) || !std::isfinite(c.radius)) {
                     throw ShapeError("circle: radius must be > 0");
                   }
                 },
                 [](const ConvexPolygon& p) { validate_polygon(p, "polygon"); },
                 [](const Compound& c) {
                   if (c.parts.empty()) throw ShapeError("compound: no parts");
                   for (const auto& part : c.parts) {
                     if (!part.offset.allFinite()) throw ShapeError("compound: non-finite offset");
                     validate_polygon(part.polygon, "compound part");
                   }
                 },
             },
             shape);
}

std::vector<Part> make_parts(const Shape& shape) {
  std::vector<Part> parts;
  std::visit(Overloaded{
                 [&](const Circle& c) {
                   Part part;
                   part.type = Part::Type::kCircle;
                   part.radius = c.radius;
                   parts.push_back(std::move(part));
                 },
                 [&](const ConvexPolygon& p) {
                   parts.push_back(polygon_part(p.vertices, Vec2::Zero()));
                 },
                 [&](const Compound& c) {
                   for (const auto& cp : c.parts) {
                     parts.push_back(polygon_part(cp.polygon.vertices, cp.offset));
                   }
                 },
             },
             shape);
  return parts;
}

MassData compute_mass(const Shape& shape, double density) {
  MassData md;
  std::visit(Overloaded{
                 [&](const Circle& c) {
                   md.area = std::numbers::pi * c.radius * c.radius;
                   md.mass = density * md.area;
                   md.inertia = 0.5 * md.mass * c.radius * c.radius;
                 },
                 [&](const auto&) {
                   // Accumulate about the local origin, then shift to the centroid.
                   double area = 0.0;
                   double second_moment = 0.0;
                   Vec2 first_moment = Vec2::Zero();
                   for (const auto& part : make_parts(shape)) {
                     const std::span<const Vec2> v(part.vertices);
                     const double a = polygon_area(v);
                     area += a;
                     first_moment += a * polygon_centroid(v);
                     second_moment += polygon_second_moment(v, Vec2::Zero().eval());
                   }
                   md.area = area;
                   md.center = first_moment / area;
                   md.mass = density * area;
                   md.inertia = density * second_moment - md.mass * md.center.squaredNorm();
                 },
             },
             shape);
  return md;
}

Aabb local_bounds(const Shape& shape) {
  if (const auto* c = std::get_if<Circle>(&shape)) {
    return {Vec2(-c->radius, -c->radius), Vec2(c->radius, c->radius)};
  }
  std::vector<Vec2> all;
  for (const auto& part : make_parts(shape)) {
    all.insert(all.end(), part.vertices.begin(), part.vertices.end());
  }
  return bounding_box(std::span<const Vec2>(all));
}

Shape recenter(const Shape& shape, const Vec2& origin) {
  return std::visit(Overloaded{
                        [&](const Circle& c) -> Shape {
                          if (!origin.isZero()) {
                            // A circle is always centered on its local origin.
                            throw ShapeError("circle cannot be recentered off its center");
                          }
                          return c;
                        },
                        [&](const ConvexPolygon& p) -> Shape {
                          ConvexPolygon out = p;
                          for (auto& v : out.vertices) v -= origin;
                          return out;
                        },
                        [&](const Compound& c) -> Shape {
                          Compound out = c;
                          for (auto& part : out.parts) part.offset -= origin;
                          return out;
                        },
                    },
                    shape);
}

}  // namespace vtools::physics
