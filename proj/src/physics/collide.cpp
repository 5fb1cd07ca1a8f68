#include "collide.hpp"

#include <limits>

namespace vtools::physics::detail {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Relative tolerance used to prefer the first polygon as reference face.
constexpr double kReferenceTolerance = 0.05;

std::uint32_t feature_id(int reference_edge, int incident, int type, bool flip) {
  return static_cast<std::uint32_t>(reference_edge & 0xff) |
         (static_cast<std::uint32_t>(incident & 0xff) << 8) |
         (static_cast<std::uint32_t>(type & 0xff) << 16) | (flip ? 1u << 24 : 0u);
}

double max_separation(const WorldPart& p1, const WorldPart& p2, int& edge) {
  double best = -kInf;
  edge = 0;
  for (std::size_t i = 0; i < p1.vertices.size(); ++i) {
    const Vec2& n = p1.normals[i];
    const Vec2& v1 = p1.vertices[i];
    double si = kInf;
    for (const auto& v2 : p2.vertices) si = std::min(si, n.dot(v2 - v1));
    if (si > best) {
      best = si;
      edge = static_cast<int>(i);
    }
  }
  return best;
}

struct ClipVertex {
  Vec2 v;
  int index;
};

int clip_segment(std::array<ClipVertex, 2>& out, const std::array<ClipVertex, 2>& in,
                 const Vec2& normal, double offset) {
  int count = 0;
  const double d0 = normal.dot(in[0].v) - offset;
  const double d1 = normal.dot(in[1].v) - offset;
  if (d0 <= 0) out[count++] = in[0];
  if (d1 <= 0) out[count++] = in[1];
  if (d0 * d1 < 0) {
    const double t = d0 / (d0 - d1);
    out[count++] = {in[0].v + t * (in[1].v - in[0].v), d0 > 0 ? in[0].index + 16 : in[1].index + 16};
  }
  return count;
}

Manifold collide_polygons(const WorldPart& a, const WorldPart& b, double margin) {
  Manifold m;
  int edge_a = 0;
  const double sep_a = max_separation(a, b, edge_a);
  if (sep_a > margin) return m;
  int edge_b = 0;
  const double sep_b = max_separation(b, a, edge_b);
  if (sep_b > margin) return m;

  const WorldPart* ref = &a;
  const WorldPart* inc = &b;
  int edge = edge_a;
  bool flip = false;
  if (sep_b > sep_a + kReferenceTolerance) {
    ref = &b;
    inc = &a;
    edge = edge_b;
    flip = true;
  }

  const Vec2& ref_normal = ref->normals[edge];
  const std::size_t ni = inc->vertices.size();
  int inc_edge = 0;
  double min_dot = kInf;
  for (std::size_t i = 0; i < ni; ++i) {
    const double d = ref_normal.dot(inc->normals[i]);
    if (d < min_dot) {
      min_dot = d;
      inc_edge = static_cast<int>(i);
    }
  }
  const int i1 = inc_edge;
  const int i2 = static_cast<int>((inc_edge + 1) % ni);
  const std::array<ClipVertex, 2> incident{{{inc->vertices[i1], i1}, {inc->vertices[i2], i2}}};

  const std::size_t nr = ref->vertices.size();
  const Vec2& v11 = ref->vertices[edge];
  const Vec2& v12 = ref->vertices[(edge + 1) % nr];
  const Vec2 tangent = (v12 - v11).normalized();
  const Vec2 normal = cross(tangent, 1.0);
  const double front = normal.dot(v11);
  const double side1 = -tangent.dot(v11);
  const double side2 = tangent.dot(v12);

  std::array<ClipVertex, 2> clip1{};
  std::array<ClipVertex, 2> clip2{};
  if (clip_segment(clip1, incident, -tangent, side1) < 2) return m;
  if (clip_segment(clip2, clip1, tangent, side2) < 2) return m;

  m.normal = flip ? Vec2(-normal) : normal;
  for (const auto& cv : clip2) {
    const double separation = normal.dot(cv.v) - front;
    if (separation <= margin) {
      auto& mp = m.points[m.count++];
      mp.separation = separation;
      mp.point = cv.v - 0.5 * separation * normal;
      mp.feature = feature_id(edge, cv.index, 0, flip);
    }
  }
  return m;
}

Manifold collide_circles(const WorldPart& a, const WorldPart& b, double margin) {
  Manifold m;
  const Vec2 d = b.center - a.center;
  const double dist = d.norm();
  const double separation = dist - a.radius - b.radius;
  if (separation > margin) return m;
  m.normal = dist > 0 ? Vec2(d / dist) : Vec2(0.0, 1.0);
  m.count = 1;
  m.points[0].separation = separation;
  const Vec2 ca = a.center + a.radius * m.normal;
  const Vec2 cb = b.center - b.radius * m.normal;
  m.points[0].point = 0.5 * (ca + cb);
  m.points[0].feature = feature_id(0, 0, 1, false);
  return m;
}

// Normal points from the polygon to the circle.
Manifold collide_polygon_circle(const WorldPart& poly, const WorldPart& circle, double margin) {
  Manifold m;
  const Vec2& c = circle.center;
  const double r = circle.radius;
  const std::size_t n = poly.vertices.size();

  double separation = -kInf;
  int face = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double s = poly.normals[i].dot(c - poly.vertices[i]);
    if (s > r + margin) return m;
    if (s > separation) {
      separation = s;
      face = static_cast<int>(i);
    }
  }

  const Vec2& v1 = poly.vertices[face];
  const Vec2& v2 = poly.vertices[(face + 1) % n];
  Vec2 normal;
  Vec2 surface;
  int feature = face;
  if (separation <= 0) {
    normal = poly.normals[face];
    surface = c - separation * normal;
  } else if ((c - v1).dot(v2 - v1) <= 0) {
    const Vec2 d = c - v1;
    const double dist = d.norm();
    if (dist - r > margin) return m;
    normal = d / dist;
    surface = v1;
    feature = 64 + face;
  } else if ((c - v2).dot(v1 - v2) <= 0) {
    const Vec2 d = c - v2;
    const double dist = d.norm();
    if (dist - r > margin) return m;
    normal = d / dist;
    surface = v2;
    feature = 64 + static_cast<int>((face + 1) % n);
  } else {
    normal = poly.normals[face];
    surface = c - separation * normal;
  }

  m.normal = normal;
  m.count = 1;
  m.points[0].separation = (c - surface).dot(normal) - r;
  m.points[0].point = 0.5 * (surface + (c - r * normal));
  m.points[0].feature = feature_id(feature, 0, 2, false);
  return m;
}

double polygon_sat(const WorldPart& a, const WorldPart& b) {
  int edge = 0;
  return std::max(max_separation(a, b, edge), max_separation(b, a, edge));
}

}  // namespace

void transform_parts(const Body& body, std::vector<WorldPart>& out) {
  const auto& parts = body.geometry->parts;
  out.resize(parts.size());
  const Mat2 r = rotation(body.angle);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Part& part = parts[k];
    WorldPart& w = out[k];
    w.type = part.type;
    w.radius = part.radius;
    w.center = body.position + r * part.center;
    if (part.type == Part::Type::kCircle) {
      w.vertices.clear();
      w.normals.clear();
      w.box = {w.center.array() - part.radius, w.center.array() + part.radius};
      continue;
    }
    const std::size_t n = part.vertices.size();
    w.vertices.resize(n);
    w.normals.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      w.vertices[i] = body.position + r * part.vertices[i];
      w.normals[i] = r * part.normals[i];
    }
    w.box = bounding_box(std::span<const Vec2>(w.vertices));
  }
}

Manifold collide(const WorldPart& a, const WorldPart& b, double margin) {
  using T = Part::Type;
  if (a.type == T::kPolygon && b.type == T::kPolygon) return collide_polygons(a, b, margin);
  if (a.type == T::kCircle && b.type == T::kCircle) return collide_circles(a, b, margin);
  if (a.type == T::kPolygon) return collide_polygon_circle(a, b, margin);
  Manifold m = collide_polygon_circle(b, a, margin);
  m.normal = -m.normal;
  return m;
}

bool parts_overlap(const WorldPart& a, const WorldPart& b) {
  using T = Part::Type;
  if (a.type == T::kCircle && b.type == T::kCircle) {
    return (b.center - a.center).norm() < a.radius + b.radius;
  }
  if (a.type == T::kPolygon && b.type == T::kPolygon) return polygon_sat(a, b) < 0;
  const WorldPart& poly = a.type == T::kPolygon ? a : b;
  const WorldPart& circle = a.type == T::kPolygon ? b : a;
  return point_polygon_distance(circle.center, std::span<const Vec2>(poly.vertices)) < circle.radius;
}

double part_distance(const WorldPart& a, const WorldPart& b) {
  using T = Part::Type;
  if (a.type == T::kCircle && b.type == T::kCircle) {
    return std::max(0.0, (b.center - a.center).norm() - a.radius - b.radius);
  }
  if (a.type == T::kPolygon && b.type == T::kPolygon) {
    if (polygon_sat(a, b) <= 0) return 0.0;
    double best = kInf;
    const auto edges = [&](const WorldPart& from, const WorldPart& to) {
      const std::size_t n = to.vertices.size();
      for (const auto& p : from.vertices) {
        for (std::size_t i = 0; i < n; ++i) {
          best = std::min(best, point_segment_distance(p, to.vertices[i], to.vertices[(i + 1) % n]));
        }
      }
    };
    edges(a, b);
    edges(b, a);
    return best;
  }
  const WorldPart& poly = a.type == T::kPolygon ? a : b;
  const WorldPart& circle = a.type == T::kPolygon ? b : a;
  return std::max(0.0, point_polygon_distance(circle.center, std::span<const Vec2>(poly.vertices)) -
                           circle.radius);
}

}  // namespace vtools::physics::detail
