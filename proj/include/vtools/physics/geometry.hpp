#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace vtools {

template <typename Scalar>
using Vector2 = Eigen::Matrix<Scalar, 2, 1>;

template <typename Scalar>
using Matrix2 = Eigen::Matrix<Scalar, 2, 2>;

using Vec2 = Vector2<double>;
using Mat2 = Matrix2<double>;

// 2D scalar cross product a.x * b.y - a.y * b.x.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cross(const Eigen::MatrixBase<DerivedA>& a,
                                const Eigen::MatrixBase<DerivedB>& b) {
  return a.x() * b.y() - a.y() * b.x();
}

// w x v for an angular rate w.
template <typename Derived>
Vector2<typename Derived::Scalar> cross(typename Derived::Scalar w,
                                        const Eigen::MatrixBase<Derived>& v) {
  return Vector2<typename Derived::Scalar>(-w * v.y(), w * v.x());
}

// v x s (Box2D convention): rotates v clockwise and scales by s.
template <typename Derived>
Vector2<typename Derived::Scalar> cross(const Eigen::MatrixBase<Derived>& v,
                                        typename Derived::Scalar s) {
  return Vector2<typename Derived::Scalar>(s * v.y(), -s * v.x());
}

template <typename Scalar>
Matrix2<Scalar> rotation(Scalar angle) {
  using std::cos;
  using std::sin;
  const Scalar c = cos(angle);
  const Scalar s = sin(angle);
  Matrix2<Scalar> r;
  r << c, -s, s, c;
  return r;
}

template <typename Scalar>
struct AlignedBox {
  Vector2<Scalar> min;
  Vector2<Scalar> max;

  bool overlaps(const AlignedBox& o) const {
    return min.x() <= o.max.x() && o.min.x() <= max.x() && min.y() <= o.max.y() &&
           o.min.y() <= max.y();
  }
  bool contains(const AlignedBox& o) const {
    return min.x() <= o.min.x() && min.y() <= o.min.y() && o.max.x() <= max.x() &&
           o.max.y() <= max.y();
  }
  bool contains(const Vector2<Scalar>& p) const {
    return min.x() <= p.x() && p.x() <= max.x() && min.y() <= p.y() && p.y() <= max.y();
  }
  AlignedBox expanded(Scalar margin) const {
    return {min.array() - margin, max.array() + margin};
  }
  Scalar width() const { return max.x() - min.x(); }
  Scalar height() const { return max.y() - min.y(); }
};

using Aabb = AlignedBox<double>;

template <typename Scalar>
AlignedBox<Scalar> bounding_box(std::span<const Vector2<Scalar>> points) {
  AlignedBox<Scalar> box{points.front(), points.front()};
  for (const auto& p : points) {
    box.min = box.min.cwiseMin(p);
    box.max = box.max.cwiseMax(p);
  }
  return box;
}

// Signed area; positive for counter-clockwise winding.
template <typename Scalar>
Scalar polygon_area(std::span<const Vector2<Scalar>> v) {
  Scalar twice = 0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) twice += cross(v[i], v[(i + 1) % n]);
  return twice / 2;
}

template <typename Scalar>
Vector2<Scalar> polygon_centroid(std::span<const Vector2<Scalar>> v) {
  // Triangle fan about the first vertex keeps the sum well conditioned.
  Vector2<Scalar> c = Vector2<Scalar>::Zero();
  Scalar area = 0;
  const Vector2<Scalar>& origin = v[0];
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    const Vector2<Scalar> e1 = v[i] - origin;
    const Vector2<Scalar> e2 = v[i + 1] - origin;
    const Scalar a = cross(e1, e2) / 2;
    c += a * (e1 + e2) / 3;
    area += a;
  }
  return origin + c / area;
}

// Second moment of area about the point `about` (unit density).
template <typename Scalar>
Scalar polygon_second_moment(std::span<const Vector2<Scalar>> v, const Vector2<Scalar>& about) {
  Scalar inertia = 0;
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    const Vector2<Scalar> e1 = v[i] - about;
    const Vector2<Scalar> e2 = v[(i + 1) % n] - about;
    const Scalar d = cross(e1, e2);
    inertia += d * (e1.dot(e1) + e1.dot(e2) + e2.dot(e2)) / 12;
  }
  return inertia;
}

// Strict convexity for a counter-clockwise polygon.
template <typename Scalar>
bool is_convex_ccw(std::span<const Vector2<Scalar>> v) {
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Vector2<Scalar> e1 = v[(i + 1) % n] - v[i];
    const Vector2<Scalar> e2 = v[(i + 2) % n] - v[(i + 1) % n];
    if (!(cross(e1, e2) > 0)) return false;
  }
  return polygon_area(v) > 0;
}

template <typename Scalar>
Scalar point_segment_distance(const Vector2<Scalar>& p, const Vector2<Scalar>& a,
                              const Vector2<Scalar>& b) {
  const Vector2<Scalar> ab = b - a;
  const Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > 0 ? (p - a).dot(ab) / len2 : Scalar(0);
  t = std::clamp(t, Scalar(0), Scalar(1));
  return (p - (a + t * ab)).norm();
}

// Inclusive containment test for a counter-clockwise convex polygon.
template <typename Scalar>
bool point_in_convex_polygon(const Vector2<Scalar>& p, std::span<const Vector2<Scalar>> v) {
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    if (cross(Vector2<Scalar>(v[(i + 1) % n] - v[i]), Vector2<Scalar>(p - v[i])) < 0) return false;
  }
  return true;
}

// Euclidean distance from a point to a convex polygon (0 inside).
template <typename Scalar>
Scalar point_polygon_distance(const Vector2<Scalar>& p, std::span<const Vector2<Scalar>> v) {
  if (point_in_convex_polygon(p, v)) return 0;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (std::size_t i = 0, n = v.size(); i < n; ++i) {
    best = std::min(best, point_segment_distance(p, v[i], v[(i + 1) % n]));
  }
  return best;
}

}  // namespace vtools
