#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shapeval/error.hpp"

namespace shapeval {

struct Vec3 {
  double x = 0, y = 0, z = 0;

  constexpr double operator[](std::size_t i) const { return i == 0 ? x : (i == 1 ? y : z); }
  constexpr double& operator[](std::size_t i) { return i == 0 ? x : (i == 1 ? y : z); }

  friend constexpr Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend constexpr Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend constexpr Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(Vec3, Vec3) = default;
};

constexpr double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(Vec3 a, Vec3 b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

/// Squared Euclidean distance; the single definition every metric uses.
constexpr double squared_distance(Vec3 a, Vec3 b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

inline bool is_finite(Vec3 a) {
  return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.z);
}

/// Ordered point set, optionally with one unit normal per point.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;  // empty, or same length as points

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_normals() const { return !normals.empty(); }

  /// Throws NonFinite / InvalidArgument / MissingNormals if the invariants are violated.
  void validate() const {
    for (const auto& p : points) {
      if (!is_finite(p)) fail(ErrorCode::NonFinite, "point cloud has a non-finite coordinate");
    }
    if (normals.empty()) return;
    if (normals.size() != points.size()) {
      fail(ErrorCode::InvalidArgument, "normal count differs from point count");
    }
    for (const auto& n : normals) {
      if (!is_finite(n) || std::abs(norm(n) - 1.0) > 1e-6) {
        fail(ErrorCode::InvalidArgument, "normal is not unit length");
      }
    }
  }
};

/// Indexed triangle soup.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::uint32_t, 3>> triangles;
  /// Faces removed at load time because they had repeated indices or zero area.
  std::size_t dropped_degenerate = 0;

  bool empty() const { return triangles.empty(); }

  Vec3 corner(std::size_t tri, int k) const { return vertices[triangles[tri][k]]; }

  double triangle_area(std::size_t tri) const {
    const Vec3 a = corner(tri, 0);
    return 0.5 * norm(cross(corner(tri, 1) - a, corner(tri, 2) - a));
  }
};

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 extent() const { return max - min; }
  double max_edge() const {
    const Vec3 e = extent();
    return std::max({e.x, e.y, e.z});
  }
  bool contains(Vec3 p) const {
    return p.x >= min.x && p.y >= min.y && p.z >= min.z && p.x <= max.x && p.y <= max.y &&
           p.z <= max.z;
  }
};

inline Aabb bounding_box(std::span<const Vec3> pts) {
  if (pts.empty()) fail(ErrorCode::EmptyGeometry, "bounding box of empty geometry");
  Aabb box{pts[0], pts[0]};
  for (const auto& p : pts) {
    for (std::size_t a = 0; a < 3; ++a) {
      box.min[a] = std::min(box.min[a], p[a]);
      box.max[a] = std::max(box.max[a], p[a]);
    }
  }
  return box;
}

inline Aabb bounding_box(const PointCloud& pc) { return bounding_box(pc.points); }

inline Aabb bounding_box(const TriangleMesh& mesh) { return bounding_box(mesh.vertices); }

}  // namespace shapeval
