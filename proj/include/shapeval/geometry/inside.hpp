#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "shapeval/geometry/types.hpp"

namespace shapeval {

namespace detail {

/// Hits closer than this (as a distance in the projected plane) to a
/// triangle edge or vertex are ambiguous and trigger a perturbed re-cast.
inline constexpr double kEdgeTolerance = 1e-12;
inline constexpr int kMaxPerturbations = 8;

/// Offset of the m-th perturbed ray origin in the projected (u, v) plane.
inline std::array<double, 2> perturbation(int attempt) {
  const double step = 1e-9 * attempt;
  return {step * 0.7548776662466927, step * 0.5698402909980532};
}

enum class RayHit { Miss, Hit, Ambiguous };

/// Intersects the ray from p along +axis with one triangle, projected onto
/// the plane spanned by the two other axes. pu/pv are the (possibly
/// perturbed) projected origin coordinates.
inline RayHit ray_triangle(const TriangleMesh& mesh, std::size_t tri, int axis, double pu,
                           double pv, double pa) {
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  const Vec3 A = mesh.corner(tri, 0), B = mesh.corner(tri, 1), C = mesh.corner(tri, 2);

  const double lo_u = std::min({A[u], B[u], C[u]}), hi_u = std::max({A[u], B[u], C[u]});
  const double lo_v = std::min({A[v], B[v], C[v]}), hi_v = std::max({A[v], B[v], C[v]});
  if (pu < lo_u - kEdgeTolerance || pu > hi_u + kEdgeTolerance || pv < lo_v - kEdgeTolerance ||
      pv > hi_v + kEdgeTolerance) {
    return RayHit::Miss;
  }
  if (mesh.triangle_area(tri) == 0) {
    fail(ErrorCode::DegenerateGeometry,
         "zero-area triangle " + std::to_string(tri) + " on an inside-test ray");
  }

  const double area2 = (B[u] - A[u]) * (C[v] - A[v]) - (B[v] - A[v]) * (C[u] - A[u]);
  if (area2 == 0) return RayHit::Miss;  // face parallel to the ray
  const double orient = area2 > 0 ? 1.0 : -1.0;

  // Signed distances from the origin to each edge line, positive on the inner side.
  const std::array<Vec3, 3> P{A, B, C};
  std::array<double, 3> edge{};
  bool ambiguous = false;
  for (int i = 0; i < 3; ++i) {
    const Vec3 s = P[i], e = P[(i + 1) % 3];
    const double du = e[u] - s[u], dv = e[v] - s[v];
    edge[i] = du * (pv - s[v]) - dv * (pu - s[u]);
    const double dist = orient * edge[i] / std::hypot(du, dv);
    if (dist < -kEdgeTolerance) return RayHit::Miss;
    if (dist <= kEdgeTolerance) ambiguous = true;
  }
  if (ambiguous) return RayHit::Ambiguous;

  // edge[i] is opposite corner (i + 2) % 3.
  const double wC = edge[0] / area2, wA = edge[1] / area2, wB = edge[2] / area2;
  const double hit = wA * A[axis] + wB * B[axis] + wC * C[axis];
  return hit > pa ? RayHit::Hit : RayHit::Miss;
}

/// Parity vote of one axis ray. visit(pu, pv, fn) must call fn(tri) for
/// every triangle whose projection may contain (pu, pv).
template <typename Visit>
bool axis_vote(const TriangleMesh& mesh, Vec3 p, int axis, Visit&& visit) {
  const int u = (axis + 1) % 3, v = (axis + 2) % 3;
  int crossings = 0;
  for (int attempt = 0; attempt <= kMaxPerturbations; ++attempt) {
    const auto d = perturbation(attempt);
    const double pu = p[u] + d[0], pv = p[v] + d[1];
    crossings = 0;
    bool ambiguous = false;
    visit(pu, pv, [&](std::size_t tri) {
      switch (ray_triangle(mesh, tri, axis, pu, pv, p[axis])) {
        case RayHit::Hit: ++crossings; break;
        case RayHit::Ambiguous: ambiguous = true; break;
        case RayHit::Miss: break;
      }
    });
    if (!ambiguous) break;
  }
  return crossings % 2 == 1;
}

}  // namespace detail

/// Ray-parity inside test with a majority vote over the +x, +y and +z rays.
/// The mesh must be watertight; the result is unspecified otherwise.
inline bool is_inside(const TriangleMesh& mesh, Vec3 p) {
  if (mesh.triangles.empty()) fail(ErrorCode::EmptyGeometry, "inside test against an empty mesh");
  int votes = 0;
  for (int axis = 0; axis < 3; ++axis) {
    votes += detail::axis_vote(mesh, p, axis, [&](double, double, auto&& fn) {
      for (std::size_t t = 0; t < mesh.triangles.size(); ++t) fn(t);
    });
  }
  return votes >= 2;
}

/// Same test as is_inside, with a per-axis 2D bucket grid over projected
/// triangle bounds so each ray only visits nearby faces.
class InsideTester {
 public:
  explicit InsideTester(const TriangleMesh& mesh) : mesh_(&mesh) {
    if (mesh.triangles.empty()) {
      fail(ErrorCode::EmptyGeometry, "inside test against an empty mesh");
    }
    const auto res = static_cast<std::size_t>(
        std::clamp(std::sqrt(static_cast<double>(mesh.triangles.size())), 1.0, 256.0));
    for (int axis = 0; axis < 3; ++axis) grids_[axis] = build_grid(axis, res);
  }

  bool operator()(Vec3 p) const {
    int votes = 0;
    for (int axis = 0; axis < 3; ++axis) {
      const Grid& g = grids_[axis];
      votes += detail::axis_vote(*mesh_, p, axis, [&](double pu, double pv, auto&& fn) {
        for (auto t : g.cell(pu, pv)) fn(t);
      });
    }
    return votes >= 2;
  }

 private:
  struct Grid {
    double lo_u = 0, lo_v = 0, inv_h_u = 0, inv_h_v = 0;
    std::size_t res = 1;
    std::vector<std::uint32_t> offsets;  // res*res + 1
    std::vector<std::uint32_t> items;

    std::size_t coord(double x, double lo, double inv_h) const {
      const double c = std::floor((x - lo) * inv_h);
      if (!(c > 0)) return 0;
      return std::min(res - 1, static_cast<std::size_t>(c));
    }

    std::span<const std::uint32_t> cell(double pu, double pv) const {
      const std::size_t id = coord(pu, lo_u, inv_h_u) * res + coord(pv, lo_v, inv_h_v);
      return {items.data() + offsets[id], items.data() + offsets[id + 1]};
    }
  };

  Grid build_grid(int axis, std::size_t res) const {
    const auto& mesh = *mesh_;
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const Aabb box = bounding_box(mesh.vertices);
    Grid g;
    g.res = res;
    // Margin covers the edge tolerance plus the largest perturbation offset.
    const double margin = 1e-7;
    g.lo_u = box.min[u] - margin;
    g.lo_v = box.min[v] - margin;
    g.inv_h_u = static_cast<double>(res) / (box.max[u] - box.min[u] + 2 * margin);
    g.inv_h_v = static_cast<double>(res) / (box.max[v] - box.min[v] + 2 * margin);

    const std::size_t tri_count = mesh.triangles.size();
    std::vector<std::array<std::size_t, 4>> spans(tri_count);
    std::vector<std::uint32_t> counts(res * res, 0);
    for (std::size_t t = 0; t < tri_count; ++t) {
      const Vec3 A = mesh.corner(t, 0), B = mesh.corner(t, 1), C = mesh.corner(t, 2);
      spans[t] = {g.coord(std::min({A[u], B[u], C[u]}) - margin, g.lo_u, g.inv_h_u),
                  g.coord(std::max({A[u], B[u], C[u]}) + margin, g.lo_u, g.inv_h_u),
                  g.coord(std::min({A[v], B[v], C[v]}) - margin, g.lo_v, g.inv_h_v),
                  g.coord(std::max({A[v], B[v], C[v]}) + margin, g.lo_v, g.inv_h_v)};
      for (std::size_t i = spans[t][0]; i <= spans[t][1]; ++i)
        for (std::size_t j = spans[t][2]; j <= spans[t][3]; ++j) ++counts[i * res + j];
    }
    g.offsets.assign(res * res + 1, 0);
    for (std::size_t c = 0; c < res * res; ++c) g.offsets[c + 1] = g.offsets[c] + counts[c];
    g.items.resize(g.offsets.back());
    std::vector<std::uint32_t> fill(g.offsets.begin(), g.offsets.end() - 1);
    for (std::size_t t = 0; t < tri_count; ++t) {
      for (std::size_t i = spans[t][0]; i <= spans[t][1]; ++i)
        for (std::size_t j = spans[t][2]; j <= spans[t][3]; ++j)
          g.items[fill[i * res + j]++] = static_cast<std::uint32_t>(t);
    }
    return g;
  }

  const TriangleMesh* mesh_;
  std::array<Grid, 3> grids_;
};

}  // namespace shapeval
