#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <optional>
#include <vector>

#include "shapeval/geometry/types.hpp"
#include "shapeval/parallel.hpp"
#include "shapeval/random.hpp"

namespace shapeval {

/// Area-weighted uniform surface sampling.
///
/// Sample i consumes counters 3i (triangle choice), 3i+1 and 3i+2
/// (barycentric placement) of the seed's stream, so output is identical for
/// any thread count.
inline PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, Seed seed,
                                 bool with_normals, Exec exec = {}) {
  if (mesh.triangles.empty()) fail(ErrorCode::EmptyGeometry, "cannot sample an empty mesh");
  if (n == 0) fail(ErrorCode::InvalidArgument, "sample count must be at least 1");

  const std::size_t tri_count = mesh.triangles.size();
  std::vector<double> cumulative(tri_count);
  std::size_t last_positive = tri_count;
  double total = 0;
  for (std::size_t t = 0; t < tri_count; ++t) {
    const double area = mesh.triangle_area(t);
    if (area > 0) last_positive = t;
    total += area;
    cumulative[t] = total;
  }
  if (!(total > 0) || last_positive == tri_count) {
    fail(ErrorCode::ZeroTotalArea, "mesh has zero surface area");
  }

  const CounterRng rng(seed);
  PointCloud out;
  out.points.resize(n);
  if (with_normals) out.normals.resize(n);

  parallel_for(n, exec, [&](std::size_t i) {
    const std::uint64_t c = 3 * static_cast<std::uint64_t>(i);
    const double target = rng.uniform(c) * total;
    // upper_bound never lands on a zero-area face: its cumulative value equals its predecessor's.
    auto tri = static_cast<std::size_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), target) - cumulative.begin());
    if (tri >= tri_count) tri = last_positive;

    const Vec3 a = mesh.corner(tri, 0), b = mesh.corner(tri, 1), c2 = mesh.corner(tri, 2);
    const double s = std::sqrt(rng.uniform(c + 1));
    const double r2 = rng.uniform(c + 2);
    out.points[i] = (1.0 - s) * a + (s * (1.0 - r2)) * b + (s * r2) * c2;
    if (with_normals) {
      const Vec3 nrm = cross(b - a, c2 - a);
      out.normals[i] = (1.0 / norm(nrm)) * nrm;
    }
  });
  return out;
}

struct FpsOptions {
  /// Pins the first selected index instead of drawing it from the seed.
  std::optional<std::size_t> start_index;
};

/// Greedy farthest-point selection; returns indices in selection order.
/// Ties on the max-min distance go to the lowest index.
inline std::vector<std::size_t> farthest_point_indices(std::span<const Vec3> points, std::size_t k,
                                                       Seed seed, FpsOptions options = {}) {
  const std::size_t n = points.size();
  if (n == 0) fail(ErrorCode::EmptyGeometry, "farthest-point sampling of an empty cloud");
  if (k == 0) fail(ErrorCode::InvalidArgument, "farthest-point sample count must be at least 1");
  if (k > n) {
    fail(ErrorCode::KTooLarge,
         "requested " + std::to_string(k) + " samples from " + std::to_string(n) + " points");
  }
  std::size_t current = options.start_index.value_or(CounterRng(seed).below(0, n));
  if (current >= n) fail(ErrorCode::InvalidArgument, "FPS start index out of range");

  std::vector<std::size_t> selected;
  selected.reserve(k);
  std::vector<double> min_dist(n, std::numeric_limits<double>::infinity());
  for (std::size_t step = 0; step < k; ++step) {
    selected.push_back(current);
    const Vec3 c = points[current];
    min_dist[current] = -1;  // never re-selected, even with duplicate points
    std::size_t next = 0;
    double best = -1;
    for (std::size_t i = 0; i < n; ++i) {
      min_dist[i] = std::min(min_dist[i], squared_distance(points[i], c));
      if (min_dist[i] > best) {
        best = min_dist[i];
        next = i;
      }
    }
    current = next;
  }
  return selected;
}

inline PointCloud farthest_point_sample(const PointCloud& pc, std::size_t k, Seed seed,
                                        FpsOptions options = {}) {
  const auto idx = farthest_point_indices(pc.points, k, seed, options);
  PointCloud out;
  out.points.reserve(k);
  for (auto i : idx) out.points.push_back(pc.points[i]);
  if (pc.has_normals()) {
    out.normals.reserve(k);
    for (auto i : idx) out.normals.push_back(pc.normals[i]);
  }
  return out;
}

}  // namespace shapeval
