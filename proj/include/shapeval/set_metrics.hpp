#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "shapeval/geometry/nn_index.hpp"
#include "shapeval/instance_metrics.hpp"
#include "shapeval/parallel.hpp"

namespace shapeval {

/// Dense row-major matrix of set-to-set distances (rows: generated, cols: reference).
struct DistanceMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DistanceMatrix() = default;
  DistanceMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c, 0.0) {}

  double operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }

  bool empty() const { return rows == 0 || cols == 0; }

  /// Copy of the [r0, r0+nr) x [c0, c0+nc) block.
  DistanceMatrix block(std::size_t r0, std::size_t nr, std::size_t c0, std::size_t nc) const {
    DistanceMatrix out(nr, nc);
    for (std::size_t i = 0; i < nr; ++i)
      for (std::size_t j = 0; j < nc; ++j) out(i, j) = (*this)(r0 + i, c0 + j);
    return out;
  }

  friend bool operator==(const DistanceMatrix&, const DistanceMatrix&) = default;
};

struct SetResult {
  double cov = 0;  // percent
  double mmd = 0;  // unscaled
  double one_nna = 0;  // percent
};

namespace detail {

inline std::vector<std::unique_ptr<NNIndex>> build_indices(std::span<const PointCloud> clouds, Exec exec) {
  std::vector<std::unique_ptr<NNIndex>> out(clouds.size());
  parallel_for(clouds.size(), exec, [&](std::size_t i) {
    if (clouds[i].empty()) fail(ErrorCode::EmptyGeometry, "set contains an empty point cloud");
    out[i] = std::make_unique<NNIndex>(clouds[i]);
  });
  return out;
}

inline double chamfer_l2_indexed(const PointCloud& a, const NNIndex& ia, const PointCloud& b,
                                 const NNIndex& ib) {
  double ab = 0, ba = 0;
  for (const auto& p : a.points) ab += ib.nearest(p).sq_dist;
  for (const auto& p : b.points) ba += ia.nearest(p).sq_dist;
  return ab / static_cast<double>(a.size()) + ba / static_cast<double>(b.size());
}

}  // namespace detail

/// Entry (i, j) = chamfer_l2(g[i], r[j]). Each cell is computed independently.
inline DistanceMatrix pairwise_cd_matrix(std::span<const PointCloud> g, std::span<const PointCloud> r,
                                         Exec exec = {}) {
  const auto gi = detail::build_indices(g, exec);
  const auto ri = detail::build_indices(r, exec);
  DistanceMatrix d(g.size(), r.size());
  parallel_for(g.size() * r.size(), exec, [&](std::size_t cell) {
    const std::size_t i = cell / r.size(), j = cell % r.size();
    d.values[cell] = detail::chamfer_l2_indexed(g[i], *gi[i], r[j], *ri[j]);
  });
  return d;
}

/// Square Chamfer matrix of one set; only the upper triangle is computed
/// (the L2 Chamfer is exactly symmetric in floating point).
inline DistanceMatrix self_cd_matrix(std::span<const PointCloud> s, Exec exec = {}) {
  const auto idx = detail::build_indices(s, exec);
  const std::size_t n = s.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  pairs.reserve(n * (n - (n > 0)) / 2);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  DistanceMatrix d(n, n);
  parallel_for(pairs.size(), exec, [&](std::size_t k) {
    const auto [i, j] = pairs[k];
    const double v = detail::chamfer_l2_indexed(s[i], *idx[i], s[j], *idx[j]);
    d(i, j) = v;
    d(j, i) = v;
  });
  return d;
}

/// The three matrices 1-NNA needs, usually sliced from one merged matrix.
struct SetMatrices {
  DistanceMatrix gg, rr, gr;
};

/// Splits a square matrix over (g_0..g_{n-1}, r_0..r_{m-1}).
inline SetMatrices split_merged(const DistanceMatrix& merged, std::size_t n_generated) {
  if (merged.rows != merged.cols || n_generated > merged.rows) {
    fail(ErrorCode::InconsistentDims, "merged distance matrix must be square");
  }
  const std::size_t m = merged.rows - n_generated;
  return {merged.block(0, n_generated, 0, n_generated), merged.block(n_generated, m, n_generated, m),
          merged.block(0, n_generated, n_generated, m)};
}

/// COV: percent of reference columns that are the row-argmin of some
/// generated row. MMD: mean over reference columns of the column minimum.
inline std::pair<double, double> cov_mmd(const DistanceMatrix& d) {
  if (d.empty()) fail(ErrorCode::DegenerateMatrix, "COV/MMD of an empty distance matrix");
  std::vector<bool> matched(d.cols, false);
  for (std::size_t i = 0; i < d.rows; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < d.cols; ++j) {
      if (d(i, j) < d(i, arg)) arg = j;
    }
    matched[arg] = true;
  }
  std::size_t covered = 0;
  for (bool m : matched) covered += m;

  double mmd = 0;
  for (std::size_t j = 0; j < d.cols; ++j) {
    double col_min = d(0, j);
    for (std::size_t i = 1; i < d.rows; ++i) col_min = std::min(col_min, d(i, j));
    mmd += col_min;
  }
  return {100.0 * static_cast<double>(covered) / static_cast<double>(d.cols),
          mmd / static_cast<double>(d.cols)};
}

/// Leave-one-out 1-NN accuracy (percent) over the merged generated +
/// reference sets. Nearest-neighbor ties: smaller distance, then generated
/// before reference, then lower index.
inline double one_nna(const DistanceMatrix& dgg, const DistanceMatrix& drr, const DistanceMatrix& dgr) {
  const std::size_t ng = dgg.rows, nr = drr.rows;
  if (dgg.cols != ng || drr.cols != nr || dgr.rows != ng || dgr.cols != nr) {
    fail(ErrorCode::InconsistentDims, "1-NNA matrices have inconsistent dimensions");
  }
  if (ng == 0 || nr == 0 || ng + nr < 2) fail(ErrorCode::InconsistentDims, "1-NNA needs both sets non-empty");

  struct Candidate {
    double dist;
    int set;  // 0 generated, 1 reference
    std::size_t index;
    bool operator<(const Candidate& o) const {
      if (dist != o.dist) return dist < o.dist;
      if (set != o.set) return set < o.set;
      return index < o.index;
    }
  };

  std::size_t correct = 0;
  for (std::size_t i = 0; i < ng; ++i) {
    std::optional<Candidate> best;
    auto offer = [&](Candidate c) {
      if (!best || c < *best) best = c;
    };
    for (std::size_t j = 0; j < ng; ++j)
      if (j != i) offer({dgg(i, j), 0, j});
    for (std::size_t j = 0; j < nr; ++j) offer({dgr(i, j), 1, j});
    correct += best->set == 0;
  }
  for (std::size_t i = 0; i < nr; ++i) {
    std::optional<Candidate> best;
    auto offer = [&](Candidate c) {
      if (!best || c < *best) best = c;
    };
    for (std::size_t j = 0; j < ng; ++j) offer({dgr(j, i), 0, j});
    for (std::size_t j = 0; j < nr; ++j)
      if (j != i) offer({drr(i, j), 1, j});
    correct += best->set == 1;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(ng + nr);
}

inline SetResult set_metrics(const SetMatrices& m) {
  const auto [cov, mmd] = cov_mmd(m.gr);
  return {cov, mmd, one_nna(m.gg, m.rr, m.gr)};
}

/// Total mutual difference: sum over completions of the mean Chamfer-L2 to
/// every other completion.
inline double tmd(std::span<const PointCloud> completions, Exec exec = {}) {
  const std::size_t k = completions.size();
  if (k < 2) fail(ErrorCode::NeedAtLeastTwo, "TMD needs at least two completions");
  const auto d = self_cd_matrix(completions, exec);
  double total = 0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0;
    for (std::size_t j = 0; j < k; ++j)
      if (j != i) row += d(i, j);
    total += row / static_cast<double>(k - 1);
  }
  return total;
}

/// Unidirectional Hausdorff distance: mean over completions of the
/// directed Hausdorff distance from the partial input to the completion.
inline double uhd(const PointCloud& partial, std::span<const PointCloud> completions, Exec exec = {}) {
  if (completions.empty()) fail(ErrorCode::EmptyGeometry, "UHD needs at least one completion");
  if (partial.empty()) fail(ErrorCode::EmptyGeometry, "UHD of an empty partial input");
  std::vector<double> per(completions.size());
  parallel_for(completions.size(), exec,
               [&](std::size_t i) { per[i] = directed_hausdorff(partial, completions[i]); });
  double s = 0;
  for (double v : per) s += v;
  return s / static_cast<double>(per.size());
}

}  // namespace shapeval
