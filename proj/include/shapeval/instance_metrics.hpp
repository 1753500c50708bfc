#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "shapeval/geometry/inside.hpp"
#include "shapeval/geometry/nn_index.hpp"
#include "shapeval/geometry/types.hpp"
#include "shapeval/parallel.hpp"
#include "shapeval/random.hpp"

namespace shapeval {

struct FscoreParams {
  double tau = 0.01;
};

struct IouParams {
  std::size_t n_queries = 100000;
  double padding = 0.1;
};

/// How the Chamfer-L1 x10 convention is applied.
enum class ChamferFrame {
  Normalized,  // inputs already scaled so the object's longest box edge is 1: factor 10
  Raw,         // factor 10 / longest bounding-box edge of the ground truth
};

struct InstanceResult {
  double chamfer_l1 = 0;  // scaled
  double chamfer_l2 = 0;
  double f1 = 0, precision = 0, recall = 0;  // percent
  std::optional<double> iou;                 // percent
  std::optional<double> normal_consistency;  // percent
};

struct FscoreResult {
  double f1 = 0, precision = 0, recall = 0;
};

/// Nearest neighbor in `to` of every point of `from`, in index order.
struct DirectedNn {
  std::vector<double> sq_dist;
  std::vector<std::size_t> index;
};

inline DirectedNn directed_nn(const PointCloud& from, const NNIndex& to, Exec exec = {}) {
  DirectedNn out;
  out.sq_dist.resize(from.size());
  out.index.resize(from.size());
  parallel_for(from.size(), exec, [&](std::size_t i) {
    const auto hit = to.nearest(from.points[i]);
    out.sq_dist[i] = hit.sq_dist;
    out.index[i] = hit.index;
  });
  return out;
}

namespace detail {

inline void require_nonempty(const PointCloud& a, const PointCloud& b) {
  if (a.empty() || b.empty()) fail(ErrorCode::EmptyGeometry, "instance metric on an empty point cloud");
}

inline double mean(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double mean_sqrt(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += std::sqrt(x);
  return s / static_cast<double>(v.size());
}

inline double percent_within(std::span<const double> sq, double tau) {
  std::size_t hits = 0;
  for (double d : sq) hits += std::sqrt(d) < tau ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(sq.size());
}

inline double harmonic(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

inline double abs_cosine_mean(const PointCloud& from, const PointCloud& to, const DirectedNn& nn) {
  double s = 0;
  for (std::size_t i = 0; i < from.size(); ++i) {
    s += std::abs(dot(from.normals[i], to.normals[nn.index[i]]));
  }
  return s / static_cast<double>(from.size());
}

}  // namespace detail

/// Both NN directions of a prediction/ground-truth pair, computed once and
/// shared by every instance metric.
class PairNn {
 public:
  PairNn(const PointCloud& pred, const PointCloud& gt, Exec exec = {}) : pred_(&pred), gt_(&gt) {
    detail::require_nonempty(pred, gt);
    pred_to_gt_ = directed_nn(pred, NNIndex(gt), exec);
    gt_to_pred_ = directed_nn(gt, NNIndex(pred), exec);
  }

  double chamfer_l2() const {
    return detail::mean(pred_to_gt_.sq_dist) + detail::mean(gt_to_pred_.sq_dist);
  }

  double chamfer_l1(double scale = 10.0) const {
    return scale * (detail::mean_sqrt(pred_to_gt_.sq_dist) / 2 + detail::mean_sqrt(gt_to_pred_.sq_dist) / 2);
  }

  FscoreResult fscore(FscoreParams p) const {
    if (!(p.tau > 0)) fail(ErrorCode::InvalidArgument, "F-score threshold must be positive");
    FscoreResult r;
    r.precision = detail::percent_within(pred_to_gt_.sq_dist, p.tau);
    r.recall = detail::percent_within(gt_to_pred_.sq_dist, p.tau);
    r.f1 = detail::harmonic(r.precision, r.recall);
    return r;
  }

  double normal_consistency() const {
    if (!pred_->has_normals() || !gt_->has_normals()) {
      fail(ErrorCode::MissingNormals, "normal consistency needs normals on both clouds");
    }
    return 100.0 * (detail::abs_cosine_mean(*pred_, *gt_, pred_to_gt_) +
                    detail::abs_cosine_mean(*gt_, *pred_, gt_to_pred_)) / 2;
  }

  const DirectedNn& pred_to_gt() const { return pred_to_gt_; }
  const DirectedNn& gt_to_pred() const { return gt_to_pred_; }

 private:
  const PointCloud* pred_;
  const PointCloud* gt_;
  DirectedNn pred_to_gt_;
  DirectedNn gt_to_pred_;
};

/// Mean squared NN distance in each direction, summed.
inline double chamfer_l2(const PointCloud& x, const PointCloud& y, Exec exec = {}) {
  return PairNn(x, y, exec).chamfer_l2();
}

/// Half-weighted mean Euclidean NN distance in each direction, times `scale`.
inline double chamfer_l1_scaled(const PointCloud& x, const PointCloud& y, double scale = 10.0,
                                Exec exec = {}) {
  return PairNn(x, y, exec).chamfer_l1(scale);
}

/// Chamfer-L1 factor for a frame: 10 in the normalized frame, otherwise
/// 10 / (longest bounding-box edge of the ground truth).
inline double chamfer_l1_factor(const PointCloud& gt, ChamferFrame frame) {
  if (frame == ChamferFrame::Normalized) return 10.0;
  const double edge = bounding_box(gt).max_edge();
  if (!(edge > 0)) fail(ErrorCode::DegenerateGeometry, "ground truth has a zero-size bounding box");
  return 10.0 / edge;
}

/// x is the prediction, y the ground truth. Distances are compared with strict `<`.
inline FscoreResult fscore(const PointCloud& x, const PointCloud& y, FscoreParams p = {}, Exec exec = {}) {
  return PairNn(x, y, exec).fscore(p);
}

inline double normal_consistency(const PointCloud& x, const PointCloud& y, Exec exec = {}) {
  if (!x.has_normals() || !y.has_normals()) {
    fail(ErrorCode::MissingNormals, "normal consistency needs normals on both clouds");
  }
  return PairNn(x, y, exec).normal_consistency();
}

/// max over a of the distance to the nearest b.
inline double directed_hausdorff(const PointCloud& a, const PointCloud& b, Exec exec = {}) {
  detail::require_nonempty(a, b);
  const auto nn = directed_nn(a, NNIndex(b), exec);
  double worst = 0;
  for (double d : nn.sq_dist) worst = std::max(worst, d);
  return std::sqrt(worst);
}

/// Monte-Carlo volumetric IoU (percent) over uniform queries in the padded
/// cube [-(0.5 + pad/2), 0.5 + pad/2]^3. Query i uses counters 3i..3i+2.
inline double volumetric_iou(const TriangleMesh& pred, const TriangleMesh& gt, IouParams p, Seed seed,
                             Exec exec = {}) {
  if (pred.empty() || gt.empty()) fail(ErrorCode::EmptyGeometry, "IoU of an empty mesh");
  if (p.n_queries == 0) fail(ErrorCode::InvalidArgument, "IoU needs at least one query");
  if (!(p.padding >= 0)) fail(ErrorCode::InvalidArgument, "IoU padding must be non-negative");
  const InsideTester in_pred(pred), in_gt(gt);
  const double half = 0.5 + p.padding / 2;
  const CounterRng rng(seed);
  std::vector<unsigned char> state(p.n_queries);
  parallel_for(p.n_queries, exec, [&](std::size_t i) {
    const std::uint64_t c = 3 * static_cast<std::uint64_t>(i);
    const Vec3 q{(2 * rng.uniform(c) - 1) * half, (2 * rng.uniform(c + 1) - 1) * half,
                 (2 * rng.uniform(c + 2) - 1) * half};
    state[i] = static_cast<unsigned char>((in_pred(q) ? 1 : 0) | (in_gt(q) ? 2 : 0));
  });
  std::size_t inter = 0, uni = 0;
  for (auto s : state) {
    inter += s == 3;
    uni += s != 0;
  }
  if (uni == 0) {
    fail(ErrorCode::NoOccupiedSamples, "no IoU query fell inside either mesh; check normalization");
  }
  return 100.0 * static_cast<double>(inter) / static_cast<double>(uni);
}

struct InstanceOptions {
  FscoreParams fscore;
  ChamferFrame frame = ChamferFrame::Normalized;
};

/// All point-based instance metrics of one prediction against its ground
/// truth. Normal consistency is filled when both clouds carry normals.
inline InstanceResult evaluate_pair(const PointCloud& pred, const PointCloud& gt, InstanceOptions opt = {},
                                    Exec exec = {}) {
  const PairNn nn(pred, gt, exec);
  InstanceResult r;
  r.chamfer_l2 = nn.chamfer_l2();
  r.chamfer_l1 = nn.chamfer_l1(chamfer_l1_factor(gt, opt.frame));
  const auto f = nn.fscore(opt.fscore);
  r.f1 = f.f1;
  r.precision = f.precision;
  r.recall = f.recall;
  if (pred.has_normals() && gt.has_normals()) r.normal_consistency = nn.normal_consistency();
  return r;
}

struct BestOfN {
  std::size_t index = 0;
  InstanceResult result;
};

/// Completion with the highest F1 against gt; ties go to the lowest index.
inline BestOfN best_of_n(std::span<const PointCloud> completions, const PointCloud& gt,
                         InstanceOptions opt = {}, Exec exec = {}) {
  if (completions.empty()) fail(ErrorCode::EmptyGeometry, "best-of-N needs at least one completion");
  BestOfN best;
  for (std::size_t i = 0; i < completions.size(); ++i) {
    auto r = evaluate_pair(completions[i], gt, opt, exec);
    if (i == 0 || r.f1 > best.result.f1) best = {i, r};
  }
  return best;
}

inline BestOfN best_of_n(std::span<const PointCloud> completions, const PointCloud& gt, FscoreParams p,
                         Exec exec = {}) {
  return best_of_n(completions, gt, InstanceOptions{p, ChamferFrame::Normalized}, exec);
}

}  // namespace shapeval
