#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "shapeval/error.hpp"
#include "shapeval/parallel.hpp"
#include "shapeval/tensor_io.hpp"

namespace shapeval {

/// n x d row-major matrix of per-shape feature vectors.
struct FeatureMatrix {
  std::size_t n = 0;
  std::size_t d = 0;
  std::vector<double> values;

  FeatureMatrix() = default;
  FeatureMatrix(std::size_t rows, std::size_t dims, std::vector<double> v)
      : n(rows), d(dims), values(std::move(v)) {
    if (values.size() != n * d) fail(ErrorCode::InvalidArgument, "feature matrix size mismatch");
    for (double x : values) {
      if (!std::isfinite(x)) fail(ErrorCode::NonFinite, "feature matrix has a non-finite value");
    }
  }

  std::span<const double> row(std::size_t i) const { return {values.data() + i * d, d}; }

  /// Accepts [n, d] tensors (and [d] as a single row); f32 is promoted.
  static FeatureMatrix from_tensor(const TensorFile& t) {
    if (t.shape.size() == 1) return FeatureMatrix(1, t.shape[0], t.as_f64());
    if (t.shape.size() != 2) fail(ErrorCode::InvalidArgument, "feature tensor must have shape [n, d]");
    return FeatureMatrix(t.shape[0], t.shape[1], t.as_f64());
  }
};

struct GaussianSummary {
  Eigen::VectorXd mu;
  Eigen::MatrixXd sigma;
};

struct KernelParams {
  int degree = 3;
  double scale = 0;           // 0 selects 1/d
  double offset = 1;
  std::size_t block_size = 0;  // 0 selects a single block over all rows
};

struct KnnParams {
  std::size_t k = 3;
};

namespace detail {

inline void require_same_dim(const FeatureMatrix& a, const FeatureMatrix& b) {
  if (a.d != b.d) {
    fail(ErrorCode::DimensionMismatch,
         "feature dimensions differ: " + std::to_string(a.d) + " vs " + std::to_string(b.d));
  }
  if (a.d == 0) fail(ErrorCode::DimensionMismatch, "feature dimension is zero");
}

inline double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Eigenvalues of a symmetric matrix with small negative values clamped to
/// zero; anything below -1e-6 * lambda_max means the input is not PSD.
inline Eigen::VectorXd clamped_eigenvalues(const Eigen::MatrixXd& sym, Eigen::MatrixXd* vectors = nullptr) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
      sym, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) fail(ErrorCode::NonPsdProduct, "eigendecomposition failed");
  Eigen::VectorXd lambda = solver.eigenvalues();
  const double lmax = std::max(0.0, lambda.maxCoeff());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < 0) {
      if (lambda[i] < -1e-6 * lmax) {
        fail(ErrorCode::NonPsdProduct, "covariance product has a significantly negative eigenvalue");
      }
      lambda[i] = 0;
    }
  }
  if (vectors) *vectors = solver.eigenvectors();
  return lambda;
}

/// Squared radius of each row's k-th nearest other row.
inline std::vector<double> knn_sq_radii(const FeatureMatrix& a, std::size_t k, Exec exec) {
  if (k == 0 || k >= a.n) {
    fail(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " needs more than k rows (have " +
                                   std::to_string(a.n) + ")");
  }
  std::vector<double> radii(a.n);
  parallel_for(a.n, exec, [&](std::size_t i) {
    std::vector<double> d;
    d.reserve(a.n - 1);
    for (std::size_t j = 0; j < a.n; ++j)
      if (j != i) d.push_back(sq_dist(a.row(i), a.row(j)));
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
    radii[i] = d[k - 1];
  });
  return radii;
}

/// Percent of `queries` rows inside at least one ball (center row of
/// `centers`, squared radius) with `<=`.
inline double percent_in_manifold(const FeatureMatrix& queries, const FeatureMatrix& centers,
                                  const std::vector<double>& sq_radii, Exec exec) {
  std::vector<unsigned char> inside(queries.n, 0);
  parallel_for(queries.n, exec, [&](std::size_t i) {
    for (std::size_t j = 0; j < centers.n; ++j) {
      if (sq_dist(queries.row(i), centers.row(j)) <= sq_radii[j]) {
        inside[i] = 1;
        break;
      }
    }
  });
  std::size_t hits = 0;
  for (auto v : inside) hits += v;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(queries.n);
}

}  // namespace detail

/// Column means and unbiased (n - 1) covariance.
inline GaussianSummary gaussian_summary(const FeatureMatrix& f) {
  if (f.n < 2) fail(ErrorCode::TooFewSamples, "Gaussian summary needs at least two samples");
  const auto n = static_cast<double>(f.n);
  GaussianSummary g;
  g.mu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(f.d));
  for (std::size_t i = 0; i < f.n; ++i)
    for (std::size_t c = 0; c < f.d; ++c) g.mu[c] += f.row(i)[c];
  g.mu /= n;

  g.sigma = Eigen::MatrixXd::Zero(g.mu.size(), g.mu.size());
  std::vector<double> centered(f.d);
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t c = 0; c < f.d; ++c) centered[c] = f.row(i)[c] - g.mu[c];
    for (std::size_t a = 0; a < f.d; ++a)
      for (std::size_t b = a; b < f.d; ++b) g.sigma(a, b) += centered[a] * centered[b];
  }
  for (std::size_t a = 0; a < f.d; ++a) {
    for (std::size_t b = a; b < f.d; ++b) {
      g.sigma(a, b) /= n - 1;
      g.sigma(b, a) = g.sigma(a, b);
    }
  }
  return g;
}

/// Frechet distance between two Gaussians:
///   |mu_a - mu_b|^2 + tr(S_a) + tr(S_b) - 2 tr((S_a S_b)^{1/2}).
/// The trace term is evaluated on the symmetric matrix S_a^{1/2} S_b S_a^{1/2},
/// which has the same eigenvalues as S_a S_b.
inline double frechet_distance(const GaussianSummary& a, const GaussianSummary& b) {
  const auto d = a.mu.size();
  if (b.mu.size() != d || a.sigma.rows() != d || a.sigma.cols() != d || b.sigma.rows() != d ||
      b.sigma.cols() != d) {
    fail(ErrorCode::DimensionMismatch, "Gaussian summaries have different dimensions");
  }
  for (const auto* s : {&a.sigma, &b.sigma}) {
    if ((*s - s->transpose()).cwiseAbs().maxCoeff() > 1e-9) {
      fail(ErrorCode::InvalidArgument, "covariance is not symmetric");
    }
  }

  Eigen::MatrixXd vectors;
  const Eigen::VectorXd la = detail::clamped_eigenvalues(0.5 * (a.sigma + a.sigma.transpose()), &vectors);
  const Eigen::MatrixXd sqrt_a = vectors * la.cwiseSqrt().asDiagonal() * vectors.transpose();
  const Eigen::MatrixXd inner = sqrt_a * b.sigma * sqrt_a;
  const Eigen::VectorXd lp = detail::clamped_eigenvalues(0.5 * (inner + inner.transpose()));
  const double tr_sqrt = lp.cwiseSqrt().sum();

  const double value =
      (a.mu - b.mu).squaredNorm() + a.sigma.trace() + b.sigma.trace() - 2.0 * tr_sqrt;
  return std::max(0.0, value);
}

inline double frechet_distance(const FeatureMatrix& x, const FeatureMatrix& y) {
  detail::require_same_dim(x, y);
  return frechet_distance(gaussian_summary(x), gaussian_summary(y));
}

namespace detail {

inline double poly_kernel(std::span<const double> x, std::span<const double> y, const KernelParams& p,
                          double scale) {
  const double base = scale * dot(x, y) + p.offset;
  double v = 1;
  for (int i = 0; i < p.degree; ++i) v *= base;
  return v;
}

/// Unbiased MMD^2 over rows [x0, x0+m) of x and [y0, y0+n) of y.
inline double mmd2_unbiased(const FeatureMatrix& x, std::size_t x0, std::size_t m, const FeatureMatrix& y,
                            std::size_t y0, std::size_t n, const KernelParams& p, double scale, Exec exec) {
  std::vector<double> sxx(m, 0), syy(n, 0), sxy(m, 0);
  parallel_for(m, exec, [&](std::size_t i) {
    double s = 0, c = 0;
    for (std::size_t j = 0; j < m; ++j)
      if (j != i) s += poly_kernel(x.row(x0 + i), x.row(x0 + j), p, scale);
    for (std::size_t j = 0; j < n; ++j) c += poly_kernel(x.row(x0 + i), y.row(y0 + j), p, scale);
    sxx[i] = s;
    sxy[i] = c;
  });
  parallel_for(n, exec, [&](std::size_t i) {
    double s = 0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) s += poly_kernel(y.row(y0 + i), y.row(y0 + j), p, scale);
    syy[i] = s;
  });
  double kxx = 0, kyy = 0, kxy = 0;
  for (double v : sxx) kxx += v;
  for (double v : syy) kyy += v;
  for (double v : sxy) kxy += v;
  const auto fm = static_cast<double>(m), fn = static_cast<double>(n);
  return kxx / (fm * (fm - 1)) + kyy / (fn * (fn - 1)) - 2.0 * kxy / (fm * fn);
}

}  // namespace detail

/// Unbiased polynomial-kernel MMD^2. With block_size b smaller than either
/// set, the estimate is the mean over floor(min(n_x, n_y) / b) consecutive
/// row blocks of b rows from each set.
inline double kernel_distance(const FeatureMatrix& x, const FeatureMatrix& y, KernelParams p = {},
                              Exec exec = {}) {
  detail::require_same_dim(x, y);
  if (x.n < 2 || y.n < 2) fail(ErrorCode::TooFewSamples, "kernel distance needs at least two rows per set");
  if (p.degree < 1) fail(ErrorCode::InvalidArgument, "kernel degree must be at least 1");
  const double scale = p.scale == 0 ? 1.0 / static_cast<double>(x.d) : p.scale;
  if (!(scale > 0)) fail(ErrorCode::InvalidArgument, "kernel scale must be positive");

  const std::size_t b = p.block_size;
  if (b == 0 || (b >= x.n && b >= y.n)) {
    return detail::mmd2_unbiased(x, 0, x.n, y, 0, y.n, p, scale, exec);
  }
  if (b < 2) fail(ErrorCode::TooFewSamples, "kernel block size must be at least 2");
  const std::size_t blocks = std::min(x.n, y.n) / b;
  if (blocks == 0) fail(ErrorCode::TooFewSamples, "kernel block size exceeds the smaller set");
  double total = 0;
  for (std::size_t k = 0; k < blocks; ++k) {
    total += detail::mmd2_unbiased(x, k * b, b, y, k * b, b, p, scale, exec);
  }
  return total / static_cast<double>(blocks);
}

struct PrecisionRecall {
  double precision = 0;  // percent
  double recall = 0;     // percent
};

/// Improved precision/recall: the manifold of a set is the union of balls
/// reaching each row's k-th nearest neighbor. Precision is the share of
/// generated rows within the real manifold, recall the converse.
inline PrecisionRecall knn_precision_recall(const FeatureMatrix& real, const FeatureMatrix& gen,
                                            KnnParams p = {}, Exec exec = {}) {
  detail::require_same_dim(real, gen);
  const auto real_radii = detail::knn_sq_radii(real, p.k, exec);
  const auto gen_radii = detail::knn_sq_radii(gen, p.k, exec);
  return {detail::percent_in_manifold(gen, real, real_radii, exec),
          detail::percent_in_manifold(real, gen, gen_radii, exec)};
}

struct DensityCoverage {
  double density = 0;
  double coverage = 0;  // fraction in [0, 1]
};

inline DensityCoverage density_coverage(const FeatureMatrix& real, const FeatureMatrix& gen,
                                        KnnParams p = {5}, Exec exec = {}) {
  detail::require_same_dim(real, gen);
  if (gen.n == 0) fail(ErrorCode::TooFewSamples, "density/coverage needs generated rows");
  const auto radii = detail::knn_sq_radii(real, p.k, exec);

  std::vector<std::size_t> memberships(gen.n, 0);
  parallel_for(gen.n, exec, [&](std::size_t i) {
    std::size_t c = 0;
    for (std::size_t j = 0; j < real.n; ++j) c += detail::sq_dist(gen.row(i), real.row(j)) <= radii[j];
    memberships[i] = c;
  });
  std::vector<unsigned char> covered(real.n, 0);
  parallel_for(real.n, exec, [&](std::size_t j) {
    for (std::size_t i = 0; i < gen.n; ++i) {
      if (detail::sq_dist(gen.row(i), real.row(j)) <= radii[j]) {
        covered[j] = 1;
        break;
      }
    }
  });
  std::size_t total = 0, cov = 0;
  for (auto m : memberships) total += m;
  for (auto c : covered) cov += c;
  return {static_cast<double>(total) / (static_cast<double>(p.k) * static_cast<double>(gen.n)),
          static_cast<double>(cov) / static_cast<double>(real.n)};
}

}  // namespace shapeval
