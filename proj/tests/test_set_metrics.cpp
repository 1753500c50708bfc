#include "oracles.hpp"
#include "test_util.hpp"

namespace shapeval {
namespace {

using testing::cloud;

DistanceMatrix to_matrix(const oracle::Matrix& m) {
  DistanceMatrix d(m.size(), m.empty() ? 0 : m[0].size());
  for (std::size_t i = 0; i < d.rows; ++i)
    for (std::size_t j = 0; j < d.cols; ++j) d(i, j) = m[i][j];
  return d;
}

std::vector<PointCloud> random_set(std::mt19937_64& rng, std::size_t count, std::size_t n, double shift = 0) {
  std::vector<PointCloud> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto pc = testing::random_cloud(rng, n, -0.5, 0.5);
    for (auto& p : pc.points) p.x += shift;
    out.push_back(pc);
  }
  return out;
}

TEST(CdMatrix, Examples) {
  const std::vector<PointCloud> s{cloud({{0, 0, 0}}), cloud({{1, 0, 0}}), cloud({{0, 3, 0}})};
  const auto d = pairwise_cd_matrix(s, s);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(d(i, i), 0.0);
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(d(i, j), d(j, i));
  }
  EXPECT_EQ(self_cd_matrix(s), d);
  const std::vector<PointCloud> g{cloud({{0, 0, 0}, {1, 0, 0}})}, r{cloud({{0, 1, 0}})};
  EXPECT_EQ(pairwise_cd_matrix(g, r)(0, 0), chamfer_l2(g[0], r[0]));
}

TEST(CdMatrix, MatchesBruteForce) {
  std::mt19937_64 rng(10);
  const auto g = random_set(rng, 10, 30), r = random_set(rng, 10, 40);
  const auto d = pairwise_cd_matrix(g, r, Exec{3});
  const auto want = oracle::cd_matrix(g, r);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t j = 0; j < 10; ++j) EXPECT_NEAR(d(i, j), want[i][j], 1e-12 * want[i][j]);
}

TEST(CovMmd, Examples) {
  DistanceMatrix z(3, 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) z(i, j) = i == j ? 0 : 50;
  EXPECT_EQ(cov_mmd(z), (std::pair<double, double>{100, 0}));

  DistanceMatrix col0(4, 5);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 5; ++j) col0(i, j) = 1.0 + j;
  EXPECT_EQ(cov_mmd(col0).first, 100.0 / 5);

  DistanceMatrix one(1, 1);
  one(0, 0) = 0.25;
  EXPECT_EQ(cov_mmd(one), (std::pair<double, double>{100, 0.25}));
  EXPECT_SHAPEVAL_ERROR(cov_mmd(DistanceMatrix{}), ErrorCode::DegenerateMatrix);
}

TEST(CovMmd, TiesGoToLowestColumn) {
  DistanceMatrix d(2, 3);
  d.values = {1, 1, 2, 3, 0.5, 0.5};
  EXPECT_NEAR(cov_mmd(d).first, 200.0 / 3, 1e-12);
}

TEST(CovMmd, MatchesBruteForce) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 50; ++trial) {
    oracle::Matrix m(1 + rng() % 12, std::vector<double>(1 + rng() % 12));
    for (auto& row : m)
      for (auto& v : row) v = std::round(u(rng) * 8) / 8;  // quantized for ties
    const auto got = cov_mmd(to_matrix(m));
    const auto want = oracle::cov_mmd(m);
    EXPECT_DOUBLE_EQ(got.first, want.first);
    EXPECT_NEAR(got.second, want.second, 1e-15);
  }
}

TEST(OneNna, Examples) {
  std::mt19937_64 rng(13);
  const auto g = random_set(rng, 6, 20, 0), r = random_set(rng, 6, 20, 100);
  EXPECT_EQ(one_nna(self_cd_matrix(g), self_cd_matrix(r), pairwise_cd_matrix(g, r)), 100.0);

  DistanceMatrix single(1, 1);
  single(0, 0) = 4;
  EXPECT_EQ(one_nna(single.block(0, 1, 0, 1), single.block(0, 1, 0, 1), single), 0.0);
  DistanceMatrix zero(1, 1);
  EXPECT_EQ(one_nna(zero, zero, single), 0.0);
}

TEST(OneNna, TieBreakingMatchesBruteForce) {
  std::mt19937_64 rng(14);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t ng = 1 + rng() % 6, nr = 1 + rng() % 6, n = ng + nr;
    oracle::Matrix full(n, std::vector<double>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) full[i][j] = full[j][i] = double(rng() % 3);
    oracle::Matrix gg(ng, std::vector<double>(ng)), rr(nr, std::vector<double>(nr)), gr(ng, std::vector<double>(nr));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i < ng && j < ng) gg[i][j] = full[i][j];
        if (i >= ng && j >= ng) rr[i - ng][j - ng] = full[i][j];
        if (i < ng && j >= ng) gr[i][j - ng] = full[i][j];
      }
    ASSERT_DOUBLE_EQ(one_nna(to_matrix(gg), to_matrix(rr), to_matrix(gr)), oracle::one_nna(gg, rr, gr));
    const auto split = split_merged(to_matrix(full), ng);
    ASSERT_EQ(split.gg, to_matrix(gg));
    ASSERT_EQ(split.gr, to_matrix(gr));
    ASSERT_EQ(split.rr, to_matrix(rr));
  }
}

TEST(OneNna, RejectsInconsistentShapes) {
  EXPECT_SHAPEVAL_ERROR(one_nna(DistanceMatrix(2, 2), DistanceMatrix(3, 3), DistanceMatrix(2, 2)),
                        ErrorCode::InconsistentDims);
}

TEST(OneNna, SameDistributionNearHalf) {
  double sum = 0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    std::mt19937_64 rng(1000 + s);
    const auto g = random_set(rng, 20, 16), r = random_set(rng, 20, 16);
    sum += set_metrics({self_cd_matrix(g), self_cd_matrix(r), pairwise_cd_matrix(g, r)}).one_nna;
  }
  EXPECT_NEAR(sum / seeds, 50.0, 10.0);
}

TEST(SetMetrics, IdenticalSetsAndScaleInvariance) {
  std::mt19937_64 rng(15);
  const auto g = random_set(rng, 8, 24);
  const auto self = self_cd_matrix(g);
  const auto same = set_metrics({self, self, self});
  EXPECT_EQ(same.cov, 100.0);
  EXPECT_EQ(same.mmd, 0.0);
  EXPECT_EQ(same.one_nna, 0.0);

  // Cloud indices shifted so the two sets differ, then uniformly scaled by 2.
  const auto r = random_set(rng, 8, 24);
  const SetMatrices m{self_cd_matrix(g), self_cd_matrix(r), pairwise_cd_matrix(g, r)};
  auto scale = [](std::vector<PointCloud> s) {
    for (auto& pc : s)
      for (auto& p : pc.points) p = 2.0 * p;
    return s;
  };
  const auto g2 = scale(g), r2 = scale(r);
  const auto a = set_metrics(m);
  const auto b = set_metrics({self_cd_matrix(g2), self_cd_matrix(r2), pairwise_cd_matrix(g2, r2)});
  EXPECT_EQ(a.cov, b.cov);
  EXPECT_EQ(a.one_nna, b.one_nna);
  EXPECT_NEAR(b.mmd, 4 * a.mmd, 1e-12 * b.mmd);
}

TEST(Tmd, Examples) {
  const std::vector<PointCloud> same(3, cloud({{0, 0, 0}, {1, 1, 0}}));
  EXPECT_EQ(tmd(same), 0.0);
  const std::vector<PointCloud> two{cloud({{0, 0, 0}}), cloud({{1, 0, 0}})};
  EXPECT_EQ(tmd(two), 4.0);
  std::mt19937_64 rng(16);
  const auto three = random_set(rng, 3, 50);
  EXPECT_NEAR(tmd(three), oracle::tmd(three), 1e-12);
  EXPECT_SHAPEVAL_ERROR(tmd(std::vector<PointCloud>{two[0]}), ErrorCode::NeedAtLeastTwo);
}

TEST(Uhd, Examples) {
  const auto partial = cloud({{0, 0, 0}, {3, 0, 0}});
  const std::vector<PointCloud> supersets{cloud({{0, 0, 0}, {3, 0, 0}, {5, 5, 5}}), cloud({{3, 0, 0}, {0, 0, 0}})};
  EXPECT_EQ(uhd(partial, supersets), 0.0);
  const std::vector<PointCloud> one{cloud({{1, 0, 0}})};
  EXPECT_EQ(uhd(partial, one), 2.0);
  const std::vector<PointCloud> dup{one[0], one[0], one[0]};
  EXPECT_EQ(uhd(partial, dup), 2.0);
  std::mt19937_64 rng(17);
  const auto p = testing::random_cloud(rng, 30);
  const auto c = random_set(rng, 4, 40);
  EXPECT_NEAR(uhd(p, c), oracle::uhd(p, c), 1e-12);
}

}  // namespace
}  // namespace shapeval
