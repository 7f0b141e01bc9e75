#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "robias/correlation.hpp"
#include "robias/error.hpp"
#include "robias/interval.hpp"
#include "robias/kmeans.hpp"
#include "robias/rng.hpp"

using namespace robias;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
}

TEST(Rng, SubstreamIgnoresParentConsumption) {
  Rng a(5), b(5);
  for (int i = 0; i < 17; ++i) b.next_u64();
  auto sa = a.substream({1, 2});
  auto sb = b.substream({1, 2});
  EXPECT_EQ(sa.next_u64(), sb.next_u64());
  EXPECT_NE(a.substream({1, 2}).next_u64(), a.substream({2, 1}).next_u64());
  EXPECT_EQ(derive_seed(9, {3}), derive_seed(9, {3}));
  EXPECT_NE(key_of("synth"), key_of("redundancy"));
}

TEST(Rng, RangesRespected) {
  Rng r(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = r.uniform01();
    EXPECT_GE(u, 0.0);
    EXPECT_LT(u, 1.0);
    EXPECT_LT(r.index(7), 7u);
    const double v = r.uniform(-2.0, 3.0);
    EXPECT_GE(v, -2.0);
    EXPECT_LE(v, 3.0);
  }
  EXPECT_EQ(r.uniform(4.0, 4.0), 4.0);
}

TEST(Interval, RejectsInverted) { EXPECT_THROW(Interval(2.0, 1.0), ArgumentError); }

TEST(IntervalSet, MergesAndSorts) {
  const IntervalSet s{{5, 6}, {0, 1}, {1, 2}, {5.5, 7}};
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s.parts()[0], Interval(0, 2));
  EXPECT_EQ(s.parts()[1], Interval(5, 7));
  EXPECT_DOUBLE_EQ(s.total_length(), 4.0);
  EXPECT_TRUE(s.contains(6.5));
  EXPECT_FALSE(s.contains(3.0));
}

TEST(IntervalSet, IntersectAndSubset) {
  const IntervalSet a{{0, 4}, {6, 10}};
  const IntervalSet b{{3, 7}};
  const auto c = a.intersect(b);
  EXPECT_EQ(c, (IntervalSet{{3, 4}, {6, 7}}));
  EXPECT_TRUE(c.subset_of(a));
  EXPECT_TRUE(c.subset_of(b));
  EXPECT_FALSE(a.subset_of(b));
  EXPECT_TRUE(a.intersect(IntervalSet{{20, 30}}).empty());
}

TEST(IntervalSet, InteriorsDisjoint) {
  EXPECT_TRUE(interiors_disjoint(IntervalSet{{0, 4}}, IntervalSet{{4, 6}}));
  EXPECT_FALSE(interiors_disjoint(IntervalSet{{0, 4}}, IntervalSet{{3, 6}}));
}

TEST(RelaxInterval, WorkedCases) {
  EXPECT_EQ(relax_interval({2, 8}, 1), Interval(1, 9));
  EXPECT_EQ(relax_interval({2, 8}, 0), Interval(2, 8));
  EXPECT_EQ(relax_interval({5, 5}, 2), Interval(3, 7));
  EXPECT_THROW(relax_interval({0, 1}, -0.1), ArgumentError);
}

TEST(RelaxInterval, MonotoneAndContaining) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-50, 50), du(0, 5);
  for (int i = 0; i < 1000; ++i) {
    double lo = u(gen), hi = u(gen);
    if (lo > hi) std::swap(lo, hi);
    double d1 = du(gen), d2 = du(gen);
    if (d1 > d2) std::swap(d1, d2);
    const Interval b(lo, hi);
    EXPECT_TRUE(relax_interval(b, d1).contains(b));
    EXPECT_TRUE(relax_interval(b, d2).contains(relax_interval(b, d1)));
  }
}

TEST(Kmeans, KEqualsN) {
  Matrix pts(4, 2);
  pts << 0, 0, 1, 0, 0, 1, 5, 5;
  const auto r = kmeans(pts, 4, 1);
  EXPECT_DOUBLE_EQ(r.inertia, 0.0);
  auto sizes = r.cluster_sizes();
  EXPECT_TRUE(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s == 1; }));
}

TEST(Kmeans, OneDimensionalPairs) {
  Matrix pts(4, 1);
  pts << 0, 1, 9, 10;
  const auto r = kmeans(pts, 2, 1);
  EXPECT_DOUBLE_EQ(r.inertia, 1.0);
  std::vector<double> c{r.centroids(0, 0), r.centroids(1, 0)};
  std::sort(c.begin(), c.end());
  EXPECT_DOUBLE_EQ(c[0], 0.5);
  EXPECT_DOUBLE_EQ(c[1], 9.5);
  EXPECT_DOUBLE_EQ(r.inertia, oracle::brute_force_inertia(pts, 2));
}

TEST(Kmeans, SingleClusterIsMean) {
  Matrix pts(5, 2);
  pts << 1, 2, 3, 4, 5, 6, 7, 8, 10, 0;
  const auto r = kmeans(pts, 1, 2);
  const Vector mean = pts.colwise().mean().transpose();
  EXPECT_NEAR((r.centroids.row(0).transpose() - mean).norm(), 0.0, 1e-12);
  EXPECT_NEAR(r.inertia, (pts.rowwise() - mean.transpose()).squaredNorm(), 1e-9);
}

TEST(Kmeans, Errors) {
  Matrix pts(2, 1);
  pts << 0, 1;
  EXPECT_THROW(kmeans(pts, 3, 1), ArgumentError);
  EXPECT_THROW(kmeans(pts, 0, 1), ArgumentError);
}

TEST(Kmeans, ResultInvariantsAndTrace) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int f = 0; f < 50; ++f) {
    Matrix pts(12, 2);
    for (Eigen::Index i = 0; i < pts.size(); ++i) pts.data()[i] = u(gen);
    const auto r = kmeans_once(pts, 3, static_cast<std::uint64_t>(f));
    for (std::size_t t = 1; t < r.inertia_trace.size(); ++t) {
      EXPECT_LE(r.inertia_trace[t], r.inertia_trace[t - 1] + 1e-12);
    }
    double inertia = 0.0;
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
      const Vector p = pts.row(i).transpose();
      const auto a = r.assignments[static_cast<std::size_t>(i)];
      inertia += squared_distance(p, r.centroids.row(static_cast<Eigen::Index>(a)).transpose());
      for (Eigen::Index c = 0; c < 3; ++c) {
        EXPECT_LE(squared_distance(p, r.centroids.row(static_cast<Eigen::Index>(a)).transpose()),
                  squared_distance(p, r.centroids.row(c).transpose()) + 1e-12);
      }
    }
    EXPECT_NEAR(inertia, r.inertia, 1e-9);
  }
}

TEST(Kmeans, EmptyClusterRepairKeepsK) {
  Matrix pts(6, 1);
  pts << 0, 0, 0, 0, 0, 100;
  const auto r = kmeans(pts, 3, 1);
  const auto sizes = r.cluster_sizes();
  EXPECT_EQ(sizes.size(), 3u);
  EXPECT_TRUE(std::all_of(sizes.begin(), sizes.end(), [](std::size_t s) { return s > 0; }));
}

TEST(Pearson, HandCases) {
  Matrix m(3, 3);
  m << 1, 6, 1, 2, 4, 0, 3, 2, 1;
  const auto c = pearson_corr(m);
  EXPECT_DOUBLE_EQ(c.coefficients(0, 0), 1.0);
  EXPECT_NEAR(c.coefficients(0, 1), -1.0, 1e-12);
  EXPECT_NEAR(c.coefficients(0, 2), 0.0, 1e-12);
  EXPECT_EQ(c.coefficients, c.coefficients.transpose());
}

TEST(Pearson, ZeroVarianceFlagged) {
  Matrix m(3, 2);
  m << 1, 4, 2, 4, 3, 4;
  const auto c = pearson_corr(m);
  EXPECT_FALSE(c.zero_variance[0]);
  EXPECT_TRUE(c.zero_variance[1]);
  EXPECT_EQ(c.coefficients(0, 1), 0.0);
  EXPECT_EQ(c.coefficients(1, 1), 0.0);
  EXPECT_THROW(pearson_corr(Matrix(1, 2)), ArgumentError);
}

TEST(Pearson, MatchesNaiveAndAffineInvariant) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> n(0, 1);
  for (int f = 0; f < 50; ++f) {
    Matrix m(20, 3);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, 0) = n(gen);
      m(i, 1) = 0.5 * m(i, 0) + n(gen);
      m(i, 2) = n(gen);
    }
    const auto c = pearson_corr(m);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        std::vector<double> x(20), y(20);
        for (int i = 0; i < 20; ++i) {
          x[i] = m(i, a);
          y[i] = m(i, b);
        }
        EXPECT_NEAR(c.coefficients(a, b), oracle::pearson(x, y), 1e-12);
        EXPECT_LE(std::fabs(c.coefficients(a, b)), 1.0);
      }
    Matrix scaled = m;
    scaled.col(1) = scaled.col(1) * 3.7 + Vector::Constant(20, 12.0);
    EXPECT_NEAR((pearson_corr(scaled).coefficients - c.coefficients).cwiseAbs().maxCoeff(), 0.0, 1e-12);
  }
}
