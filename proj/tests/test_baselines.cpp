#include <gtest/gtest.h>

#include "robias/baselines.hpp"
#include "robias/error.hpp"

using namespace robias;

namespace {

Dataset imbalanced(std::size_t a, std::size_t b, double gap = 3.0, std::uint64_t seed = 1) {
  const auto big = make_toy_blobs(std::max(a, b), {Vector::Zero(2), Vector::Constant(2, gap)}, 1.0, seed);
  std::vector<std::size_t> keep;
  std::size_t na = 0, nb = 0;
  for (std::size_t i = 0; i < big.rows(); ++i) {
    if (big.label(i) == 0 && na < a) { keep.push_back(i); ++na; }
    if (big.label(i) == 1 && nb < b) { keep.push_back(i); ++nb; }
  }
  return big.select(keep);
}

bool is_original_row(const Dataset& src, const Vector& x, int label) {
  for (std::size_t i = 0; i < src.rows(); ++i)
    if (src.label(i) == label && src.row(i) == x) return true;
  return false;
}

// x lies on a segment between two same-class rows of src.
bool on_segment(const Dataset& src, const Vector& x, int label) {
  for (std::size_t i = 0; i < src.rows(); ++i) {
    if (src.label(i) != label) continue;
    for (std::size_t j = 0; j < src.rows(); ++j) {
      if (src.label(j) != label) continue;
      const Vector d = src.row(j) - src.row(i);
      const double t = d.squaredNorm() > 0 ? (x - src.row(i)).dot(d) / d.squaredNorm() : 0.0;
      if (t < -1e-12 || t > 1 + 1e-12) continue;
      if ((src.row(i) + t * d - x).norm() < 1e-9) return true;
    }
  }
  return false;
}

}  // namespace

TEST(Rus, Equalize) {
  const auto ds = imbalanced(27, 11);
  const auto out = rus(ds, {ResampleMethod::rus_equalize}, 1);
  EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{11, 11}));
  for (std::size_t i = 0; i < out.rows(); ++i) EXPECT_TRUE(is_original_row(ds, out.row(i), out.label(i)));
}

TEST(Rus, Fraction) {
  const auto ds = make_toy_blobs(40, {Vector::Zero(2), Vector::Ones(2), Vector::Constant(2, 2.0)}, 1.0, 2);
  ResamplePlan plan{ResampleMethod::rus_fraction, 0.25};
  EXPECT_EQ(rus(ds, plan, 1).class_counts(), (std::vector<std::size_t>{30, 30, 30}));
  plan.fraction = 0.0;
  EXPECT_EQ(rus(ds, plan, 1).features(), ds.features());
}

TEST(Ros, ReplicatesToMajority) {
  const auto ds = imbalanced(27, 11);
  const auto out = ros(ds, 1);
  EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{27, 27}));
  EXPECT_EQ(out.count_synthetic(), 16u);
  for (std::size_t i = 0; i < out.rows(); ++i) EXPECT_TRUE(is_original_row(ds, out.row(i), out.label(i)));
  const auto balanced = imbalanced(10, 10);
  EXPECT_EQ(ros(balanced, 1).features(), balanced.features());
}

TEST(Smote, CountsAndSegments) {
  const auto ds = imbalanced(27, 11);
  const auto out = smote(ds, 5, 3);
  EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{27, 27}));
  EXPECT_EQ(out.count_synthetic(), 16u);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    if (out.provenance()[i] == Provenance::synthetic) EXPECT_TRUE(on_segment(ds, out.row(i), out.label(i)));
  }
}

TEST(Smote, LambdaZeroDuplicates) {
  const auto ds = imbalanced(20, 8);
  const auto out = smote(ds, 5, 3, 0.0);
  for (std::size_t i = 0; i < out.rows(); ++i) EXPECT_TRUE(is_original_row(ds, out.row(i), out.label(i)));
}

TEST(Smote, TooFewNeighbours) {
  EXPECT_THROW(smote(imbalanced(20, 5), 5, 1), NeighborError);
}

TEST(Adasyn, SeparatedClassesInfeasible) {
  EXPECT_THROW(adasyn(imbalanced(20, 8, 100.0), 5, 1), InfeasibleError);
}

TEST(Adasyn, HardPointGetsAllSynthetics) {
  // Majority along y=5; minority cluster along y=0 plus one point among the majority.
  Matrix x(17, 2);
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    x.row(i) << i, 5;
    labels.push_back(0);
  }
  for (int i = 0; i < 6; ++i) {
    x.row(10 + i) << 20 + i, 0;
    labels.push_back(1);
  }
  x.row(16) << 4.2, 5;
  labels.push_back(1);
  const Dataset ds(x, labels, {"maj", "min"}, {});
  const auto out = adasyn(ds, 5, 1);
  EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{10, 10}));
  Vector hard(2);
  hard << 4.2, 5;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    if (out.provenance()[i] != Provenance::synthetic) continue;
    const Vector v = out.row(i);
    // Cluster-seeded rows would stay on y=0; rows seeded by the hard point
    // lie on a segment from it toward the cluster.
    EXPECT_GT(v(1), 0.0);
    const double lambda = (5.0 - v(1)) / 5.0;
    const double target_x = hard(0) + (v(0) - hard(0)) / std::max(lambda, 1e-12);
    EXPECT_GE(target_x, 20.0 - 1e-9);
    EXPECT_LE(target_x, 25.0 + 1e-9);
  }
}

TEST(Adasyn, BalancesFeasibleFixture) {
  const auto ds = imbalanced(30, 12, 1.0, 4);
  const auto out = adasyn(ds, 5, 2);
  EXPECT_EQ(out.class_counts(), (std::vector<std::size_t>{30, 30}));
  for (std::size_t i = 0; i < out.rows(); ++i) {
    if (out.provenance()[i] == Provenance::synthetic) EXPECT_TRUE(on_segment(ds, out.row(i), out.label(i)));
  }
}

TEST(Resample, DeterministicUnderSeed) {
  const auto ds = imbalanced(27, 11, 1.0);
  for (auto m : {ResampleMethod::rus_equalize, ResampleMethod::ros, ResampleMethod::smote,
                 ResampleMethod::adasyn}) {
    ResamplePlan plan{m};
    EXPECT_EQ(resample(ds, plan, 4).features(), resample(ds, plan, 4).features()) << to_string(m);
  }
  EXPECT_EQ(parse_resample_method("RUS-fraction"), ResampleMethod::rus_fraction);
  EXPECT_THROW(parse_resample_method("tomek"), ArgumentError);
}

TEST(NearestNeighbors, TiesToLowerIndex) {
  Matrix pool(4, 1);
  pool << 1, -1, 1, 5;
  const auto nn = nearest_neighbors(pool, Vector::Zero(1), 2);
  EXPECT_EQ(nn, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(nearest_neighbors(pool, Vector::Zero(1), 2, 0), (std::vector<std::size_t>{1, 2}));
}
