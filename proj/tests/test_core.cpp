#include <gtest/gtest.h>

#include <limits>
#include <random>

#include "billiard/core.hpp"
#include "billiard/error.hpp"
#include "support.hpp"

using namespace billiard;
using billiard::testing::elimination_rank;
using billiard::testing::random_rank_matrix;

namespace {

TorusPoint tp(double x, double y) { return TorusPoint{Vec{{x, y}}}; }

}  // namespace

TEST(MinimalImage, IdentityIsZero) {
  const Vec d = minimal_image(tp(0.5, 0.5), tp(0.5, 0.5));
  EXPECT_EQ(d[0], 0.0);
  EXPECT_EQ(d[1], 0.0);
}

TEST(MinimalImage, WrapsToNearestRepresentative) {
  const Vec d = minimal_image(tp(0.9, 0.5), tp(0.1, 0.5));
  EXPECT_NEAR(d[0], 0.2, 1e-15);
  EXPECT_EQ(d[1], 0.0);
}

TEST(MinimalImage, TieResolvesToMinusHalf) {
  const Vec d = minimal_image(tp(0.25, 0.0), tp(0.75, 0.0));
  EXPECT_EQ(d[0], -0.5);
  EXPECT_EQ(d[1], 0.0);
  const Vec back = minimal_image(tp(0.75, 0.0), tp(0.25, 0.0));
  EXPECT_EQ(back[0], -0.5);
}

TEST(MinimalImage, AntisymmetricAndBounded) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const TorusPoint a = TorusPoint::normalized(Vec{{u(rng), u(rng), u(rng)}});
    const TorusPoint b = TorusPoint::normalized(Vec{{u(rng), u(rng), u(rng)}});
    const Vec ab = minimal_image(a, b);
    const Vec ba = minimal_image(b, a);
    for (int c = 0; c < 3; ++c) {
      EXPECT_GE(ab[c], -0.5);
      EXPECT_LT(ab[c], 0.5);
      if (std::abs(std::abs(ab[c]) - 0.5) > 1e-12) EXPECT_NEAR(ab[c], -ba[c], 1e-15);
    }
  }
}

TEST(TorusPoint, NormalizationIdempotent) {
  const TorusPoint p = TorusPoint::normalized(Vec{{-0.25, 3.75}});
  EXPECT_TRUE(p.is_normalized());
  EXPECT_DOUBLE_EQ(p.coords[0], 0.75);
  const TorusPoint again = TorusPoint::normalized(p.coords);
  EXPECT_EQ(again.coords, p.coords);
  EXPECT_LT(wrap_unit(-1e-18), 1.0);
}

TEST(Kernel, ZeroMatrixIsAllKernel) {
  const KernelResult k = kernel(Mat::Zero(3, 3), Tolerances{});
  EXPECT_EQ(k.dimension, 3);
}

TEST(Kernel, IdentityHasNoKernel) {
  const KernelResult k = kernel(Mat::Identity(4, 4), Tolerances{});
  EXPECT_EQ(k.dimension, 0);
  EXPECT_DOUBLE_EQ(k.sigma_min_nonkernel, 1.0);
}

TEST(Kernel, NoRowsMeansFullKernel) {
  const KernelResult k = kernel(Mat(0, 5), Tolerances{});
  EXPECT_EQ(k.dimension, 5);
  EXPECT_EQ(k.basis.cols(), 5);
}

TEST(Kernel, RejectsNonFinite) {
  Mat m = Mat::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(kernel(m, Tolerances{}), InvalidMatrix);
  EXPECT_THROW(kernel(Mat(2, 0), Tolerances{}), InvalidMatrix);
}

TEST(Kernel, SumOfTwoOuterProductsMatchesEliminationOracle) {
  std::mt19937_64 rng(2024);
  const Mat m = random_rank_matrix(4, 4, 2, rng);
  const KernelResult k = kernel(m, Tolerances{});
  EXPECT_EQ(elimination_rank(m), 2);
  EXPECT_EQ(k.dimension, 4 - elimination_rank(m));
}

TEST(Kernel, BasisIsOrthonormalAndAnnihilated) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Mat m = random_rank_matrix(7, 9, 4, rng);
    const KernelResult k = kernel(m, Tolerances{});
    ASSERT_EQ(k.dimension, 5);
    const Mat gram = k.basis.transpose() * k.basis;
    EXPECT_LT((gram - Mat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-12);
    const double norm = m.operatorNorm();
    for (Eigen::Index c = 0; c < k.basis.cols(); ++c) EXPECT_LE((m * k.basis.col(c)).norm(), 1e-8 * norm);
  }
}

// 1000 seeded trials, sizes up to 20, constructed rank k.
TEST(Kernel, ConstructedRankRecoveredInEveryTrial) {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(1, 20);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int rows = size(rng), cols = size(rng);
    std::uniform_int_distribution<int> rank(0, std::min(rows, cols));
    const int k = rank(rng);
    const Mat m = random_rank_matrix(rows, cols, k, rng);
    if (kernel(m, Tolerances{}).dimension != cols - k) ++failures;
  }
  EXPECT_EQ(failures, 0);
}

TEST(Kernel, InvariantUnderRowPermutationAndScaling) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> log_scale(-3.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Mat m = random_rank_matrix(6, 8, 3, rng);
    const int dim = kernel(m, Tolerances{}).dimension;
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(6);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 6, rng);
    EXPECT_EQ(kernel(perm * m, Tolerances{}).dimension, dim);
    EXPECT_EQ(kernel(std::pow(10.0, log_scale(rng)) * m, Tolerances{}).dimension, dim);
  }
}

TEST(Sampling, PointSatisfiesInvariants) {
  const SystemParams p = billiard::testing::params_2d(3, 0.1);
  const PhasePoint x = sample_phase_point(p, 42);
  EXPECT_TRUE(satisfies_invariants(x, p));
  EXPECT_LT(x.total_momentum().norm(), 1e-12);
  EXPECT_NEAR(x.kinetic(), 1.0, 1e-12);
}

TEST(Sampling, DeterministicForSeed) {
  const SystemParams p = billiard::testing::params_2d(4, 0.08);
  const PhasePoint a = sample_phase_point(p, 42);
  const PhasePoint b = sample_phase_point(p, 42);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.v, b.v);
  const PhasePoint c = sample_phase_point(p, 43);
  EXPECT_NE(a.q, c.q);
}

TEST(Sampling, NearCriticalPackingNeverOverlaps) {
  const SystemParams p = billiard::testing::params_2d(3, 0.24);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    try {
      const PhasePoint x = sample_phase_point(p, seed);
      EXPECT_GE(min_pair_distance(x), 2.0 * p.radius);
      EXPECT_TRUE(satisfies_invariants(x, p));
    } catch (const PackingError&) {
      SUCCEED();
    }
  }
}

TEST(Sampling, ThreeDimensionalTorus) {
  SystemParams p;
  p.n_balls = 5;
  p.nu = 3;
  p.radius = 0.12;
  const PhasePoint x = sample_phase_point(p, 3);
  EXPECT_TRUE(satisfies_invariants(x, p));
}

TEST(Params, ValidationRejectsBadValues) {
  SystemParams p = billiard::testing::params_2d();
  p.radius = -0.1;
  EXPECT_THROW(p.validate(), InvalidParams);
  p.radius = 0.25;
  EXPECT_THROW(p.validate(), InvalidParams);
  p = billiard::testing::params_2d();
  p.tol.rank_rel = 1.0;
  EXPECT_THROW(p.validate(), InvalidParams);
  p = billiard::testing::params_2d();
  p.n_balls = 1;
  EXPECT_THROW(p.validate(), InvalidParams);
}

TEST(Seeds, DerivedSeedsDifferAndRepeat) {
  EXPECT_EQ(derive_seed(1, 2), derive_seed(1, 2));
  EXPECT_NE(derive_seed(1, 2), derive_seed(1, 3));
  EXPECT_NE(derive_seed(1, 2), derive_seed(2, 2));
}
