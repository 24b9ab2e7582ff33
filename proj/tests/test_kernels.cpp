#include "opkde/kernels.hpp"

#include "reference/reference_values.hpp"
#include "test_helpers.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace opkde;

namespace {

Vector v2(double a, double b) { return (Vector(2) << a, b).finished(); }

}  // namespace

TEST(EvalKernel, RbfAtZeroDistanceIsOne) {
  EXPECT_EQ(eval_kernel(ScalarKernelSpec::rbf(1.0), v2(0, 0), v2(0, 0)), 1.0);
}

TEST(EvalKernel, RbfUnitDistance) {
  EXPECT_NEAR(eval_kernel(ScalarKernelSpec::rbf(1.0), v2(1, 0), v2(0, 0)), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(std::exp(-0.5), 0.60653, 1e-5);
}

TEST(EvalKernel, PolynomialCube) {
  EXPECT_DOUBLE_EQ(eval_kernel(ScalarKernelSpec::polynomial(3), v2(1, 1), v2(1, 1)), 8.0);
  EXPECT_DOUBLE_EQ(eval_kernel(ScalarKernelSpec::polynomial(2, 1.0), v2(1, 2), v2(3, -1)), 4.0);
}

TEST(EvalKernel, Linear) {
  EXPECT_DOUBLE_EQ(eval_kernel(ScalarKernelSpec::linear(), v2(1, 2), v2(3, 4)), 11.0);
}

TEST(EvalKernel, DimensionMismatchThrows) {
  const Vector a = Vector::Zero(3);
  EXPECT_THROW(eval_kernel(ScalarKernelSpec::rbf(1.0), a, v2(0, 0)), DimensionError);
}

TEST(KernelSpec, Validation) {
  EXPECT_THROW(ScalarKernelSpec::rbf(0.0).validate(), ConfigError);
  EXPECT_THROW(ScalarKernelSpec::rbf(-1.0).validate(), ConfigError);
  EXPECT_THROW(ScalarKernelSpec::polynomial(0).validate(), ConfigError);
  EXPECT_THROW(ScalarKernelSpec::polynomial(2, -0.5).validate(), ConfigError);
  EXPECT_NO_THROW(ScalarKernelSpec::linear().validate());
}

TEST(Gram, SingleSample) {
  Matrix x(1, 2);
  x << 0.3, -0.2;
  const Matrix g = gram(ScalarKernelSpec::rbf(1.0), x);
  ASSERT_EQ(g.rows(), 1);
  EXPECT_EQ(g(0, 0), 1.0);
}

TEST(Gram, LinearOnBasis) {
  const Matrix x = Matrix::Identity(2, 2);
  EXPECT_EQ(gram(ScalarKernelSpec::linear(), x), Matrix::Identity(2, 2));
}

TEST(Gram, RbfOnLine) {
  Matrix x(3, 2);
  x << 0, 0, 1, 0, 2, 0;
  const Matrix g = gram(ScalarKernelSpec::rbf(1.0), x);
  EXPECT_NEAR(g(0, 1), std::exp(-0.5), 1e-15);
  EXPECT_NEAR(g(0, 2), std::exp(-2.0), 1e-15);
  EXPECT_NEAR(g(1, 2), std::exp(-0.5), 1e-15);
}

TEST(Gram, MatchesReferenceFixture) {
  const auto d = testutil::fixture_dataset();
  const Matrix k = gram(ScalarKernelSpec::rbf(1.0), d.inputs);
  const Matrix l = gram(ScalarKernelSpec::rbf(1.5), d.outputs);
  EXPECT_LT((k - testutil::from_col_major(ref::kRefK, 4, 4)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((l - testutil::from_col_major(ref::kRefL, 4, 4)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Gram, RectangularEntries) {
  opkde::Rng rng(3);
  const Matrix a = testutil::random_matrix(rng, 4, 3);
  const Matrix b = testutil::random_matrix(rng, 2, 3);
  const auto spec = ScalarKernelSpec::polynomial(2, 1.0);
  const Matrix g = gram(spec, a, b);
  ASSERT_EQ(g.rows(), 4);
  ASSERT_EQ(g.cols(), 2);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 2; ++j) {
      EXPECT_NEAR(g(i, j), eval_kernel(spec, a.row(i).transpose(), b.row(j).transpose()), 1e-12);
    }
  }
}

TEST(Gram, EmptyThrows) {
  const Matrix empty(0, 2);
  EXPECT_THROW(gram(ScalarKernelSpec::rbf(1.0), empty), DataError);
}

TEST(Gram, DimensionMismatchThrows) {
  EXPECT_THROW(gram(ScalarKernelSpec::rbf(1.0), Matrix::Zero(2, 2), Matrix::Zero(2, 3)),
               DimensionError);
}

TEST(GramProperty, SymmetricPsdWithUnitDiagonal) {
  opkde::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + static_cast<Index>(rng.below(30));
    const Index dim = 1 + static_cast<Index>(rng.below(5));
    const Matrix x = testutil::random_matrix(rng, n, dim) * (0.1 + 3.0 * rng.uniform());
    for (const auto& spec : {ScalarKernelSpec::rbf(0.2 + 2.0 * rng.uniform()),
                             ScalarKernelSpec::polynomial(3, 1.0), ScalarKernelSpec::linear()}) {
      const Matrix g = gram(spec, x);
      EXPECT_EQ((g - g.transpose()).cwiseAbs().maxCoeff(), 0.0);
      const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
      Eigen::SelfAdjointEigenSolver<Matrix> es(g);
      EXPECT_GE(es.eigenvalues().minCoeff() / scale, -1e-8);
      if (spec.kind == KernelKind::Rbf) {
        EXPECT_TRUE((g.diagonal().array() == 1.0).all());
        EXPECT_GT(g.minCoeff(), 0.0 - 1e-300);
        EXPECT_LE(g.maxCoeff(), 1.0);
      }
    }
  }
}

TEST(GramVector, FirstComponentOneAtTrainingPoint) {
  Matrix t(3, 2);
  t << 0.1, 0.2, 1, 1, -1, 0;
  const Vector kx = gram_vector(ScalarKernelSpec::rbf(1.0), t.row(0).transpose(), t);
  EXPECT_EQ(kx(0), 1.0);
}

TEST(GramVector, DistanceSqrtTwo) {
  Matrix t(1, 2);
  t << 0, 0;
  const Vector kx = gram_vector(ScalarKernelSpec::rbf(1.0), v2(1, 1), t);
  EXPECT_NEAR(kx(0), std::exp(-1.0), 1e-15);
}

TEST(GramVector, MatchesAugmentedGramRow) {
  opkde::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix s = testutil::random_matrix(rng, 3 + trial % 5, 3);
    const Vector x = testutil::random_vector(rng, 3);
    Matrix aug(s.rows() + 1, 3);
    aug << s, x.transpose();
    for (const auto& spec :
         {ScalarKernelSpec::rbf(0.7), ScalarKernelSpec::polynomial(2, 0.5), ScalarKernelSpec::linear()}) {
      const Vector kx = gram_vector(spec, x, s);
      const Matrix g = gram(spec, aug);
      EXPECT_LT((kx - g.row(s.rows()).head(s.rows()).transpose()).cwiseAbs().maxCoeff(), 1e-14);
    }
  }
}

TEST(GramVector, DimensionMismatchThrows) {
  EXPECT_THROW(gram_vector(ScalarKernelSpec::rbf(1.0), Vector::Zero(3), Matrix::Zero(2, 2)),
               DimensionError);
}
