#include "opkde/kde.hpp"
#include "opkde/oracle.hpp"

#include "test_helpers.hpp"

#include <gtest/gtest.h>

using namespace opkde;

namespace {

ExplicitFeatureProblem random_problem(opkde::Rng& rng, Index n, Index p, Index d, OvkFamily family) {
  ExplicitFeatureProblem prob;
  prob.input_features = testutil::random_matrix(rng, n, p);
  prob.output_features = testutil::random_matrix(rng, n, d);
  prob.lambda = 0.05 + rng.uniform();
  prob.epsilon = 0.05 + rng.uniform();
  prob.family = family;
  return prob;
}

FittedKde gram_model(const ExplicitFeatureProblem& prob) {
  Dataset d;
  d.inputs = prob.input_features;
  d.outputs = prob.output_features;
  KdeParams params;
  params.input_kernel = ScalarKernelSpec::linear();
  params.output_kernel = ScalarKernelSpec::linear();
  params.ovk = prob.family == OvkFamily::Identity     ? OvkSpec::identity()
               : prob.family == OvkFamily::Covariance ? OvkSpec::covariance()
                                                      : OvkSpec::conditional(prob.epsilon);
  params.lambda = prob.lambda;
  return FittedKde::fit(d, params);
}

}  // namespace

TEST(Oracle, IdentityOneSampleIsScalarRidge) {
  ExplicitFeatureProblem prob;
  prob.input_features = Matrix::Constant(1, 1, 2.0);
  prob.output_features = (Matrix(1, 2) << 1.0, -1.0).finished();
  prob.lambda = 0.5;
  prob.family = OvkFamily::Identity;
  // k = 4, psi = y / 4.5, g(x) = k(x, x1) psi.
  const Vector x = Vector::Constant(1, 1.0);
  const Vector g = oracle_regression(prob, x);
  EXPECT_NEAR(g(0), 2.0 / 4.5, 1e-15);
  EXPECT_NEAR(g(1), -2.0 / 4.5, 1e-15);
}

TEST(Oracle, ZeroOutputFeaturesGiveZeroRegression) {
  opkde::Rng rng(1);
  auto prob = random_problem(rng, 4, 2, 3, OvkFamily::Covariance);
  prob.output_features.setZero();
  EXPECT_EQ(oracle_regression(prob, testutil::random_vector(rng, 2)).norm(), 0.0);
}

TEST(Oracle, ScoreDiffersFromGramPathByConstant) {
  opkde::Rng rng(2);
  for (OvkFamily family : {OvkFamily::Identity, OvkFamily::Covariance, OvkFamily::ConditionalCovariance}) {
    for (int trial = 0; trial < 20; ++trial) {
      const auto prob = random_problem(rng, 4, 2, 3, family);
      const auto model = gram_model(prob);
      const Vector x = testutil::random_vector(rng, 2);
      const Matrix cands = testutil::random_matrix(rng, 5, 3);
      const Vector gram_scores = model.scores(x, cands);
      Vector oracle_scores(5);
      for (Index c = 0; c < 5; ++c) oracle_scores(c) = oracle_score(prob, x, cands.row(c).transpose());
      const Vector diff = oracle_scores - gram_scores;
      const double g2 = oracle_regression(prob, x).squaredNorm();
      for (Index c = 0; c < 5; ++c) {
        EXPECT_NEAR(diff(c), g2, 1e-9 * std::max(1.0, oracle_scores.cwiseAbs().maxCoeff()));
      }
      EXPECT_EQ(argmin_lowest(gram_scores), argmin_lowest(oracle_scores));
    }
  }
}

TEST(Oracle, OutputOperatorForms) {
  opkde::Rng rng(3);
  const auto prob = random_problem(rng, 5, 2, 3, OvkFamily::Covariance);
  const Matrix c = oracle_output_operator(prob);
  const Matrix& f = prob.output_features;
  EXPECT_LT((c - f.transpose() * f / 5.0).cwiseAbs().maxCoeff(), 1e-15);
  auto id = prob;
  id.family = OvkFamily::Identity;
  EXPECT_TRUE(oracle_output_operator(id) == Matrix::Identity(3, 3));
  auto cond = prob;
  cond.family = OvkFamily::ConditionalCovariance;
  cond.epsilon = 1e12;
  EXPECT_LT((oracle_output_operator(cond) - c).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Oracle, CapAndValidation) {
  opkde::Rng rng(4);
  auto prob = random_problem(rng, 6, 2, 5, OvkFamily::Covariance);
  prob.cap = 29;
  EXPECT_THROW(oracle_output_operator(prob), ConfigError);
  prob.cap = 30;
  EXPECT_NO_THROW(oracle_output_operator(prob));
  prob.lambda = 0.0;
  EXPECT_THROW(oracle_output_operator(prob), ConfigError);
  auto bad = random_problem(rng, 4, 2, 3, OvkFamily::Covariance);
  bad.output_features = Matrix::Zero(3, 3);
  EXPECT_THROW(oracle_output_operator(bad), DimensionError);
  auto good = random_problem(rng, 4, 2, 3, OvkFamily::Covariance);
  EXPECT_THROW(oracle_score(good, Vector::Zero(2), Vector::Zero(2)), DimensionError);
}

TEST(KernelTrick, IdentityIsUsualKernelTrick) {
  opkde::Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const Matrix anchors = testutil::random_matrix(rng, d + 2, d);
    EXPECT_LE(oracle_kernel_trick_residual(Matrix::Identity(d, d), anchors,
                                           testutil::random_vector(rng, d),
                                           testutil::random_vector(rng, d)),
              1e-12);
  }
}

TEST(KernelTrick, EmpiricalCovarianceFromThreeSamples) {
  opkde::Rng rng(6);
  const Matrix samples = testutil::random_matrix(rng, 3, 4);
  const Matrix t = samples.transpose() * samples / 3.0;
  const Matrix anchors = testutil::random_matrix(rng, 6, 4);
  EXPECT_LE(oracle_kernel_trick_residual(t, anchors, testutil::random_vector(rng, 4),
                                         testutil::random_vector(rng, 4)),
            1e-10);
}

TEST(KernelTrick, RandomSymmetricPsd) {
  opkde::Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Index d = 1 + static_cast<Index>(rng.below(5));
    const Matrix a = testutil::random_matrix(rng, d, d);
    const Matrix anchors = testutil::random_matrix(rng, d + 3, d);
    EXPECT_LE(oracle_kernel_trick_residual(a * a.transpose(), anchors,
                                           testutil::random_vector(rng, d),
                                           testutil::random_vector(rng, d)),
              1e-10);
  }
}

TEST(KernelTrick, DimensionMismatchThrows) {
  EXPECT_THROW(oracle_kernel_trick_residual(Matrix::Identity(3, 3), Matrix::Zero(4, 2),
                                            Vector::Zero(3), Vector::Zero(3)),
               DimensionError);
}
