#pragma once

#include "opkde/ovk.hpp"
#include "opkde/types.hpp"

namespace opkde {

/// Brute-force KDE in explicit finite feature coordinates.
///
/// The input kernel is the linear kernel on `input_features`; the output
/// kernel is the linear kernel on `output_features`. The operator C is built
/// as a d x d matrix and the regression is solved with the full nd x nd block
/// operator matrix [k(x_i, x_j) C]_{ij} + lambda I.
struct ExplicitFeatureProblem {
  SampleMatrix input_features;   // n x p
  SampleMatrix output_features;  // n x d
  double lambda = 0.1;
  double epsilon = 1e-3;
  OvkFamily family = OvkFamily::Covariance;
  Index cap = 100;  // largest n*d accepted

  void validate() const;
};

/// C as a d x d matrix: I, (1/n) F^T F, or
/// C_YY - C_YX (C_XX + eps I)^{-1} C_XY with all empirical operators explicit.
Matrix oracle_output_operator(const ExplicitFeatureProblem& prob);

/// g(x) = sum_i k(x, x_i) C psi_i with Psi = (K + lambda I)^{-1} Phi.
Vector oracle_regression(const ExplicitFeatureProblem& prob, const Eigen::Ref<const Vector>& x);

/// |g(x) - y_feat|^2. Differs from the Gram-path score by |g(x)|^2, which does
/// not depend on the candidate.
double oracle_score(const ExplicitFeatureProblem& prob, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y_feat);

/// |<T phi1, phi2> - [T l(y1, .)](y2)| for a symmetric T in feature
/// coordinates. The right side goes through the Mercer expansion of the
/// output kernel on `anchor_features` (rows spanning the feature space) and
/// touches phi1, phi2 only through kernel evaluations.
double oracle_kernel_trick_residual(const Matrix& t, const SampleMatrix& anchor_features,
                                    const Eigen::Ref<const Vector>& phi1,
                                    const Eigen::Ref<const Vector>& phi2);

}  // namespace opkde
