#include "opkde/oracle.hpp"

#include <cmath>
#include <sstream>

namespace opkde {

void ExplicitFeatureProblem::validate() const {
  const Index n = input_features.rows();
  if (n == 0 || output_features.rows() != n) {
    throw DimensionError("oracle: input and output features must have the same nonzero row count");
  }
  if (!(lambda > 0.0)) throw ConfigError("oracle: lambda must be positive");
  if (family == OvkFamily::ConditionalCovariance && !(epsilon > 0.0)) {
    throw ConfigError("oracle: epsilon must be positive");
  }
  const Index nd = n * output_features.cols();
  if (nd > cap) {
    throw ConfigError("oracle: n*d = " + std::to_string(nd) + " exceeds the cap " +
                      std::to_string(cap));
  }
}

Matrix oracle_output_operator(const ExplicitFeatureProblem& prob) {
  prob.validate();
  const auto& f = prob.output_features;
  const auto& x = prob.input_features;
  const double n = static_cast<double>(f.rows());
  const Index d = f.cols();
  switch (prob.family) {
    case OvkFamily::Identity:
      return Matrix::Identity(d, d);
    case OvkFamily::Covariance:
      return f.transpose() * f / n;
    case OvkFamily::ConditionalCovariance: {
      const Matrix c_yy = f.transpose() * f / n;
      const Matrix c_yx = f.transpose() * x / n;
      Matrix c_xx = x.transpose() * x / n;
      c_xx.diagonal().array() += prob.epsilon;
      const Matrix c_xy = c_yx.transpose();
      return c_yy - c_yx * c_xx.fullPivLu().solve(c_xy);
    }
  }
  throw ConfigError("oracle: unhandled family");
}

Vector oracle_regression(const ExplicitFeatureProblem& prob, const Eigen::Ref<const Vector>& x) {
  const Matrix c = oracle_output_operator(prob);
  const auto& xs = prob.input_features;
  const auto& f = prob.output_features;
  if (x.size() != xs.cols()) throw DimensionError("oracle: query input has wrong dimension");
  const Index n = xs.rows();
  const Index d = f.cols();

  Matrix block(n * d, n * d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double kij = xs.row(i).dot(xs.row(j));
      block.block(i * d, j * d, d, d) = kij * c;
    }
  }
  block.diagonal().array() += prob.lambda;

  Vector phi(n * d);
  for (Index i = 0; i < n; ++i) phi.segment(i * d, d) = f.row(i).transpose();
  const Vector psi = block.fullPivLu().solve(phi);

  Vector g = Vector::Zero(d);
  for (Index i = 0; i < n; ++i) {
    g += xs.row(i).dot(x) * (c * psi.segment(i * d, d));
  }
  return g;
}

double oracle_score(const ExplicitFeatureProblem& prob, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& y_feat) {
  if (y_feat.size() != prob.output_features.cols()) {
    throw DimensionError("oracle: candidate features have wrong dimension");
  }
  return (oracle_regression(prob, x) - y_feat).squaredNorm();
}

double oracle_kernel_trick_residual(const Matrix& t, const SampleMatrix& anchor_features,
                                    const Eigen::Ref<const Vector>& phi1,
                                    const Eigen::Ref<const Vector>& phi2) {
  const Index d = t.rows();
  if (t.cols() != d || anchor_features.cols() != d || phi1.size() != d || phi2.size() != d) {
    throw DimensionError("kernel trick check: dimension mismatch");
  }
  const Vector lhs_vec = t * phi1;
  const double lhs = lhs_vec.dot(phi2);

  // Mercer expansion of l on the anchors: L_Z = sum_j mu_j u_j u_j^T,
  // gamma_j(y) = (1/mu_j) sum_a u_j(a) l(y, z_a).
  const Matrix lz = anchor_features * anchor_features.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(lz);
  const Vector& mu = eig.eigenvalues();
  const Matrix& u = eig.eigenvectors();
  const double cutoff = 1e-10 * std::max(1.0, mu.cwiseAbs().maxCoeff());

  const Vector l1 = anchor_features * phi1;  // l(y1, z_a)
  const Vector l2 = anchor_features * phi2;
  std::vector<Index> keep;
  for (Index j = 0; j < mu.size(); ++j) {
    if (mu(j) > cutoff) keep.push_back(j);
  }
  const Index r = static_cast<Index>(keep.size());
  // Eigenfunctions as functions in the RKHS have feature coefficients
  // w_j = Z^T u_j / mu_j; <T gamma_j, gamma_i> = w_i^T T w_j.
  Matrix w(d, r);
  Vector g1(r), g2(r), m(r);
  for (Index c = 0; c < r; ++c) {
    const Index j = keep[static_cast<std::size_t>(c)];
    w.col(c) = anchor_features.transpose() * u.col(j) / mu(j);
    g1(c) = u.col(j).dot(l1) / mu(j);
    g2(c) = u.col(j).dot(l2) / mu(j);
    m(c) = mu(j);
  }
  const Matrix t_basis = w.transpose() * t * w;  // (i, j) = <T gamma_j, gamma_i>
  double rhs = 0.0;
  for (Index i = 0; i < r; ++i) {
    for (Index j = 0; j < r; ++j) {
      rhs += m(j) * g1(j) * m(i) * t_basis(i, j) * g2(i);
    }
  }
  return std::abs(lhs - rhs);
}

}  // namespace opkde
