#pragma once

#include "opkde/types.hpp"

#include <string>
#include <vector>

namespace opkde {

enum class OvkFamily { Identity, Covariance, ConditionalCovariance };

/// Separable operator-valued kernel K(x, x') = k(x, x') * C where C is the
/// identity, the empirical output covariance, or the input-conditioned
/// output covariance regularized by `epsilon`.
struct OvkSpec {
  OvkFamily family = OvkFamily::Covariance;
  double epsilon = 1e-3;

  static OvkSpec identity();
  static OvkSpec covariance();
  static OvkSpec conditional(double epsilon = 1e-3);

  void validate() const;
  std::string describe() const;
};

std::string to_string(OvkFamily family);
/// Accepts identity|cov|covariance|condcov|conditional.
OvkFamily parse_family(const std::string& name);

/// Gram-side representation of the operator C. For the conditional family
/// the matrix is not symmetric and is kept as computed.
struct TMatrix {
  Matrix values;
  OvkFamily family = OvkFamily::Covariance;
};

/// T = I (identity), T = L (covariance), T = L - (k + n eps I)^{-1} k L
/// (conditional covariance).
TMatrix build_t(const OvkSpec& spec, const Matrix& k_gram, const Matrix& l_gram);

/// The multiplier M = n eps (k + n eps I)^{-1} with T = M L in the conditional
/// case. Symmetric positive definite and commutes with k.
Matrix conditional_multiplier(const Matrix& k_gram, double epsilon);

/// sum_{i,j} <K(x_i, x_j) phi_i, phi_j> for phi_i = sum_a coeffs[i](a) l(., y_a).
/// One coefficient vector per training point, each of length n.
double kernel_quadratic_form(const OvkSpec& spec, const Matrix& k_gram, const Matrix& l_gram,
                             const std::vector<Vector>& coeffs);

/// True when kernel_quadratic_form(...) >= -1e-8.
bool check_kernel_nonnegativity(const OvkSpec& spec, const Matrix& k_gram,
                                const Matrix& l_gram, const std::vector<Vector>& coeffs);

}  // namespace opkde
