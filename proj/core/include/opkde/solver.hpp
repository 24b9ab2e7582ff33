#pragma once

#include "opkde/lowrank.hpp"
#include "opkde/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace opkde {

/// Extra structure available when T = M L with M = n eps (k + n eps I)^{-1}.
/// Lets the eigen backend diagonalize the non-symmetric T by similarity.
struct ConditionalStructure {
  Matrix l_gram;
  double epsilon = 0.0;
};

/// (k kron T + shift I) vec(alpha) = vec(I_n).
///
/// For the covariance families the shift is n * lambda. The identity family
/// uses T = I with shift lambda, which reproduces scalar kernel ridge.
struct KroneckerSystem {
  Matrix k_gram;
  Matrix t_matrix;
  double n_lambda = 0.0;
  std::optional<ConditionalStructure> conditional;

  Index size() const { return k_gram.rows(); }
  void validate() const;
};

enum class Backend { Dense, Eigen, LowRank };

std::string to_string(Backend backend);
Backend parse_backend(const std::string& name);

struct SolveArtifact {
  Backend backend = Backend::Dense;
  Matrix alpha;  // n x n, vec(alpha) solves the Kronecker system
  double residual = 0.0;  // |(k kron T + shift I) vec(alpha) - vec(I)| / |vec(I)|
};

inline constexpr Index kDefaultDenseCap = 2500;

/// Relative residual of alpha against the system, computed as
/// |T alpha k + shift alpha - I|_F / sqrt(n).
double system_residual(const KroneckerSystem& sys, const Matrix& alpha);

/// Materializes the n^2 x n^2 matrix and solves it with partial-pivot LU.
/// Throws ConfigError when n^2 exceeds `cap`.
SolveArtifact solve_dense(const KroneckerSystem& sys, Index cap = kDefaultDenseCap);

/// O(n^3) solve through eigendecompositions of k and T. T must be symmetric,
/// unless the system carries ConditionalStructure, in which case T = M L is
/// diagonalized through the symmetric similar matrix M^{1/2} L M^{1/2}.
SolveArtifact solve_eigen(const KroneckerSystem& sys);

/// w(x) = (k_x^T kron T) vec(alpha) = T alpha k_x. The score's linear part is L_y^T w(x).
Vector preimage_linear_form(const SolveArtifact& artifact, const KroneckerSystem& sys,
                            const Eigen::Ref<const Vector>& k_x);

struct LowRankOptions {
  double chol_tol = 1e-8;
  Index max_rank = 0;  // 0: no cap beyond n
  Index max_joint_rank = 4096;  // cap on m1 * m2
};

/// Woodbury fast path for the covariance family (T = L).
///
/// With k ~= U U^T and L ~= V V^T,
///   w(x) = (1/s) [ L k_x - L V Z U^T k_x ],
///   vec(Z) = (s I + U^T U kron V^T V)^{-1} vec(V^T U),
/// so only an (m1 m2) x (m1 m2) system is factorized.
class LowRankSolver {
 public:
  LowRankSolver(const Matrix& k_gram, const Matrix& l_gram, double n_lambda,
                const LowRankOptions& options = {});

  Vector linear_form(const Eigen::Ref<const Vector>& k_x) const;
  /// One linear form per column of `k_cols` (n x m).
  Matrix linear_forms(const Eigen::Ref<const Matrix>& k_cols) const;

  const CholeskyFactor& k_factor() const { return k_factor_; }
  const CholeskyFactor& l_factor() const { return l_factor_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  Matrix l_gram_;
  double n_lambda_;
  CholeskyFactor k_factor_;
  CholeskyFactor l_factor_;
  Matrix lv_;  // L V
  Matrix z_;   // m2 x m1
  std::vector<std::string> warnings_;
};

/// One-shot form of LowRankSolver(...).linear_form(k_x).
Vector solve_lowrank(const Matrix& k_gram, const Matrix& l_gram, double n_lambda, double chol_tol,
                     const Eigen::Ref<const Vector>& k_x);

}  // namespace opkde
