#include "opkde/solver.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace opkde {

void KroneckerSystem::validate() const {
  const Index n = k_gram.rows();
  if (n == 0) throw DimensionError("KroneckerSystem: empty system");
  if (k_gram.cols() != n || t_matrix.rows() != n || t_matrix.cols() != n) {
    throw DimensionError("KroneckerSystem: k and T must both be " + std::to_string(n) + "x" +
                         std::to_string(n));
  }
  if (!(n_lambda > 0.0) || !std::isfinite(n_lambda)) {
    throw ConfigError("KroneckerSystem: n*lambda must be positive");
  }
  if (conditional) {
    if (conditional->l_gram.rows() != n || conditional->l_gram.cols() != n) {
      throw DimensionError("KroneckerSystem: conditional L has wrong size");
    }
    if (!(conditional->epsilon > 0.0)) {
      throw ConfigError("KroneckerSystem: conditional epsilon must be positive");
    }
  }
}

std::string to_string(Backend backend) {
  switch (backend) {
    case Backend::Dense:
      return "dense";
    case Backend::Eigen:
      return "eigen";
    case Backend::LowRank:
      return "lowrank";
  }
  return "unknown";
}

Backend parse_backend(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "dense") return Backend::Dense;
  if (lower == "eigen") return Backend::Eigen;
  if (lower == "lowrank" || lower == "low-rank") return Backend::LowRank;
  throw ConfigError("unknown backend '" + name + "' (expected dense|eigen|lowrank)");
}

double system_residual(const KroneckerSystem& sys, const Matrix& alpha) {
  const Index n = sys.size();
  Matrix r = sys.t_matrix * alpha * sys.k_gram + sys.n_lambda * alpha;
  r.diagonal().array() -= 1.0;
  return r.norm() / std::sqrt(static_cast<double>(n));
}

namespace {

// The Kronecker operator is SPD-like with spectrum bounded below by the
// shift, so a genuinely singular solve cannot happen for shift > 0. Residuals
// between 1e-8 and this bound come from tiny shifts, not from singularity.
constexpr double kResidualFailure = 1e-6;

void check_residual(const SolveArtifact& art, const char* where) {
  if (!std::isfinite(art.residual) || art.residual > kResidualFailure) {
    std::ostringstream os;
    os << where << ": system is numerically singular (relative residual " << art.residual
       << ")";
    throw NumericalError(os.str());
  }
}

bool is_symmetric(const Matrix& m) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

// T = P diag(t) P^{-1} and k = Qk diag(k) Qk^T. Solves T X k + shift X = R as
// X = P A Qk^T with A_ij = (P^{-1} R Qk)_ij / (t_i k_j + shift).
struct SpectralForm {
  Matrix p;
  Matrix p_inv;
  Vector t_eigs;
  Matrix qk;
  Vector k_eigs;
  double shift = 0.0;

  Matrix solve(const Matrix& rhs) const {
    Matrix a = p_inv * rhs * qk;
    for (Index j = 0; j < a.cols(); ++j) {
      for (Index i = 0; i < a.rows(); ++i) {
        const double d = t_eigs(i) * k_eigs(j) + shift;
        if (!(d > 0.0)) {
          std::ostringstream os;
          os << "solve_eigen: non-positive spectral denominator " << d
             << " (input Gram matrices are not PSD enough for this shift)";
          throw NumericalError(os.str());
        }
        a(i, j) /= d;
      }
    }
    return p * a * qk.transpose();
  }
};

}  // namespace

SolveArtifact solve_dense(const KroneckerSystem& sys, Index cap) {
  sys.validate();
  const Index n = sys.size();
  if (n * n > cap) {
    std::ostringstream os;
    os << "solve_dense: n^2 = " << n * n << " exceeds the dense cap " << cap
       << "; use the eigen backend (or covariance family + lowrank)";
    throw ConfigError(os.str());
  }
  Matrix big = kron(sys.k_gram, sys.t_matrix);
  big.diagonal().array() += sys.n_lambda;
  const Vector rhs = vec(Matrix::Identity(n, n));
  const Eigen::PartialPivLU<Matrix> lu(big);
  Vector sol = lu.solve(rhs);
  sol += lu.solve(rhs - big * sol);  // one step of iterative refinement

  SolveArtifact art;
  art.backend = Backend::Dense;
  art.alpha = unvec(sol, n, n);
  art.residual = system_residual(sys, art.alpha);
  check_residual(art, "solve_dense");
  return art;
}

SolveArtifact solve_eigen(const KroneckerSystem& sys) {
  sys.validate();
  const Index n = sys.size();
  if (!is_symmetric(sys.k_gram)) {
    throw NumericalError("solve_eigen: input Gram matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> ek(sys.k_gram);
  if (ek.info() != Eigen::Success) throw NumericalError("solve_eigen: eigensolver failed on k");
  SpectralForm form;
  form.qk = ek.eigenvectors();
  form.k_eigs = ek.eigenvalues();
  form.shift = sys.n_lambda;

  if (sys.conditional) {
    // T = M L with M = Qk diag(m) Qk^T, m = n eps / (lk + n eps). T is similar
    // to the symmetric S = M^{1/2} L M^{1/2} = Qs diag(s) Qs^T through
    // P = M^{1/2} Qs.
    const double ne = static_cast<double>(n) * sys.conditional->epsilon;
    Vector m_sqrt(n);
    Vector m_isqrt(n);
    for (Index i = 0; i < n; ++i) {
      const double denom = form.k_eigs(i) + ne;
      if (!(denom > 0.0)) {
        throw NumericalError("solve_eigen: k + n*eps*I is not positive definite");
      }
      m_sqrt(i) = std::sqrt(ne / denom);
      m_isqrt(i) = 1.0 / m_sqrt(i);
    }
    const Matrix half = form.qk * m_sqrt.asDiagonal() * form.qk.transpose();
    const Matrix half_inv = form.qk * m_isqrt.asDiagonal() * form.qk.transpose();
    Matrix s = half * sys.conditional->l_gram * half;
    s = 0.5 * (s + s.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    if (es.info() != Eigen::Success) throw NumericalError("solve_eigen: eigensolver failed");
    form.p = half * es.eigenvectors();
    form.p_inv = es.eigenvectors().transpose() * half_inv;
    form.t_eigs = es.eigenvalues();
  } else {
    if (!is_symmetric(sys.t_matrix)) {
      throw ConfigError(
          "solve_eigen: T is not symmetric; use the dense backend for this system");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> et(sys.t_matrix);
    if (et.info() != Eigen::Success) throw NumericalError("solve_eigen: eigensolver failed on T");
    form.p = et.eigenvectors();
    form.p_inv = et.eigenvectors().transpose();
    form.t_eigs = et.eigenvalues();
  }

  SolveArtifact art;
  art.backend = Backend::Eigen;
  const Matrix identity = Matrix::Identity(n, n);
  art.alpha = form.solve(identity);
  // One step of iterative refinement.
  art.alpha += form.solve(identity - sys.t_matrix * art.alpha * sys.k_gram -
                          sys.n_lambda * art.alpha);
  art.residual = system_residual(sys, art.alpha);
  check_residual(art, "solve_eigen");
  return art;
}

Vector preimage_linear_form(const SolveArtifact& artifact, const KroneckerSystem& sys,
                            const Eigen::Ref<const Vector>& k_x) {
  const Index n = sys.size();
  if (artifact.alpha.rows() != n || artifact.alpha.cols() != n) {
    throw DimensionError("preimage_linear_form: artifact does not match the system");
  }
  if (k_x.size() != n) {
    throw DimensionError("preimage_linear_form: k_x has length " + std::to_string(k_x.size()) +
                         ", expected " + std::to_string(n));
  }
  return sys.t_matrix * (artifact.alpha * k_x);
}

LowRankSolver::LowRankSolver(const Matrix& k_gram, const Matrix& l_gram, double n_lambda,
                             const LowRankOptions& options)
    : l_gram_(l_gram), n_lambda_(n_lambda) {
  const Index n = k_gram.rows();
  if (k_gram.cols() != n || l_gram.rows() != n || l_gram.cols() != n || n == 0) {
    throw DimensionError("LowRankSolver: k and L must be square and of equal size");
  }
  if (!(n_lambda > 0.0)) throw ConfigError("LowRankSolver: n*lambda must be positive");
  if (!(options.chol_tol > 0.0)) throw ConfigError("LowRankSolver: chol_tol must be positive");

  const Index max_rank = options.max_rank > 0 ? options.max_rank : n;
  k_factor_ = incomplete_cholesky(k_gram, options.chol_tol, max_rank);
  l_factor_ = incomplete_cholesky(l_gram, options.chol_tol, max_rank);
  if (k_factor_.rank() == 0 || l_factor_.rank() == 0) {
    throw NumericalError("LowRankSolver: a Gram matrix factorized to rank 0 (zero matrix)");
  }
  for (const auto* f : {&k_factor_, &l_factor_}) {
    if (!f->converged) {
      std::ostringstream os;
      os << "incomplete Cholesky stopped at rank " << f->rank() << " with residual trace "
         << f->residual_trace << " above tol*n = " << f->tol * static_cast<double>(n);
      warnings_.push_back(os.str());
    }
  }

  const Matrix& u = k_factor_.u;
  const Matrix& v = l_factor_.u;
  const Index m1 = u.cols();
  const Index m2 = v.cols();
  if (m1 * m2 > options.max_joint_rank) {
    std::ostringstream os;
    os << "LowRankSolver: joint rank m1*m2 = " << m1 << "*" << m2 << " = " << m1 * m2
       << " exceeds the cap " << options.max_joint_rank
       << "; raise chol_tol or lower max_rank";
    throw ConfigError(os.str());
  }

  Matrix inner = kron(u.transpose() * u, v.transpose() * v);
  inner.diagonal().array() += n_lambda;
  const Vector rhs = vec(v.transpose() * u);
  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("LowRankSolver: Woodbury core matrix is not positive definite");
  }
  z_ = unvec(llt.solve(rhs), m2, m1);
  lv_ = l_gram * v;
}

Vector LowRankSolver::linear_form(const Eigen::Ref<const Vector>& k_x) const {
  if (k_x.size() != l_gram_.rows()) {
    throw DimensionError("LowRankSolver: k_x has length " + std::to_string(k_x.size()) +
                         ", expected " + std::to_string(l_gram_.rows()));
  }
  const Vector ut_k = k_factor_.u.transpose() * k_x;
  return (l_gram_ * k_x - lv_ * (z_ * ut_k)) / n_lambda_;
}

Matrix LowRankSolver::linear_forms(const Eigen::Ref<const Matrix>& k_cols) const {
  if (k_cols.rows() != l_gram_.rows()) {
    throw DimensionError("LowRankSolver: kernel columns have wrong length");
  }
  const Matrix ut_k = k_factor_.u.transpose() * k_cols;
  return (l_gram_ * k_cols - lv_ * (z_ * ut_k)) / n_lambda_;
}

Vector solve_lowrank(const Matrix& k_gram, const Matrix& l_gram, double n_lambda, double chol_tol,
                     const Eigen::Ref<const Vector>& k_x) {
  LowRankOptions options;
  options.chol_tol = chol_tol;
  return LowRankSolver(k_gram, l_gram, n_lambda, options).linear_form(k_x);
}

}  // namespace opkde
