#include "opkde/ovk.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

namespace opkde {

OvkSpec OvkSpec::identity() { return OvkSpec{OvkFamily::Identity, 1e-3}; }
OvkSpec OvkSpec::covariance() { return OvkSpec{OvkFamily::Covariance, 1e-3}; }

OvkSpec OvkSpec::conditional(double epsilon) {
  OvkSpec spec{OvkFamily::ConditionalCovariance, epsilon};
  spec.validate();
  return spec;
}

void OvkSpec::validate() const {
  if (family == OvkFamily::ConditionalCovariance && !(epsilon > 0.0 && std::isfinite(epsilon))) {
    throw ConfigError("conditional covariance kernel requires epsilon > 0");
  }
}

std::string OvkSpec::describe() const {
  if (family == OvkFamily::ConditionalCovariance) {
    std::ostringstream os;
    os << "condcov(epsilon=" << epsilon << ")";
    return os.str();
  }
  return to_string(family);
}

std::string to_string(OvkFamily family) {
  switch (family) {
    case OvkFamily::Identity:
      return "identity";
    case OvkFamily::Covariance:
      return "cov";
    case OvkFamily::ConditionalCovariance:
      return "condcov";
  }
  return "unknown";
}

OvkFamily parse_family(const std::string& name) {
  std::string lower = name;
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "identity" || lower == "cortes") return OvkFamily::Identity;
  if (lower == "cov" || lower == "covariance") return OvkFamily::Covariance;
  if (lower == "condcov" || lower == "conditional") return OvkFamily::ConditionalCovariance;
  throw ConfigError("unknown operator-valued kernel family '" + name +
                    "' (expected identity|cov|condcov)");
}

namespace {

void require_square_pair(const Matrix& k, const Matrix& l, const char* where) {
  if (k.rows() != k.cols() || l.rows() != l.cols()) {
    throw DimensionError(std::string(where) + ": Gram matrices must be square");
  }
  if (k.rows() != l.rows()) {
    throw DimensionError(std::string(where) + ": input Gram is " + std::to_string(k.rows()) +
                         "x" + std::to_string(k.rows()) + " but output Gram is " +
                         std::to_string(l.rows()) + "x" + std::to_string(l.rows()));
  }
}

// Solve (k + n eps I) Z = rhs. The shifted matrix is SPD for eps > 0.
Matrix solve_shifted(const Matrix& k, double epsilon, const Matrix& rhs) {
  const Index n = k.rows();
  const double shift = static_cast<double>(n) * epsilon;
  Matrix a = k;
  a.diagonal().array() += shift;
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
    std::ostringstream os;
    os << "conditional covariance: (k + n*eps*I) is not positive definite (n*eps=" << shift
       << ", eigenvalue range [" << eig.eigenvalues().minCoeff() << ", "
       << eig.eigenvalues().maxCoeff() << "])";
    throw NumericalError(os.str());
  }
  return llt.solve(rhs);
}

}  // namespace

TMatrix build_t(const OvkSpec& spec, const Matrix& k_gram, const Matrix& l_gram) {
  spec.validate();
  require_square_pair(k_gram, l_gram, "build_t");
  const Index n = l_gram.rows();
  switch (spec.family) {
    case OvkFamily::Identity:
      return TMatrix{Matrix::Identity(n, n), spec.family};
    case OvkFamily::Covariance:
      return TMatrix{l_gram, spec.family};
    case OvkFamily::ConditionalCovariance: {
      const Matrix z = solve_shifted(k_gram, spec.epsilon, k_gram * l_gram);
      return TMatrix{l_gram - z, spec.family};
    }
  }
  throw ConfigError("build_t: unhandled family");
}

Matrix conditional_multiplier(const Matrix& k_gram, double epsilon) {
  if (k_gram.rows() != k_gram.cols()) {
    throw DimensionError("conditional_multiplier: Gram matrix must be square");
  }
  const Index n = k_gram.rows();
  Matrix m = static_cast<double>(n) * epsilon * solve_shifted(k_gram, epsilon, Matrix::Identity(n, n));
  return 0.5 * (m + m.transpose());
}

double kernel_quadratic_form(const OvkSpec& spec, const Matrix& k_gram, const Matrix& l_gram,
                             const std::vector<Vector>& coeffs) {
  require_square_pair(k_gram, l_gram, "kernel_quadratic_form");
  const Index n = k_gram.rows();
  if (static_cast<Index>(coeffs.size()) != n) {
    throw DimensionError("kernel_quadratic_form: expected one coefficient vector per point");
  }
  Matrix c(n, n);
  for (Index i = 0; i < n; ++i) {
    if (coeffs[static_cast<std::size_t>(i)].size() != n) {
      throw DimensionError("kernel_quadratic_form: coefficient vector has wrong length");
    }
    c.col(i) = coeffs[static_cast<std::size_t>(i)];
  }
  // inner(i, j) = <C phi_i, phi_j> in the output RKHS.
  Matrix inner;
  switch (spec.family) {
    case OvkFamily::Identity:
      inner = c.transpose() * l_gram * c;
      break;
    case OvkFamily::Covariance: {
      const Matrix lc = l_gram * c;
      inner = lc.transpose() * lc / static_cast<double>(n);
      break;
    }
    case OvkFamily::ConditionalCovariance: {
      const Matrix lc = l_gram * c;
      inner = lc.transpose() * conditional_multiplier(k_gram, spec.epsilon) * lc /
              static_cast<double>(n);
      break;
    }
  }
  return (k_gram.array() * inner.array()).sum();
}

bool check_kernel_nonnegativity(const OvkSpec& spec, const Matrix& k_gram, const Matrix& l_gram,
                                const std::vector<Vector>& coeffs) {
  return kernel_quadratic_form(spec, k_gram, l_gram, coeffs) >= -1e-8;
}

}  // namespace opkde
