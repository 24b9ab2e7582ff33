#include "opkde/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opkde {

CholeskyFactor incomplete_cholesky(const Matrix& g, double tol, Index max_rank) {
  if (g.rows() != g.cols()) throw DimensionError("incomplete_cholesky: matrix must be square");
  if (!(tol > 0.0)) throw ConfigError("incomplete_cholesky: tol must be positive");
  if (max_rank < 1) throw ConfigError("incomplete_cholesky: max_rank must be positive");

  const Index n = g.rows();
  const Index cap = std::min(max_rank, n);
  const double budget = tol * static_cast<double>(n);

  Vector diag = g.diagonal();
  const double floor = -1e-10 * std::max(1.0, n > 0 ? diag.cwiseAbs().maxCoeff() : 0.0);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  Matrix u(n, cap);
  CholeskyFactor out;
  out.tol = tol;

  Index m = 0;
  while (true) {
    double remaining = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (diag(i) < floor) {
        std::ostringstream os;
        os << "incomplete_cholesky: negative pivot " << diag(i) << " at row " << i
           << " (matrix is not positive semidefinite)";
        throw NumericalError(os.str());
      }
      remaining += diag(i);
    }
    out.residual_trace = std::max(0.0, remaining);
    if (remaining <= budget || m == cap) break;

    Index pivot = -1;
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) continue;
      if (pivot < 0 || diag(i) > diag(pivot)) pivot = i;
    }
    const double d = diag(pivot);
    if (d <= 0.0) break;

    const double root = std::sqrt(d);
    Vector col = g.col(pivot);
    if (m > 0) col.noalias() -= u.leftCols(m) * u.row(pivot).head(m).transpose();
    col /= root;
    for (Index i = 0; i < n; ++i) {
      if (used[static_cast<std::size_t>(i)]) col(i) = 0.0;
    }
    col(pivot) = root;
    u.col(m) = col;
    diag.array() -= col.array().square();
    diag(pivot) = 0.0;
    used[static_cast<std::size_t>(pivot)] = true;
    out.pivot_order.push_back(pivot);
    ++m;
  }

  out.u = u.leftCols(m);
  out.converged = out.residual_trace <= budget;
  return out;
}

CholeskyFactor incomplete_cholesky(const Matrix& g, double tol) {
  return incomplete_cholesky(g, tol, std::max<Index>(1, g.rows()));
}

}  // namespace opkde
