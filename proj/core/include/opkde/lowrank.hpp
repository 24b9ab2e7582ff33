#pragma once

#include "opkde/types.hpp"

#include <vector>

namespace opkde {

/// G ~= U U^T from greedy diagonal pivoting.
struct CholeskyFactor {
  Matrix u;                       // n x m
  std::vector<Index> pivot_order;  // rows chosen as pivots, in order
  double residual_trace = 0.0;    // trace(G - U U^T)
  double tol = 0.0;
  bool converged = false;         // residual_trace <= tol * n

  Index rank() const { return u.cols(); }
};

/// Pivoted incomplete Cholesky of a symmetric PSD matrix.
///
/// At each step the largest remaining diagonal entry of the Schur complement
/// is chosen (lowest index on ties). Stops once the remaining trace is at
/// most tol * n or the rank reaches max_rank. A pivot below -1e-10 means the
/// input is not PSD and raises NumericalError.
CholeskyFactor incomplete_cholesky(const Matrix& g, double tol, Index max_rank);

/// Overload with max_rank = n.
CholeskyFactor incomplete_cholesky(const Matrix& g, double tol);

}  // namespace opkde
