#pragma once

#include "opkde/types.hpp"

#include <string>

namespace opkde {

enum class KernelKind { Rbf, Polynomial, Linear };

/// Scalar kernel on real vectors.
///
///   Rbf         exp(-|a-b|^2 / (2 sigma^2))
///   Polynomial  (<a,b> + offset)^degree
///   Linear      <a,b>
struct ScalarKernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double sigma = 1.0;
  int degree = 1;
  double offset = 0.0;

  static ScalarKernelSpec rbf(double sigma);
  static ScalarKernelSpec polynomial(int degree, double offset = 0.0);
  static ScalarKernelSpec linear();

  /// Throws ConfigError when parameters are out of range.
  void validate() const;
  std::string describe() const;
};

double eval_kernel(const ScalarKernelSpec& spec, const Eigen::Ref<const Vector>& a,
                   const Eigen::Ref<const Vector>& b);

/// Gram matrix between the rows of `rows` and the rows of `cols`.
/// If both arguments hold the same samples the result is symmetrized.
Matrix gram(const ScalarKernelSpec& spec, const Eigen::Ref<const SampleMatrix>& rows,
            const Eigen::Ref<const SampleMatrix>& cols);

/// Symmetric Gram matrix of one sample set.
Matrix gram(const ScalarKernelSpec& spec, const Eigen::Ref<const SampleMatrix>& samples);

/// (k(x, t_1), ..., k(x, t_n)) for the rows t_i of `training`.
Vector gram_vector(const ScalarKernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const SampleMatrix>& training);

}  // namespace opkde
