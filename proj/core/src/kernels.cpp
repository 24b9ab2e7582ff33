#include "opkde/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace opkde {

ScalarKernelSpec ScalarKernelSpec::rbf(double sigma) {
  ScalarKernelSpec spec;
  spec.kind = KernelKind::Rbf;
  spec.sigma = sigma;
  spec.validate();
  return spec;
}

ScalarKernelSpec ScalarKernelSpec::polynomial(int degree, double offset) {
  ScalarKernelSpec spec;
  spec.kind = KernelKind::Polynomial;
  spec.degree = degree;
  spec.offset = offset;
  spec.validate();
  return spec;
}

ScalarKernelSpec ScalarKernelSpec::linear() {
  ScalarKernelSpec spec;
  spec.kind = KernelKind::Linear;
  return spec;
}

void ScalarKernelSpec::validate() const {
  switch (kind) {
    case KernelKind::Rbf:
      if (!(sigma > 0.0) || !std::isfinite(sigma)) {
        throw ConfigError("rbf kernel requires sigma > 0");
      }
      break;
    case KernelKind::Polynomial:
      if (degree < 1) throw ConfigError("polynomial kernel requires degree >= 1");
      if (!(offset >= 0.0)) throw ConfigError("polynomial kernel requires offset >= 0");
      break;
    case KernelKind::Linear:
      break;
  }
}

std::string ScalarKernelSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case KernelKind::Rbf:
      os << "rbf(sigma=" << sigma << ")";
      break;
    case KernelKind::Polynomial:
      os << "polynomial(degree=" << degree << ", offset=" << offset << ")";
      break;
    case KernelKind::Linear:
      os << "linear";
      break;
  }
  return os.str();
}

namespace {

// All kernels are functions of (|a|^2, |b|^2, <a,b>). Computing the three
// dot products the same way everywhere keeps k(x,x) == 1 exactly for RBF.
double from_products(const ScalarKernelSpec& spec, double aa, double bb, double ab) {
  switch (spec.kind) {
    case KernelKind::Rbf: {
      const double sq = std::max(0.0, aa + bb - 2.0 * ab);
      return std::exp(-sq / (2.0 * spec.sigma * spec.sigma));
    }
    case KernelKind::Polynomial:
      return std::pow(ab + spec.offset, spec.degree);
    case KernelKind::Linear:
      return ab;
  }
  return 0.0;
}

Vector row_norms(const Eigen::Ref<const SampleMatrix>& s) {
  Vector out(s.rows());
  for (Index i = 0; i < s.rows(); ++i) {
    const Vector r = s.row(i).transpose();
    out(i) = r.dot(r);
  }
  return out;
}

void require_samples(const Eigen::Ref<const SampleMatrix>& s, const char* what) {
  if (s.rows() == 0) {
    throw DataError(std::string("gram: empty ") + what + " sample list");
  }
}

}  // namespace

double eval_kernel(const ScalarKernelSpec& spec, const Eigen::Ref<const Vector>& a,
                   const Eigen::Ref<const Vector>& b) {
  if (a.size() != b.size()) {
    throw DimensionError("eval_kernel: dimension mismatch (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
  }
  return from_products(spec, a.dot(a), b.dot(b), a.dot(b));
}

Matrix gram(const ScalarKernelSpec& spec, const Eigen::Ref<const SampleMatrix>& rows,
            const Eigen::Ref<const SampleMatrix>& cols) {
  require_samples(rows, "row");
  require_samples(cols, "column");
  if (rows.cols() != cols.cols()) {
    throw DimensionError("gram: samples have different dimensions (" +
                         std::to_string(rows.cols()) + " vs " + std::to_string(cols.cols()) +
                         ")");
  }
  const bool same_set = rows.rows() == cols.rows() && rows == cols;
  if (same_set) return gram(spec, rows);

  const Vector rn = row_norms(rows);
  const Vector cn = row_norms(cols);
  // Materialize row-major copies so each dot product reads contiguous memory.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> r = rows;
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> c = cols;
  Matrix out(rows.rows(), cols.rows());
  for (Index j = 0; j < c.rows(); ++j) {
    for (Index i = 0; i < r.rows(); ++i) {
      out(i, j) = from_products(spec, rn(i), cn(j), r.row(i).dot(c.row(j)));
    }
  }
  return out;
}

Matrix gram(const ScalarKernelSpec& spec, const Eigen::Ref<const SampleMatrix>& samples) {
  require_samples(samples, "row");
  const Vector norms = row_norms(samples);
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> s = samples;
  const Index n = s.rows();
  Matrix out(n, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      const double ab = i == j ? norms(i) : s.row(i).dot(s.row(j));
      out(i, j) = from_products(spec, norms(i), norms(j), ab);
    }
  }
  Matrix sym = 0.5 * (out + out.transpose());
  return sym;
}

Vector gram_vector(const ScalarKernelSpec& spec, const Eigen::Ref<const Vector>& x,
                   const Eigen::Ref<const SampleMatrix>& training) {
  require_samples(training, "training");
  if (x.size() != training.cols()) {
    throw DimensionError("gram_vector: input has dimension " + std::to_string(x.size()) +
                         ", training samples have " + std::to_string(training.cols()));
  }
  const double xx = x.dot(x);
  Vector out(training.rows());
  for (Index i = 0; i < training.rows(); ++i) {
    const Vector t = training.row(i).transpose();
    out(i) = from_products(spec, xx, t.dot(t), x.dot(t));
  }
  return out;
}

}  // namespace opkde
