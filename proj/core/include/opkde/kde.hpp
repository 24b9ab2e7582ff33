#pragma once

#include "opkde/data.hpp"
#include "opkde/kernels.hpp"
#include "opkde/ovk.hpp"
#include "opkde/solver.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace opkde {

struct KdeParams {
  ScalarKernelSpec input_kernel = ScalarKernelSpec::rbf(1.0);
  ScalarKernelSpec output_kernel = ScalarKernelSpec::rbf(1.0);
  OvkSpec ovk = OvkSpec::covariance();
  double lambda = 0.1;

  void validate() const;
};

/// Output features made of one-hot blocks, one block per sequence position.
struct OutputBlockLayout {
  Index alphabet_size = 0;
  Index max_length = 0;
};

struct FitOptions {
  std::optional<Backend> backend;  // unset: dense when n^2 <= dense_cap, else eigen
  Index dense_cap = kDefaultDenseCap;
  LowRankOptions lowrank;
  std::optional<OutputBlockLayout> block_layout;
};

struct PreImageResult {
  Index chosen_index = 0;
  Vector chosen;
  Vector scores;
};

/// Trained operator-valued KDE model. Immutable; safe to share across threads.
///
/// Scores follow l(y,y) - 2 L_y^T w(x) where w(x) = T alpha k_x and alpha
/// solves the Kronecker system. All computation stays in Gram coordinates.
class FittedKde {
 public:
  static FittedKde fit(const Dataset& train, const KdeParams& params,
                       const FitOptions& options = {});

  Index size() const { return inputs_.rows(); }
  const KdeParams& params() const { return params_; }
  Backend backend() const { return backend_; }
  const SampleMatrix& training_inputs() const { return inputs_; }
  const SampleMatrix& training_outputs() const { return outputs_; }
  const Matrix& k_gram() const { return k_gram_; }
  const Matrix& l_gram() const { return l_gram_; }
  const TMatrix& t_matrix() const { return t_; }
  const KroneckerSystem& system() const { return system_; }
  /// Present for the dense and eigen backends.
  const std::optional<SolveArtifact>& artifact() const { return artifact_; }
  /// Present for the low-rank backend.
  const LowRankSolver* lowrank() const { return lowrank_.get(); }
  const std::optional<OutputBlockLayout>& block_layout() const { return block_layout_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// w(x), the vector with score linear part L_y^T w(x).
  Vector linear_form(const Eigen::Ref<const Vector>& x) const;
  /// One w(x) per row of `xs`, returned as columns.
  Matrix linear_forms(const Eigen::Ref<const SampleMatrix>& xs) const;

  double score(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) const;
  Vector scores(const Eigen::Ref<const Vector>& x,
                const Eigen::Ref<const SampleMatrix>& candidates) const;

  PreImageResult predict(const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const SampleMatrix>& candidates) const;
  /// Candidates default to the training outputs.
  PreImageResult predict(const Eigen::Ref<const Vector>& x) const;

  /// Index of the best candidate for each row of `xs`.
  std::vector<Index> predict_indices(const Eigen::Ref<const SampleMatrix>& xs,
                                     const Eigen::Ref<const SampleMatrix>& candidates) const;

 private:
  FittedKde() = default;

  KdeParams params_;
  Backend backend_ = Backend::Dense;
  SampleMatrix inputs_;
  SampleMatrix outputs_;
  Matrix k_gram_;
  Matrix l_gram_;
  TMatrix t_;
  KroneckerSystem system_;
  std::optional<SolveArtifact> artifact_;
  Matrix weights_;  // T alpha, so w(x) = weights_ k_x
  std::shared_ptr<const LowRankSolver> lowrank_;
  std::optional<OutputBlockLayout> block_layout_;
  std::vector<std::string> warnings_;
};

/// Lowest-index argmin.
Index argmin_lowest(const Eigen::Ref<const Vector>& values);

/// Decodes each of the first `length` positions independently by picking the
/// symbol whose one-hot block entry has the largest linear score.
std::string predict_per_position(const FittedKde& model, const Eigen::Ref<const Vector>& x,
                                 Index length, const std::string& alphabet);

/// 2 - 2 exp(-|y - y_hat|^2 / (2 sigma_l^2)).
double rbf_loss(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& y_hat,
                double sigma_l);

}  // namespace opkde
