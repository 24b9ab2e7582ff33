#include "opkde/kde.hpp"

#include <cmath>
#include <sstream>

namespace opkde {

void KdeParams::validate() const {
  input_kernel.validate();
  output_kernel.validate();
  ovk.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("lambda must be positive");
}

FittedKde FittedKde::fit(const Dataset& train, const KdeParams& params,
                         const FitOptions& options) {
  params.validate();
  train.validate();

  FittedKde model;
  model.params_ = params;
  model.inputs_ = train.inputs;
  model.outputs_ = train.outputs;
  model.block_layout_ = options.block_layout;
  if (model.block_layout_) {
    const auto& layout = *model.block_layout_;
    if (layout.alphabet_size * layout.max_length != train.outputs.cols()) {
      throw DimensionError("fit: block layout does not match output feature dimension");
    }
  }

  const Index n = train.size();
  model.k_gram_ = gram(params.input_kernel, train.inputs);
  model.l_gram_ = gram(params.output_kernel, train.outputs);
  model.t_ = build_t(params.ovk, model.k_gram_, model.l_gram_);

  KroneckerSystem& sys = model.system_;
  sys.k_gram = model.k_gram_;
  sys.t_matrix = model.t_.values;
  // The covariance operators carry a 1/n that folds into the shift; the
  // identity operator does not.
  sys.n_lambda = params.ovk.family == OvkFamily::Identity
                     ? params.lambda
                     : static_cast<double>(n) * params.lambda;
  if (params.ovk.family == OvkFamily::ConditionalCovariance) {
    sys.conditional = ConditionalStructure{model.l_gram_, params.ovk.epsilon};
  }

  Backend backend;
  if (options.backend) {
    backend = *options.backend;
  } else {
    backend = n * n <= options.dense_cap ? Backend::Dense : Backend::Eigen;
  }
  model.backend_ = backend;

  switch (backend) {
    case Backend::Dense:
      model.artifact_ = solve_dense(sys, options.dense_cap);
      break;
    case Backend::Eigen:
      model.artifact_ = solve_eigen(sys);
      break;
    case Backend::LowRank: {
      if (params.ovk.family != OvkFamily::Covariance) {
        throw ConfigError("fit: the lowrank backend supports only the covariance family (T = L); "
                          "got " + params.ovk.describe());
      }
      auto solver = std::make_shared<LowRankSolver>(model.k_gram_, model.l_gram_, sys.n_lambda,
                                                    options.lowrank);
      model.warnings_ = solver->warnings();
      model.lowrank_ = std::move(solver);
      break;
    }
  }
  if (model.artifact_) model.weights_ = sys.t_matrix * model.artifact_->alpha;
  return model;
}

Vector FittedKde::linear_form(const Eigen::Ref<const Vector>& x) const {
  const Vector k_x = gram_vector(params_.input_kernel, x, inputs_);
  if (lowrank_) return lowrank_->linear_form(k_x);
  return weights_ * k_x;
}

Matrix FittedKde::linear_forms(const Eigen::Ref<const SampleMatrix>& xs) const {
  const Matrix k_cols = gram(params_.input_kernel, inputs_, xs);
  if (lowrank_) return lowrank_->linear_forms(k_cols);
  return weights_ * k_cols;
}

double FittedKde::score(const Eigen::Ref<const Vector>& x,
                        const Eigen::Ref<const Vector>& y) const {
  const Vector w = linear_form(x);
  const Vector l_y = gram_vector(params_.output_kernel, y, outputs_);
  return eval_kernel(params_.output_kernel, y, y) - 2.0 * l_y.dot(w);
}

namespace {

Vector self_kernel(const ScalarKernelSpec& spec, const Eigen::Ref<const SampleMatrix>& ys) {
  Vector out(ys.rows());
  for (Index c = 0; c < ys.rows(); ++c) {
    const Vector y = ys.row(c).transpose();
    out(c) = eval_kernel(spec, y, y);
  }
  return out;
}

}  // namespace

Vector FittedKde::scores(const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const SampleMatrix>& candidates) const {
  if (candidates.rows() == 0) throw DataError("scores: empty candidate list");
  const Vector w = linear_form(x);
  const Matrix l_cand = gram(params_.output_kernel, outputs_, candidates);  // n x c
  return self_kernel(params_.output_kernel, candidates) - 2.0 * (l_cand.transpose() * w);
}

Index argmin_lowest(const Eigen::Ref<const Vector>& values) {
  if (values.size() == 0) throw DataError("argmin of an empty vector");
  Index best = 0;
  for (Index i = 1; i < values.size(); ++i) {
    if (values(i) < values(best)) best = i;
  }
  return best;
}

PreImageResult FittedKde::predict(const Eigen::Ref<const Vector>& x,
                                  const Eigen::Ref<const SampleMatrix>& candidates) const {
  if (candidates.rows() == 0) throw DataError("predict: empty candidate list");
  PreImageResult out;
  out.scores = scores(x, candidates);
  out.chosen_index = argmin_lowest(out.scores);
  out.chosen = candidates.row(out.chosen_index).transpose();
  return out;
}

PreImageResult FittedKde::predict(const Eigen::Ref<const Vector>& x) const {
  return predict(x, outputs_);
}

std::vector<Index> FittedKde::predict_indices(
    const Eigen::Ref<const SampleMatrix>& xs,
    const Eigen::Ref<const SampleMatrix>& candidates) const {
  if (candidates.rows() == 0) throw DataError("predict: empty candidate list");
  const Matrix w = linear_forms(xs);                                    // n x m
  const Matrix l_cand = gram(params_.output_kernel, outputs_, candidates);  // n x c
  const Vector self = self_kernel(params_.output_kernel, candidates);
  const Matrix lin = l_cand.transpose() * w;  // c x m
  std::vector<Index> out(static_cast<std::size_t>(xs.rows()));
  for (Index j = 0; j < xs.rows(); ++j) {
    const Vector s = self - 2.0 * lin.col(j);
    out[static_cast<std::size_t>(j)] = argmin_lowest(s);
  }
  return out;
}

std::string predict_per_position(const FittedKde& model, const Eigen::Ref<const Vector>& x,
                                 Index length, const std::string& alphabet) {
  const auto& layout = model.block_layout();
  if (!layout) {
    throw ConfigError("predict_per_position: model was not trained with block output features");
  }
  if (model.params().output_kernel.kind != KernelKind::Linear) {
    throw ConfigError("predict_per_position: requires the linear kernel on output features");
  }
  if (static_cast<Index>(alphabet.size()) != layout->alphabet_size) {
    throw DimensionError("predict_per_position: alphabet size does not match the model");
  }
  if (length < 0 || length > layout->max_length) {
    throw DimensionError("predict_per_position: sequence length " + std::to_string(length) +
                         " exceeds the maximum " + std::to_string(layout->max_length));
  }
  // Linear part of the score for output features phi is phi^T F^T w.
  const Vector g = model.training_outputs().transpose() * model.linear_form(x);
  const Index a = layout->alphabet_size;
  std::string out;
  out.reserve(static_cast<std::size_t>(length));
  for (Index j = 0; j < length; ++j) {
    Index best = 0;
    for (Index s = 1; s < a; ++s) {
      if (g(j * a + s) > g(j * a + best)) best = s;
    }
    out.push_back(alphabet[static_cast<std::size_t>(best)]);
  }
  return out;
}

double rbf_loss(const Eigen::Ref<const Vector>& y, const Eigen::Ref<const Vector>& y_hat,
                double sigma_l) {
  if (y.size() != y_hat.size()) throw DimensionError("rbf_loss: dimension mismatch");
  if (!(sigma_l > 0.0)) throw ConfigError("rbf_loss: sigma must be positive");
  const double sq = (y - y_hat).squaredNorm();
  return 2.0 - 2.0 * std::exp(-sq / (2.0 * sigma_l * sigma_l));
}

}  // namespace opkde
