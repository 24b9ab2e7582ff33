#pragma once

#include "opkde/data.hpp"
#include "opkde/kde.hpp"
#include "opkde/kernels.hpp"
#include "opkde/ovk.hpp"
#include "opkde/solver.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace opkde {

enum class DataFormat { Matrix, Usps, Ocr, Toy };
enum class LossKind { Rbf, Exact, CharAccuracy };
enum class CandidatePolicy { Training, All, PerPosition };
enum class CvProtocol { Inverted, Standard };
enum class Normalization { None, Unit, Signed };

std::string to_string(DataFormat v);
std::string to_string(LossKind v);
std::string to_string(CandidatePolicy v);
std::string to_string(CvProtocol v);
std::string to_string(Normalization v);

/// Everything needed to reproduce one experiment. See the README for the
/// key = value file schema; each field maps to one key.
struct ExperimentConfig {
  std::string name;
  DataFormat format = DataFormat::Matrix;
  std::string data_path;
  std::string test_path;
  Index input_cols = 0;
  Index output_cols = 0;
  Index max_samples = 0;  // 0 keeps every sample; toy: number generated (default 600)
  double toy_noise = 0.1;
  Normalization normalization = Normalization::None;

  ScalarKernelSpec input_kernel = ScalarKernelSpec::rbf(1.0);
  ScalarKernelSpec output_kernel = ScalarKernelSpec::rbf(1.0);
  OvkSpec ovk = OvkSpec::covariance();
  std::vector<double> lambdas{0.1};

  Index folds = 5;
  CvProtocol protocol = CvProtocol::Inverted;
  std::uint64_t seed = 0;
  std::optional<Backend> backend;  // unset: automatic
  double chol_tol = 1e-8;
  Index dense_cap = kDefaultDenseCap;

  CandidatePolicy candidates = CandidatePolicy::Training;
  LossKind loss = LossKind::Rbf;
  std::optional<double> loss_sigma;  // unset: the output kernel's sigma

  Index max_length = 0;  // OCR p; 0 uses the longest word in the data
  std::string alphabet = kLowercaseAlphabet;
  Index threads = 0;  // 0: hardware concurrency

  void validate() const;
  /// Sigma used by the RBF loss.
  double effective_loss_sigma() const;
};

/// Sets one key. Throws ConfigError for unknown keys or bad values.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value);

/// Parses "key = value" lines; '#' starts a comment.
ExperimentConfig parse_config(std::string_view text);

/// Ordered (key, value) pairs that parse_config reads back to an equal config.
std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& config);
std::string format_config(const ExperimentConfig& config);

/// Reads a config file, or every embedded config of a report file.
std::vector<ExperimentConfig> load_configs(const std::string& path);
ExperimentConfig load_config(const std::string& path);

/// Samples of either vector or OCR form, ready to be split into folds.
struct ExperimentData {
  DataFormat format = DataFormat::Matrix;
  Dataset vectors;
  std::vector<OcrWord> words;

  Index size() const;
  ExperimentData subset(const std::vector<Index>& rows) const;
};

/// Loads `path` according to config.format (ignored for toy data).
ExperimentData load_experiment_data(const ExperimentConfig& config, const std::string& path);

/// Seeded partition of 0..n-1 into `folds` groups. All folds have n / folds
/// members except the last, which takes the remainder.
std::vector<std::vector<Index>> make_folds(Index n, Index folds, std::uint64_t seed);

struct SplitResult {
  double value = 0.0;
  Index n_train = 0;
  Index n_test = 0;
  double seconds = 0.0;
  Backend backend = Backend::Dense;
  std::vector<std::string> predictions;
  std::vector<std::string> warnings;
};

/// Trains on `train` with one lambda and scores predictions for `test`.
SplitResult evaluate_split(const ExperimentConfig& config, double lambda,
                           const ExperimentData& train, const ExperimentData& test);

/// Name of the reported metric: rbf_loss, error_rate or wrc_percent.
std::string metric_name(LossKind loss);

struct FoldRecord {
  std::string variant;
  Index fold = 0;
  Index n_train = 0;
  Index n_test = 0;
  double value = 0.0;
  double seconds = 0.0;
  Backend backend = Backend::Dense;
};

struct VariantSummary {
  std::string variant;
  Index config_index = 0;
  double lambda = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation, 0 for a single fold
  Index count = 0;
};

struct MetricsReport {
  std::string command;
  std::string metric;
  std::vector<ExperimentConfig> configs;
  std::vector<VariantSummary> variants;
  std::vector<FoldRecord> folds;
  std::vector<std::string> notes;

  /// Tab-separated records, parseable by load_configs and by tests.
  std::string to_records() const;
  /// Aligned table for terminals.
  std::string to_table() const;
};

/// Sample mean and standard deviation.
std::pair<double, double> mean_and_std(const std::vector<double>& values);

struct FitPredictOutput {
  MetricsReport report;
  std::vector<std::string> predictions;
};

FitPredictOutput run_fit_predict(const ExperimentConfig& config, const std::string& train_path,
                                 const std::string& test_path);
MetricsReport run_cv(const ExperimentConfig& config, const std::string& data_path);
MetricsReport run_compare(const std::vector<ExperimentConfig>& configs,
                          const std::string& data_path);

/// Same as the run_* functions, then writes the report to `out_path` (and for
/// fit-predict the predictions, one per line) when the path is not empty.
MetricsReport cmd_fit_predict(const ExperimentConfig& config, const std::string& train_path,
                              const std::string& test_path, const std::string& out_path,
                              const std::string& predictions_path = "");
MetricsReport cmd_cv(const ExperimentConfig& config, const std::string& data_path,
                     const std::string& out_path);
MetricsReport cmd_compare(const std::vector<ExperimentConfig>& configs,
                          const std::string& data_path, const std::string& out_path);

/// Default predictions file next to a report.
std::string default_predictions_path(const std::string& out_path);

struct VerifyOptions {
  Index max_n = 6;
  Index max_d = 5;
  Index trials = 100;
  std::uint64_t seed = 0;
};

struct VerifyCheck {
  std::string name;
  Index trials = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  bool passed = true;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  std::vector<std::string> notes;

  bool passed() const;
  std::string to_records() const;
  std::string to_table() const;
};

/// Random small instances checked against the explicit-feature oracle, the
/// scalar closed form, the kernel trick and the solver backends.
VerifyReport cmd_verify(const VerifyOptions& options);

struct BenchOptions {
  std::vector<Index> n_list{30, 100, 300};
  double chol_tol = 1e-8;
  std::uint64_t seed = 0;
  double lambda = 0.1;
  double sigma_k = 2.0;
  double sigma_l = 2.0;
  Index queries = 20;
  Index dense_cap = kDefaultDenseCap;
};

struct BenchRow {
  Index n = 0;
  std::optional<double> dense_seconds;
  double eigen_seconds = 0.0;
  double lowrank_seconds = 0.0;
  Index m1 = 0;
  Index m2 = 0;
  double max_relative_diff = 0.0;  // low-rank scores against the exact path
  std::string note;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string to_records() const;
  std::string to_table() const;
};

/// Times exact and low-rank covariance scoring on clustered data.
BenchReport cmd_bench(const BenchOptions& options);

/// Writes `text` to `path`, replacing the file. Throws DataError on failure.
void write_text_file(const std::string& path, const std::string& text);

}  // namespace opkde
