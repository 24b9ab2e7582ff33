#include "opkde/experiment.hpp"

#include "opkde/oracle.hpp"
#include "opkde/random.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace opkde {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

// Shortest text that reads back to the same double.
std::string fmt(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string fmt_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end || !std::isfinite(out)) {
    throw ConfigError(key + ": expected a finite number, got '" + value + "'");
  }
  return out;
}

long long parse_integer(const std::string& key, const std::string& value) {
  long long out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": expected an integer, got '" + value + "'");
  }
  return out;
}

Index parse_count(const std::string& key, const std::string& value) {
  const long long v = parse_integer(key, value);
  if (v < 0) throw ConfigError(key + ": must not be negative");
  return static_cast<Index>(v);
}

std::uint64_t parse_seed(const std::string& key, const std::string& value) {
  std::uint64_t out = 0;
  const char* begin = value.data();
  const char* end = begin + value.size();
  const auto res = std::from_chars(begin, end, out);
  if (res.ec != std::errc() || res.ptr != end) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + value + "'");
  }
  return out;
}

template <typename Enum>
Enum parse_choice(const std::string& key, const std::string& value,
                  const std::vector<std::pair<std::string, Enum>>& choices) {
  std::string names;
  for (const auto& [name, e] : choices) {
    if (name == value) return e;
    names += names.empty() ? name : "|" + name;
  }
  throw ConfigError(key + ": unknown value '" + value + "' (expected " + names + ")");
}

const std::vector<std::pair<std::string, DataFormat>> kFormats{
    {"matrix", DataFormat::Matrix}, {"usps", DataFormat::Usps},
    {"ocr", DataFormat::Ocr}, {"toy", DataFormat::Toy}};
const std::vector<std::pair<std::string, LossKind>> kLosses{
    {"rbf", LossKind::Rbf}, {"exact", LossKind::Exact},
    {"char_accuracy", LossKind::CharAccuracy}};
const std::vector<std::pair<std::string, CandidatePolicy>> kCandidates{
    {"training", CandidatePolicy::Training}, {"all", CandidatePolicy::All},
    {"per_position", CandidatePolicy::PerPosition}};
const std::vector<std::pair<std::string, CvProtocol>> kProtocols{
    {"inverted", CvProtocol::Inverted}, {"standard", CvProtocol::Standard}};
const std::vector<std::pair<std::string, Normalization>> kNormalizations{
    {"none", Normalization::None}, {"unit", Normalization::Unit},
    {"signed", Normalization::Signed}};
const std::vector<std::pair<std::string, KernelKind>> kKernelKinds{
    {"rbf", KernelKind::Rbf}, {"polynomial", KernelKind::Polynomial},
    {"linear", KernelKind::Linear}};

template <typename Enum>
std::string choice_name(Enum e, const std::vector<std::pair<std::string, Enum>>& choices) {
  for (const auto& [name, v] : choices) {
    if (v == e) return name;
  }
  return "?";
}

std::vector<Index> select_samples(Index n, Index max_samples, std::uint64_t seed) {
  std::vector<Index> rows(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) rows[static_cast<std::size_t>(i)] = i;
  if (max_samples == 0 || max_samples >= n) return rows;
  Rng rng(seed ^ 0x73616d706c65ULL);
  rng.shuffle(rows);
  rows.resize(static_cast<std::size_t>(max_samples));
  std::sort(rows.begin(), rows.end());
  return rows;
}

// Runs fn(0..count-1) on up to `threads` workers. The exception of the
// lowest failing index is rethrown after all workers finish.
void parallel_for(Index count, Index threads, const std::function<void(Index)>& fn) {
  if (count <= 0) return;
  Index workers = threads > 0 ? threads : static_cast<Index>(std::thread::hardware_concurrency());
  workers = std::clamp<Index>(workers, 1, count);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<Index> next{0};
  auto work = [&] {
    for (Index i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (Index w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string vector_text(const Eigen::Ref<const Vector>& v) {
  std::string out;
  for (Index i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += fmt(v(i));
  }
  return out;
}

SampleMatrix stack_rows(const SampleMatrix& a, const SampleMatrix& b) {
  SampleMatrix out(a.rows() + b.rows(), a.cols());
  out << a, b;
  return out;
}

Index longest_word(const std::vector<OcrWord>& words) {
  Index p = 0;
  for (const auto& w : words) p = std::max(p, w.length());
  return p;
}

FitOptions fit_options(const ExperimentConfig& config) {
  FitOptions options;
  options.backend = config.backend;
  options.dense_cap = config.dense_cap;
  options.lowrank.chol_tol = config.chol_tol;
  return options;
}

void add_conditioning_warnings(const FittedKde& model, std::vector<std::string>& warnings) {
  for (const auto& w : model.warnings()) warnings.push_back(w);
  const Index n = model.size();
  if (n < 2) {
    warnings.push_back("training set has a single sample; the fit is ill-conditioned");
  } else {
    const auto& y = model.training_outputs();
    if ((y.rowwise() - y.row(0)).cwiseAbs().maxCoeff() == 0.0) {
      warnings.push_back("training outputs are identical; the output Gram matrix is constant");
    }
  }
  if (model.artifact() && model.artifact()->residual > 1e-8) {
    warnings.push_back("solver residual " + fmt(model.artifact()->residual) + " exceeds 1e-8");
  }
}

SplitResult evaluate_vectors(const ExperimentConfig& config, double lambda,
                             const Dataset& train, const Dataset& test) {
  KdeParams params;
  params.input_kernel = config.input_kernel;
  params.output_kernel = config.output_kernel;
  params.ovk = config.ovk;
  params.lambda = lambda;
  const FittedKde model = FittedKde::fit(train, params, fit_options(config));

  const SampleMatrix candidates = config.candidates == CandidatePolicy::All
                                      ? stack_rows(train.outputs, test.outputs)
                                      : train.outputs;
  const std::vector<Index> chosen = model.predict_indices(test.inputs, candidates);

  SplitResult out;
  out.n_train = train.size();
  out.n_test = test.size();
  out.backend = model.backend();
  const double sigma = config.effective_loss_sigma();
  double total = 0.0;
  for (Index i = 0; i < test.size(); ++i) {
    const auto pick = candidates.row(chosen[static_cast<std::size_t>(i)]).transpose();
    const Vector truth = test.outputs.row(i).transpose();
    if (config.loss == LossKind::Rbf) {
      total += rbf_loss(truth, pick, sigma);
    } else {
      total += (truth - pick).cwiseAbs().maxCoeff() == 0.0 ? 0.0 : 1.0;
    }
    out.predictions.push_back(vector_text(pick));
  }
  out.value = test.size() > 0 ? total / static_cast<double>(test.size()) : 0.0;
  add_conditioning_warnings(model, out.warnings);
  return out;
}

SplitResult evaluate_words(const ExperimentConfig& config, double lambda,
                           const std::vector<OcrWord>& train,
                           const std::vector<OcrWord>& test) {
  const Index p = config.max_length > 0 ? config.max_length
                                        : std::max(longest_word(train), longest_word(test));
  const OcrFeatureMap map(train, config.input_kernel, p, config.alphabet);
  const Dataset tr = map.encode(train);
  const Dataset te = map.encode(test);

  KdeParams params;
  params.input_kernel = ScalarKernelSpec::linear();
  params.output_kernel = ScalarKernelSpec::linear();
  params.ovk = config.ovk;
  params.lambda = lambda;
  FitOptions options = fit_options(config);
  options.block_layout = OutputBlockLayout{static_cast<Index>(config.alphabet.size()), p};
  const FittedKde model = FittedKde::fit(tr, params, options);

  SplitResult out;
  out.n_train = tr.size();
  out.n_test = te.size();
  out.backend = model.backend();
  std::vector<std::string> decoded;
  if (config.candidates == CandidatePolicy::PerPosition) {
    for (Index i = 0; i < te.size(); ++i) {
      decoded.push_back(predict_per_position(model, te.inputs.row(i).transpose(),
                                             test[static_cast<std::size_t>(i)].length(),
                                             config.alphabet));
    }
  } else {
    SampleMatrix candidates = tr.outputs;
    std::vector<std::string> labels = tr.labels;
    if (config.candidates == CandidatePolicy::All) {
      candidates = stack_rows(tr.outputs, te.outputs);
      labels.insert(labels.end(), te.labels.begin(), te.labels.end());
    }
    for (Index idx : model.predict_indices(te.inputs, candidates)) {
      decoded.push_back(labels[static_cast<std::size_t>(idx)]);
    }
  }

  double total = 0.0;
  Index chars = 0;
  Index correct = 0;
  const double sigma = config.effective_loss_sigma();
  for (std::size_t i = 0; i < decoded.size(); ++i) {
    const std::string& truth = test[i].word;
    const std::string& guess = decoded[i];
    for (std::size_t c = 0; c < truth.size(); ++c) {
      if (c < guess.size() && guess[c] == truth[c]) ++correct;
    }
    chars += static_cast<Index>(truth.size());
    if (config.loss == LossKind::Rbf) {
      total += rbf_loss(map.output_features(truth), map.output_features(guess), sigma);
    } else if (config.loss == LossKind::Exact) {
      total += guess == truth ? 0.0 : 1.0;
    }
  }
  if (config.loss == LossKind::CharAccuracy) {
    out.value = chars > 0 ? 100.0 * static_cast<double>(correct) / static_cast<double>(chars) : 0.0;
  } else {
    out.value = decoded.empty() ? 0.0 : total / static_cast<double>(decoded.size());
  }
  out.predictions = std::move(decoded);
  add_conditioning_warnings(model, out.warnings);
  return out;
}

std::string variant_base(const ExperimentConfig& config) {
  return config.name.empty() ? to_string(config.ovk.family) : config.name;
}

void check_paired(const ExperimentConfig& a, const ExperimentConfig& b) {
  if (a.loss != b.loss) {
    throw ConfigError("compare: mismatched loss kinds (" + to_string(a.loss) + " vs " +
                      to_string(b.loss) + ")");
  }
  if (a.format != b.format || a.data_path != b.data_path || a.max_samples != b.max_samples ||
      a.toy_noise != b.toy_noise || a.normalization != b.normalization ||
      a.input_cols != b.input_cols || a.output_cols != b.output_cols) {
    throw ConfigError("compare: configs must share the dataset");
  }
  if (a.folds != b.folds || a.seed != b.seed || a.protocol != b.protocol) {
    throw ConfigError("compare: configs must share folds, protocol and seed");
  }
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::string to_string(DataFormat v) { return choice_name(v, kFormats); }
std::string to_string(LossKind v) { return choice_name(v, kLosses); }
std::string to_string(CandidatePolicy v) { return choice_name(v, kCandidates); }
std::string to_string(CvProtocol v) { return choice_name(v, kProtocols); }
std::string to_string(Normalization v) { return choice_name(v, kNormalizations); }

void ExperimentConfig::validate() const {
  if (lambdas.empty()) throw ConfigError("lambda: at least one value is required");
  for (double l : lambdas) {
    if (!(l > 0.0) || !std::isfinite(l)) throw ConfigError("lambda: values must be positive");
  }
  input_kernel.validate();
  output_kernel.validate();
  ovk.validate();
  if (!(chol_tol > 0.0)) throw ConfigError("chol_tol: must be positive");
  if (dense_cap < 1) throw ConfigError("dense_cap: must be positive");
  if (loss_sigma && !(*loss_sigma > 0.0)) throw ConfigError("loss_sigma: must be positive");
  if (!(toy_noise >= 0.0)) throw ConfigError("toy_noise: must not be negative");
  if (backend == Backend::LowRank && ovk.family != OvkFamily::Covariance) {
    throw ConfigError("backend lowrank supports only the cov family");
  }
  if (format != DataFormat::Ocr) {
    if (candidates == CandidatePolicy::PerPosition) {
      throw ConfigError("candidates per_position requires format = ocr");
    }
    if (loss == LossKind::CharAccuracy) {
      throw ConfigError("loss char_accuracy requires format = ocr");
    }
  }
  if (normalization != Normalization::None && format != DataFormat::Usps) {
    throw ConfigError("normalize applies only to format = usps");
  }
  if (format == DataFormat::Ocr) {
    if (alphabet.empty()) throw ConfigError("alphabet: must not be empty");
    std::set<char> seen(alphabet.begin(), alphabet.end());
    if (seen.size() != alphabet.size()) throw ConfigError("alphabet: letters must be distinct");
  }
}

double ExperimentConfig::effective_loss_sigma() const {
  if (loss_sigma) return *loss_sigma;
  return output_kernel.kind == KernelKind::Rbf ? output_kernel.sigma : 1.0;
}

void apply_setting(ExperimentConfig& c, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "name") {
    c.name = value;
  } else if (key == "format") {
    c.format = parse_choice(key, value, kFormats);
  } else if (key == "data") {
    c.data_path = value;
  } else if (key == "test") {
    c.test_path = value;
  } else if (key == "input_cols") {
    c.input_cols = parse_count(key, value);
  } else if (key == "output_cols") {
    c.output_cols = parse_count(key, value);
  } else if (key == "max_samples") {
    c.max_samples = parse_count(key, value);
  } else if (key == "toy_noise") {
    c.toy_noise = parse_double(key, value);
  } else if (key == "normalize") {
    c.normalization = parse_choice(key, value, kNormalizations);
  } else if (key == "input_kernel") {
    c.input_kernel.kind = parse_choice(key, value, kKernelKinds);
  } else if (key == "sigma_k") {
    c.input_kernel.sigma = parse_double(key, value);
  } else if (key == "degree_k") {
    c.input_kernel.degree = static_cast<int>(parse_integer(key, value));
  } else if (key == "offset_k") {
    c.input_kernel.offset = parse_double(key, value);
  } else if (key == "output_kernel") {
    c.output_kernel.kind = parse_choice(key, value, kKernelKinds);
  } else if (key == "sigma_l") {
    c.output_kernel.sigma = parse_double(key, value);
  } else if (key == "degree_l") {
    c.output_kernel.degree = static_cast<int>(parse_integer(key, value));
  } else if (key == "offset_l") {
    c.output_kernel.offset = parse_double(key, value);
  } else if (key == "family") {
    try {
      c.ovk.family = parse_family(value);
    } catch (const Error&) {
      throw ConfigError("family: unknown value '" + value + "' (expected identity|cov|condcov)");
    }
  } else if (key == "epsilon") {
    c.ovk.epsilon = parse_double(key, value);
  } else if (key == "lambda") {
    c.lambdas.clear();
    for (const auto& part : split(value, ',')) {
      const double l = parse_double(key, trim(part));
      if (!(l > 0.0)) throw ConfigError("lambda: values must be positive, got '" + trim(part) + "'");
      c.lambdas.push_back(l);
    }
  } else if (key == "folds") {
    c.folds = parse_count(key, value);
  } else if (key == "protocol") {
    c.protocol = parse_choice(key, value, kProtocols);
  } else if (key == "seed") {
    c.seed = parse_seed(key, value);
  } else if (key == "backend") {
    if (value == "auto") {
      c.backend.reset();
    } else {
      try {
        c.backend = parse_backend(value);
      } catch (const Error&) {
        throw ConfigError("backend: unknown value '" + value + "' (expected auto|dense|eigen|lowrank)");
      }
    }
  } else if (key == "chol_tol") {
    c.chol_tol = parse_double(key, value);
  } else if (key == "dense_cap") {
    c.dense_cap = parse_count(key, value);
  } else if (key == "candidates") {
    c.candidates = parse_choice(key, value, kCandidates);
  } else if (key == "loss") {
    c.loss = parse_choice(key, value, kLosses);
  } else if (key == "loss_sigma") {
    if (value == "auto") {
      c.loss_sigma.reset();
    } else {
      c.loss_sigma = parse_double(key, value);
    }
  } else if (key == "max_length") {
    c.max_length = parse_count(key, value);
  } else if (key == "alphabet") {
    c.alphabet = value;
  } else if (key == "threads") {
    c.threads = parse_count(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

ExperimentConfig parse_config(std::string_view text) {
  ExperimentConfig config;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      apply_setting(config, body.substr(0, eq), body.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

std::vector<std::pair<std::string, std::string>> config_entries(const ExperimentConfig& c) {
  std::string lambdas;
  for (double l : c.lambdas) lambdas += (lambdas.empty() ? "" : ", ") + fmt(l);
  return {
      {"name", c.name},
      {"format", to_string(c.format)},
      {"data", c.data_path},
      {"test", c.test_path},
      {"input_cols", std::to_string(c.input_cols)},
      {"output_cols", std::to_string(c.output_cols)},
      {"max_samples", std::to_string(c.max_samples)},
      {"toy_noise", fmt(c.toy_noise)},
      {"normalize", to_string(c.normalization)},
      {"input_kernel", choice_name(c.input_kernel.kind, kKernelKinds)},
      {"sigma_k", fmt(c.input_kernel.sigma)},
      {"degree_k", std::to_string(c.input_kernel.degree)},
      {"offset_k", fmt(c.input_kernel.offset)},
      {"output_kernel", choice_name(c.output_kernel.kind, kKernelKinds)},
      {"sigma_l", fmt(c.output_kernel.sigma)},
      {"degree_l", std::to_string(c.output_kernel.degree)},
      {"offset_l", fmt(c.output_kernel.offset)},
      {"family", to_string(c.ovk.family)},
      {"epsilon", fmt(c.ovk.epsilon)},
      {"lambda", lambdas},
      {"folds", std::to_string(c.folds)},
      {"protocol", to_string(c.protocol)},
      {"seed", std::to_string(c.seed)},
      {"backend", c.backend ? to_string(*c.backend) : "auto"},
      {"chol_tol", fmt(c.chol_tol)},
      {"dense_cap", std::to_string(c.dense_cap)},
      {"candidates", to_string(c.candidates)},
      {"loss", to_string(c.loss)},
      {"loss_sigma", c.loss_sigma ? fmt(*c.loss_sigma) : "auto"},
      {"max_length", std::to_string(c.max_length)},
      {"alphabet", c.alphabet},
      {"threads", std::to_string(c.threads)},
  };
}

std::string format_config(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [k, v] : config_entries(config)) out += k + " = " + v + "\n";
  return out;
}

std::vector<ExperimentConfig> load_configs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text.rfind("# opkde report", 0) != 0) return {parse_config(text)};

  std::map<Index, ExperimentConfig> configs;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.rfind("config\t", 0) != 0) continue;
    const auto parts = split(line, '\t');
    if (parts.size() != 4) throw ConfigError("malformed config record in report '" + path + "'");
    apply_setting(configs[static_cast<Index>(parse_count("config index", parts[1]))], parts[2],
                  parts[3]);
  }
  if (configs.empty()) throw ConfigError("report '" + path + "' embeds no config");
  std::vector<ExperimentConfig> out;
  for (auto& [idx, c] : configs) out.push_back(std::move(c));
  return out;
}

ExperimentConfig load_config(const std::string& path) { return load_configs(path).front(); }

Index ExperimentData::size() const {
  return format == DataFormat::Ocr ? static_cast<Index>(words.size()) : vectors.size();
}

ExperimentData ExperimentData::subset(const std::vector<Index>& rows) const {
  ExperimentData out;
  out.format = format;
  if (format == DataFormat::Ocr) {
    for (Index r : rows) {
      if (r < 0 || r >= size()) throw DimensionError("subset: row index out of range");
      out.words.push_back(words[static_cast<std::size_t>(r)]);
    }
  } else {
    out.vectors = vectors.subset(rows);
  }
  return out;
}

ExperimentData load_experiment_data(const ExperimentConfig& config, const std::string& path) {
  ExperimentData out;
  out.format = config.format;
  if (config.format == DataFormat::Toy) {
    out.vectors = synthesize_toy(config.max_samples > 0 ? config.max_samples : 600, config.seed,
                                 config.toy_noise);
    return out;
  }
  if (path.empty()) throw ConfigError("no data file given (set 'data' or pass --data)");
  switch (config.format) {
    case DataFormat::Matrix: {
      if (config.input_cols < 1 || config.output_cols < 1) {
        throw ConfigError("format matrix needs input_cols and output_cols");
      }
      Dataset all = load_matrix_dataset(path, config.input_cols, config.output_cols);
      out.vectors = all.subset(select_samples(all.size(), config.max_samples, config.seed));
      break;
    }
    case DataFormat::Usps: {
      const auto digits = load_usps(path);
      const auto rows =
          select_samples(static_cast<Index>(digits.size()), config.max_samples, config.seed);
      std::vector<Vector> pixels;
      for (Index r : rows) pixels.push_back(digits[static_cast<std::size_t>(r)].pixels);
      if (config.normalization == Normalization::Unit) pixels = normalize_pixels(pixels, 0.0, 1.0);
      if (config.normalization == Normalization::Signed) {
        pixels = normalize_pixels(pixels, -1.0, 1.0);
      }
      out.vectors = split_digit_halves(pixels);
      out.vectors.metadata["normalize"] = to_string(config.normalization);
      break;
    }
    case DataFormat::Ocr: {
      const auto words = load_ocr_words(path);
      for (Index r : select_samples(static_cast<Index>(words.size()), config.max_samples,
                                    config.seed)) {
        out.words.push_back(words[static_cast<std::size_t>(r)]);
      }
      break;
    }
    case DataFormat::Toy:
      break;
  }
  return out;
}

std::vector<std::vector<Index>> make_folds(Index n, Index folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (n < folds) {
    throw ConfigError("cannot split " + std::to_string(n) + " samples into " +
                      std::to_string(folds) + " folds");
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const Index size = n / folds;
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(folds));
  for (Index f = 0; f < folds; ++f) {
    const Index begin = f * size;
    const Index end = f + 1 == folds ? n : begin + size;
    out[static_cast<std::size_t>(f)].assign(order.begin() + begin, order.begin() + end);
  }
  return out;
}

SplitResult evaluate_split(const ExperimentConfig& config, double lambda,
                           const ExperimentData& train, const ExperimentData& test) {
  config.validate();
  if (train.format != config.format || test.format != config.format) {
    throw ConfigError("data format does not match the config");
  }
  const auto start = Clock::now();
  SplitResult out = config.format == DataFormat::Ocr
                        ? evaluate_words(config, lambda, train.words, test.words)
                        : evaluate_vectors(config, lambda, train.vectors, test.vectors);
  out.seconds = seconds_since(start);
  return out;
}

std::string metric_name(LossKind loss) {
  switch (loss) {
    case LossKind::Rbf:
      return "rbf_loss";
    case LossKind::Exact:
      return "error_rate";
    case LossKind::CharAccuracy:
      return "wrc_percent";
  }
  return "?";
}

std::pair<double, double> mean_and_std(const std::vector<double>& values) {
  if (values.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  if (values.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / static_cast<double>(values.size() - 1))};
}

std::string MetricsReport::to_records() const {
  std::string out = "# opkde report\n";
  out += "command\t" + command + "\n";
  out += "metric\t" + metric + "\n";
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out += "seed\t" + std::to_string(i) + "\t" + std::to_string(configs[i].seed) + "\n";
    for (const auto& [k, v] : config_entries(configs[i])) {
      out += "config\t" + std::to_string(i) + "\t" + k + "\t" + sanitize(v) + "\n";
    }
  }
  for (const auto& v : variants) {
    out += "variant\t" + v.variant + "\t" + std::to_string(v.config_index) + "\t" +
           fmt(v.lambda) + "\n";
  }
  for (const auto& f : folds) {
    out += "fold\t" + f.variant + "\t" + std::to_string(f.fold) + "\t" +
           std::to_string(f.n_train) + "\t" + std::to_string(f.n_test) + "\t" + fmt(f.value) +
           "\n";
  }
  for (const auto& v : variants) {
    out += "aggregate\t" + v.variant + "\t" + fmt(v.mean) + "\t" + fmt(v.std_dev) + "\t" +
           std::to_string(v.count) + "\n";
  }
  for (const auto& f : folds) {
    out += "timing\t" + f.variant + "\t" + std::to_string(f.fold) + "\t" + fmt(f.seconds) +
           "\t" + to_string(f.backend) + "\n";
  }
  for (const auto& n : notes) out += "note\t" + sanitize(n) + "\n";
  return out;
}

std::string MetricsReport::to_table() const {
  std::size_t width = 7;
  for (const auto& v : variants) width = std::max(width, v.variant.size());
  const int w = static_cast<int>(width);
  std::string out;
  char line[512];
  std::snprintf(line, sizeof(line), "%s (%s)\n", command.c_str(), metric.c_str());
  out += line;
  std::snprintf(line, sizeof(line), "%-*s  %-10s  %5s  %12s  %12s\n", w, "variant", "lambda",
                "folds", "mean", "std");
  out += line;
  for (const auto& v : variants) {
    std::snprintf(line, sizeof(line), "%-*s  %-10s  %5lld  %12.6f  %12.6f\n", w,
                  v.variant.c_str(), fmt(v.lambda).c_str(), static_cast<long long>(v.count),
                  v.mean, v.std_dev);
    out += line;
  }
  out += "\n";
  std::snprintf(line, sizeof(line), "%-*s  %4s  %7s  %6s  %12s  %9s  %s\n", w, "variant", "fold",
                "n_train", "n_test", "value", "seconds", "backend");
  out += line;
  for (const auto& f : folds) {
    std::snprintf(line, sizeof(line), "%-*s  %4lld  %7lld  %6lld  %12.6f  %9.3f  %s\n", w,
                  f.variant.c_str(), static_cast<long long>(f.fold),
                  static_cast<long long>(f.n_train), static_cast<long long>(f.n_test), f.value,
                  f.seconds, to_string(f.backend).c_str());
    out += line;
  }
  if (!notes.empty()) {
    out += "\nnotes:\n";
    for (const auto& n : notes) out += "  " + n + "\n";
  }
  return out;
}

MetricsReport run_compare(const std::vector<ExperimentConfig>& configs,
                          const std::string& data_path) {
  if (configs.empty()) throw ConfigError("compare: no configs given");
  for (const auto& c : configs) {
    c.validate();
    check_paired(configs.front(), c);
  }
  const ExperimentConfig& base = configs.front();
  ExperimentData data = load_experiment_data(base, data_path.empty() ? base.data_path : data_path);
  const auto folds = make_folds(data.size(), base.folds, base.seed);

  MetricsReport report;
  report.command = "compare";
  report.metric = metric_name(base.loss);
  report.configs = configs;
  Index p = 0;
  if (base.format == DataFormat::Ocr) p = longest_word(data.words);

  struct Job {
    Index variant;
    Index fold;
  };
  std::vector<Job> jobs;
  std::vector<ExperimentConfig> run_configs;
  std::set<std::string> labels;
  for (std::size_t ci = 0; ci < configs.size(); ++ci) {
    ExperimentConfig c = configs[ci];
    if (c.format == DataFormat::Ocr && c.max_length == 0) c.max_length = p;
    for (double lambda : c.lambdas) {
      VariantSummary v;
      v.config_index = static_cast<Index>(ci);
      v.lambda = lambda;
      v.variant = variant_base(c);
      if (c.lambdas.size() > 1) v.variant += "@lambda=" + fmt(lambda);
      v.variant = sanitize(v.variant);
      for (char& ch : v.variant) {
        if (ch == ' ') ch = '_';
      }
      if (!labels.insert(v.variant).second) {
        Index k = 2;
        while (!labels.insert(v.variant + "#" + std::to_string(k)).second) ++k;
        v.variant += "#" + std::to_string(k);
      }
      report.variants.push_back(v);
      run_configs.push_back(c);
      for (Index f = 0; f < base.folds; ++f) {
        jobs.push_back({static_cast<Index>(report.variants.size()) - 1, f});
      }
    }
  }

  std::vector<SplitResult> results(jobs.size());
  parallel_for(static_cast<Index>(jobs.size()), base.threads, [&](Index j) {
    const Job& job = jobs[static_cast<std::size_t>(j)];
    std::vector<Index> held = folds[static_cast<std::size_t>(job.fold)];
    std::vector<Index> rest;
    for (Index f = 0; f < base.folds; ++f) {
      if (f == job.fold) continue;
      const auto& rows = folds[static_cast<std::size_t>(f)];
      rest.insert(rest.end(), rows.begin(), rows.end());
    }
    const bool inverted = base.protocol == CvProtocol::Inverted;
    const ExperimentData train = data.subset(inverted ? held : rest);
    const ExperimentData test = data.subset(inverted ? rest : held);
    const auto& v = report.variants[static_cast<std::size_t>(job.variant)];
    results[static_cast<std::size_t>(j)] =
        evaluate_split(run_configs[static_cast<std::size_t>(job.variant)], v.lambda, train, test);
  });

  std::set<std::string> seen_notes;
  for (std::size_t vi = 0; vi < report.variants.size(); ++vi) {
    auto& v = report.variants[vi];
    std::vector<double> values;
    for (std::size_t j = 0; j < jobs.size(); ++j) {
      if (jobs[j].variant != static_cast<Index>(vi)) continue;
      const SplitResult& r = results[j];
      report.folds.push_back(
          {v.variant, jobs[j].fold, r.n_train, r.n_test, r.value, r.seconds, r.backend});
      values.push_back(r.value);
      for (const auto& w : r.warnings) {
        const std::string note = v.variant + " fold " + std::to_string(jobs[j].fold) + ": " + w;
        if (seen_notes.insert(note).second) report.notes.push_back(note);
      }
    }
    const auto [mean, sd] = mean_and_std(values);
    v.mean = mean;
    v.std_dev = sd;
    v.count = static_cast<Index>(values.size());
  }
  return report;
}

MetricsReport run_cv(const ExperimentConfig& config, const std::string& data_path) {
  MetricsReport report = run_compare({config}, data_path);
  report.command = "cv";
  return report;
}

FitPredictOutput run_fit_predict(const ExperimentConfig& config, const std::string& train_path,
                                 const std::string& test_path) {
  config.validate();
  if (config.lambdas.size() != 1) {
    throw ConfigError("fit-predict takes a single lambda; use cv for a grid");
  }
  ExperimentData train;
  ExperimentData test;
  if (config.format == DataFormat::Toy) {
    train = load_experiment_data(config, "");
    ExperimentConfig shifted = config;
    shifted.seed = config.seed + 1;
    test = load_experiment_data(shifted, "");
  } else {
    const std::string tr = train_path.empty() ? config.data_path : train_path;
    const std::string te = test_path.empty() ? config.test_path : test_path;
    if (te.empty()) throw ConfigError("no test file given (set 'test' or pass --test)");
    train = load_experiment_data(config, tr);
    test = load_experiment_data(config, te);
  }
  ExperimentConfig run = config;
  if (run.format == DataFormat::Ocr && run.max_length == 0) {
    run.max_length = std::max(longest_word(train.words), longest_word(test.words));
  }
  SplitResult r = evaluate_split(run, run.lambdas.front(), train, test);

  FitPredictOutput out;
  MetricsReport& report = out.report;
  report.command = "fit-predict";
  report.metric = metric_name(config.loss);
  report.configs = {config};
  VariantSummary v;
  v.variant = sanitize(variant_base(config));
  for (char& ch : v.variant) {
    if (ch == ' ') ch = '_';
  }
  v.lambda = run.lambdas.front();
  v.mean = r.value;
  v.std_dev = 0.0;
  v.count = 1;
  report.variants.push_back(v);
  report.folds.push_back({v.variant, 0, r.n_train, r.n_test, r.value, r.seconds, r.backend});
  for (const auto& w : r.warnings) report.notes.push_back(w);
  out.predictions = std::move(r.predictions);
  return out;
}

std::string default_predictions_path(const std::string& out_path) {
  return out_path + ".predictions";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << text;
  if (!out) throw DataError("failed writing '" + path + "'");
}

MetricsReport cmd_fit_predict(const ExperimentConfig& config, const std::string& train_path,
                              const std::string& test_path, const std::string& out_path,
                              const std::string& predictions_path) {
  FitPredictOutput out = run_fit_predict(config, train_path, test_path);
  const std::string pred_path =
      !predictions_path.empty() ? predictions_path
                                : (out_path.empty() ? "" : default_predictions_path(out_path));
  if (!pred_path.empty()) {
    std::string text;
    for (const auto& p : out.predictions) text += p + "\n";
    write_text_file(pred_path, text);
  }
  if (!out_path.empty()) write_text_file(out_path, out.report.to_records());
  return out.report;
}

MetricsReport cmd_cv(const ExperimentConfig& config, const std::string& data_path,
                     const std::string& out_path) {
  MetricsReport report = run_cv(config, data_path);
  if (!out_path.empty()) write_text_file(out_path, report.to_records());
  return report;
}

MetricsReport cmd_compare(const std::vector<ExperimentConfig>& configs,
                          const std::string& data_path, const std::string& out_path) {
  MetricsReport report = run_compare(configs, data_path);
  if (!out_path.empty()) write_text_file(out_path, report.to_records());
  return report;
}

// ---------------------------------------------------------------------------
// verify

namespace {

SampleMatrix normal_matrix(Rng& rng, Index rows, Index cols) {
  SampleMatrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Vector normal_vector(Rng& rng, Index n) { return normal_matrix(rng, n, 1).col(0); }

double log_uniform(Rng& rng, double lo_exp, double hi_exp) {
  return std::pow(10.0, rng.uniform(lo_exp, hi_exp));
}

void record(VerifyCheck& check, double value) {
  check.worst = std::max(check.worst, value);
  if (!(value <= check.tolerance)) check.passed = false;
}

double relative(const Vector& a, const Vector& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : (a - b).norm();
}

}  // namespace

bool VerifyReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.passed; });
}

std::string VerifyReport::to_records() const {
  std::string out = "# opkde verify\n";
  for (const auto& c : checks) {
    out += "check\t" + c.name + "\t" + std::to_string(c.trials) + "\t" + fmt(c.worst) + "\t" +
           fmt(c.tolerance) + "\t" + (c.passed ? "pass" : "fail") + "\n";
  }
  for (const auto& n : notes) out += "note\t" + sanitize(n) + "\n";
  out += std::string("result\t") + (passed() ? "pass" : "fail") + "\n";
  return out;
}

std::string VerifyReport::to_table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-22s  %6s  %12s  %10s  %s\n", "check", "trials", "worst",
                "tolerance", "result");
  out += line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof(line), "%-22s  %6lld  %12.3e  %10.1e  %s\n", c.name.c_str(),
                  static_cast<long long>(c.trials), c.worst, c.tolerance,
                  c.passed ? "pass" : "FAIL");
    out += line;
  }
  for (const auto& n : notes) out += "note: " + n + "\n";
  out += std::string("overall: ") + (passed() ? "pass" : "FAIL") + "\n";
  return out;
}

VerifyReport cmd_verify(const VerifyOptions& options) {
  if (options.max_n < 2) throw ConfigError("verify: max_n must be at least 2");
  if (options.max_d < 1) throw ConfigError("verify: max_d must be at least 1");
  if (options.trials < 0) throw ConfigError("verify: trials must not be negative");

  VerifyCheck oracle_cov{"oracle_cov", 0, 0.0, 1e-8, true};
  VerifyCheck oracle_cond{"oracle_condcov", 0, 0.0, 1e-8, true};
  VerifyCheck argmin{"oracle_argmin_mismatch", 0, 0.0, 0.0, true};
  VerifyCheck trick{"kernel_trick", 0, 0.0, 1e-10, true};
  VerifyCheck cortes{"identity_closed_form", 0, 0.0, 1e-10, true};
  VerifyCheck eigen{"eigen_vs_dense", 0, 0.0, 1e-9, true};
  VerifyCheck lowrank{"lowrank_vs_dense", 0, 0.0, 1e-6, true};

  Rng rng(options.seed);
  for (Index t = 0; t < options.trials; ++t) {
    // Oracle equivalence in explicit coordinates, linear kernels on both sides.
    {
      const Index n = 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(options.max_n - 1)));
      const Index d = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(options.max_d)));
      const Index p = 1 + static_cast<Index>(rng.below(3));
      Dataset train;
      train.inputs = normal_matrix(rng, n, p);
      train.outputs = normal_matrix(rng, n, d);
      const double lambda = log_uniform(rng, -2.0, 0.0);
      const double eps = log_uniform(rng, -2.0, 0.0);
      const SampleMatrix cands = normal_matrix(rng, 6, d);
      const Vector x = normal_vector(rng, p);
      for (OvkFamily family : {OvkFamily::Covariance, OvkFamily::ConditionalCovariance}) {
        KdeParams params;
        params.input_kernel = ScalarKernelSpec::linear();
        params.output_kernel = ScalarKernelSpec::linear();
        params.ovk = family == OvkFamily::Covariance ? OvkSpec::covariance()
                                                     : OvkSpec::conditional(eps);
        params.lambda = lambda;
        FitOptions fo;
        fo.backend = Backend::Dense;
        const FittedKde model = FittedKde::fit(train, params, fo);
        const Vector gram_scores = model.scores(x, cands);

        ExplicitFeatureProblem prob{train.inputs, train.outputs, lambda, eps, family, n * d};
        Vector oracle_scores(cands.rows());
        for (Index c = 0; c < cands.rows(); ++c) {
          oracle_scores(c) = oracle_score(prob, x, cands.row(c).transpose());
        }
        double scale = 0.0;
        double err = 0.0;
        for (Index a = 0; a < cands.rows(); ++a) {
          for (Index b = a + 1; b < cands.rows(); ++b) {
            const double dor = oracle_scores(a) - oracle_scores(b);
            const double dgr = gram_scores(a) - gram_scores(b);
            scale = std::max(scale, std::abs(dor));
            err = std::max(err, std::abs(dor - dgr));
          }
        }
        auto& check = family == OvkFamily::Covariance ? oracle_cov : oracle_cond;
        ++check.trials;
        record(check, scale > 0.0 ? err / scale : err);
        ++argmin.trials;
        record(argmin, argmin_lowest(gram_scores) == argmin_lowest(oracle_scores) ? 0.0 : 1.0);
      }
    }
    // Generalized kernel trick with a random symmetric T and with T = I.
    {
      const Index d = 1 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(options.max_d)));
      const Matrix a = normal_matrix(rng, d, d);
      const Matrix t_sym = 0.5 * (a + a.transpose());
      const SampleMatrix anchors = normal_matrix(rng, d + 3, d);
      const Vector phi1 = normal_vector(rng, d);
      const Vector phi2 = normal_vector(rng, d);
      trick.trials += 2;
      record(trick, oracle_kernel_trick_residual(t_sym, anchors, phi1, phi2));
      record(trick, oracle_kernel_trick_residual(Matrix::Identity(d, d), anchors, phi1, phi2));
    }
    // Identity family against scalar kernel ridge.
    {
      const Index n = 2 + static_cast<Index>(rng.below(19));
      Dataset train;
      train.inputs = normal_matrix(rng, n, 3);
      train.outputs = normal_matrix(rng, n, 2);
      KdeParams params;
      params.input_kernel = ScalarKernelSpec::rbf(log_uniform(rng, -0.3, 0.3));
      params.output_kernel = ScalarKernelSpec::rbf(log_uniform(rng, -0.3, 0.3));
      params.ovk = OvkSpec::identity();
      params.lambda = log_uniform(rng, -2.0, 0.0);
      const FittedKde model = FittedKde::fit(train, params);
      const Vector x = normal_vector(rng, 3);
      Matrix reg = model.k_gram();
      reg.diagonal().array() += params.lambda;
      const Vector coef = reg.ldlt().solve(gram_vector(params.input_kernel, x, train.inputs));
      for (int c = 0; c < 4; ++c) {
        const Vector y = normal_vector(rng, 2);
        const double lyy = eval_kernel(params.output_kernel, y, y);
        const double expected =
            lyy - 2.0 * coef.dot(gram_vector(params.output_kernel, y, train.outputs));
        ++cortes.trials;
        record(cortes, std::abs(model.score(x, y) - expected) /
                           std::max(std::abs(expected), std::abs(lyy)));
      }
    }
    // Backends against the dense Kronecker solve.
    {
      const Index n = 2 + static_cast<Index>(rng.below(11));
      Dataset train;
      train.inputs = normal_matrix(rng, n, 2);
      train.outputs = normal_matrix(rng, n, 2);
      const Vector x = normal_vector(rng, 2);
      for (OvkFamily family : {OvkFamily::Covariance, OvkFamily::ConditionalCovariance}) {
        KdeParams params;
        params.input_kernel = ScalarKernelSpec::rbf(1.0);
        params.output_kernel = ScalarKernelSpec::rbf(1.0);
        params.ovk = family == OvkFamily::Covariance ? OvkSpec::covariance()
                                                     : OvkSpec::conditional(0.1);
        params.lambda = log_uniform(rng, -2.0, 0.0);
        FitOptions fo;
        fo.backend = Backend::Dense;
        const Vector ref = FittedKde::fit(train, params, fo).linear_form(x);
        fo.backend = Backend::Eigen;
        ++eigen.trials;
        record(eigen, relative(FittedKde::fit(train, params, fo).linear_form(x), ref));
        if (family == OvkFamily::Covariance) {
          fo.backend = Backend::LowRank;
          fo.lowrank.chol_tol = 1e-14;
          ++lowrank.trials;
          record(lowrank, relative(FittedKde::fit(train, params, fo).linear_form(x), ref));
        }
      }
    }
  }

  VerifyReport report;
  report.checks = {oracle_cov, oracle_cond, argmin, trick, cortes, eigen, lowrank};
  if (options.trials == 0) report.notes.push_back("no trials were run; every check passes vacuously");
  return report;
}

// ---------------------------------------------------------------------------
// bench

std::string BenchReport::to_records() const {
  std::string out = "# opkde bench\n";
  for (const auto& r : rows) {
    out += "bench\t" + std::to_string(r.n) + "\t" +
           (r.dense_seconds ? fmt(*r.dense_seconds) : std::string("skipped")) + "\t" +
           fmt(r.eigen_seconds) + "\t" + fmt(r.lowrank_seconds) + "\t" + std::to_string(r.m1) +
           "\t" + std::to_string(r.m2) + "\t" + fmt(r.max_relative_diff) + "\n";
    if (!r.note.empty()) out += "note\t" + sanitize(r.note) + "\n";
  }
  return out;
}

std::string BenchReport::to_table() const {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof(line), "%6s  %10s  %10s  %10s  %5s  %5s  %10s\n", "n", "dense_s",
                "eigen_s", "lowrank_s", "m1", "m2", "max_rel");
  out += line;
  for (const auto& r : rows) {
    const std::string dense = r.dense_seconds ? fmt_fixed(*r.dense_seconds, 4) : "skipped";
    std::snprintf(line, sizeof(line), "%6lld  %10s  %10.4f  %10.4f  %5lld  %5lld  %10.2e\n",
                  static_cast<long long>(r.n), dense.c_str(), r.eigen_seconds, r.lowrank_seconds,
                  static_cast<long long>(r.m1), static_cast<long long>(r.m2),
                  r.max_relative_diff);
    out += line;
  }
  for (const auto& r : rows) {
    if (!r.note.empty()) out += "note: " + r.note + "\n";
  }
  return out;
}

BenchReport cmd_bench(const BenchOptions& options) {
  if (options.queries < 1) throw ConfigError("bench: queries must be positive");
  BenchReport report;
  for (Index n : options.n_list) {
    if (n < 10) throw ConfigError("bench: n values must be at least 10");
    const Dataset all =
        synthesize_clusters(n + options.queries, 8, 0.1, options.seed + static_cast<std::uint64_t>(n));
    std::vector<Index> train_rows, query_rows;
    for (Index i = 0; i < all.size(); ++i) (i < n ? train_rows : query_rows).push_back(i);
    const Dataset train = all.subset(train_rows);
    const SampleMatrix queries = all.subset(query_rows).inputs;

    KdeParams params;
    params.input_kernel = ScalarKernelSpec::rbf(options.sigma_k);
    params.output_kernel = ScalarKernelSpec::rbf(options.sigma_l);
    params.ovk = OvkSpec::covariance();
    params.lambda = options.lambda;

    auto timed_scores = [&](Backend backend, double& seconds, Index* m1, Index* m2) {
      FitOptions fo;
      fo.backend = backend;
      fo.dense_cap = options.dense_cap;
      fo.lowrank.chol_tol = options.chol_tol;
      const auto start = Clock::now();
      const FittedKde model = FittedKde::fit(train, params, fo);
      const Matrix w = model.linear_forms(queries);
      seconds = seconds_since(start);
      if (m1 && model.lowrank()) {
        *m1 = model.lowrank()->k_factor().rank();
        *m2 = model.lowrank()->l_factor().rank();
      }
      // Scores of every training output for every query.
      Matrix s = -2.0 * model.l_gram() * w;
      s.colwise() += model.l_gram().diagonal();
      return s;
    };

    BenchRow row;
    row.n = n;
    Matrix reference;
    if (n * n <= options.dense_cap) {
      double sec = 0.0;
      reference = timed_scores(Backend::Dense, sec, nullptr, nullptr);
      row.dense_seconds = sec;
    } else {
      row.note = "n = " + std::to_string(n) + ": dense skipped, n^2 = " + std::to_string(n * n) +
                 " exceeds the cap " + std::to_string(options.dense_cap);
    }
    const Matrix eig = timed_scores(Backend::Eigen, row.eigen_seconds, nullptr, nullptr);
    if (reference.size() == 0) reference = eig;
    const Matrix low = timed_scores(Backend::LowRank, row.lowrank_seconds, &row.m1, &row.m2);
    const double scale = reference.cwiseAbs().maxCoeff();
    row.max_relative_diff = (low - reference).cwiseAbs().maxCoeff() / std::max(scale, 1e-300);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace opkde
