// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any gating criterion fails.

#include "opkde/data.hpp"
#include "opkde/experiment.hpp"
#include "opkde/kde.hpp"
#include "opkde/lowrank.hpp"
#include "opkde/oracle.hpp"
#include "opkde/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

using namespace opkde;

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& title, const Outcome& o, bool gating = true) {
  const char* verdict = o.pass ? "PASS" : "FAIL";
  std::printf("AC%-2d %s  %s: %s%s\n", id, verdict, title.c_str(), o.detail.c_str(),
              gating ? "" : " (informational)");
  std::fflush(stdout);
  if (gating && !o.pass) ++g_failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

Matrix normals(Rng& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j) {
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  }
  return m;
}

Vector normals(Rng& rng, Index n) { return normals(rng, n, 1).col(0); }

Index draw(Rng& rng, Index lo, Index hi) {
  return lo + static_cast<Index>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
}

double log_draw(Rng& rng, double lo_exp, double hi_exp) {
  return std::pow(10.0, rng.uniform(lo_exp, hi_exp));
}

double rel(const Matrix& a, const Matrix& b) {
  const double scale = b.norm();
  return scale > 0.0 ? (a - b).norm() / scale : (a - b).norm();
}

KdeParams rbf_params(double sk, double sl, OvkSpec ovk, double lambda) {
  KdeParams p;
  p.input_kernel = ScalarKernelSpec::rbf(sk);
  p.output_kernel = ScalarKernelSpec::rbf(sl);
  p.ovk = ovk;
  p.lambda = lambda;
  return p;
}

FitOptions with_backend(Backend b, double chol_tol = 1e-8) {
  FitOptions fo;
  fo.backend = b;
  fo.lowrank.chol_tol = chol_tol;
  return fo;
}

// 1. Gram path against the block-operator oracle in explicit coordinates.
Outcome oracle_equivalence() {
  const auto start = Clock::now();
  Rng rng(1001);
  double worst = 0.0;
  int mismatches = 0;
  int instances = 0;
  for (int t = 0; t < 120; ++t) {
    const Index n = draw(rng, 2, 6);
    const Index d = draw(rng, 1, 5);
    const Index p = draw(rng, 1, 4);
    Dataset train;
    train.inputs = normals(rng, n, p);
    train.outputs = normals(rng, n, d);
    const double lambda = log_draw(rng, -3.0, 0.5);
    const double eps = log_draw(rng, -3.0, 0.5);
    const Matrix cands = normals(rng, draw(rng, 2, 8), d);
    const Vector x = normals(rng, p);
    for (OvkFamily family : {OvkFamily::Covariance, OvkFamily::ConditionalCovariance}) {
      KdeParams params;
      params.input_kernel = ScalarKernelSpec::linear();
      params.output_kernel = ScalarKernelSpec::linear();
      params.ovk = family == OvkFamily::Covariance ? OvkSpec::covariance() : OvkSpec::conditional(eps);
      params.lambda = lambda;
      const Vector gram_scores = FittedKde::fit(train, params).scores(x, cands);

      ExplicitFeatureProblem prob;
      prob.input_features = train.inputs;
      prob.output_features = train.outputs;
      prob.lambda = lambda;
      prob.epsilon = eps;
      prob.family = family;
      prob.cap = n * d;
      Vector oracle_scores(cands.rows());
      for (Index c = 0; c < cands.rows(); ++c) {
        oracle_scores(c) = oracle_score(prob, x, cands.row(c).transpose());
      }
      double err = 0.0;
      double scale = 0.0;
      for (Index a = 0; a < cands.rows(); ++a) {
        for (Index b = a + 1; b < cands.rows(); ++b) {
          const double dor = oracle_scores(a) - oracle_scores(b);
          err = std::max(err, std::abs(dor - (gram_scores(a) - gram_scores(b))));
          scale = std::max(scale, std::abs(dor));
        }
      }
      worst = std::max(worst, scale > 0.0 ? err / scale : err);
      if (argmin_lowest(gram_scores) != argmin_lowest(oracle_scores)) ++mismatches;
      ++instances;
    }
  }
  const double secs = since(start);
  Outcome o;
  o.pass = worst <= 1e-8 && mismatches == 0 && secs < 30.0 && instances >= 100;
  o.detail = std::to_string(instances) + " instances, worst relative diff " + sci(worst) +
             " (tol 1e-8), argmin mismatches " + std::to_string(mismatches) + ", " +
             fixed(secs, 2) + " s";
  return o;
}

// 2. Identity family against scalar kernel ridge regression.
Outcome cortes_recovery() {
  Rng rng(2002);
  double worst = 0.0;
  int instances = 0;
  for (int t = 0; t < 120; ++t) {
    const Index n = draw(rng, 1, 20);
    const Index p = draw(rng, 1, 5);
    const Index d = draw(rng, 1, 5);
    Dataset train;
    train.inputs = normals(rng, n, p);
    train.outputs = normals(rng, n, d);
    const KdeParams params = rbf_params(log_draw(rng, -0.5, 0.5), log_draw(rng, -0.5, 0.5),
                                        OvkSpec::identity(), log_draw(rng, -3.0, 0.0));
    const FittedKde model = FittedKde::fit(train, params);
    const Vector x = normals(rng, p);
    Matrix reg = gram(params.input_kernel, train.inputs);
    reg.diagonal().array() += params.lambda;
    const Vector coef = reg.fullPivLu().solve(gram_vector(params.input_kernel, x, train.inputs));
    const Matrix cands = normals(rng, 5, d);
    const Vector got = model.scores(x, cands);
    for (Index c = 0; c < cands.rows(); ++c) {
      const Vector y = cands.row(c).transpose();
      const double lyy = eval_kernel(params.output_kernel, y, y);
      const double expected = lyy - 2.0 * coef.dot(gram_vector(params.output_kernel, y, train.outputs));
      // Scores lie in [-l(y,y), l(y,y)] scale; near-zero scores are measured against l(y,y).
      worst = std::max(worst, std::abs(got(c) - expected) / std::max(std::abs(expected), lyy));
    }
    ++instances;
  }
  Outcome o;
  o.pass = worst <= 1e-10 && instances >= 100;
  o.detail = std::to_string(instances) + " instances, worst relative diff " + sci(worst) + " (tol 1e-10)";
  return o;
}

// 3. <T phi1, phi2> against the kernel-only evaluation of [T l(y1, .)](y2).
Outcome kernel_trick() {
  Rng rng(3003);
  double worst_random = 0.0;
  double worst_identity = 0.0;
  int instances = 0;
  for (int t = 0; t < 120; ++t) {
    const Index d = draw(rng, 1, 6);
    const Matrix a = normals(rng, d, d);
    const Matrix t_sym = 0.5 * (a + a.transpose());
    const Matrix anchors = normals(rng, d + draw(rng, 0, 4), d);
    const Vector phi1 = normals(rng, d);
    const Vector phi2 = normals(rng, d);
    worst_random = std::max(worst_random, oracle_kernel_trick_residual(t_sym, anchors, phi1, phi2));
    worst_identity = std::max(
        worst_identity, oracle_kernel_trick_residual(Matrix::Identity(d, d), anchors, phi1, phi2));
    ++instances;
  }
  Outcome o;
  o.pass = worst_random <= 1e-10 && worst_identity <= 1e-10 && instances >= 100;
  o.detail = std::to_string(instances) + " random symmetric T, worst residual " + sci(worst_random) +
             "; T = I worst residual " + sci(worst_identity) + " (tol 1e-10)";
  return o;
}

// 4. Low-rank and eigen backends against the dense Kronecker solve.
Outcome backend_equivalence() {
  Rng rng(4004);
  double worst_low = 0.0;
  double worst_eig = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = draw(rng, 2, 20);
    Dataset train;
    train.inputs = normals(rng, n, 3);
    train.outputs = normals(rng, n, 2);
    const Vector x = normals(rng, 3);
    const double lambda = log_draw(rng, -2.0, 0.0);
    const double sk = log_draw(rng, -0.3, 0.3);
    const double sl = log_draw(rng, -0.3, 0.3);
    for (OvkSpec ovk : {OvkSpec::covariance(), OvkSpec::conditional(0.1), OvkSpec::identity()}) {
      const KdeParams params = rbf_params(sk, sl, ovk, lambda);
      const Vector dense = FittedKde::fit(train, params, with_backend(Backend::Dense)).linear_form(x);
      worst_eig = std::max(
          worst_eig, rel(FittedKde::fit(train, params, with_backend(Backend::Eigen)).linear_form(x), dense));
      if (ovk.family == OvkFamily::Covariance) {
        const Vector low =
            FittedKde::fit(train, params, with_backend(Backend::LowRank, 1e-14)).linear_form(x);
        worst_low = std::max(worst_low, rel(low, dense));
      }
    }
  }

  // n = 300: the dense system is declined, the low-rank path predicts.
  const Dataset all = synthesize_clusters(320, 8, 0.1, 44);
  std::vector<Index> tr, te;
  for (Index i = 0; i < all.size(); ++i) (i < 300 ? tr : te).push_back(i);
  const Dataset train = all.subset(tr);
  const Dataset test = all.subset(te);
  const KdeParams params = rbf_params(2.0, 2.0, OvkSpec::covariance(), 0.1);
  bool declined = false;
  try {
    FittedKde::fit(train, params, with_backend(Backend::Dense));
  } catch (const ConfigError&) {
    declined = true;
  }
  const auto start = Clock::now();
  bool predicted = false;
  std::string large_note;
  try {
    const FittedKde model = FittedKde::fit(train, params, with_backend(Backend::LowRank));
    const auto idx = model.predict_indices(test.inputs, train.outputs);
    predicted = idx.size() == static_cast<std::size_t>(test.size());
    large_note = "ranks " + std::to_string(model.lowrank()->k_factor().rank()) + "/" +
                 std::to_string(model.lowrank()->l_factor().rank());
  } catch (const std::exception& e) {
    large_note = e.what();
  }
  const double secs = since(start);

  Outcome o;
  o.pass = worst_low <= 1e-6 && worst_eig <= 1e-9 && declined && predicted && secs < 60.0;
  o.detail = "lowrank vs dense " + sci(worst_low) + " (tol 1e-6), eigen vs dense " + sci(worst_eig) +
             " (tol 1e-9); n=300 dense " + (declined ? "declined" : "NOT declined") +
             ", lowrank prediction " + (predicted ? "done" : "failed") + " in " + fixed(secs, 2) +
             " s (" + large_note + ")";
  return o;
}

// 5. Incomplete Cholesky stopping rule and exact low-rank recovery.
Outcome cholesky() {
  Rng rng(5005);
  int factorizations = 0;
  int violations = 0;
  for (int t = 0; t < 60; ++t) {
    const Index n = draw(rng, 5, 80);
    const Matrix pts = normals(rng, n, draw(rng, 1, 4));
    const Matrix g = gram(ScalarKernelSpec::rbf(log_draw(rng, -0.5, 0.7)), pts);
    for (double tol : {1e-1, 1e-3, 1e-6, 1e-10, 1e-14}) {
      const CholeskyFactor f = incomplete_cholesky(g, tol);
      const double actual = (g - f.u * f.u.transpose()).trace();
      ++factorizations;
      if (!(f.residual_trace <= tol * static_cast<double>(n)) ||
          !(actual <= tol * static_cast<double>(n) + 1e-12)) {
        ++violations;
      }
    }
  }
  double worst_exact = 0.0;
  int exact_cases = 0;
  for (int t = 0; t < 60; ++t) {
    const Index n = draw(rng, 3, 60);
    const Index r = draw(rng, 1, std::min<Index>(n, 10));
    const Matrix a = normals(rng, n, r);
    const Matrix g = a * a.transpose();
    const CholeskyFactor f = incomplete_cholesky(g, 1e-14, r + draw(rng, 0, 3));
    worst_exact = std::max(worst_exact, (g - f.u * f.u.transpose()).cwiseAbs().maxCoeff() /
                                            g.cwiseAbs().maxCoeff());
    ++exact_cases;
  }
  Outcome o;
  o.pass = violations == 0 && worst_exact <= 1e-10;
  o.detail = std::to_string(factorizations) + " factorizations, " + std::to_string(violations) +
             " above tol*n; " + std::to_string(exact_cases) + " rank-r matrices, worst entry error " +
             sci(worst_exact) + " (tol 1e-10)";
  return o;
}

// 6. Conditional covariance with a huge epsilon reduces to covariance.
Outcome conditional_limit() {
  Rng rng(6006);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index n = draw(rng, 2, 10);
    Dataset train;
    train.inputs = normals(rng, n, 2);
    train.outputs = normals(rng, n, 3);
    const double lambda = log_draw(rng, -2.0, 0.0);
    const double sk = log_draw(rng, -0.3, 0.3);
    const double sl = log_draw(rng, -0.3, 0.3);
    const Vector x = normals(rng, 2);
    const Matrix cands = normals(rng, 6, 3);
    const Vector cov =
        FittedKde::fit(train, rbf_params(sk, sl, OvkSpec::covariance(), lambda)).scores(x, cands);
    const Vector cond =
        FittedKde::fit(train, rbf_params(sk, sl, OvkSpec::conditional(1e12), lambda)).scores(x, cands);
    for (Index c = 0; c < cands.rows(); ++c) {
      worst = std::max(worst, std::abs(cond(c) - cov(c)) / std::max(std::abs(cov(c)), 1e-300));
    }
  }
  Outcome o;
  o.pass = worst <= 1e-6;
  o.detail = "100 instances, worst entrywise relative diff " + sci(worst) + " (tol 1e-6)";
  return o;
}

// 7. identity >= covariance >= conditional covariance on correlated toy data.
Outcome family_ordering() {
  const auto start = Clock::now();
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Dataset all = synthesize_toy(600, seed, 0.1);
    std::vector<Index> tr, te;
    for (Index i = 0; i < all.size(); ++i) (i < 200 ? tr : te).push_back(i);
    const Dataset train = all.subset(tr);
    const Dataset test = all.subset(te);
    double loss[3];
    int k = 0;
    for (OvkSpec ovk : {OvkSpec::identity(), OvkSpec::covariance(), OvkSpec::conditional(0.01)}) {
      const FittedKde model = FittedKde::fit(train, rbf_params(0.3, 3.0, ovk, 0.01));
      const auto idx = model.predict_indices(test.inputs, train.outputs);
      double total = 0.0;
      for (Index i = 0; i < test.size(); ++i) {
        total += rbf_loss(test.outputs.row(i).transpose(),
                          train.outputs.row(idx[static_cast<std::size_t>(i)]).transpose(), 3.0);
      }
      loss[k++] = total / static_cast<double>(test.size());
    }
    const bool ordered = loss[0] >= loss[1] && loss[1] >= loss[2];
    wins += ordered;
    detail += (seed > 1 ? "; " : "") + std::string("seed ") + std::to_string(seed) + " " +
              fixed(loss[0], 4) + "/" + fixed(loss[1], 4) + "/" + fixed(loss[2], 4) +
              (ordered ? "" : " (not ordered)");
  }
  const double secs = since(start);
  Outcome o;
  o.pass = wins >= 4 && secs < 300.0;
  o.detail = std::to_string(wins) + "/5 runs ordered, " + fixed(secs, 1) + " s [" + detail + "]";
  return o;
}

std::string temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("opkde_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir.string();
}

// 8. Digit-halves protocol on a USPS-format file (USPS_PATH, or synthetic digits).
Outcome usps_protocol(const std::string& dir) {
  std::string path;
  std::string source;
  if (const char* env = std::getenv("USPS_PATH"); env && *env) {
    path = env;
    source = path;
  } else {
    path = dir + "/digits.txt";
    write_usps(path, synthesize_digits(600, 8));
    source = "synthetic digits (set USPS_PATH for real data)";
  }
  ExperimentConfig c = parse_config(
      "format = usps\nmax_samples = 600\nfolds = 5\nprotocol = inverted\nlambda = 0.1\n"
      "sigma_k = 1\nsigma_l = 12\nfamily = cov\nseed = 0\n");
  Outcome o;
  try {
    const MetricsReport r = run_cv(c, path);
    const double mean = r.variants.front().mean;
    const bool in_band = std::abs(mean - 0.7616) <= 0.15;
    o.pass = std::isfinite(mean);
    o.detail = "covariance mean RBF loss " + fixed(mean, 4) + " +- " + fixed(r.variants.front().std_dev, 4) +
               " on " + source + "; informational target 0.7616 +- 0.15 " + (in_band ? "met" : "not met");
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("did not complete: ") + e.what();
  }
  return o;
}

// 9. Per-position decoding against exhaustive enumeration of strings.
Outcome per_position() {
  int instances = 0;
  int mismatches = 0;
  for (std::uint64_t seed = 0; instances < 60; ++seed) {
    const std::string alphabet = std::string("xyz").substr(0, 1 + seed % 3);
    const Index p = 3;
    const auto words = synthesize_ocr_words(8, 1, p, alphabet, 900 + seed, 0.1);
    const OcrFeatureMap map(words, ScalarKernelSpec::rbf(4.0), p, alphabet);
    const Dataset enc = map.encode(words);
    KdeParams params;
    params.input_kernel = ScalarKernelSpec::linear();
    params.output_kernel = ScalarKernelSpec::linear();
    const OvkSpec families[] = {OvkSpec::covariance(), OvkSpec::conditional(0.05), OvkSpec::identity()};
    params.ovk = families[seed % 3];
    params.lambda = 0.05;
    FitOptions fo;
    fo.block_layout = OutputBlockLayout{static_cast<Index>(alphabet.size()), p};
    const FittedKde model = FittedKde::fit(enc, params, fo);

    for (const auto& w : synthesize_ocr_words(2, 1, p, alphabet, 5000 + seed, 0.2)) {
      std::vector<std::string> all;
      std::function<void(const std::string&)> grow = [&](const std::string& s) {
        if (static_cast<Index>(s.size()) == w.length()) {
          all.push_back(s);
          return;
        }
        for (char ch : alphabet) grow(s + ch);
      };
      grow("");
      Matrix cands(static_cast<Index>(all.size()), enc.outputs.cols());
      for (std::size_t i = 0; i < all.size(); ++i) {
        cands.row(static_cast<Index>(i)) = map.output_features(all[i]).transpose();
      }
      const Vector x = map.input_features(w.images);
      const std::string exhaustive = all[static_cast<std::size_t>(model.predict(x, cands).chosen_index)];
      if (predict_per_position(model, x, w.length(), alphabet) != exhaustive) ++mismatches;
      ++instances;
    }
  }
  Outcome o;
  o.pass = mismatches == 0 && instances >= 50;
  o.detail = std::to_string(instances) + " instances (q <= 3, alphabet <= 3), " +
             std::to_string(mismatches) + " mismatches";
  return o;
}

std::vector<std::string> metric_lines(const std::string& records) {
  std::vector<std::string> out;
  std::istringstream in(records);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("fold\t", 0) == 0 || line.rfind("aggregate\t", 0) == 0) out.push_back(line);
  }
  return out;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

// 10. cmd_cv twice with the same seed writes identical metric records.
Outcome determinism(const std::string& dir) {
  ExperimentConfig c = parse_config(
      "format = toy\nmax_samples = 150\nfolds = 5\nsigma_k = 0.3\nsigma_l = 3\nlambda = 0.01,0.1\n"
      "family = condcov\nepsilon = 0.01\nseed = 12\n");
  cmd_cv(c, "", dir + "/cv_a.tsv");
  apply_setting(c, "threads", "1");
  cmd_cv(c, "", dir + "/cv_b.tsv");
  const auto a = metric_lines(slurp(dir + "/cv_a.tsv"));
  const auto b = metric_lines(slurp(dir + "/cv_b.tsv"));
  Outcome o;
  o.pass = !a.empty() && a == b;
  o.detail = std::to_string(a.size()) + " metric records, " + (a == b ? "byte-identical" : "DIFFERENT") +
             " across runs";
  return o;
}

template <class F>
Outcome guarded(F&& f) {
  try {
    return f();
  } catch (const std::exception& e) {
    return Outcome{false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

int main() {
  const std::string dir = temp_dir();
  report(1, "oracle equivalence", guarded(oracle_equivalence));
  report(2, "identity family closed form", guarded(cortes_recovery));
  report(3, "generalized kernel trick", guarded(kernel_trick));
  report(4, "backend equivalence", guarded(backend_equivalence));
  report(5, "incomplete Cholesky", guarded(cholesky));
  report(6, "conditional covariance limit", guarded(conditional_limit));
  report(7, "family ordering on toy data", guarded(family_ordering));
  report(8, "digit halves protocol", guarded([&] { return usps_protocol(dir); }));
  report(9, "per-position decoding", guarded(per_position));
  report(10, "cv determinism", guarded([&] { return determinism(dir); }));
  std::filesystem::remove_all(dir);
  std::printf("%s: %d gating criteria failed\n", g_failures ? "FAIL" : "PASS", g_failures);
  return g_failures ? 1 : 0;
}
