#include "opkde/data.hpp"
#include "opkde/kde.hpp"
#include "opkde/lowrank.hpp"

#include <benchmark/benchmark.h>

using namespace opkde;

namespace {

struct Problem {
  Dataset train;
  SampleMatrix queries;
};

Problem clustered(Index n) {
  const Dataset all = synthesize_clusters(n + 20, 8, 0.1, static_cast<std::uint64_t>(n));
  std::vector<Index> tr, q;
  for (Index i = 0; i < all.size(); ++i) (i < n ? tr : q).push_back(i);
  return {all.subset(tr), all.subset(q).inputs};
}

KdeParams params(OvkSpec ovk) {
  KdeParams p;
  p.input_kernel = ScalarKernelSpec::rbf(2.0);
  p.output_kernel = ScalarKernelSpec::rbf(2.0);
  p.ovk = ovk;
  p.lambda = 0.1;
  return p;
}

void fit_and_predict(benchmark::State& state, Backend backend, OvkSpec ovk) {
  const Problem prob = clustered(state.range(0));
  FitOptions fo;
  fo.backend = backend;
  for (auto _ : state) {
    const FittedKde model = FittedKde::fit(prob.train, params(ovk), fo);
    benchmark::DoNotOptimize(model.predict_indices(prob.queries, prob.train.outputs));
  }
  state.SetComplexityN(state.range(0));
}

void BM_DenseCov(benchmark::State& s) { fit_and_predict(s, Backend::Dense, OvkSpec::covariance()); }
void BM_EigenCov(benchmark::State& s) { fit_and_predict(s, Backend::Eigen, OvkSpec::covariance()); }
void BM_EigenCondCov(benchmark::State& s) {
  fit_and_predict(s, Backend::Eigen, OvkSpec::conditional(0.01));
}
void BM_LowRankCov(benchmark::State& s) { fit_and_predict(s, Backend::LowRank, OvkSpec::covariance()); }

void BM_IncompleteCholesky(benchmark::State& state) {
  const Problem prob = clustered(state.range(0));
  const Matrix g = gram(ScalarKernelSpec::rbf(2.0), prob.train.inputs);
  for (auto _ : state) benchmark::DoNotOptimize(incomplete_cholesky(g, 1e-8));
}

}  // namespace

// The dense solve factors an n^2 x n^2 matrix, so it stays at small n.
BENCHMARK(BM_DenseCov)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenCov)->Arg(40)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EigenCondCov)->Arg(40)->Arg(100)->Arg(300)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LowRankCov)->Arg(40)->Arg(100)->Arg(300)->Arg(1000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_IncompleteCholesky)->Arg(300)->Arg(1000)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
