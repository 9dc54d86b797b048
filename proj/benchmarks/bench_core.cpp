#include <benchmark/benchmark.h>

#include "mlexp/evaluate.hpp"
#include "mlexp/learn.hpp"
#include "mlexp/rng.hpp"
#include "mlexp/stat_tests.hpp"
#include "mlexp/transform.hpp"

using namespace mlexp;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) x(i, j) = rng.uniform();
  }
  return x;
}

Labels random_labels(std::size_t n, std::size_t classes, std::uint64_t seed) {
  Rng rng(seed);
  Labels y(n);
  for (auto& v : y) v = static_cast<int>(rng.below(classes));
  return y;
}

void BM_StratifiedFolds(benchmark::State& state) {
  const auto y = random_labels(static_cast<std::size_t>(state.range(0)), 5, 1);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(stratified_folds(y, 10, seed++));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_StratifiedFolds)->Arg(1000)->Arg(100000);

void BM_KnnPredict(benchmark::State& state) {
  const auto n = state.range(0);
  const auto x = random_matrix(n, 10, 2);
  const auto y = random_labels(static_cast<std::size_t>(n), 3, 3);
  const auto model = train({Algorithm::knn, KnnParams{5}, 0}, x, y, 3);
  const auto queries = random_matrix(200, 10, 4);
  for (auto _ : state) benchmark::DoNotOptimize(predict(model, queries));
  state.SetItemsProcessed(state.iterations() * 200);
}
BENCHMARK(BM_KnnPredict)->Arg(1000)->Arg(10000);

void BM_WilcoxonExact(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<double> a(m), b(m);
  for (std::size_t i = 0; i < m; ++i) {
    a[i] = rng.uniform();
    b[i] = rng.uniform();
  }
  for (auto _ : state) benchmark::DoNotOptimize(wilcoxon_signed_rank(a, b, WilcoxonMethod::exact));
}
BENCHMARK(BM_WilcoxonExact)->Arg(10)->Arg(25)->Arg(50);

void BM_FitPca(benchmark::State& state) {
  const auto x = random_matrix(2000, state.range(0), 6);
  for (auto _ : state) benchmark::DoNotOptimize(fit_pca(x, 2));
}
BENCHMARK(BM_FitPca)->Arg(8)->Arg(64);

}  // namespace
BENCHMARK_MAIN();
