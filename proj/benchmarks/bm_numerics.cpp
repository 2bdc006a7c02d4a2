#include <benchmark/benchmark.h>

#include "hte/numerics.hpp"
#include "hte/random.hpp"

namespace {

hte::Vector random_vector(std::size_t n, std::uint64_t seed) {
  hte::Rng rng(seed);
  hte::Vector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
  return v;
}

void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const hte::Vector u = random_vector(n, 1);
  const hte::Vector v = random_vector(n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(hte::kendall_tau(u, v));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(256, 16384)->Complexity();

void BM_ElasticNet(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  hte::Rng rng(3);
  hte::Matrix X(static_cast<Eigen::Index>(n), 20);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
  const hte::Vector beta = random_vector(20, 4);
  const hte::Vector y = X * beta + 0.5 * random_vector(n, 5);
  const hte::DesignMatrix Xd(X);
  for (auto _ : state) benchmark::DoNotOptimize(hte::fit_elastic_net(Xd, y, 0.05, 0.05));
}
BENCHMARK(BM_ElasticNet)->Arg(250)->Arg(1000);

void BM_Nnls(benchmark::State& state) {
  hte::Rng rng(6);
  hte::Matrix X(64, 8);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = rng.normal();
  const hte::Vector y = random_vector(64, 7);
  const hte::DesignMatrix Xd(X);
  for (auto _ : state) benchmark::DoNotOptimize(hte::fit_nnls(Xd, y));
}
BENCHMARK(BM_Nnls);

}  // namespace

BENCHMARK_MAIN();
