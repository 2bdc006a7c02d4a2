#include <benchmark/benchmark.h>

#include "hte/causal_forest.hpp"
#include "hte/dgp.hpp"
#include "hte/learners.hpp"

namespace {

hte::Generated make_data(std::size_t n) {
  return hte::gen_linear_family(hte::builtin_linear_scenario("slightly-nl-p10"), n, 99);
}

void BM_RegressionTree(benchmark::State& state) {
  const auto gen = make_data(static_cast<std::size_t>(state.range(0)));
  const hte::RegressionTreeRegressor tree(30, 5);
  for (auto _ : state)
    benchmark::DoNotOptimize(tree.fit(gen.trial.covariates, gen.trial.outcome, nullptr));
}
BENCHMARK(BM_RegressionTree)->Arg(500)->Arg(2000);

void BM_RandomForest(benchmark::State& state) {
  const auto gen = make_data(500);
  hte::ForestParams params;
  params.n_trees = static_cast<int>(state.range(0));
  params.seed = 5;
  const hte::RandomForestRegressor forest(params);
  for (auto _ : state)
    benchmark::DoNotOptimize(forest.fit(gen.trial.covariates, gen.trial.outcome, nullptr));
}
BENCHMARK(BM_RandomForest)->Arg(100)->Arg(500);

void BM_CausalForest(benchmark::State& state) {
  const auto gen = make_data(500);
  hte::CausalForestParams params;
  params.n_trees = static_cast<int>(state.range(0));
  params.seed = 6;
  for (auto _ : state) benchmark::DoNotOptimize(hte::fit_causal_forest(gen.trial, params));
}
BENCHMARK(BM_CausalForest)->Arg(100)->Arg(500);

void BM_Boosting(benchmark::State& state) {
  const auto gen = make_data(500);
  hte::BoostingParams params;
  params.n_rounds = static_cast<int>(state.range(0));
  params.seed = 7;
  const hte::GradientBoostingRegressor boost(params);
  for (auto _ : state)
    benchmark::DoNotOptimize(boost.fit(gen.trial.covariates, gen.trial.outcome, nullptr));
}
BENCHMARK(BM_Boosting)->Arg(50)->Arg(200);

}  // namespace
